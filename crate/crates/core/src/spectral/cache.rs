//! On-disk spectrum cache.
//!
//! File layout (all integers and floats little-endian):
//!
//! ```text
//! magic   8 bytes  "WEYLSPEC"
//! version u32
//! hash    32 bytes SHA-256 of the canonical JSON of (problem, potential)
//! n       u64
//! eigenvalues      n × f64
//! coefficients     n × n × (re f64, im f64), column-major
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{solve, Discretization, Spectrum};
use crate::error::{Result, WeylError};
use crate::kato::RadialKatoPotential;

const MAGIC: &[u8; 8] = b"WEYLSPEC";
const VERSION: u32 = 1;

#[derive(Serialize)]
struct Key<'a> {
    version: u32,
    problem: &'a Discretization,
    potential: Option<&'a RadialKatoPotential>,
}

/// Content hash identifying a spectral problem.
pub fn content_hash(problem: &Discretization, potential: Option<&RadialKatoPotential>) -> [u8; 32] {
    let potential = potential.filter(|v| v.gamma != 0.0);
    let json = serde_json::to_vec(&Key {
        version: VERSION,
        problem,
        potential,
    })
    .expect("key serialises");
    Sha256::digest(&json).into()
}

pub fn hex(hash: &[u8; 32]) -> String {
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the eigenvalue array, for comparing spectra across runs.
pub fn spectrum_digest(s: &Spectrum) -> String {
    let mut h = Sha256::new();
    for v in &s.eigenvalues {
        h.update(v.to_le_bytes());
    }
    hex(&h.finalize().into())
}

pub fn write(path: &Path, hash: &[u8; 32], s: &Spectrum) -> Result<()> {
    let n = s.dim();
    let mut buf = Vec::with_capacity(52 + 8 * n + 16 * n * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(hash);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for v in &s.eigenvalues {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for j in 0..n {
        for i in 0..n {
            let c = s.vectors[(i, j)];
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a cached spectrum; `Ok(None)` when the file is absent.
pub fn read(path: &Path, hash: &[u8; 32], problem: &Discretization) -> Result<Option<Spectrum>> {
    let mut f = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    let bad = |m: &str| WeylError::Cache(format!("{}: {m}", path.display()));
    if buf.len() < 52 || &buf[..8] != MAGIC {
        return Err(bad("not a spectrum cache file"));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bad("unsupported cache version"));
    }
    if &buf[12..44] != hash {
        return Err(bad("content hash mismatch"));
    }
    let n = u64::from_le_bytes(buf[44..52].try_into().unwrap()) as usize;
    let modes = problem.modes();
    if modes.len() != n || buf.len() != 52 + 8 * n + 16 * n * n {
        return Err(bad("size mismatch"));
    }
    let f64_at = |off: usize| f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
    let eigenvalues: Vec<f64> = (0..n).map(|k| f64_at(52 + 8 * k)).collect();
    let base = 52 + 8 * n;
    let vectors = Mat::<Complex64>::from_fn(n, n, |i, j| {
        let off = base + 16 * (j * n + i);
        Complex64::new(f64_at(off), f64_at(off + 8))
    });
    Ok(Some(Spectrum {
        problem: *problem,
        modes,
        eigenvalues,
        vectors,
        t_trust: problem.lambda_basis() / 4.0,
    }))
}

/// Cache directory: `$WEYL_CACHE_DIR` if set, else `fallback`.
pub fn cache_dir(fallback: &Path) -> PathBuf {
    std::env::var_os("WEYL_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| fallback.to_path_buf())
}

/// Returns the cached spectrum for this problem, computing and storing it
/// on a miss. The flag reports whether the cache was hit.
pub fn load_or_solve(
    dir: &Path,
    problem: &Discretization,
    potential: Option<&RadialKatoPotential>,
) -> Result<(Spectrum, bool)> {
    let hash = content_hash(problem, potential);
    let path = dir.join(format!("{}.spec", hex(&hash)));
    if let Some(s) = read(&path, &hash, problem)? {
        return Ok((s, true));
    }
    let s = solve(problem, potential)?;
    write(&path, &hash, &s)?;
    Ok((s, false))
}
