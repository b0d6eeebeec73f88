use std::collections::HashMap;
use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_budget, Discretization, HermitianOperator};
use crate::error::{domain, Result};
use crate::kato::{Geometry, RadialKatoPotential};

/// Flat torus of side `l` with a spherical plane-wave cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub l: f64,
    pub lambda_basis: f64,
}

impl TorusSpec {
    pub fn new(l: f64, lambda_basis: f64) -> Result<Self> {
        if !(l > 0.0 && lambda_basis > 0.0) {
            return domain(format!("need L > 0 and lambda_basis > 0, got {l}, {lambda_basis}"));
        }
        Ok(Self { l, lambda_basis })
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::Torus { l: self.l }
    }
}

/// Integer vectors with `|2πm/L|² ≤ lambda_basis`, ordered by `|m|²` and
/// then lexicographically.
pub fn torus_modes(spec: &TorusSpec) -> Vec<[i32; 3]> {
    let k2 = (2.0 * PI / spec.l).powi(2);
    let max_m2 = spec.lambda_basis / k2;
    let r = max_m2.sqrt().floor() as i32;
    let mut modes = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            for k in -r..=r {
                let m2 = (i * i + j * j + k * k) as f64;
                if m2 * k2 <= spec.lambda_basis {
                    modes.push([i, j, k]);
                }
            }
        }
    }
    modes.sort_by_key(|m| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2], *m));
    modes
}

/// `H[m,m'] = |2πm/L|² δ + V̂(m − m')`.
pub fn build_torus_hamiltonian(
    spec: &TorusSpec,
    v: Option<&RadialKatoPotential>,
    budget: u64,
) -> Result<HermitianOperator> {
    let modes = torus_modes(spec);
    let n = modes.len();
    check_budget(n, budget)?;
    let k = 2.0 * PI / spec.l;
    let mut matrix = Mat::<Complex64>::zeros(n, n);
    for (i, m) in modes.iter().enumerate() {
        let m2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        matrix[(i, i)] = Complex64::new(k * k * m2, 0.0);
    }
    let Some(v) = v.filter(|v| v.gamma != 0.0) else {
        return Ok(HermitianOperator {
            problem: Discretization::Torus(*spec),
            modes,
            matrix,
        });
    };
    v.validate()?;
    v.check_geometry(&spec.geometry())?;

    // V̂(Δm) = (γ/L³) e^{−iq·x₀} F(|q|): F depends only on |Δm|², the phase
    // factorises over axes.
    let span = modes.iter().flatten().map(|c| c.abs()).max().unwrap_or(0) * 2;
    let mut radial: HashMap<i32, f64> = HashMap::new();
    for a in -span..=span {
        for b in -span..=span {
            for c in -span..=span {
                let d2 = a * a + b * b + c * c;
                if let std::collections::hash_map::Entry::Vacant(e) = radial.entry(d2) {
                    let p = k * (d2 as f64).sqrt();
                    e.insert(v.gamma * v.radial_transform(p)? / spec.l.powi(3));
                }
            }
        }
    }
    let phase: Vec<[Complex64; 3]> = (-span..=span)
        .map(|d| {
            [0, 1, 2].map(|ax| {
                let arg = -k * d as f64 * v.center[ax];
                // Exact ±1 on the half lattice keeps centred problems real.
                let c = snap(arg.cos());
                let s = snap(arg.sin());
                Complex64::new(c, s)
            })
        })
        .collect();
    let idx = |d: i32| (d + span) as usize;
    for j in 0..n {
        for i in 0..n {
            let d = [0, 1, 2].map(|ax| modes[i][ax] - modes[j][ax]);
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let ph = phase[idx(d[0])][0] * phase[idx(d[1])][1] * phase[idx(d[2])][2];
            matrix[(i, j)] += ph * radial[&d2];
        }
    }
    Ok(HermitianOperator {
        problem: Discretization::Torus(*spec),
        modes,
        matrix,
    })
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}
