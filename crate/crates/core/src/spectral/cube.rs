use std::collections::HashMap;
use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_budget, Discretization, HermitianOperator};
use crate::error::{domain, Result};
use crate::kato::RadialKatoPotential;

/// Dirichlet cube `(0, a)³` with sine modes `1 ≤ mᵢ ≤ m_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeSpec {
    pub a: f64,
    pub m_max: u32,
}

impl CubeSpec {
    pub fn new(a: f64, m_max: u32) -> Result<Self> {
        if !(a > 0.0) || m_max < 1 {
            return domain(format!("need a > 0 and m_max >= 1, got {a}, {m_max}"));
        }
        Ok(Self { a, m_max })
    }

    /// Energy of the lowest sine mode left out, `π²((m_max+1)² + 2)/a²`.
    pub fn lambda_basis(&self) -> f64 {
        let m = self.m_max as f64 + 1.0;
        PI * PI * (m * m + 2.0) / (self.a * self.a)
    }
}

pub fn cube_modes(spec: &CubeSpec) -> Vec<[i32; 3]> {
    let m = spec.m_max as i32;
    let mut modes = Vec::with_capacity((m * m * m) as usize);
    for i in 1..=m {
        for j in 1..=m {
            for k in 1..=m {
                modes.push([i, j, k]);
            }
        }
    }
    modes.sort_by_key(|m| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2], *m));
    modes
}

/// `H[m,m'] = π²|m|²/a² δ + ⟨m|V|m'⟩`.
///
/// With `sin A sin B = ½[cos(A−B) − cos(A+B)]` on each axis the matrix
/// element becomes a signed sum of eight cosine moments
///
/// ```text
/// C(k) = ∫ V(x) ∏ cos(πkᵢxᵢ/a) dx = γ F(π|k|/a) ∏ cos(πkᵢcᵢ/a)
/// ```
///
/// where `F` is the radial transform of `V/γ` and `c` its centre; this needs
/// the support of V inside the cube.
pub fn build_cube_hamiltonian(
    spec: &CubeSpec,
    v: Option<&RadialKatoPotential>,
    budget: u64,
) -> Result<HermitianOperator> {
    let modes = cube_modes(spec);
    let n = modes.len();
    check_budget(n, budget)?;
    let k = PI / spec.a;
    let mut matrix = Mat::<Complex64>::zeros(n, n);
    for (i, m) in modes.iter().enumerate() {
        let m2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        matrix[(i, i)] = Complex64::new(k * k * m2, 0.0);
    }
    let Some(v) = v.filter(|v| v.gamma != 0.0) else {
        return Ok(HermitianOperator {
            problem: Discretization::Cube(*spec),
            modes,
            matrix,
        });
    };
    v.validate()?;
    for &c in &v.center {
        if c - v.r_cut <= 0.0 || c + v.r_cut >= spec.a {
            return domain("potential support must lie inside the cube");
        }
    }
    let kmax = 2 * spec.m_max as i32;
    let mut radial: HashMap<i32, f64> = HashMap::new();
    for a in 0..=kmax {
        for b in 0..=kmax {
            for c in 0..=kmax {
                let d2 = a * a + b * b + c * c;
                if let std::collections::hash_map::Entry::Vacant(e) = radial.entry(d2) {
                    e.insert(v.gamma * v.radial_transform(k * (d2 as f64).sqrt())?);
                }
            }
        }
    }
    let cosines: Vec<[f64; 3]> = (0..=kmax)
        .map(|d| [0, 1, 2].map(|ax| (k * d as f64 * v.center[ax]).cos()))
        .collect();
    let moment = |kv: [i32; 3]| -> f64 {
        let d2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        radial[&d2] * (0..3).map(|ax| cosines[kv[ax].unsigned_abs() as usize][ax]).product::<f64>()
    };
    let pref = 1.0 / spec.a.powi(3);
    for j in 0..n {
        for i in j..n {
            let (m, mp) = (modes[i], modes[j]);
            let mut acc = 0.0;
            for signs in 0..8u32 {
                let mut kv = [0; 3];
                let mut sign = 1.0;
                for ax in 0..3 {
                    if signs >> ax & 1 == 0 {
                        kv[ax] = m[ax] - mp[ax];
                    } else {
                        kv[ax] = m[ax] + mp[ax];
                        sign = -sign;
                    }
                }
                acc += sign * moment(kv);
            }
            let val = pref * acc;
            matrix[(i, j)] += Complex64::new(val, 0.0);
            if i != j {
                matrix[(j, i)] += Complex64::new(val, 0.0);
            }
        }
    }
    Ok(HermitianOperator {
        problem: Discretization::Cube(*spec),
        modes,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use crate::spectral::eigensolve;
    use approx::assert_relative_eq;

    #[test]
    fn free_counting_by_enumeration() {
        let spec = CubeSpec::new(1.0, 6).unwrap();
        let s = eigensolve(&build_cube_hamiltonian(&spec, None, u64::MAX).unwrap()).unwrap();
        let mut brute = 0;
        for i in 1..20 {
            for j in 1..20 {
                for k in 1..20 {
                    if PI * PI * ((i * i + j * j + k * k) as f64) <= 100.0 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(brute, 7);
        assert_eq!(s.counting(100.0).unwrap(), 7);
    }

    #[test]
    fn matrix_element_against_direct_quadrature() {
        // Matrix element by 1-D radial quadrature of the angular average of
        // the mode product, done on a sphere around the centre. The centre
        // avoids reflection planes, which would force the element to zero.
        let spec = CubeSpec::new(1.0, 3).unwrap();
        let v = RadialKatoPotential::new(1.0, 0.5, [0.46, 0.41, 0.57], 0.3).unwrap();
        let h = build_cube_hamiltonian(&spec, Some(&v), u64::MAX).unwrap();
        let (m, mp) = ([1, 2, 3], [2, 2, 1]);
        let i = h.modes.iter().position(|x| *x == m).unwrap();
        let j = h.modes.iter().position(|x| *x == mp).unwrap();
        let mode = |mm: [i32; 3], x: [f64; 3]| {
            8.0f64.sqrt() * (0..3).map(|a| (PI * mm[a] as f64 * x[a]).sin()).product::<f64>()
        };
        // Fibonacci sphere average, accurate enough for smooth integrands.
        let npts = 4000;
        let golden = PI * (3.0 - 5f64.sqrt());
        let f = |r: f64| {
            let mut acc = 0.0;
            for p in 0..npts {
                let z = 1.0 - 2.0 * (p as f64 + 0.5) / npts as f64;
                let rho = (1.0 - z * z).sqrt();
                let th = golden * p as f64;
                let x = [v.center[0] + r * rho * th.cos(), v.center[1] + r * rho * th.sin(), v.center[2] + r * z];
                acc += mode(m, x) * mode(mp, x);
            }
            4.0 * PI * acc / npts as f64 * v.cutoff(r) * r.powf(v.eta)
        };
        let direct = quad::integrate(f, 0.0, 0.15, 1e-9).unwrap() + quad::integrate(f, 0.15, 0.3, 1e-9).unwrap();
        assert_relative_eq!(h.matrix[(i, j)].re, direct, max_relative = 1e-5);
    }

    #[test]
    fn axis_permutation_symmetry() {
        let spec = CubeSpec::new(1.0, 4).unwrap();
        let v = RadialKatoPotential::new(1.0, 0.5, [0.5; 3], 0.3).unwrap();
        let h = build_cube_hamiltonian(&spec, Some(&v), u64::MAX).unwrap();
        let pos = |m: [i32; 3]| h.modes.iter().position(|x| *x == m).unwrap();
        let a = h.matrix[(pos([1, 2, 3]), pos([3, 1, 1]))];
        let b = h.matrix[(pos([2, 3, 1]), pos([1, 1, 3]))];
        assert_relative_eq!(a.re, b.re, max_relative = 1e-13);
    }
}
