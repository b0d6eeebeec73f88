//! Galerkin discretisations of `−Δ + V` and what we read off their spectra.
//!
//! Torus: plane waves `e^{iq·x}/L^{3/2}`, `q = 2πm/L`, `|q|² ≤ lambda_basis`.
//! Cube: Dirichlet sine modes `(2/a)^{3/2} ∏ sin(πmᵢxᵢ/a)`, `1 ≤ mᵢ ≤ m_max`.
//!
//! The spectral projection diagonal is
//!
//! ```text
//! e(t,x) = Σ_{λₙ≤t} |φₙ(x)|²,   (H+λ)⁻²(x,x) = Σₙ |φₙ(x)|² / (λₙ+λ)²
//! ```
//!
//! Eigenvalues are trusted up to `t_trust = lambda_basis/4`.

pub mod cache;
mod cube;
mod torus;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WeylError};
use crate::kato::{Point, RadialKatoPotential};

pub use cube::{build_cube_hamiltonian, cube_modes, CubeSpec};
pub use torus::{build_torus_hamiltonian, torus_modes, TorusSpec};

/// Memory ceiling for dense assembly and diagonalisation.
pub const DEFAULT_MEMORY_BUDGET: u64 = 6 << 30;

/// A discretisation problem; also the cache key together with the potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Discretization {
    Torus(TorusSpec),
    Cube(CubeSpec),
}

impl Discretization {
    pub fn modes(&self) -> Vec<[i32; 3]> {
        match self {
            Discretization::Torus(s) => torus_modes(s),
            Discretization::Cube(s) => cube_modes(s),
        }
    }

    /// Every eigenvalue of the free operator below this value has its mode
    /// in the basis.
    pub fn lambda_basis(&self) -> f64 {
        match self {
            Discretization::Torus(s) => s.lambda_basis,
            Discretization::Cube(s) => s.lambda_basis(),
        }
    }

    /// Volume of the domain.
    pub fn volume(&self) -> f64 {
        match self {
            Discretization::Torus(s) => s.l.powi(3),
            Discretization::Cube(s) => s.a.powi(3),
        }
    }

    /// Values of all basis functions at `x`.
    pub fn basis_values(&self, modes: &[[i32; 3]], x: &Point) -> Vec<Complex64> {
        match self {
            Discretization::Torus(s) => {
                let norm = s.l.powf(-1.5);
                let k = 2.0 * PI / s.l;
                modes
                    .iter()
                    .map(|m| {
                        let ph = k * (m[0] as f64 * x[0] + m[1] as f64 * x[1] + m[2] as f64 * x[2]);
                        Complex64::from_polar(norm, ph)
                    })
                    .collect()
            }
            Discretization::Cube(s) => {
                let norm = (2.0 / s.a).powf(1.5);
                let k = PI / s.a;
                modes
                    .iter()
                    .map(|m| {
                        let v = (0..3).map(|i| (k * m[i] as f64 * x[i]).sin()).product::<f64>();
                        Complex64::new(norm * v, 0.0)
                    })
                    .collect()
            }
        }
    }

    /// Free eigenvalues in `(lambda_basis, far]` whose modes lie outside the
    /// basis, aggregated by eigenvalue, with their total weight at `x`.
    pub fn free_modes_outside(&self, far: f64, x: &Point) -> Vec<(f64, f64)> {
        let mut shells: BTreeMap<i64, f64> = BTreeMap::new();
        match self {
            Discretization::Torus(s) => {
                let k2 = (2.0 * PI / s.l).powi(2);
                let (lo, hi) = (s.lambda_basis / k2, far / k2);
                let r = hi.sqrt().floor() as i64;
                let w = 1.0 / s.l.powi(3);
                for i in -r..=r {
                    for j in -r..=r {
                        let ij = i * i + j * j;
                        if ij as f64 > hi {
                            continue;
                        }
                        let kmax = ((hi - ij as f64).sqrt()).floor() as i64;
                        for k in -kmax..=kmax {
                            let n = ij + k * k;
                            if n as f64 > lo {
                                *shells.entry(n).or_insert(0.0) += w;
                            }
                        }
                    }
                }
                shells.into_iter().map(|(n, w)| (n as f64 * k2, w)).collect()
            }
            Discretization::Cube(s) => {
                let k = PI / s.a;
                let hi = far / (k * k);
                let r = hi.sqrt().floor() as i64;
                let m_max = s.m_max as i64;
                let norm = (2.0 / s.a).powi(3);
                let axis: Vec<Vec<f64>> = (0..3)
                    .map(|ax| (0..=r).map(|m| (k * m as f64 * x[ax]).sin().powi(2)).collect())
                    .collect();
                for i in 1..=r {
                    for j in 1..=r {
                        let ij = i * i + j * j;
                        if ij as f64 > hi {
                            continue;
                        }
                        let kmax = ((hi - ij as f64).sqrt()).floor() as i64;
                        for kk in 1..=kmax {
                            if i <= m_max && j <= m_max && kk <= m_max {
                                continue;
                            }
                            let w = norm * axis[0][i as usize] * axis[1][j as usize] * axis[2][kk as usize];
                            *shells.entry(ij + kk * kk).or_insert(0.0) += w;
                        }
                    }
                }
                shells.into_iter().map(|(n, w)| (n as f64 * k * k, w)).collect()
            }
        }
    }

    pub fn build(&self, v: Option<&RadialKatoPotential>) -> Result<HermitianOperator> {
        match self {
            Discretization::Torus(s) => build_torus_hamiltonian(s, v, DEFAULT_MEMORY_BUDGET),
            Discretization::Cube(s) => build_cube_hamiltonian(s, v, DEFAULT_MEMORY_BUDGET),
        }
    }
}

fn check_budget(n: usize, budget: u64) -> Result<()> {
    // Matrix, eigenvectors and solver workspace, all complex.
    let required = 3 * 16 * (n as u64) * (n as u64);
    if required > budget {
        return Err(WeylError::Resource {
            basis: n,
            required_bytes: required,
            budget_bytes: budget,
        });
    }
    Ok(())
}

/// Dense Hermitian matrix in a labelled basis.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    pub problem: Discretization,
    pub modes: Vec<[i32; 3]>,
    pub matrix: Mat<Complex64>,
}

impl HermitianOperator {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Largest `|H − H†|` entry relative to the largest entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let a = self.matrix[(i, j)];
                scale = scale.max(a.norm());
                worst = worst.max((a - self.matrix[(j, i)].conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    fn is_real(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.matrix[(i, j)].im == 0.0))
    }
}

/// Sorted eigenvalues and eigenvectors of a discretised operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub problem: Discretization,
    pub modes: Vec<[i32; 3]>,
    pub eigenvalues: Vec<f64>,
    /// Column `n` holds the coefficients of the `n`-th eigenfunction.
    pub vectors: Mat<Complex64>,
    pub t_trust: f64,
}

/// Full dense eigendecomposition. Real matrices take the real solver.
pub fn eigensolve(h: &HermitianOperator) -> Result<Spectrum> {
    let n = h.dim();
    let (eigenvalues, vectors) = if h.is_real() {
        let a = Mat::<f64>::from_fn(n, n, |i, j| h.matrix[(i, j)].re);
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| WeylError::Eigen(format!("{e:?} (n = {n})")))?;
        let s = evd.S();
        let u = evd.U();
        let vals: Vec<f64> = (0..n).map(|k| s[k]).collect();
        (vals, Mat::<Complex64>::from_fn(n, n, |i, j| Complex64::new(u[(i, j)], 0.0)))
    } else {
        let evd = h
            .matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| WeylError::Eigen(format!("{e:?} (n = {n})")))?;
        let s = evd.S();
        let vals: Vec<f64> = (0..n).map(|k| s[k].re).collect();
        (vals, evd.U().to_owned())
    };
    Ok(Spectrum {
        problem: h.problem,
        modes: h.modes.clone(),
        eigenvalues,
        vectors,
        t_trust: h.problem.lambda_basis() / 4.0,
    })
}

/// `|φₙ(x)|²` for every eigenfunction, with `e(t,x)` as a running sum.
#[derive(Clone, Debug)]
pub struct PointDensity {
    pub x: Point,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PointDensity {
    /// `Σₙ |φₙ(x)|²` over the whole basis.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `Σ_{λₙ≤t} |φₙ(x)|²` without the trust check.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.eigenvalues.partition_point(|&l| l <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_basis(&self) -> f64 {
        self.problem.lambda_basis()
    }

    fn trusted(&self, t: f64) -> Result<()> {
        if t > self.t_trust {
            return Err(WeylError::Trust {
                t,
                t_trust: self.t_trust,
            });
        }
        Ok(())
    }

    /// `#{n : λₙ ≤ t}`.
    pub fn counting(&self, t: f64) -> Result<usize> {
        self.trusted(t)?;
        Ok(self.eigenvalues.partition_point(|&l| l <= t))
    }

    pub fn point_density(&self, x: &Point) -> PointDensity {
        let b = self.problem.basis_values(&self.modes, x);
        let n = self.dim();
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            let col = self.vectors.col(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += col[i] * b[i];
            }
            weights.push(acc.norm_sqr());
        }
        let cumulative = weights
            .iter()
            .scan(0.0, |s, &w| {
                *s += w;
                Some(*s)
            })
            .collect();
        PointDensity {
            x: *x,
            eigenvalues: self.eigenvalues.clone(),
            weights,
            cumulative,
        }
    }

    /// `e(t,x) = Σ_{λₙ≤t} |φₙ(x)|²`.
    pub fn pointwise_density(&self, t: f64, x: &Point) -> Result<f64> {
        self.trusted(t)?;
        Ok(self.point_density(x).at(t))
    }

    /// `Σₙ |φₙ(x)|²/(λₙ+λ)²`. With `tail`, eigenvalues above the basis cutoff
    /// Λ are replaced by the free continuation of `e(t,x)`, see
    /// [`Continuation`].
    pub fn resolvent2_diag(&self, lambda: f64, x: &Point, tail: bool) -> Result<f64> {
        self.resolvent2_from(&self.point_density(x), lambda, tail)
    }

    pub fn resolvent2_from(&self, pd: &PointDensity, lambda: f64, tail: bool) -> Result<f64> {
        if tail {
            let c = self.continuation(pd);
            return self.resolvent2_continued(pd, &c, lambda);
        }
        self.check_pole(lambda)?;
        Ok(pd
            .eigenvalues
            .iter()
            .zip(&pd.weights)
            .map(|(&l, &w)| w / ((l + lambda) * (l + lambda)))
            .sum())
    }

    /// Resolvent-squared diagonal with a precomputed continuation.
    pub fn resolvent2_continued(&self, pd: &PointDensity, c: &Continuation, lambda: f64) -> Result<f64> {
        self.check_pole(lambda)?;
        let cut = c.lambda_basis;
        let inside: f64 = pd
            .eigenvalues
            .iter()
            .zip(&pd.weights)
            .filter(|(&l, _)| l <= cut)
            .map(|(&l, &w)| w / ((l + lambda) * (l + lambda)))
            .sum();
        Ok(inside + c.resolvent2(lambda)?)
    }

    fn check_pole(&self, lambda: f64) -> Result<()> {
        let bottom = self.eigenvalues[0];
        if lambda <= -bottom {
            return Err(WeylError::Pole {
                lambda,
                bottom: -bottom,
            });
        }
        Ok(())
    }

    /// The continuation of `e(t,x)` beyond the basis cutoff.
    pub fn continuation(&self, pd: &PointDensity) -> Continuation {
        let cut = self.lambda_basis();
        let far = CONTINUATION_REACH * cut;
        let mut atoms = vec![(cut, pd.total() - pd.at(cut))];
        atoms.extend(self.problem.free_modes_outside(far, &pd.x));
        let reached = pd.total() + atoms[1..].iter().map(|a| a.1).sum::<f64>();
        atoms.push((far, weyl_pointwise(far) - reached));
        Continuation {
            lambda_basis: cut,
            far,
            atoms,
        }
    }

    /// `max |C†C − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `[e((√t+√T)²,x) − e(t,x)] / (t√T + t + T^{3/2} + 1)`.
    pub fn cluster_ratio(&self, pd: &PointDensity, t: f64, big_t: f64) -> Result<f64> {
        let upper = (t.sqrt() + big_t.sqrt()).powi(2);
        self.trusted(upper)?;
        let num = pd.at(upper) - pd.at(t);
        Ok(num / (t * big_t.sqrt() + t + big_t.powf(1.5) + 1.0))
    }
}

/// How far past the basis cutoff the free modes are enumerated.
pub const CONTINUATION_REACH: f64 = 64.0;

/// `e(t,x)` beyond the basis cutoff Λ: Galerkin eigenvalues above Λ are
/// moved to Λ, the free modes outside the basis follow up to `far`, and from
/// `far` on the density is the Weyl term `t^{3/2}/(6π²)` (the last atom
/// brings `e` to that value).
#[derive(Clone, Debug)]
pub struct Continuation {
    pub lambda_basis: f64,
    pub far: f64,
    /// `(t, weight)`, nondecreasing in `t`.
    pub atoms: Vec<(f64, f64)>,
}

impl Continuation {
    /// `Σ w/(t+λ)² + ∫_far^∞ (√t/4π²)(t+λ)⁻² dt`.
    pub fn resolvent2(&self, lambda: f64) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|&(t, w)| w / ((t + lambda) * (t + lambda))).sum();
        Ok(atoms + free_resolvent2_tail(self.far, lambda)?)
    }
}

/// Free pointwise Weyl term `t^{3/2}/(6π²)`.
pub fn weyl_pointwise(t: f64) -> f64 {
    t.max(0.0).powf(1.5) / (6.0 * PI * PI)
}

/// `∫_Λ^∞ (√t/4π²)(t+λ)⁻² dt`, written with `u = √t = √Λ/s` as
/// `(1/2π²) ∫₀¹ U³/(U²+λs²)² ds`.
pub fn free_resolvent2_tail(lambda_basis: f64, lambda: f64) -> Result<f64> {
    if lambda_basis + lambda <= 0.0 {
        return Err(WeylError::Pole {
            lambda,
            bottom: lambda_basis,
        });
    }
    let u = lambda_basis.sqrt();
    let f = |s: f64| {
        let d = u * u + lambda * s * s;
        u * u * u / (d * d)
    };
    let v = crate::quad::integrate(f, 0.0, 1.0, 1e-15 / u)?;
    Ok(v / (2.0 * PI * PI))
}

/// Builds and diagonalises in one go.
pub fn solve(problem: &Discretization, v: Option<&RadialKatoPotential>) -> Result<Spectrum> {
    eigensolve(&problem.build(v)?)
}
