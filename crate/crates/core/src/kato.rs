//! Radial Kato-class potentials and the norms used to control them.
//!
//! ```text
//! V(x)        = γ χ(d(x,x₀)/r_cut) d(x,x₀)^{η−2}
//! ‖V‖_{K(r)}  = sup_x ∫_{d(x,y)<r} |V(y)| / d(x,y) dy
//! ```
//!
//! On the torus `d` is the minimum-image distance. All radial integrals are
//! reduced to one dimension, so the only numerical work is 1-D quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quad;

pub type Point = [f64; 3];

/// Where distances are measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    /// Flat torus `(ℝ/Lℤ)³`.
    Torus { l: f64 },
    /// Plain ℝ³ (used for the Dirichlet cube, whose potentials stay inside).
    Euclidean,
}

impl Geometry {
    /// Shortest displacement vector from `a` to `b`.
    pub fn displacement(&self, a: &Point, b: &Point) -> Point {
        let mut d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        if let Geometry::Torus { l } = *self {
            for c in &mut d {
                *c -= l * (*c / l).round();
            }
        }
        d
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        let d = self.displacement(a, b);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Maps a point back into the fundamental cell `[0, L)³` on the torus.
    pub fn wrap(&self, p: Point) -> Point {
        match *self {
            Geometry::Torus { l } => p.map(|c| c.rem_euclid(l)),
            Geometry::Euclidean => p,
        }
    }
}

/// Shape of the cutoff χ on `[0, ∞)`, with support `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffProfile {
    /// 1 on `[0, 1/2]`, 0 on `[1, ∞)`, quintic smoothstep in between (C²).
    #[default]
    Smoothstep,
    /// Indicator of `[0, 1]`; used for closed-form checks.
    Indicator,
}

impl CutoffProfile {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            CutoffProfile::Indicator => {
                if s < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffProfile::Smoothstep => {
                if s <= 0.5 {
                    1.0
                } else if s >= 1.0 {
                    0.0
                } else {
                    let u = 2.0 * (s - 0.5);
                    1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
                }
            }
        }
    }

    /// Largest `s` with `χ ≡ 1` on `[0, s]`.
    pub fn flat_until(&self) -> f64 {
        match self {
            CutoffProfile::Indicator => 1.0,
            CutoffProfile::Smoothstep => 0.5,
        }
    }
}

/// `γ χ(d/r_cut) d^{η−2}` centred at `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialKatoPotential {
    pub gamma: f64,
    pub eta: f64,
    pub center: Point,
    pub r_cut: f64,
    #[serde(default)]
    pub profile: CutoffProfile,
}

impl RadialKatoPotential {
    pub fn new(gamma: f64, eta: f64, center: Point, r_cut: f64) -> Result<Self> {
        let v = Self {
            gamma,
            eta,
            center,
            r_cut,
            profile: CutoffProfile::Smoothstep,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn with_profile(mut self, profile: CutoffProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return domain(format!("eta must lie in (0,1), got {}", self.eta));
        }
        if !(self.r_cut > 0.0) {
            return domain(format!("r_cut must be positive, got {}", self.r_cut));
        }
        if !self.gamma.is_finite() || self.center.iter().any(|c| !c.is_finite()) {
            return domain("gamma and center must be finite");
        }
        Ok(())
    }

    /// Checks that the support fits in one fundamental cell of the geometry.
    pub fn check_geometry(&self, geom: &Geometry) -> Result<()> {
        if let Geometry::Torus { l } = *geom {
            if self.r_cut >= 0.5 * l {
                return domain(format!("r_cut = {} must be below L/2 = {}", self.r_cut, 0.5 * l));
            }
        }
        Ok(())
    }

    pub fn cutoff(&self, d: f64) -> f64 {
        self.profile.eval(d / self.r_cut)
    }

    /// V as a function of the distance to the centre; infinite at `d = 0`
    /// unless `γ = 0`.
    pub fn at_distance(&self, d: f64) -> f64 {
        if self.gamma == 0.0 || d >= self.r_cut {
            return 0.0;
        }
        self.gamma * self.cutoff(d) * d.powf(self.eta - 2.0)
    }

    pub fn eval(&self, x: &Point, geom: &Geometry) -> Result<f64> {
        let d = geom.distance(x, &self.center);
        if d == 0.0 && self.gamma != 0.0 {
            return domain("potential is unbounded at its centre");
        }
        Ok(self.at_distance(d))
    }

    /// `∫₀^ζ χ(u/r_cut) u^{η−1} du`, the radial mass seen by the Kato integral.
    fn radial_mass(&self, zeta: f64) -> Result<f64> {
        let eta = self.eta;
        let flat = self.profile.flat_until() * self.r_cut;
        let z = zeta.min(self.r_cut);
        if z <= flat {
            return Ok(z.powf(eta) / eta);
        }
        let rest = quad::integrate(
            |u: f64| self.cutoff(u) * u.powf(eta - 1.0),
            flat,
            z,
            1e-14,
        )?;
        Ok(flat.powf(eta) / eta + rest)
    }

    /// `∫_{|y−x|<r} |V(y)|/|x−y| dy` for a probe at distance `dist` from the
    /// centre (no periodic images involved).
    pub fn kato_integral_at(&self, dist: f64, r: f64) -> Result<f64> {
        let g = self.gamma.abs();
        if g == 0.0 {
            return Ok(0.0);
        }
        let rc = self.r_cut;
        if dist < 1e-14 * rc {
            return Ok(4.0 * PI * g * self.radial_mass(r)?);
        }
        // Sphere of radius ρ around the probe: the angular average reduces to
        // (2π/(ρD)) ∫_{|ρ−D|}^{ρ+D} |V(ζ)| ζ dζ, and the 1/ρ cancels ρ² dρ / ρ.
        let inner = |rho: f64| -> f64 {
            let lo = (rho - dist).abs();
            let hi = rho + dist;
            if lo >= rc {
                return 0.0;
            }
            let m = self.radial_mass(hi).unwrap_or(f64::NAN) - self.radial_mass(lo).unwrap_or(f64::NAN);
            m
        };
        let mut knots = vec![0.0, r];
        for k in [dist, rc - dist, rc + dist, 0.5 * rc - dist, 0.5 * rc + dist, dist - 0.5 * rc, dist - rc] {
            if k > 0.0 && k < r {
                knots.push(k);
            }
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += quad::integrate(inner, w[0], w[1], 1e-13)?;
        }
        Ok(2.0 * PI * g / dist * total)
    }

    /// Closed form `4π|γ| r^η / η`, valid while χ ≡ 1 on `[0, r]`.
    pub fn kato_norm_closed(&self, r: f64) -> Result<f64> {
        if r > self.profile.flat_until() * self.r_cut {
            return domain(format!(
                "closed form needs r <= {} (cutoff varies beyond)",
                self.profile.flat_until() * self.r_cut
            ));
        }
        Ok(kato_norm_radial_closed(self.gamma, self.eta, r))
    }

    /// `4π ∫₀^{r_cut} χ(r) r^η sinc(p r) dr`, i.e. the Euclidean Fourier
    /// transform of `V/γ` at frequency `|p|`.
    pub fn radial_transform(&self, p: f64) -> Result<f64> {
        let eta = self.eta;
        let rc = self.r_cut;
        let f = |r: f64| {
            let x = p * r;
            let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            self.cutoff(r) * r.powf(eta) * sinc
        };
        let mut knots = vec![0.0];
        if p > 0.0 {
            let step = PI / p;
            let mut k = 1;
            while (k as f64) * step < rc {
                knots.push(k as f64 * step);
                k += 1;
            }
        }
        let flat = self.profile.flat_until() * rc;
        if flat < rc {
            knots.push(flat);
        }
        knots.push(rc);
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();
        let scale = rc.powf(1.0 + eta);
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += quad::integrate(f, w[0], w[1], 1e-15 * scale)?;
        }
        Ok(4.0 * PI * total)
    }

    /// `4π |γ|^q ∫_{r_min}^{r_cut} χ^q r^{2−(2−η)q} dr`; diverges as
    /// `r_min → 0` exactly when `q ≥ 3/(2−η)`.
    pub fn lq_integral_above(&self, q: f64, r_min: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return domain(format!("q must be at least 1, got {q}"));
        }
        let a = 2.0 - (2.0 - self.eta) * q;
        let f = |r: f64| self.cutoff(r).powf(q) * r.powf(a);
        let lo = r_min.max(0.0);
        let flat = (self.profile.flat_until() * self.r_cut).max(lo);
        let mut total = 0.0;
        if lo < flat {
            total += if (a + 1.0).abs() < 1e-14 {
                (flat / lo).ln()
            } else {
                (flat.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
            };
        }
        if flat < self.r_cut {
            total += quad::integrate(f, flat, self.r_cut, 1e-14)?;
        }
        Ok(4.0 * PI * self.gamma.abs().powf(q) * total)
    }
}

/// `V(x)` for a radial potential; fails at the singular centre.
pub fn eval_potential(v: &RadialKatoPotential, x: &Point, geom: &Geometry) -> Result<f64> {
    v.eval(x, geom)
}

/// `4π|γ| r^η / η`.
pub fn kato_norm_radial_closed(gamma: f64, eta: f64, r: f64) -> f64 {
    4.0 * PI * gamma.abs() * r.powf(eta) / eta
}

/// Kato norm `sup_x ∫_{d(x,y)<r} |V(y)|/d(x,y) dy` over the probe set.
/// Returns the maximum and the probe attaining it.
pub fn kato_norm(
    v: &RadialKatoPotential,
    geom: &Geometry,
    r: f64,
    probes: &[Point],
) -> Result<(f64, Point)> {
    if probes.is_empty() {
        return domain("kato_norm needs at least one probe point");
    }
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    if let Geometry::Torus { l } = *geom {
        if r + v.r_cut > 0.5 * l {
            return domain(format!(
                "r + r_cut = {} must not exceed L/2 = {} (periodic images would enter the ball)",
                r + v.r_cut,
                0.5 * l
            ));
        }
    }
    let mut best = (f64::NEG_INFINITY, probes[0]);
    for p in probes {
        let val = v.kato_integral_at(geom.distance(p, &v.center), r)?;
        if val > best.0 {
            best = (val, *p);
        }
    }
    Ok(best)
}

/// The centre followed by `n` Halton points in the cube of half-width
/// `r_cut` around it.
pub fn default_probes(v: &RadialKatoPotential, geom: &Geometry, n: usize) -> Vec<Point> {
    let mut out = vec![v.center];
    for i in 1..=n {
        let h = [halton(i, 2), halton(i, 3), halton(i, 5)];
        let p = [0, 1, 2].map(|k| v.center[k] + v.r_cut * (2.0 * h[k] - 1.0));
        out.push(geom.wrap(p));
    }
    out
}

/// Radical inverse of `i` in the given base.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Plane-wave coefficient `(1/L³) ∫ V(x) e^{−iq·x} dx`, `q = 2πm/L`.
pub fn fourier_coeff(v: &RadialKatoPotential, m: [i32; 3], l: f64) -> Result<Complex64> {
    let q = m.map(|c| 2.0 * PI * c as f64 / l);
    let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    let radial = v.radial_transform(qn)?;
    let phase = -(q[0] * v.center[0] + q[1] * v.center[1] + q[2] * v.center[2]);
    Ok(Complex64::from_polar(v.gamma * radial / l.powi(3), phase))
}

/// `(∫|V|^q)^{1/q}`.
pub fn lq_norm(v: &RadialKatoPotential, q: f64) -> Result<f64> {
    let critical = 3.0 / (2.0 - v.eta);
    if q >= critical {
        return domain(format!("V is not in L^{q}: the integral diverges for q >= {critical}"));
    }
    Ok(v.lq_integral_above(q, 0.0)?.powf(1.0 / q))
}

/// `∫_{[−1/2,1/2]³} dy/|y|`.
pub const UNIT_CELL_INVERSE_DISTANCE: f64 = 2.380_077_363_979_553_5;

/// A potential sampled at the centres of a regular grid of cubic cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPotential {
    pub dims: [usize; 3],
    /// Row-major values, index `(i·n₂ + j)·n₃ + k`.
    pub values: Vec<f64>,
    pub periodic: bool,
    /// Cell side length.
    pub cell: f64,
}

impl GridPotential {
    pub fn new(dims: [usize; 3], values: Vec<f64>, periodic: bool, cell: f64) -> Result<Self> {
        if values.len() != dims.iter().product::<usize>() {
            return domain("sample count does not match grid dimensions");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("grid potential values must be finite");
        }
        if !(cell > 0.0) {
            return domain("cell size must be positive");
        }
        Ok(Self {
            dims,
            values,
            periodic,
            cell,
        })
    }

    /// Samples a radial potential at cell centres `(i + 1/2)·cell`.
    pub fn from_radial(v: &RadialKatoPotential, geom: &Geometry, dims: [usize; 3], cell: f64) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let x = [i, j, k].map(|c| (c as f64 + 0.5) * cell);
                    values.push(v.eval(&x, geom)?);
                }
            }
        }
        Self::new(dims, values, matches!(geom, Geometry::Torus { .. }), cell)
    }

    fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    pub fn value(&self, c: [usize; 3]) -> f64 {
        self.values[self.index(c)]
    }

    /// Kato integral at the centre of cell `probe`: cell sums weighted by
    /// `h³/d`, with the probe's own cell integrated exactly.
    pub fn kato_integral_at(&self, probe: [usize; 3], r: f64) -> f64 {
        let h = self.cell;
        let reach = (r / h).ceil() as i64;
        let mut total = self.value(probe).abs() * h * h * UNIT_CELL_INVERSE_DISTANCE;
        for di in -reach..=reach {
            for dj in -reach..=reach {
                for dk in -reach..=reach {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    let d = h * ((di * di + dj * dj + dk * dk) as f64).sqrt();
                    if d >= r {
                        continue;
                    }
                    let Some(c) = self.neighbour(probe, [di, dj, dk]) else {
                        continue;
                    };
                    total += self.value(c).abs() * h * h * h / d;
                }
            }
        }
        total
    }

    fn neighbour(&self, c: [usize; 3], off: [i64; 3]) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let n = self.dims[a] as i64;
            let mut v = c[a] as i64 + off[a];
            if self.periodic {
                v = v.rem_euclid(n);
            } else if v < 0 || v >= n {
                return None;
            }
            out[a] = v as usize;
        }
        Some(out)
    }

    /// Maximum of the Kato integral over the given probe cells.
    pub fn kato_norm(&self, r: f64, probes: &[[usize; 3]]) -> Result<(f64, [usize; 3])> {
        if probes.is_empty() {
            return domain("kato_norm needs at least one probe cell");
        }
        let mut best = (f64::NEG_INFINITY, probes[0]);
        for &p in probes {
            let v = self.kato_integral_at(p, r);
            if v > best.0 {
                best = (v, p);
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pot(gamma: f64, eta: f64) -> RadialKatoPotential {
        RadialKatoPotential::new(gamma, eta, [0.5, 0.5, 0.5], 0.3).unwrap()
    }

    #[test]
    fn profile_shape() {
        let p = CutoffProfile::Smoothstep;
        assert_eq!(p.eval(0.3), 1.0);
        assert_eq!(p.eval(1.0), 0.0);
        assert_relative_eq!(p.eval(0.75), 0.5, epsilon = 1e-15);
        // C¹ and C² at the knots: one-sided difference quotients vanish.
        let h = 1e-4;
        assert!((p.eval(0.5 + h) - 1.0).abs() < 1e-10);
        assert!(p.eval(1.0 - h) < 1e-10);
    }

    #[test]
    fn eval_examples() {
        let v = RadialKatoPotential::new(1.0, 0.5, [0.0; 3], 0.4).unwrap();
        let g = Geometry::Torus { l: 1.0 };
        let d = 0.1;
        assert_relative_eq!(v.eval(&[d, 0.0, 0.0], &g).unwrap(), d.powf(-1.5), max_relative = 1e-14);
        assert_eq!(v.eval(&[0.45, 0.0, 0.0], &g).unwrap(), 0.0);
        // Minimum image: 0.95 is 0.05 away from the origin.
        assert_relative_eq!(v.eval(&[0.95, 0.0, 0.0], &g).unwrap(), 0.05f64.powf(-1.5), max_relative = 1e-12);
        assert!(v.eval(&[0.0; 3], &g).is_err());
        let zero = RadialKatoPotential::new(0.0, 0.5, [0.0; 3], 0.4).unwrap();
        assert_eq!(zero.eval(&[0.1, 0.2, 0.0], &g).unwrap(), 0.0);
    }

    #[test]
    fn kato_closed_form_examples() {
        assert_relative_eq!(kato_norm_radial_closed(1.0, 0.5, 0.1), 7.9477, max_relative = 1e-4);
        assert_relative_eq!(kato_norm_radial_closed(2.0, 0.25, 0.01), 31.78, max_relative = 1e-3);
        let v = pot(1.0, 0.5);
        assert!(v.kato_norm_closed(0.2).is_err());
    }

    #[test]
    fn kato_norm_at_centre_matches_closed_form() {
        let v = pot(1.0, 0.5);
        let g = Geometry::Torus { l: 1.0 };
        let probes = default_probes(&v, &g, 32);
        let (n, arg) = kato_norm(&v, &g, 0.1, &probes).unwrap();
        assert_relative_eq!(n, kato_norm_radial_closed(1.0, 0.5, 0.1), max_relative = 1e-10);
        assert_eq!(arg, v.center);
    }

    #[test]
    fn off_centre_kato_integral_by_shell_average() {
        // Independent route: direct 2-D quadrature in (ρ, μ) of |V|/ρ·ρ².
        let v = pot(1.0, 0.5);
        let dist = 0.07;
        let r = 0.12;
        let f = |rho: f64| {
            // μ = −1 + 2s⁴ clusters nodes at the singular direction μ = −1.
            let g = |s: f64| {
                let mu = -1.0 + 2.0 * s.powi(4);
                let z = (rho * rho + dist * dist + 2.0 * rho * dist * mu).max(0.0).sqrt();
                v.at_distance(z).abs() * 8.0 * s.powi(3)
            };
            // s₀ is where the near-singular peak at z = |ρ−D| flattens out.
            let s0 = ((rho - dist).powi(2) / (4.0 * rho * dist)).powf(0.25);
            let mut cuts = vec![0.0, 1.0];
            if s0 > 0.0 && s0 < 1.0 {
                cuts.push(s0);
            }
            for zk in [0.5 * v.r_cut, v.r_cut] {
                let mu = (zk * zk - rho * rho - dist * dist) / (2.0 * rho * dist);
                if mu > -1.0 && mu < 1.0 {
                    cuts.push((0.5 * (mu + 1.0)).powf(0.25));
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let inner: f64 = cuts.windows(2).map(|w| quad::integrate_with_error(&g, w[0], w[1], 1e-12).0).sum();
            2.0 * PI * rho * inner
        };
        // The profile has kinks at |z| = r_cut/2 and r_cut; split where a
        // sphere of radius ρ first or last touches them.
        let rc = v.r_cut;
        let mut knots = vec![0.0, dist, r];
        for k in [0.5 * rc - dist, 0.5 * rc + dist, rc - dist, dist - 0.5 * rc] {
            if k > 0.0 && k < r {
                knots.push(k);
            }
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let direct: f64 = knots.windows(2).map(|w| quad::integrate(f, w[0], w[1], 1e-10).unwrap()).sum();
        let fast = v.kato_integral_at(dist, r).unwrap();
        assert_relative_eq!(fast, direct, max_relative = 1e-6);
    }

    #[test]
    fn fourier_zero_mode_with_indicator() {
        let v = pot(1.0, 0.5).with_profile(CutoffProfile::Indicator);
        let c = fourier_coeff(&v, [0, 0, 0], 1.0).unwrap();
        let expected = 4.0 * PI * 0.3f64.powf(1.5) / 1.5;
        assert_relative_eq!(c.re, expected, max_relative = 1e-12);
        assert!(c.im.abs() < 1e-15);
    }

    #[test]
    fn fourier_hermitian_symmetry() {
        let v = RadialKatoPotential::new(0.7, 0.3, [0.13, 0.4, 0.77], 0.3).unwrap();
        for m in [[1, 0, 0], [2, -1, 3], [0, 4, -4]] {
            let a = fourier_coeff(&v, m, 1.0).unwrap();
            let b = fourier_coeff(&v, m.map(|c| -c), 1.0).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-12, epsilon = 1e-16);
        }
    }

    #[test]
    fn fourier_decay_rate() {
        // Large-p behaviour comes from the origin: ∫r^η sinc(pr) dr ∝ p^{−1−η}.
        let v = pot(1.0, 0.5);
        let f1 = v.radial_transform(400.0).unwrap().abs();
        let f2 = v.radial_transform(1600.0).unwrap().abs();
        let slope = (f2 / f1).ln() / 4f64.ln();
        assert!((slope + 1.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn lq_norm_examples() {
        let v = pot(1.0, 0.5).with_profile(CutoffProfile::Indicator);
        assert_relative_eq!(lq_norm(&v, 1.0).unwrap(), 4.0 * PI * 0.3f64.powf(1.5) / 1.5, max_relative = 1e-12);
        assert!(lq_norm(&v, 2.0).is_err());
        assert_eq!(lq_norm(&pot(0.0, 0.5), 1.5).unwrap(), 0.0);
        let a = lq_norm(&pot(1.0, 0.5), 1.7).unwrap();
        let b = lq_norm(&pot(2.0, 0.5), 1.7).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
    }

    #[test]
    fn lq_divergence_under_refinement() {
        let v = pot(1.0, 0.5);
        let q = 2.0; // = 3/(2−η)
        let vals: Vec<f64> = (1..6).map(|k| v.lq_integral_above(q, 1e-2 / 4f64.powi(k)).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0] + 1.0);
        }
    }

    #[test]
    fn unit_cell_constant() {
        // ∫ dz/√(ρ²+z²) over z ∈ [0, 1/2] is asinh(1/(2ρ)); integrate the rest.
        let f = |x: f64| {
            let g = |y: f64| (0.5 / (x * x + y * y).sqrt()).asinh();
            quad::integrate(g, 0.0, 0.5, 1e-14).unwrap()
        };
        let v = 8.0 * quad::integrate(f, 0.0, 0.5, 1e-13).unwrap();
        assert_relative_eq!(v, UNIT_CELL_INVERSE_DISTANCE, max_relative = 1e-10);
        assert_relative_eq!(v, 3.0 * (2.0 + 3f64.sqrt()).ln() - PI / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn grid_kato_norm_tracks_radial_value() {
        // Smooth potential: compare the grid sum against the exact radial value
        // at an off-centre probe; singular potentials need the analytic cell.
        let v = RadialKatoPotential::new(1.0, 0.5, [0.5, 0.5, 0.5], 0.3).unwrap();
        let g = Geometry::Torus { l: 1.0 };
        let n = 80;
        let grid = GridPotential::from_radial(&v, &g, [n; 3], 1.0 / n as f64).unwrap();
        let probe = [60, 40, 40]; // centre at (0.7625, 0.50625, 0.50625)
        let x = [60, 40, 40].map(|c| (c as f64 + 0.5) / n as f64);
        let exact = v.kato_integral_at(g.distance(&x, &v.center), 0.1).unwrap();
        let approx = grid.kato_integral_at(probe, 0.1);
        assert_relative_eq!(approx, exact, max_relative = 0.05);
    }
}
