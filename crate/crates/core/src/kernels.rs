//! Special kernels: the Stieltjes kernel κ, the Jackson pair (ℓ, K), and the
//! free and periodic Yukawa Green's functions.
//!
//! ```text
//! κ(z)    = (8/π) (sin z − z cos z) / z³
//! e^{−s√t}/√t = ∫₀^∞ λ^{3/2} κ(s√λ) (t+λ)⁻³ dλ
//! ℓ(η)    = −4/3 (1−2|η|)³ + 8/3 (1−|η|)³      |η| ≤ 1/2
//!         =  8/3 (1−|η|)³                      1/2 ≤ |η| ≤ 1
//! K(y)    = ∫ ℓ(η) e^{−iηy} dη = (sin(y/4)/(y/4))⁴
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quad;

const KAPPA_SERIES_RADIUS: f64 = 0.1;

/// Controls for half-line integrals with oscillatory tails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Dimensionless radius after which the integral is summed zero-to-zero.
    pub r_max: f64,
    /// Number of zero-to-zero panels fed to the Euler transform.
    pub panels: usize,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(r_max: f64, panels: usize, rel_tol: f64) -> Result<Self> {
        if !(r_max > 0.0) {
            return domain(format!("r_max must be positive, got {r_max}"));
        }
        if panels < 8 {
            return domain(format!("need at least 8 panels, got {panels}"));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return domain(format!("rel_tol must lie in (0,1), got {rel_tol}"));
        }
        Ok(Self {
            r_max,
            panels,
            rel_tol,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            r_max: 20.0,
            panels: 40,
            rel_tol: 1e-10,
        }
    }
}

/// κ(z) for real arguments; even in z.
pub fn kappa(z: f64) -> f64 {
    let z = z.abs();
    if z < KAPPA_SERIES_RADIUS {
        let z2 = z * z;
        8.0 / PI * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0)
    } else {
        8.0 / PI * (z.sin() - z * z.cos()) / (z * z * z)
    }
}

/// κ(z) for complex arguments.
pub fn kappa_complex(z: Complex64) -> Complex64 {
    if z.norm() < KAPPA_SERIES_RADIUS {
        let z2 = z * z;
        (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0) * (8.0 / PI)
    } else {
        (z.sin() - z * z.cos()) / (z * z * z) * (8.0 / PI)
    }
}

/// The `k`-th positive zero of κ (`k ≥ 1`), i.e. of `tan z = z`.
pub fn kappa_zero(k: usize) -> f64 {
    assert!(k >= 1, "kappa has no zero of index 0");
    let q = (k as f64 + 0.5) * PI;
    let mut z = q - 1.0 / q - 2.0 / (3.0 * q * q * q);
    for _ in 0..8 {
        let g = z.sin() - z * z.cos();
        let dg = z * z.sin();
        let step = g / dg;
        z -= step;
        if step.abs() < 1e-15 * z {
            break;
        }
    }
    z
}

/// Index of the first zero of κ strictly greater than `r`.
pub fn first_kappa_zero_after(r: f64) -> usize {
    let mut k = ((r / PI).floor() as usize).max(1);
    while kappa_zero(k) <= r {
        k += 1;
    }
    while k > 1 && kappa_zero(k - 1) > r {
        k -= 1;
    }
    k
}

/// Jackson window ℓ on `[−1, 1]`.
pub fn jackson_ell(eta: f64) -> Result<f64> {
    let a = eta.abs();
    if !(a <= 1.0) {
        return domain(format!("jackson_ell needs |eta| <= 1, got {eta}"));
    }
    let outer = 8.0 / 3.0 * (1.0 - a).powi(3);
    if a <= 0.5 {
        Ok(outer - 4.0 / 3.0 * (1.0 - 2.0 * a).powi(3))
    } else {
        Ok(outer)
    }
}

/// Jackson kernel K(y) = (sin(y/4)/(y/4))⁴.
pub fn jackson_k(y: f64) -> f64 {
    let u = 0.25 * y;
    if u.abs() < 1e-4 {
        let s = 1.0 - u * u / 6.0;
        return s.powi(4);
    }
    (u.sin() / u).powi(4)
}

/// ∫_{−1}^{1} ℓ(η) e^{−iηy} dη by quadrature (ℓ is even, so the value is real).
pub fn jackson_fourier_numeric(y: f64, tol: f64) -> Result<f64> {
    let f = |eta: f64| jackson_ell(eta).unwrap_or(0.0) * (eta * y).cos();
    let inner = quad::integrate(f, 0.0, 0.5, tol)?;
    let outer = quad::integrate(f, 0.5, 1.0, tol)?;
    Ok(2.0 * (inner + outer))
}

/// Largest deviation between the numerical Fourier transform of ℓ and K
/// over the given frequencies.
pub fn jackson_pair_residual(ys: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &y in ys {
        let r = (jackson_fourier_numeric(y, 1e-13)? - jackson_k(y)).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// ∫_ℝ K(y) dy by quadrature over `[0, R]` plus the averaged y⁻⁴ tail.
pub fn jackson_k_integral() -> Result<f64> {
    // Integrate panel by panel between the zeros y = 4πk.
    let mut total = 0.0;
    let panels = 400;
    for k in 0..panels {
        let a = 4.0 * PI * k as f64;
        total += quad::integrate(jackson_k, a, a + 4.0 * PI, 1e-15)?;
    }
    // Beyond R the mean of sin⁴ is 3/8, so K ≈ (3/8)·256/y⁴.
    let r = 4.0 * PI * panels as f64;
    total += 96.0 / (3.0 * r * r * r);
    Ok(2.0 * total)
}

/// Free Yukawa Green's function e^{−√λ r}/(4πr).
pub fn free_green(lambda: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("free_green needs r > 0, got {r}"));
    }
    if !(lambda > 0.0) {
        return domain(format!("free_green needs lambda > 0, got {lambda}"));
    }
    Ok((-lambda.sqrt() * r).exp() / (4.0 * PI * r))
}

/// ∂_λ G_λ(x,x) on the flat torus of side `l`, by the method of images:
/// `−(1/(8π√λ)) Σ_{k∈(LZ)³} e^{−√λ|k|}`.
///
/// Cubic shells `max|kᵢ| = n` are added until one contributes less than
/// `tol` times the running sum (once past the shell-size maximum).
pub fn torus_dlambda_green(lambda: f64, l: f64, tol: f64) -> f64 {
    -image_sum(lambda, l, tol) / (8.0 * PI * lambda.sqrt())
}

/// `Σ_{k∈(LZ)³} e^{−√λ|k|}`.
pub fn image_sum(lambda: f64, l: f64, tol: f64) -> f64 {
    let s = lambda.sqrt() * l;
    let mut sum = 1.0;
    let mut n: i64 = 1;
    loop {
        let mut shell = 0.0;
        for i in -n..=n {
            for j in -n..=n {
                let on_face = i.abs() == n || j.abs() == n;
                if on_face {
                    for k in -n..=n {
                        let r = ((i * i + j * j + k * k) as f64).sqrt();
                        shell += (-s * r).exp();
                    }
                } else {
                    let r = ((i * i + j * j + n * n) as f64).sqrt();
                    shell += 2.0 * (-s * r).exp();
                }
            }
        }
        sum += shell;
        // Shell weights grow like n², so wait until the exponential wins.
        if shell < tol * sum && (n as f64) * s > 2.0 {
            return sum;
        }
        n += 1;
    }
}

/// `∫₀^∞ λ^{3/2} κ(s√λ) (t+λ)⁻³ dλ`, computed in the variable `z = s√λ`
/// where it reads `2s ∫₀^∞ z⁴ κ(z) / (s²t + z²)³ dz`; the integrand changes
/// sign exactly at the zeros of κ.
pub fn stieltjes_weight_integral(s: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return domain(format!("need s, t > 0, got s={s}, t={t}"));
    }
    let c = s * s * t;
    let f = |z: f64| {
        let d = c + z * z;
        z.powi(4) * kappa(z) / (d * d * d)
    };
    let k0 = first_kappa_zero_after(q.r_max.max(c.sqrt()));
    let scale = (-(c.sqrt())).exp() / (t.sqrt() * 2.0 * s);
    let tol = q.rel_tol * scale * 1e-2;
    let head = quad::integrate(f, 0.0, kappa_zero(1), tol * 1e-2)?;
    let body = piecewise(&f, 1, k0, tol * 1e-2)?;
    let tail = quad::oscillatory_tail(f, kappa_zero(k0), |k| kappa_zero(k0 + 1 + k) , q.panels, tol)?;
    Ok(2.0 * s * (head + body + tail))
}

fn piecewise<F: Fn(f64) -> f64>(f: &F, from: usize, to: usize, tol: f64) -> Result<f64> {
    let mut acc = 0.0;
    for k in from..to {
        acc += quad::integrate(f, kappa_zero(k), kappa_zero(k + 1), tol)?;
    }
    Ok(acc)
}

/// `|∫₀^∞ λ^{3/2}κ(s√λ)(t+λ)⁻³dλ − e^{−s√t}/√t|`.
pub fn stieltjes_weight_residual(s: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    let exact = (-s * t.sqrt()).exp() / t.sqrt();
    Ok((stieltjes_weight_integral(s, t, q)? - exact).abs())
}

/// `∫₀^∞ t^{3/2} (t+λ)⁻³ dt` with the substitution `t = λ tan²θ`.
pub fn resolvent_moment(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("need lambda > 0, got {lambda}"));
    }
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let tan = s / c;
        let t = lambda * tan * tan;
        let dt = 2.0 * lambda * tan / (c * c);
        t.powf(1.5) / (t + lambda).powi(3) * dt
    };
    quad::integrate(f, 0.0, 0.5 * PI, 1e-14 / lambda.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kappa_values() {
        assert_relative_eq!(kappa(0.0), 8.0 / (3.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(kappa(PI), 8.0 / PI.powi(3), max_relative = 1e-14);
        assert_relative_eq!(kappa(2.0), 0.5543656648, max_relative = 1e-9);
        assert_eq!(kappa(-1.3), kappa(1.3));
    }

    #[test]
    fn kappa_series_switch_is_continuous() {
        let below = kappa(KAPPA_SERIES_RADIUS * (1.0 - 1e-12));
        let above = kappa(KAPPA_SERIES_RADIUS * (1.0 + 1e-12));
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn kappa_complex_matches_real_axis() {
        for &z in &[0.05, 0.5, 3.0, 17.0] {
            let c = kappa_complex(Complex64::new(z, 0.0));
            assert_relative_eq!(c.re, kappa(z), max_relative = 1e-12);
            assert!(c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn kappa_zeros_solve_tan_equation() {
        assert_relative_eq!(kappa_zero(1), 4.493409457909064, epsilon = 1e-12);
        for k in 1..50 {
            let z = kappa_zero(k);
            assert!((z.tan() - z).abs() < 1e-8 * z * z, "k={k}");
            assert!(z > k as f64 * PI && z < (k as f64 + 0.5) * PI);
        }
        assert_eq!(first_kappa_zero_after(0.0), 1);
        assert_eq!(first_kappa_zero_after(4.5), 2);
    }

    #[test]
    fn jackson_values() {
        assert_relative_eq!(jackson_ell(0.0).unwrap(), 4.0 / 3.0);
        assert_relative_eq!(jackson_ell(0.5).unwrap(), 1.0 / 3.0);
        assert_eq!(jackson_ell(1.0).unwrap(), 0.0);
        assert!(jackson_ell(1.01).is_err());
        assert_eq!(jackson_k(0.0), 1.0);
        assert_relative_eq!(jackson_k(2.0 * PI), (2.0 / PI).powi(4), max_relative = 1e-14);
    }

    #[test]
    fn jackson_integral() {
        assert_relative_eq!(jackson_k_integral().unwrap(), 8.0 * PI / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn free_green_values() {
        assert_relative_eq!(free_green(1.0, 1.0).unwrap(), 0.02927491576, max_relative = 1e-9);
        assert_relative_eq!(free_green(4.0, 0.5).unwrap(), 0.05854983152, max_relative = 1e-9);
        assert!(free_green(1.0, 0.0).is_err());
    }

    #[test]
    fn torus_green_value() {
        let v = torus_dlambda_green(100.0, 1.0, 1e-15);
        let shells = 1.0 + 6.0 * (-10.0f64).exp() + 12.0 * (-10.0 * 2f64.sqrt()).exp()
            + 8.0 * (-10.0 * 3f64.sqrt()).exp() + 6.0 * (-20.0f64).exp();
        assert_relative_eq!(v, -shells / (80.0 * PI), max_relative = 1e-8);
        assert_relative_eq!(v, -3.97996e-3, max_relative = 1e-5);
        let big = torus_dlambda_green(100.0, 50.0, 1e-15);
        assert_relative_eq!(big, -1.0 / (80.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn stieltjes_weight_examples() {
        let q = QuadratureSpec::default();
        assert!(stieltjes_weight_residual(1.0, 1.0, &q).unwrap() < 1e-6 * (-1.0f64).exp());
        assert!(stieltjes_weight_residual(2.0, 4.0, &q).unwrap() < 1e-6 * (-4.0f64).exp() / 2.0);
        assert_relative_eq!(resolvent_moment(1.0).unwrap(), 3.0 * PI / 8.0, max_relative = 1e-12);
    }
}
