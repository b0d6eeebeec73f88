use std::f64::consts::PI;

use weyl_core::correction::*;
use weyl_core::kato::*;
use weyl_core::kernels::*;
use weyl_core::quad;
use weyl_core::spectral::*;
use weyl_core::tauberian::*;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

#[test]
fn kappa_envelope_scan() {
    for r in log_grid(1e-3, 1e3, 1000) {
        assert!(kappa(r).abs() <= 0.85 && r * kappa(r).abs() <= 1.2, "{r}");
    }
}

#[test]
fn jackson_kernel_moments_are_finite() {
    // K(y) ≤ (4/y)⁴, so the moments past R are bounded by the tails of that envelope.
    let r = 4.0 * PI * 200.0;
    for (k, envelope_tail) in [(0, 256.0 / (3.0 * r.powi(3))), (1, 128.0 / r.powi(2)), (2, 256.0 / r)] {
        let mut total = 0.0;
        for j in 0..200 {
            let a = 4.0 * PI * j as f64;
            total += quad::integrate(|y| y.powi(k) * jackson_k(y), a, a + 4.0 * PI, 1e-14).unwrap();
        }
        assert!(total.is_finite() && total > 0.0 && envelope_tail < 0.5 * total, "moment {k}");
    }
    for j in 1..6 {
        let zero = 4.0 * PI * j as f64;
        assert!(jackson_k(zero) < 1e-25 && jackson_k(zero + 0.1) > 0.0);
    }
}

#[test]
fn torus_green_decouples_for_large_cells() {
    for lambda in [1.0, 10.0, 100.0] {
        let free = -1.0 / (8.0 * PI * f64::sqrt(lambda));
        let g = torus_dlambda_green(lambda, 50.0, 1e-16);
        assert!(((g - free) / free).abs() < 1e-14, "{lambda}: {g} vs {free}");
    }
}

#[test]
fn kato_norm_rate_and_monotonicity() {
    let g = Geometry::Torus { l: 1.0 };
    for eta in [0.25, 0.5, 0.75] {
        let v = RadialKatoPotential::new(1.0, eta, [0.5; 3], 0.2).unwrap();
        let probes = default_probes(&v, &g, 32);
        let radii = [0.0125, 0.025, 0.05, 0.1, 0.2];
        let norms: Vec<f64> = radii.iter().map(|&r| kato_norm(&v, &g, r, &probes).unwrap().0).collect();
        assert!(norms.windows(2).all(|w| w[1] >= w[0]), "{norms:?}");
        for w in norms[..3].windows(2) {
            let rate = (w[1] / w[0]).log2();
            assert!((rate - eta).abs() < 1e-6, "eta {eta}: rate {rate}");
        }
    }
}

#[test]
fn rayleigh_ritz_is_one_sided() {
    let v = RadialKatoPotential::new(2.0, 0.5, [0.5; 3], 0.3).unwrap();
    let small = solve(&Discretization::Torus(TorusSpec::new(1.0, 400.0).unwrap()), Some(&v)).unwrap();
    let large = solve(&Discretization::Torus(TorusSpec::new(1.0, 900.0).unwrap()), Some(&v)).unwrap();
    for (a, b) in small.eigenvalues.iter().zip(&large.eigenvalues) {
        assert!(*b <= *a + 1e-9 * a.abs().max(1.0), "{b} > {a}");
    }
}

#[test]
fn free_torus_resolvent_against_images() {
    let s = solve(&Discretization::Torus(TorusSpec::new(1.0, 900.0).unwrap()), None).unwrap();
    let x = [0.1, 0.6, 0.35];
    for lambda in log_grid(10.0, s.t_trust / 2.0, 12) {
        let eig = s.resolvent2_diag(lambda, &x, true).unwrap();
        let images = -torus_dlambda_green(lambda, 1.0, 1e-16);
        assert!(((eig - images) / images).abs() < 1e-3, "{lambda}");
    }
}

#[test]
fn stieltjes_of_density_is_half_resolvent() {
    let v = RadialKatoPotential::new(1.0, 0.5, [0.5; 3], 0.3).unwrap();
    let s = solve(&Discretization::Torus(TorusSpec::new(1.0, 900.0).unwrap()), Some(&v)).unwrap();
    for x in [[0.5; 3], [0.52, 0.47, 0.5], [0.1, 0.9, 0.2]] {
        let pd = s.point_density(&x);
        let c = s.continuation(&pd);
        let steps = StepSamples::from_point_density_continued(&pd, &c).unwrap();
        for lambda in log_grid(10.0, s.t_trust / 4.0, 8) {
            let lhs = stieltjes3(&steps, lambda, 1.5).unwrap();
            let rhs = 0.5 * s.resolvent2_continued(&pd, &c, lambda).unwrap();
            assert!(((lhs - rhs) / rhs).abs() < 1e-10, "{x:?} {lambda}");
        }
    }
}

#[test]
fn cluster_ratio_bounded() {
    let v = RadialKatoPotential::new(1.0, 0.5, [0.5; 3], 0.3).unwrap();
    let s = solve(&Discretization::Torus(TorusSpec::new(1.0, 900.0).unwrap()), Some(&v)).unwrap();
    let mut worst = 0.0f64;
    for x in [[0.5; 3], [0.53, 0.5, 0.49], [0.7, 0.5, 0.5], [0.0; 3]] {
        let pd = s.point_density(&x);
        for t in log_grid(1.0, 200.0, 15) {
            for big_t in log_grid(0.1, 100.0, 15) {
                if (t.sqrt() + big_t.sqrt()).powi(2) <= s.t_trust {
                    worst = worst.max(s.cluster_ratio(&pd, t, big_t).unwrap());
                }
            }
        }
    }
    assert!(worst <= 5.0, "{worst}");
}

#[test]
fn xi_positive_and_decreasing() {
    let q = QuadratureSpec::default();
    for eta in [0.25, 0.5, 0.75] {
        let mut s_grid = vec![0.0];
        s_grid.extend(log_grid(0.01, 50.0, 40));
        let vals: Vec<f64> = s_grid.iter().map(|&s| xi_eta(eta, s, &q).unwrap()).collect();
        assert!(vals.iter().all(|&v| v > 0.0), "{eta}");
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{eta}: {vals:?}");
    }
}

#[test]
fn sharp_law_mechanism() {
    // First order at x₀ for the η-singular profile and for the same profile
    // flattened inside r₀ (a bounded potential).
    let (eta, r_cut, r0) = (0.5, 0.3, 0.02);
    let v = RadialKatoPotential::new(1.0, eta, [0.5; 3], r_cut).unwrap();
    let singular = |r: f64| r.powf(eta - 1.0) * v.cutoff(r).powi(3);
    let bounded = |r: f64| r * r.max(r0).powf(eta - 2.0) * v.cutoff(r).powi(3);
    let scaled = |t: f64, w: &dyn Fn(f64) -> f64| t.sqrt() * first_order_radial(t, r_cut, &w).unwrap() / (4.0 * PI);
    let (lo, hi) = (1e4, 1e6);
    let growth_singular = scaled(hi, &singular) / scaled(lo, &singular);
    let growth_bounded = scaled(hi, &bounded) / scaled(lo, &bounded);
    let expected = (hi / lo).powf((1.0 - eta) / 2.0);
    assert!((growth_singular / expected - 1.0).abs() < 0.05, "{growth_singular} vs {expected}");
    assert!(growth_bounded.abs() < 1.2, "{growth_bounded}");
}

#[test]
fn orders_contract_uniformly() {
    // |r⁽ⁿ⁺¹⁾| ≤ ρ|r⁽ⁿ⁾| with ρ fitted on n = 1 → 2 and checked on n = 2 → 3.
    let g = Geometry::Torus { l: 1.0 };
    let v = RadialKatoPotential::new(1.0, 0.5, [0.5; 3], 0.3).unwrap();
    let mut prm = CorrectionParams::for_potential(&v);
    prm.mc_samples = 200_000;
    let mut rows = Vec::new();
    for t in [100.0, 400.0, 1600.0] {
        for x in [[0.5; 3], [0.55, 0.5, 0.5], [0.5, 0.38, 0.6]] {
            let r: Vec<_> = (1..=3).map(|n| r0n_estimate(n, t, &x, &v, &g, &prm).unwrap()).collect();
            rows.push(r);
        }
    }
    let rho = rows.iter().map(|r| r[1].mean.abs() / r[0].mean.abs()).fold(0.0f64, f64::max);
    assert!(rho < 1.0, "{rho}");
    for r in &rows {
        let bound = rho * (r[1].mean.abs() + 3.0 * r[1].stderr);
        assert!(r[2].mean.abs() <= bound + 3.0 * r[2].stderr, "{} > {bound}", r[2].mean);
    }
}

#[test]
fn tauberian_rejects_polynomial_transform() {
    // B₁ jumps by t at t = 4, 8, 12, …: nondecreasing, but its transform decays
    // only like a power of λ.
    let (b0, _, b2, params) = torus_free_tauber_inputs(1.0, 400.0, 0.5, 4.0).unwrap();
    let (mut t, mut values, mut acc) = (vec![0.0], vec![0.0], 0.0);
    for k in 1..=100 {
        let at = 4.0 * k as f64;
        acc += at;
        t.push(at);
        values.push(acc);
    }
    let b1 = StepSamples::new(t, values, Interp::Step).unwrap();
    let lambdas = log_grid(4.0, 64.0, 31);
    let r = tauber_conclusion_check(&b0, &b1, &b2, &params, &lambdas, UNIVERSAL_C).unwrap();
    assert!(!r.hypothesis_holds && !r.passed, "{r:?}");
    assert!(r.violations.iter().any(|v| v.contains("transform bound")));
}
