//! Monte-Carlo evaluation of chained singular integrals
//!
//! ```text
//! ∫ F(S) ∏ₗ [χ(dₗ/ε)/dₗ] ∏ⱼ V(zⱼ) dz₁…dzₙ,   dₗ = d(z_l, z_{l+1}),  S = Σ dₗ
//! ```
//!
//! with `z₀ = x` and `z_{n+1} = x_end`. Each `zⱼ` is drawn from a mixture of
//! two ball proposals: one around `z_{j−1}` with radial density ∝ r (it
//! cancels the link factor 1/d), one around the singularity with radial
//! density ∝ r^{η−1} (it cancels `|V| ~ d^{η−2}` times one link). The last
//! point also mixes in a ball around `x_end` for the closing link. A single
//! proposal leaves the weight unbounded near the singularity and the variance
//! infinite when `x` sits on it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kato::{Geometry, Point, RadialKatoPotential};

const CHUNK: usize = 4096;

/// Running mean and sum of squared deviations (Welford), mergeable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Welford) -> Welford {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        Welford {
            count: self.count + other.count,
            mean: self.mean + d * other.count as f64 / n,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / n,
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count as f64 - 1.0) / self.count as f64).sqrt()
    }
}

/// A Monte-Carlo value with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub t: f64,
    pub x: Point,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub epsilon: f64,
    /// Set when the standard error exceeds the magnitude of the mean.
    pub low_confidence: bool,
}

/// Chain geometry shared by the correction term and the Rodnianski–Schlag
/// integral.
pub(crate) struct Chain<'a> {
    pub n: usize,
    pub start: Point,
    pub end: Point,
    pub v: &'a RadialKatoPotential,
    pub geom: Geometry,
    pub eps: f64,
}

/// Uniform direction times radius.
fn ball_point(rng: &mut ChaCha8Rng, center: &Point, r: f64) -> Point {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    [center[0] + r * s * phi.cos(), center[1] + r * s * phi.sin(), center[2] + r * z]
}

impl<'a> Chain<'a> {
    fn link_density(&self, d: f64) -> f64 {
        if d < self.eps && d > 0.0 {
            1.0 / (2.0 * PI * self.eps * self.eps * d)
        } else {
            0.0
        }
    }

    fn core_density(&self, d: f64) -> f64 {
        let (eta, rc) = (self.v.eta, self.v.r_cut);
        if d < rc && d > 0.0 {
            eta * d.powf(eta - 3.0) / (4.0 * PI * rc.powf(eta))
        } else {
            0.0
        }
    }

    /// Draws one chain and returns `(points, proposal density)`.
    fn sample(&self, rng: &mut ChaCha8Rng, pts: &mut Vec<Point>) -> f64 {
        pts.clear();
        let mut density = 1.0;
        let mut prev = self.start;
        for j in 1..=self.n {
            let last = j == self.n;
            let comps = if last { 3 } else { 2 };
            let pick = rng.random_range(0..comps);
            let u: f64 = rng.random();
            let z = match pick {
                0 => ball_point(rng, &prev, self.eps * u.sqrt()),
                1 => ball_point(rng, &self.v.center, self.v.r_cut * u.powf(1.0 / self.v.eta)),
                _ => ball_point(rng, &self.end, self.eps * u.sqrt()),
            };
            let mut p = self.link_density(self.geom.distance(&prev, &z))
                + self.core_density(self.geom.distance(&self.v.center, &z));
            if last {
                p += self.link_density(self.geom.distance(&self.end, &z));
            }
            density *= p / comps as f64;
            pts.push(z);
            prev = z;
        }
        density
    }

    /// Link lengths `d₀…dₙ` of the sampled chain.
    fn links(&self, pts: &[Point], out: &mut Vec<f64>) {
        out.clear();
        let mut prev = self.start;
        for p in pts {
            out.push(self.geom.distance(&prev, p));
            prev = *p;
        }
        out.push(self.geom.distance(&prev, &self.end));
    }

    /// Mean and spread of `f(links, potentials)/density` over `samples` chains.
    /// `f` receives the link lengths and the values `V(zⱼ)`.
    pub fn integrate<F>(&self, samples: u64, seed: u64, f: F) -> Welford
    where
        F: Fn(&[f64], &[f64]) -> f64 + Sync,
    {
        let chunks = (samples as usize).div_ceil(CHUNK);
        let parts: Vec<Welford> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let todo = CHUNK.min(samples as usize - c * CHUNK);
                let mut acc = Welford::default();
                let mut pts = Vec::with_capacity(self.n);
                let mut links = Vec::with_capacity(self.n + 1);
                let mut vals = Vec::with_capacity(self.n);
                for _ in 0..todo {
                    let density = self.sample(&mut rng, &mut pts);
                    self.links(&pts, &mut links);
                    vals.clear();
                    vals.extend(pts.iter().map(|z| self.v.at_distance(self.geom.distance(z, &self.v.center))));
                    let w = if density > 0.0 && links.iter().all(|&d| d > 0.0 && d < self.eps) {
                        f(&links, &vals) / density
                    } else {
                        0.0
                    };
                    acc.push(if w.is_finite() { w } else { 0.0 });
                }
                acc
            })
            .collect();
        parts.iter().fold(Welford::default(), |a, b| a.merge(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn welford_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 37.0).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let (a, b) = xs.split_at(313);
        let mut wa = Welford::default();
        let mut wb = Welford::default();
        a.iter().for_each(|&x| wa.push(x));
        b.iter().for_each(|&x| wb.push(x));
        let m = wa.merge(&wb);
        assert_eq!(m.count, all.count);
        assert_relative_eq!(m.mean, all.mean, max_relative = 1e-12);
        assert_relative_eq!(m.m2, all.m2, max_relative = 1e-10);
    }

    #[test]
    fn mixture_proposal_integrates_ball_volume() {
        // Indicator integrand: E[w] is the volume of the ε-ball (inside supp V).
        let v = RadialKatoPotential::new(1.0, 0.5, [0.5; 3], 0.3).unwrap();
        let chain = Chain {
            n: 1,
            start: [0.5; 3],
            end: [0.5; 3],
            v: &v,
            geom: Geometry::Torus { l: 1.0 },
            eps: 0.2,
        };
        let est = chain.integrate(200_000, 7, |_, vals| if vals[0] != 0.0 { 1.0 } else { 0.0 });
        let vol = 4.0 / 3.0 * PI * 0.2f64.powi(3);
        assert!((est.mean - vol).abs() < 4.0 * est.stderr() + 1e-12, "{} vs {vol}", est.mean);
    }

    #[test]
    fn deterministic_given_seed() {
        let v = RadialKatoPotential::new(1.0, 0.5, [0.5; 3], 0.3).unwrap();
        let chain = Chain {
            n: 2,
            start: [0.52, 0.5, 0.5],
            end: [0.52, 0.5, 0.5],
            v: &v,
            geom: Geometry::Torus { l: 1.0 },
            eps: 0.2,
        };
        let f = |d: &[f64], vals: &[f64]| vals.iter().product::<f64>() / d.iter().product::<f64>();
        let a = chain.integrate(20_000, 11, f);
        let b = chain.integrate(20_000, 11, f);
        assert_eq!(a, b);
    }
}
