//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weyl_core::correction::CorrectionParams;
use weyl_core::kato::{Geometry, Point, RadialKatoPotential};
use weyl_core::spectral::{CubeSpec, Discretization, TorusSpec};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub correction: CorrectionConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub assert: AssertConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometryConfig {
    Torus { l: f64, lambda_basis: f64 },
    Cube { a: f64, m_max: u32 },
}

/// `γ χ(d/r_cut) / d^{2−η}` around `center`; `gamma = 0` is the free operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub gamma: f64,
    pub eta: f64,
    /// Defaults to the middle of the cell.
    pub center: Option<Point>,
    pub r_cut: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            eta: 0.5,
            center: None,
            r_cut: 0.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionConfig {
    /// Defaults to `r_cut`.
    pub epsilon: Option<f64>,
    pub max_n: usize,
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_n: 2,
            mc_samples: 100_000,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to `t_trust / 10`.
    pub t_min: Option<f64>,
    /// Defaults to `t_trust`.
    pub t_max: Option<f64>,
    pub points: usize,
    /// Ratio of the geometric windows used before fitting.
    pub window: f64,
    /// Point where `e(t,x)` is tabulated; defaults to the potential centre.
    pub x: Option<Point>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_min: None,
            t_max: None,
            points: 60,
            window: 1.2,
            x: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("weyl-report"),
            plot: true,
        }
    }
}

/// Optional pass/fail conditions; a failure makes `report` exit with 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssertConfig {
    /// Allowed `[lo, hi]` for the fitted exponent of `e(t,x) − t^{3/2}/(6π²)`.
    pub e_exponent: Option<[f64; 2]>,
    /// Upper limit for the fitted exponent of `N(t) − vol·t^{3/2}/(6π²)`.
    pub n_exponent_max: Option<f64>,
    /// Allowed relative deviation of `N/(vol·t^{3/2}/(6π²))` from 1 at `t_max`.
    pub leading_ratio_tol: Option<f64>,
}

impl Default for ExperimentConfig {
    /// The free unit torus with `|q|² ≤ 400`.
    fn default() -> Self {
        Self {
            schema: SCHEMA,
            geometry: GeometryConfig::Torus {
                l: 1.0,
                lambda_basis: 400.0,
            },
            potential: PotentialConfig::default(),
            correction: CorrectionConfig::default(),
            grid: GridConfig::default(),
            output: OutputConfig::default(),
            assert: AssertConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Config(format!("unsupported schema {}, expected {SCHEMA}", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn discretization(&self) -> Result<Discretization, CliError> {
        Ok(match self.geometry {
            GeometryConfig::Torus { l, lambda_basis } => Discretization::Torus(TorusSpec::new(l, lambda_basis)?),
            GeometryConfig::Cube { a, m_max } => Discretization::Cube(CubeSpec::new(a, m_max)?),
        })
    }

    pub fn geometry(&self) -> Geometry {
        match self.geometry {
            GeometryConfig::Torus { l, .. } => Geometry::Torus { l },
            GeometryConfig::Cube { .. } => Geometry::Euclidean,
        }
    }

    pub fn volume(&self) -> f64 {
        match self.geometry {
            GeometryConfig::Torus { l, .. } => l.powi(3),
            GeometryConfig::Cube { a, .. } => a.powi(3),
        }
    }

    pub fn center(&self) -> Point {
        self.potential.center.unwrap_or_else(|| {
            let half = match self.geometry {
                GeometryConfig::Torus { l, .. } => 0.5 * l,
                GeometryConfig::Cube { a, .. } => 0.5 * a,
            };
            [half; 3]
        })
    }

    /// The radial potential; its parameters are validated even when `γ = 0`.
    pub fn radial_potential(&self) -> Result<RadialKatoPotential, CliError> {
        let p = &self.potential;
        let v = RadialKatoPotential::new(p.gamma, p.eta, self.center(), p.r_cut)?;
        v.check_geometry(&self.geometry())?;
        Ok(v)
    }

    /// `None` for the free operator, so that it shares one cached spectrum.
    pub fn potential(&self) -> Result<Option<RadialKatoPotential>, CliError> {
        let v = self.radial_potential()?;
        Ok((v.gamma != 0.0).then_some(v))
    }

    pub fn correction_params(&self, v: &RadialKatoPotential) -> Result<CorrectionParams, CliError> {
        let c = &self.correction;
        let params = CorrectionParams {
            epsilon: c.epsilon.unwrap_or(v.r_cut),
            max_n: c.max_n,
            mc_samples: c.mc_samples,
            seed: c.seed,
        };
        params.validate(v, &self.geometry())?;
        Ok(params)
    }

    pub fn probe_point(&self) -> Point {
        self.grid.x.unwrap_or_else(|| self.center())
    }
}
