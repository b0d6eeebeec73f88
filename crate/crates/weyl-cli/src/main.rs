mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use weyl_core::correction::{r0n_estimate, weyl_free, xi_eta};
use weyl_core::error::WeylError;
use weyl_core::kato::{default_probes, kato_norm, kato_norm_radial_closed, Point};
use weyl_core::kernels::QuadratureSpec;
use weyl_core::spectral::cache::spectrum_digest;
use weyl_core::tauberian::{
    tauber_conclusion_check, torus_free_tauber_inputs, StepSamples, TauberParams, UNIVERSAL_C,
};

use config::ExperimentConfig;

const EXIT_ERROR: u8 = 1;
const EXIT_ASSERTION: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] WeylError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Weyl-law experiments for Schrödinger operators with singular potentials.
#[derive(Debug, Parser)]
#[command(name = "weyl", version)]
struct Cli {
    /// TOML experiment file; without it the free unit torus with |q|² ≤ 400 is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Limiting profile Ξ_η at radius s.
    Xi {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        s: f64,
    },
    /// Kato norm of the configured potential over balls of radius r.
    KatoNorm {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 64)]
        probes: usize,
    },
    /// Solve (or load) the configured spectrum and describe it.
    Spectrum,
    /// Eigenvalue count N(t).
    Count {
        #[arg(long)]
        t: f64,
    },
    /// Pointwise density e(t,x).
    Pointwise {
        #[arg(long)]
        t: f64,
        #[arg(long, value_parser = parse_point)]
        x: Option<Point>,
    },
    /// Monte-Carlo estimate of the n-th correction order at (t,x).
    Correction {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: f64,
        #[arg(long, value_parser = parse_point)]
        x: Option<Point>,
    },
    /// Tauberian conclusion check with B₁ the measured density at x.
    TauberCheck {
        #[arg(long, value_parser = parse_point)]
        x: Option<Point>,
        #[arg(long, default_value_t = 0.5)]
        epsilon0: f64,
        #[arg(long, default_value_t = 4.0)]
        big_lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
    },
    /// Full experiment: report.csv, summary.json and plot.svg.
    Report,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three comma-separated coordinates, got {}", p.len()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok((value, ok)) => {
            println!("{value}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ASSERTION)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<(Value, bool), CliError> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let out = match cli.command {
        Command::Xi { eta, s } => {
            let value = xi_eta(eta, s, &QuadratureSpec::default())?;
            json!({ "eta": eta, "s": s, "value": value })
        }
        Command::KatoNorm { r, probes } => {
            let v = cfg.radial_potential()?;
            let geom = cfg.geometry();
            let (value, argmax) = kato_norm(&v, &geom, r, &default_probes(&v, &geom, probes))?;
            let closed = (r <= 0.5 * v.r_cut).then(|| kato_norm_radial_closed(v.gamma, v.eta, r));
            json!({ "r": r, "value": value, "argmax": argmax, "closed_form": closed })
        }
        Command::Spectrum => {
            let (s, hit) = experiment::spectrum(&cfg)?;
            json!({
                "dim": s.dim(),
                "lambda_basis": s.lambda_basis(),
                "t_trust": s.t_trust,
                "bottom": s.eigenvalues[0],
                "trusted_eigenvalues": s.counting(s.t_trust)?,
                "digest": spectrum_digest(&s),
                "cache_hit": hit,
            })
        }
        Command::Count { t } => {
            let (s, _) = experiment::spectrum(&cfg)?;
            json!({ "t": t, "N": s.counting(t)?, "weyl_free": cfg.volume() * weyl_free(t) })
        }
        Command::Pointwise { t, x } => {
            let (s, _) = experiment::spectrum(&cfg)?;
            let x = x.unwrap_or_else(|| cfg.probe_point());
            json!({ "t": t, "x": x, "e": s.pointwise_density(t, &x)?, "weyl_free": weyl_free(t) })
        }
        Command::Correction { n, t, x } => {
            let v = cfg.radial_potential()?;
            let x = x.unwrap_or_else(|| cfg.probe_point());
            let params = cfg.correction_params(&v)?;
            let est = r0n_estimate(n, t, &x, &v, &cfg.geometry(), &params)?;
            let scale = t.max(0.0).powf(1.5);
            json!({
                "n": n,
                "t": t,
                "x": x,
                "value": scale * est.mean,
                "value_stderr": scale * est.stderr,
                "r": est.mean,
                "stderr": est.stderr,
                "samples": est.samples,
                "seed": est.seed,
                "epsilon": est.epsilon,
                "low_confidence": est.low_confidence,
            })
        }
        Command::TauberCheck { x, epsilon0, big_lambda, c0 } => {
            let (s, _) = experiment::spectrum(&cfg)?;
            let x = x.unwrap_or_else(|| cfg.probe_point());
            let pd = s.point_density(&x);
            let b1 = StepSamples::from_point_density_continued(&pd, &s.continuation(&pd))?;
            let (b0, _, b2, defaults) = torus_free_tauber_inputs(1.0, b1.t_max(), epsilon0, big_lambda)?;
            let params = TauberParams { c0, ..defaults };
            let lambdas: Vec<f64> = (0..=60).map(|k| big_lambda * 16f64.powf(k as f64 / 60.0)).collect();
            let report = tauber_conclusion_check(&b0, &b1, &b2, &params, &lambdas, UNIVERSAL_C)?;
            let passed = report.passed;
            let mut value = serde_json::to_value(report)?;
            value["x"] = json!(x);
            return Ok((value, passed));
        }
        Command::Report => {
            let summary = experiment::run_experiment(&cfg)?;
            let ok = summary.passed();
            return Ok((serde_json::to_value(&summary)?, ok));
        }
    };
    Ok((out, true))
}
