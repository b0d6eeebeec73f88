//! The `report` pipeline: spectrum, tabulation, correction, fits, files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use weyl_core::correction::{corrected_weyl_from, r0_series, weyl_free, xi_eta_origin_closed, SeriesEstimate};
use weyl_core::fit::{fit_coefficient, fit_remainder_exponent, LineFit};
use weyl_core::kato::Point;
use weyl_core::spectral::cache::{cache_dir, load_or_solve, spectrum_digest};
use weyl_core::spectral::Spectrum;

use crate::config::{ExperimentConfig, SCHEMA};
use crate::CliError;

pub const CSV_HEADER: [&str; 7] = ["t", "N", "e_x0", "weyl_free", "weyl_corrected", "resid_N", "resid_e"];

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReportRow {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub e_x0: f64,
    pub weyl_free: f64,
    pub weyl_corrected: f64,
    #[serde(rename = "resid_N")]
    pub resid_n: f64,
    pub resid_e: f64,
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub dim: usize,
    pub lambda_basis: f64,
    pub t_trust: f64,
    pub digest: String,
}

#[derive(Debug, Serialize)]
pub struct Fits {
    /// Exponent of `e(t,x₀) − t^{3/2}/(6π²)`.
    pub e_x0: Option<LineFit>,
    /// Exponent of `N(t) − vol·t^{3/2}/(6π²)`.
    #[serde(rename = "N")]
    pub n: Option<LineFit>,
    /// `c` in `e(t,x₀) − t^{3/2}/(6π²) ≈ c t^{(3−η)/2}`.
    pub e_x0_coefficient: Option<f64>,
    pub window: f64,
}

/// What the singular correction predicts at the centre.
#[derive(Debug, Serialize)]
pub struct Prediction {
    pub exponent: f64,
    pub coefficient: f64,
}

#[derive(Debug, Serialize)]
pub struct CorrectionSummary {
    pub epsilon: f64,
    pub max_n: usize,
    pub mc_samples: u64,
    pub seed: u64,
    pub at_t_max: SeriesSummary,
}

#[derive(Debug, Serialize)]
pub struct SeriesSummary {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    pub terms: Vec<f64>,
    pub ratio: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Run-dependent fields, kept apart so the rest of the summary is
/// reproducible byte for byte.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub generated_unix: u64,
    pub cache_hit: bool,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub x0: Point,
    pub spectrum: SpectrumSummary,
    pub weyl_leading_ratio: f64,
    pub fits: Fits,
    pub prediction: Option<Prediction>,
    pub correction: Option<CorrectionSummary>,
    pub assertions: Vec<Assertion>,
    pub metadata: Metadata,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Loads the configured spectrum from the cache, solving on a miss.
pub fn spectrum(cfg: &ExperimentConfig) -> Result<(Spectrum, bool), CliError> {
    let problem = cfg.discretization()?;
    let v = cfg.potential()?;
    let dir = cache_dir(&std::env::temp_dir().join("weyl-cache"));
    Ok(load_or_solve(&dir, &problem, v.as_ref())?)
}

pub fn t_grid(cfg: &ExperimentConfig, t_trust: f64) -> Result<Vec<f64>, CliError> {
    let hi = cfg.grid.t_max.unwrap_or(t_trust);
    let lo = cfg.grid.t_min.unwrap_or(0.1 * t_trust);
    let n = cfg.grid.points;
    if hi > t_trust {
        return Err(CliError::Config(format!("grid.t_max = {hi} exceeds t_trust = {t_trust}")));
    }
    if !(lo > 0.0 && lo < hi && n >= 8) {
        return Err(CliError::Config(format!("need 0 < t_min < t_max and at least 8 points (t_min = {lo}, t_max = {hi}, points = {n})")));
    }
    Ok((0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let (s, cache_hit) = spectrum(cfg)?;
    let ts = t_grid(cfg, s.t_trust)?;
    let x0 = cfg.probe_point();
    let vol = cfg.volume();
    let pd = s.point_density(&x0);
    let v = cfg.radial_potential()?;
    let singular = v.gamma != 0.0;
    let params = if singular { Some(cfg.correction_params(&v)?) } else { None };
    let geom = cfg.geometry();

    let mut rows = Vec::with_capacity(ts.len());
    let mut last_series: Option<SeriesEstimate> = None;
    for &t in &ts {
        let n = s.counting(t)? as f64;
        let e = pd.at(t);
        let free = weyl_free(t);
        let corrected = match &params {
            Some(p) => {
                let series = r0_series(t, &x0, &v, &geom, p)?;
                let c = corrected_weyl_from(t, series.value);
                last_series = Some(series);
                c
            }
            None => free,
        };
        rows.push(ReportRow {
            t,
            n,
            e_x0: e,
            weyl_free: free,
            weyl_corrected: corrected,
            resid_n: n - vol * free,
            resid_e: e - corrected,
        });
    }

    let window = cfg.grid.window;
    let resid_free: Vec<f64> = rows.iter().map(|r| r.e_x0 - r.weyl_free).collect();
    let resid_n: Vec<f64> = rows.iter().map(|r| r.resid_n).collect();
    let exponent = (3.0 - v.eta) / 2.0;
    let fits = Fits {
        e_x0: fit_remainder_exponent(&ts, &resid_free, Some(window), 0.0).ok(),
        n: fit_remainder_exponent(&ts, &resid_n, Some(window), 0.0).ok(),
        e_x0_coefficient: if singular { fit_coefficient(&ts, &resid_free, exponent, window).ok() } else { None },
        window,
    };
    let last = rows.last().expect("grid has at least 8 points");
    let weyl_leading_ratio = last.n / (vol * last.weyl_free);

    let prediction = singular.then(|| Prediction {
        exponent,
        coefficient: -0.5 * v.gamma * xi_eta_origin_closed(v.eta),
    });
    let correction = match (params, last_series) {
        (Some(p), Some(series)) => Some(CorrectionSummary {
            epsilon: p.epsilon,
            max_n: p.max_n,
            mc_samples: p.mc_samples,
            seed: p.seed,
            at_t_max: SeriesSummary {
                t: last.t,
                value: series.value,
                stderr: series.stderr,
                terms: series.terms.iter().map(|e| e.mean).collect(),
                ratio: series.ratio,
                tail_bound: series.tail_bound,
            },
        }),
        _ => None,
    };

    let mut assertions = Vec::new();
    let a = &cfg.assert;
    if let Some([lo, hi]) = a.e_exponent {
        let (passed, detail) = match &fits.e_x0 {
            Some(f) => ((lo..=hi).contains(&f.slope), format!("slope {} in [{lo}, {hi}]", f.slope)),
            None => (false, "fit failed".to_string()),
        };
        assertions.push(Assertion {
            name: "e_exponent".into(),
            passed,
            detail,
        });
    }
    if let Some(max) = a.n_exponent_max {
        let (passed, detail) = match &fits.n {
            Some(f) => (f.slope <= max, format!("slope {} <= {max}", f.slope)),
            None => (false, "fit failed".to_string()),
        };
        assertions.push(Assertion {
            name: "n_exponent_max".into(),
            passed,
            detail,
        });
    }
    if let Some(tol) = a.leading_ratio_tol {
        assertions.push(Assertion {
            name: "leading_ratio_tol".into(),
            passed: (weyl_leading_ratio - 1.0).abs() <= tol,
            detail: format!("ratio {weyl_leading_ratio} within {tol} of 1"),
        });
    }

    let summary = Summary {
        schema: SCHEMA,
        config: cfg.clone(),
        x0,
        spectrum: SpectrumSummary {
            dim: s.dim(),
            lambda_basis: s.lambda_basis(),
            t_trust: s.t_trust,
            digest: spectrum_digest(&s),
        },
        weyl_leading_ratio,
        fits,
        prediction,
        correction,
        assertions,
        metadata: Metadata {
            generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            cache_hit,
            version: env!("CARGO_PKG_VERSION"),
        },
    };
    write_outputs(&cfg.output.dir, &rows, &summary, cfg.output.plot)?;
    Ok(summary)
}

fn write_outputs(dir: &Path, rows: &[ReportRow], summary: &Summary, plot: bool) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let csv = render_csv(rows)?;
    atomic_write(&dir.join("report.csv"), csv.as_bytes())?;
    let mut json = serde_json::to_vec_pretty(summary)?;
    json.push(b'\n');
    atomic_write(&dir.join("summary.json"), &json)?;
    let svg_path = dir.join("plot.svg");
    if plot {
        atomic_write(&svg_path, render_svg(rows).as_bytes())?;
    }
    Ok(())
}

pub fn render_csv(rows: &[ReportRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([r.t, r.n, r.e_x0, r.weyl_free, r.weyl_corrected, r.resid_n, r.resid_e].map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Both residuals against `t`. Every annotation is a value printed verbatim
/// from the CSV.
pub fn render_svg(rows: &[ReportRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 60.0;
    let (t0, t1) = (rows[0].t, rows[rows.len() - 1].t);
    let series: [(&str, &str, Vec<f64>); 2] = [
        ("resid_N", "#1f77b4", rows.iter().map(|r| r.resid_n).collect()),
        ("resid_e", "#d62728", rows.iter().map(|r| r.resid_e).collect()),
    ];
    let lo = series.iter().flat_map(|s| s.2.iter()).cloned().fold(f64::INFINITY, f64::min);
    let hi = series.iter().flat_map(|s| s.2.iter()).cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let px = |t: f64| M + (W - 2.0 * M) * (t - t0) / (t1 - t0).max(f64::MIN_POSITIVE);
    let py = |y: f64| H - M - (H - 2.0 * M) * (y - lo) / span;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    for (i, (name, colour, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = rows.iter().zip(ys).map(|(r, &y)| format!("{:.2},{:.2}", px(r.t), py(y))).collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{colour}\">{name}</text>\n",
            W - M - 60.0,
            M + 16.0 + 16.0 * i as f64
        ));
    }
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!("<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{text}</text>\n")
    };
    out.push_str(&label(M, H - M + 18.0, "start", t0.to_string()));
    out.push_str(&label(W - M, H - M + 18.0, "end", t1.to_string()));
    out.push_str(&label(M - 6.0, py(lo), "end", lo.to_string()));
    out.push_str(&label(M - 6.0, py(hi) + 10.0, "end", hi.to_string()));
    out.push_str(&label(0.5 * W, H - 12.0, "middle", "t".to_string()));
    out.push_str("</svg>\n");
    out
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir: PathBuf = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
