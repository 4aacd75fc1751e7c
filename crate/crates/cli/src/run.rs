//! Subcommand drivers. Each returns a report whose `passed` flag decides the
//! exit status; artifacts embed the config hash and seed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use qmirror::export::{write_histogram_csv, write_pgm};
use qmirror::mirror::{ghost_thin_lens, MirrorError};
use qmirror::sim::{
    compare_images, estimate_magnification, image_contrast, run_folded, run_simulation,
    with_workers, ChiSquare, MagnificationEstimate,
};
use qmirror::verify::{sweep_sqm, write_sweep_csv, SweepOutcome};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, Loaded};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Domain(#[from] qmirror::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

fn domain<E: Into<qmirror::Error>>(e: E) -> RunError {
    RunError::Domain(e.into())
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One checked threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub metadata: Value,
}

impl Report {
    fn new(command: &'static str, loaded: &Loaded, results: Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command,
            config_sha256: loaded.hash(),
            seed: loaded.config.seed,
            results,
            checks,
            passed,
            metadata: json!({
                "generated_unix_s": now,
                "version": env!("CARGO_PKG_VERSION"),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn provenance(loaded: &Loaded) -> Vec<(&'static str, String)> {
    vec![
        ("config_sha256", loaded.hash()),
        ("seed", loaded.config.seed.to_string()),
    ]
}

fn prepare_out(out: &Path, loaded: &Loaded) -> Result<(), RunError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_file(
        &out.join("config.resolved.json"),
        loaded.resolved_json().as_bytes(),
    )
}

fn magnification_json(m: &MagnificationEstimate) -> Value {
    json!({ "m_hat": m.m_hat, "confidence": m.confidence, "inverted": m.inverted })
}

pub fn simulate(loaded: &Loaded, out: &Path, workers: usize) -> Result<Report, RunError> {
    let scene = loaded.scene.as_ref().expect("simulate config has a scene");
    prepare_out(out, loaded)?;
    let image = run_simulation(scene, workers).map_err(domain)?;
    let meta = provenance(loaded);
    let grid = image.grid;
    for (name, hist) in [
        ("coincidence", &image.coincidence),
        ("singles_idler", &image.singles_idler),
    ] {
        let mut csv = Vec::new();
        write_histogram_csv(hist, &grid, &meta, &mut csv).expect("write to memory");
        write_file(&out.join(format!("{name}.csv")), &csv)?;
        let mut pgm = Vec::new();
        write_pgm(hist, &meta, &mut pgm).expect("write to memory");
        write_file(&out.join(format!("{name}.pgm")), &pgm)?;
    }

    let window = loaded.config.analysis.smoothing;
    let contrast = |h| image_contrast(h, window).ok();
    let singles_contrast = contrast(&image.singles_idler);
    let coincidence_contrast = contrast(&image.coincidence);
    let magnification = match &loaded.object {
        Some(obj) if image.coincidence.total() > 0 => Some(estimate_magnification(
            &image.coincidence,
            grid,
            obj,
            &loaded.scale_sweep,
        )),
        _ => None,
    };

    let t = &loaded.config.thresholds;
    let mut checks = Vec::new();
    if let Some(m) = t.magnification {
        let value = match &magnification {
            Some(Ok(est)) => est.m_hat,
            _ => f64::NAN,
        };
        checks.push(Check {
            name: "magnification",
            value,
            limit: format!("{} +- {}", m.expected, m.tolerance),
            passed: (value - m.expected).abs() <= m.tolerance,
        });
    }
    if let Some(max) = t.singles_contrast_max {
        let value = singles_contrast.unwrap_or(f64::NAN);
        checks.push(Check {
            name: "singles_contrast",
            value,
            limit: format!("< {max}"),
            passed: value < max,
        });
    }
    if let Some(min) = t.coincidence_contrast_min {
        let value = coincidence_contrast.unwrap_or(f64::NAN);
        checks.push(Check {
            name: "coincidence_contrast",
            value,
            limit: format!("> {min}"),
            passed: value > min,
        });
    }

    let results = json!({
        "n_emitted": image.n_emitted,
        "singles_signal_bucket": image.singles_signal_bucket,
        "singles_idler_total": image.singles_idler.total(),
        "coincidence_total": image.coincidence.total(),
        "smoothing": window,
        "singles_contrast": singles_contrast,
        "coincidence_contrast": coincidence_contrast,
        "magnification": match &magnification {
            Some(Ok(m)) => magnification_json(m),
            Some(Err(e)) => json!({ "error": e.to_string() }),
            None => Value::Null,
        },
    });
    let report = Report::new("simulate", loaded, results, checks);
    write_file(&out.join("report.json"), report.to_json().as_bytes())?;
    Ok(report)
}

pub fn verify_laws(loaded: &Loaded, out: &Path, workers: usize) -> Result<Report, RunError> {
    prepare_out(out, loaded)?;
    let rows = with_workers(workers, || sweep_sqm(&loaded.sweep)).map_err(domain)?;
    let mut csv = Vec::new();
    for (k, v) in provenance(loaded) {
        writeln!(csv, "# {k}={v}").expect("write to memory");
    }
    write_sweep_csv(&rows, &mut csv).expect("write to memory");
    write_file(&out.join("residuals.csv"), &csv)?;

    let t = &loaded.config.thresholds;
    let [lo, hi] = t.slope.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    let floor = t.residual_floor.unwrap_or(0.0);
    let mut fitted = Vec::new();
    let (mut at_floor, mut failed, mut passing) = (0usize, 0usize, 0usize);
    for row in &rows {
        let ok = match &row.outcome {
            SweepOutcome::Fitted(fit) => {
                fitted.push(fit.slope);
                (lo..=hi).contains(&fit.slope)
            }
            SweepOutcome::Floor { max_residual } => {
                at_floor += 1;
                *max_residual < floor * row.params.p
            }
            SweepOutcome::Failed(_) => {
                failed += 1;
                false
            }
        };
        passing += ok as usize;
    }
    let min = fitted.iter().copied().fold(f64::INFINITY, f64::min);
    let max = fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut checks = Vec::new();
    if t.slope.is_some() {
        checks.push(Check {
            name: "draws_within_slope_or_floor",
            value: passing as f64,
            limit: format!(
                "== {} draws, slope in [{lo}, {hi}] or residuals < {floor:e} p",
                rows.len()
            ),
            passed: passing == rows.len(),
        });
    }
    let results = json!({
        "draws": rows.len(),
        "fitted": fitted.len(),
        "at_floor": at_floor,
        "failed": failed,
        "slope_min": if fitted.is_empty() { Value::Null } else { json!(min) },
        "slope_max": if fitted.is_empty() { Value::Null } else { json!(max) },
        "h_rel": loaded.sweep.h_rel,
    });
    let report = Report::new("verify-laws", loaded, results, checks);
    write_file(&out.join("report.json"), report.to_json().as_bytes())?;
    Ok(report)
}

pub fn fold_check(loaded: &Loaded, workers: usize) -> Result<(Report, ChiSquare), RunError> {
    let scene = loaded
        .scene
        .as_ref()
        .expect("fold-check config has a scene");
    let image = run_simulation(scene, workers).map_err(domain)?;
    let fold_seed = loaded.config.analysis.fold_seed.expect("filled at load");
    let folded = run_folded(scene, fold_seed, workers).map_err(domain)?;
    let chi = compare_images(
        &image.coincidence,
        &folded,
        loaded.config.analysis.chi2_min_combined,
    )
    .map_err(domain)?;
    let mut checks = Vec::new();
    if let Some([lo, hi]) = loaded.config.thresholds.reduced_chi2 {
        checks.push(Check {
            name: "reduced_chi2",
            value: chi.reduced,
            limit: format!("[{lo}, {hi}]"),
            passed: (lo..=hi).contains(&chi.reduced),
        });
    }
    let results = json!({
        "fold_seed": fold_seed,
        "coincidence_total": image.coincidence.total(),
        "folded_total": folded.total(),
        "chi2": chi.chi2,
        "dof": chi.dof,
        "pixels": chi.pixels,
        "reduced_chi2": chi.reduced,
    });
    Ok((Report::new("fold-check", loaded, results, checks), chi))
}

/// Parses `a:b:step` with `step > 0` and `a <= b`.
pub fn parse_range(s: &str) -> Result<Vec<f64>, RunError> {
    let bad = || RunError::Usage(format!("expected a:b:step, got `{s}`"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if !(a.is_finite() && b.is_finite() && step > 0.0 && a <= b) {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

/// CSV table of the two-photon thin lens over object distances (mm).
pub fn lens_law<W: Write>(f_mm: f64, s_o_mm: &[f64], mut out: W) -> Result<(), RunError> {
    let stdout = Path::new("<stdout>");
    writeln!(out, "s_o_mm,f_mm,s_i_mm,m").map_err(io_err(stdout))?;
    for &s_o in s_o_mm {
        let line = match ghost_thin_lens(s_o, f_mm) {
            Ok(sol) => format!("{s_o},{f_mm},{},{}", sol.q, sol.magnification),
            Err(MirrorError::ImageAtInfinity) => format!("{s_o},{f_mm},image at infinity,"),
            Err(e) => return Err(domain(e)),
        };
        writeln!(out, "{line}").map_err(io_err(stdout))?;
    }
    Ok(())
}
