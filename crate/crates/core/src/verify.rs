//! Brute-force ray-tracing oracle for the quantum-mirror imaging laws.
//!
//! Two signal rays leave an object point for two nearby crystal points, are
//! converted by [`crossing_transform`] with the local pump direction, and the
//! idler lines are intersected. The ray pair straddles the chief-ray crossing
//! along `e1`, perpendicular to the plane holding the chief-ray tilt, so the
//! intersection is the sagittal focus. Distances along the chief rays relate
//! to the axial distances by `p = Z_s cos(theta_ps)`, `q = Z_i cos(theta_pi)`.
//!
//! The pair intersection is an even function of the crystal separation, so
//! Richardson extrapolation in the separation removes the finite-fan bias.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::mirror::{
    crossing_transform, matched_idler_angle, pqm_image, sqm_image, MirrorError, SqmParams,
};
use crate::model::{transverse_basis, ModelError, PumpKind, PumpModel, Ray, Units, Vec3};
use crate::source::chunk_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error("idler rays are parallel: image at infinity")]
    NoIntersection,
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid step list: {0}")]
    InvalidSteps(String),
    #[error("residuals at the floating-point floor (max {max_residual:.3e}); no slope to fit")]
    DegenerateFit { max_residual: f64 },
}

/// Object point at axial distance `p` from the crystal and height `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectPoint {
    pub h: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChiefAngles {
    pub theta_ps: f64,
    pub theta_pi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Crystal-point separation relative to `p`.
    pub separation: f64,
    /// Number of halvings combined by Richardson extrapolation (1 = none).
    pub richardson_levels: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            separation: 1e-4,
            richardson_levels: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Axial coordinate of the idler intersection, from the crystal vertex.
    pub q_hat: f64,
    /// Coordinate of the intersection along the object-height direction.
    pub h_image_hat: f64,
    pub q_law: f64,
    pub h_image_law: f64,
    pub residual_q: f64,
    pub residual_h: f64,
}

/// Closest point of two lines, relative to `p1`'s frame.
fn closest_point(p1: &Vec3, d1: &Vec3, p2: &Vec3, d2: &Vec3) -> Result<Vec3, VerifyError> {
    let dd = d2 - d1;
    let n = d1.cross(&dd);
    let nn = n.norm_squared();
    if nn <= (f64::EPSILON * f64::EPSILON) * 1e-4 {
        return Err(VerifyError::NoIntersection);
    }
    let w = p2 - p1;
    let t1 = w.cross(d2).dot(&n) / nn;
    let t2 = w.cross(d1).dot(&n) / nn;
    Ok(0.5 * ((p1 + d1 * t1) + (p2 + d2 * t2)))
}

/// Richardson extrapolation of a sequence computed at steps `delta / 2^k`
/// with an error expansion in even powers of the step.
fn richardson(mut values: Vec<Vec3>) -> Vec3 {
    let mut factor = 4.0;
    while values.len() > 1 {
        values = values
            .windows(2)
            .map(|w| (w[1] * factor - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    values[0]
}

/// Images one object point through the quantum mirror by ray tracing.
///
/// The object sits at `vertex + h e1 + p tan(theta_ps) e2 + p axis`, so its
/// chief ray meets the crystal at `vertex + h e1` with tilt `theta_ps` in the
/// `e2`-axis plane. `chief.theta_pi` only enters the law used for residuals.
pub fn raytrace_image_point(
    source: ObjectPoint,
    pump: &PumpModel,
    omega_s: f64,
    chief: ChiefAngles,
    options: &OracleOptions,
) -> Result<OracleResult, VerifyError> {
    let ObjectPoint { h, p } = source;
    if !(p.is_finite() && p > 0.0) {
        return Err(VerifyError::InvalidSource(format!("p = {p} must be > 0")));
    }
    if !h.is_finite() {
        return Err(VerifyError::InvalidSource(format!("h = {h}")));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&chief.theta_ps) {
        return Err(VerifyError::InvalidSource(format!(
            "theta_ps = {}",
            chief.theta_ps
        )));
    }
    let omega_i = pump.omega_p() - omega_s;
    let axis = *pump.axis();
    let (e1, e2) = transverse_basis(&axis);
    let center = pump.vertex() + e1 * h;
    // object relative to the chief-ray crossing
    let object = e2 * (p * chief.theta_ps.tan()) + axis * p;

    let trace_pair = |delta: f64| -> Result<Vec3, VerifyError> {
        let mut lines = [(Vec3::zeros(), Vec3::zeros()); 2];
        for (line, sign) in lines.iter_mut().zip([-0.5, 0.5]) {
            let offset = e1 * (sign * delta);
            let signal = Ray::new(center + offset, object - offset, omega_s)?;
            let idler = crossing_transform(&signal, pump, &(center + offset))?;
            *line = (offset, *idler.direction());
        }
        closest_point(&lines[0].0, &lines[0].1, &lines[1].0, &lines[1].1)
    };

    let levels = options.richardson_levels.max(1);
    let mut delta = options.separation * p;
    let mut estimates = Vec::with_capacity(levels);
    for _ in 0..levels {
        estimates.push(trace_pair(delta)?);
        delta *= 0.5;
    }
    let rel = richardson(estimates);
    let q_hat = rel.dot(&axis);
    let h_image_hat = h + rel.dot(&e1);

    let (q_law, h_image_law) = match pump.kind {
        PumpKind::Plane => {
            let z_s = p / chief.theta_ps.cos();
            let sol = pqm_image(z_s, omega_s, omega_i)?;
            (sol.q * chief.theta_pi.cos(), sol.magnification * h)
        }
        PumpKind::Spherical { radius, .. } => {
            let sol = sqm_image(&SqmParams {
                p,
                radius,
                omega_s,
                omega_i,
                theta_ps: chief.theta_ps,
                theta_pi: chief.theta_pi,
                h,
            })?;
            (sol.q, sol.magnification * h)
        }
    };
    Ok(OracleResult {
        q_hat,
        h_image_hat,
        q_law,
        h_image_law,
        residual_q: (q_hat - q_law).abs(),
        residual_h: (h_image_hat - h_image_law).abs(),
    })
}

/// Deviations of the oracle image from the spherical-mirror laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub h: f64,
    pub dq: f64,
    pub dh: f64,
}

fn sqm_pump(params: &SqmParams) -> Result<PumpModel, VerifyError> {
    Ok(PumpModel::spherical(
        Vec3::z(),
        params.omega_p(),
        Vec3::zeros(),
        params.radius,
        Units::Normalized,
    )?)
}

/// Oracle residuals for a spherical pump with vertex at the origin and axis `+z`.
pub fn residual_sqm(
    params: &SqmParams,
    options: &OracleOptions,
) -> Result<ResidualPoint, VerifyError> {
    let pump = sqm_pump(params)?;
    let r = raytrace_image_point(
        ObjectPoint {
            h: params.h,
            p: params.p,
        },
        &pump,
        params.omega_s,
        ChiefAngles {
            theta_ps: params.theta_ps,
            theta_pi: params.theta_pi,
        },
        options,
    )?;
    Ok(ResidualPoint {
        h: params.h,
        dq: r.residual_q,
        dh: r.residual_h,
    })
}

/// Least-squares line through `(ln x, ln y)`: returns `(slope, r_squared)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r_squared)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    /// Order of `dq` in `h`.
    pub slope: f64,
    pub r_squared: f64,
    pub points: Vec<ResidualPoint>,
}

/// Residuals at or below this multiple of `p` are treated as rounding noise.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

/// Fits the order of the image-distance residual over heights `h_list`.
pub fn convergence_order(
    params: &SqmParams,
    h_list: &[f64],
    options: &OracleOptions,
) -> Result<ConvergenceFit, VerifyError> {
    if h_list.len() < 4 {
        return Err(VerifyError::InvalidSteps(format!(
            "need at least 4 heights, got {}",
            h_list.len()
        )));
    }
    if h_list
        .iter()
        .any(|h| !(h.is_finite() && *h > 0.0 && *h <= 0.1 * params.p))
    {
        return Err(VerifyError::InvalidSteps(
            "heights must lie in (0, 0.1 p]".into(),
        ));
    }
    let (lo, hi) = h_list.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), h| {
        (lo.min(*h), hi.max(*h))
    });
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(VerifyError::InvalidSteps(
            "heights must span at least two decades".into(),
        ));
    }
    let points = h_list
        .iter()
        .map(|&h| residual_sqm(&SqmParams { h, ..*params }, options))
        .collect::<Result<Vec<_>, _>>()?;
    fit_residuals(points, params.p)
}

/// Fits `dq` against `h`; fails if any residual sits at the rounding floor.
pub fn fit_residuals(points: Vec<ResidualPoint>, p: f64) -> Result<ConvergenceFit, VerifyError> {
    let floor = RESIDUAL_FLOOR * p;
    if points.iter().any(|r| r.dq <= floor) {
        let max_residual = points.iter().map(|r| r.dq).fold(0.0, f64::max);
        return Err(VerifyError::DegenerateFit { max_residual });
    }
    let hs: Vec<f64> = points.iter().map(|r| r.h).collect();
    let dqs: Vec<f64> = points.iter().map(|r| r.dq).collect();
    let (slope, r_squared) = fit_loglog(&hs, &dqs);
    Ok(ConvergenceFit {
        slope,
        r_squared,
        points,
    })
}

/// Random spherical-mirror draws with matched chief angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub draws: usize,
    pub seed: u64,
    /// Object heights relative to `p`.
    pub h_rel: Vec<f64>,
    /// Range of `p / |R|`.
    pub p_over_r: (f64, f64),
    /// Range of `omega_s / omega_p`.
    pub split: (f64, f64),
    pub theta_ps_max: f64,
    /// Draws whose image lies farther than this multiple of `p` are redrawn.
    pub max_q_over_p: f64,
    pub options: OracleOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            draws: 1000,
            seed: 1,
            h_rel: vec![1e-5, 1e-4, 1e-3, 1e-2],
            p_over_r: (0.6, 5.0),
            split: (0.3, 0.7),
            theta_ps_max: 0.5,
            max_q_over_p: 20.0,
            options: OracleOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Fitted(ConvergenceFit),
    Floor { max_residual: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    /// Drawn parameters; `h` is unused.
    pub params: SqmParams,
    pub q_law: f64,
    pub outcome: SweepOutcome,
}

impl SweepRow {
    /// Slope within `2 +- tol`, or every residual below `floor * p`.
    pub fn passes(&self, tol: f64, floor: f64) -> bool {
        match &self.outcome {
            SweepOutcome::Fitted(fit) => (fit.slope - 2.0).abs() <= tol,
            SweepOutcome::Floor { max_residual } => *max_residual < floor * self.params.p,
            SweepOutcome::Failed(_) => false,
        }
    }
}

fn draw_params<R: Rng>(cfg: &SweepConfig, rng: &mut R) -> Option<(SqmParams, f64)> {
    for _ in 0..10_000 {
        let radius = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let p = rng.random_range(cfg.p_over_r.0..=cfg.p_over_r.1);
        let omega_s = rng.random_range(cfg.split.0..=cfg.split.1);
        let omega_i = 1.0 - omega_s;
        let theta_ps = rng.random_range(0.0..=cfg.theta_ps_max);
        let Ok(params) = SqmParams::matched(p, radius, omega_s, omega_i, theta_ps, 0.0) else {
            continue;
        };
        match sqm_image(&params) {
            Ok(sol) if sol.q.abs() <= cfg.max_q_over_p * p => return Some((params, sol.q)),
            _ => continue,
        }
    }
    None
}

/// Runs the convergence study over random draws. Draw `i` uses substream `i`
/// of `cfg.seed`, so the rows do not depend on the thread count.
pub fn sweep_sqm(cfg: &SweepConfig) -> Vec<SweepRow> {
    (0..cfg.draws)
        .into_par_iter()
        .map(|index| {
            let mut rng = chunk_rng(cfg.seed, index as u64);
            let Some((params, q_law)) = draw_params(cfg, &mut rng) else {
                return SweepRow {
                    index,
                    params: SqmParams {
                        p: f64::NAN,
                        radius: f64::NAN,
                        omega_s: f64::NAN,
                        omega_i: f64::NAN,
                        theta_ps: f64::NAN,
                        theta_pi: f64::NAN,
                        h: 0.0,
                    },
                    q_law: f64::NAN,
                    outcome: SweepOutcome::Failed("no admissible draw".into()),
                };
            };
            let h_list: Vec<f64> = cfg.h_rel.iter().map(|r| r * params.p).collect();
            let outcome = match convergence_order(&params, &h_list, &cfg.options) {
                Ok(fit) => SweepOutcome::Fitted(fit),
                Err(VerifyError::DegenerateFit { max_residual }) => {
                    SweepOutcome::Floor { max_residual }
                }
                Err(e) => SweepOutcome::Failed(e.to_string()),
            };
            SweepRow {
                index,
                params,
                q_law,
                outcome,
            }
        })
        .collect()
}

/// One row per draw: parameters, law image distance, fitted order and the
/// largest residuals.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "index,p,radius,omega_s,omega_i,theta_ps,theta_pi,q_law,status,slope,r_squared,max_dq,max_dh"
    )?;
    for row in rows {
        let s = &row.params;
        let (status, slope, r2, max_dq, max_dh) = match &row.outcome {
            SweepOutcome::Fitted(fit) => (
                "fitted",
                fit.slope,
                fit.r_squared,
                fit.points.iter().map(|r| r.dq).fold(0.0, f64::max),
                fit.points.iter().map(|r| r.dh).fold(0.0, f64::max),
            ),
            SweepOutcome::Floor { max_residual } => {
                ("floor", f64::NAN, f64::NAN, *max_residual, f64::NAN)
            }
            SweepOutcome::Failed(_) => ("failed", f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        writeln!(
            out,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            row.index,
            s.p,
            s.radius,
            s.omega_s,
            s.omega_i,
            s.theta_ps,
            s.theta_pi,
            row.q_law,
            status,
            slope,
            r2,
            max_dq,
            max_dh
        )?;
    }
    Ok(())
}

/// Chief angles with `theta_pi` matched to `theta_ps`.
pub fn matched_angles(
    theta_ps: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<ChiefAngles, VerifyError> {
    Ok(ChiefAngles {
        theta_ps,
        theta_pi: matched_idler_angle(theta_ps, omega_s, omega_i)?,
    })
}
