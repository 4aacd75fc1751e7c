//! JSON run configuration: schema, defaults, validation and conversion into
//! library types.
//!
//! Every field except the scene's arms and `source.sigma_k` has a default.
//! After loading, the config is re-serialized with all defaults filled in;
//! that text is echoed next to the outputs and its SHA-256 identifies the run.

use std::fmt;
use std::path::{Path, PathBuf};

use qmirror::bench::{Arm, ArmRole, Element, Mask, PixelGrid, RasterMask, Shape};
use qmirror::model::{PumpModel, Units, Vec3};
use qmirror::sim::{Background, ScaleSweep, Scene, DEFAULT_SMOOTHING};
use qmirror::source::{CrystalPlane, SamplingLaw, SpdcConfig};
use qmirror::verify::{OracleOptions, SweepConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    VerifyLaws,
    LensLaw,
    FoldCheck,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Simulate => "simulate",
            Mode::VerifyLaws => "verify-laws",
            Mode::LensLaw => "lens-law",
            Mode::FoldCheck => "fold-check",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitsSpec {
    #[default]
    Normalized,
    Si,
}

impl From<UnitsSpec> for Units {
    fn from(u: UnitsSpec) -> Self {
        match u {
            UnitsSpec::Normalized => Units::Normalized,
            UnitsSpec::Si => Units::Si,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub units: UnitsSpec,
    pub seed: u64,
    pub scene: Option<SceneSpec>,
    pub analysis: AnalysisSpec,
    pub thresholds: Thresholds,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            units: UnitsSpec::default(),
            seed: 1,
            scene: None,
            analysis: AnalysisSpec::default(),
            thresholds: Thresholds::default(),
            sweep: SweepSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    pub pump: PumpSpec,
    pub source: SourceSpec,
    pub n_pairs: u64,
    pub signal_arm: Option<ArmSpec>,
    pub idler_arm: Option<ArmSpec>,
    pub background: Option<BackgroundSpec>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            pump: PumpSpec::default(),
            source: SourceSpec::default(),
            n_pairs: 100_000,
            signal_arm: None,
            idler_arm: None,
            background: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpKindSpec {
    #[default]
    Plane,
    Spherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSpec {
    pub kind: PumpKindSpec,
    /// Exactly one of `omega_p` and `wavelength`; normalized units default
    /// to `omega_p = 1`.
    pub omega_p: Option<f64>,
    pub wavelength: Option<f64>,
    /// Signed curvature radius, spherical pumps only.
    pub radius: Option<f64>,
    pub axis: [f64; 3],
    pub vertex: [f64; 3],
}

impl Default for PumpSpec {
    fn default() -> Self {
        Self {
            kind: PumpKindSpec::Plane,
            omega_p: None,
            wavelength: None,
            radius: None,
            axis: [0.0, 0.0, 1.0],
            vertex: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawSpec {
    #[default]
    Gaussian,
    UniformDisk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSpec {
    /// Signal band `[min, max]`; defaults to the degenerate `omega_p / 2`.
    pub omega_s: Option<[f64; 2]>,
    pub sigma_k: Option<f64>,
    pub law: LawSpec,
    pub spot_radius: f64,
    pub crystal_point: [f64; 3],
    /// Defaults to the pump axis.
    pub crystal_normal: Option<[f64; 3]>,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            omega_s: None,
            sigma_k: None,
            law: LawSpec::Gaussian,
            spot_radius: 0.0,
            crystal_point: [0.0; 3],
            crystal_normal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    #[serde(default)]
    pub origin: [f64; 3],
    #[serde(default = "z_axis")]
    pub axis: [f64; 3],
    pub elements: Vec<ElementSpec>,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    FreeSpace { d: f64 },
    ThinLens { f: f64, aperture_radius: f64 },
    Mask(MaskSpec),
    PlaneMirror,
    Bucket { radius: f64 },
    ScanningDetector { nx: usize, ny: usize, pitch: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSpec {
    Open,
    Opaque,
    Shapes(Vec<ShapeSpec>),
    /// Two slits of `width x height` (unbounded if `height` is absent).
    DoubleSlit {
        separation: f64,
        width: f64,
        height: Option<f64>,
    },
    /// P2/P5 graymap, path relative to the config file.
    Pgm {
        path: PathBuf,
        pitch: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Rect { center: [f64; 2], size: [f64; 2] },
    Slit { x: f64, width: f64 },
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackgroundSpec {
    pub dark_mean: f64,
    pub accidental_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub smoothing: usize,
    pub scale_sweep: [f64; 3],
    /// Pixels enter the fold chi-square when both images together reach this.
    pub chi2_min_combined: u64,
    /// Seed of the folded run; defaults to `seed + 1`.
    pub fold_seed: Option<u64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        let s = ScaleSweep::default();
        Self {
            smoothing: DEFAULT_SMOOTHING,
            scale_sweep: [s.min, s.max, s.step],
            chi2_min_combined: 40,
            fold_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnificationThreshold {
    pub expected: f64,
    pub tolerance: f64,
}

/// Acceptance thresholds; absent entries are not checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub magnification: Option<MagnificationThreshold>,
    pub singles_contrast_max: Option<f64>,
    pub coincidence_contrast_min: Option<f64>,
    pub reduced_chi2: Option<[f64; 2]>,
    pub slope: Option<[f64; 2]>,
    /// Residuals below this multiple of `p` count as exact.
    pub residual_floor: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            magnification: None,
            singles_contrast_max: None,
            coincidence_contrast_min: None,
            reduced_chi2: Some([0.8, 1.2]),
            slope: Some([1.9, 2.1]),
            residual_floor: Some(1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub draws: usize,
    pub h_rel: Vec<f64>,
    pub p_over_r: [f64; 2],
    pub split: [f64; 2],
    pub theta_ps_max: f64,
    pub max_q_over_p: f64,
    pub separation: f64,
    pub richardson_levels: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let s = SweepConfig::default();
        Self {
            draws: s.draws,
            h_rel: s.h_rel,
            p_over_r: [s.p_over_r.0, s.p_over_r.1],
            split: [s.split.0, s.split.1],
            theta_ps_max: s.theta_ps_max,
            max_q_over_p: s.max_q_over_p,
            separation: s.options.separation,
            richardson_levels: s.options.richardson_levels,
        }
    }
}

/// Command-line values that replace config entries before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub pairs: Option<u64>,
}

/// A validated config together with the library objects built from it.
#[derive(Debug, Clone)]
pub struct Loaded {
    /// Config with every default filled in.
    pub config: RunConfig,
    pub scene: Option<Scene>,
    /// First mask of the signal arm, the object for magnification estimates.
    pub object: Option<Mask>,
    pub sweep: SweepConfig,
    pub scale_sweep: ScaleSweep,
}

impl Loaded {
    /// Pretty JSON of the resolved config.
    pub fn resolved_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.config).expect("config serializes");
        text.push('\n');
        text
    }

    /// Hex SHA-256 of [`Loaded::resolved_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.resolved_json().as_bytes()))
    }
}

#[derive(Default)]
struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, path: &str, msg: impl fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.push(path, format!("must be a positive number, got {v}"));
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.push(path, format!("must be >= 0, got {v}"));
        }
    }
}

pub fn load_config(path: &Path, mode: Mode, overrides: &Overrides) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base, mode, overrides)
}

/// Parses and validates config text; relative mask paths resolve against `base`.
pub fn parse_config(
    text: &str,
    base: &Path,
    mode: Mode,
    overrides: &Overrides,
) -> Result<Loaded, ConfigError> {
    let mut config: RunConfig = serde_json::from_str(text)?;
    let mut errors = Errors::default();

    match config.mode {
        Some(m) if m != mode => errors.push("mode", format!("config is for `{m}`, not `{mode}`")),
        _ => config.mode = Some(mode),
    }
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    let units = config.units;
    if let Some(pairs) = overrides.pairs {
        config.scene.get_or_insert_with(SceneSpec::default).n_pairs = pairs;
    }

    let needs_scene = matches!(mode, Mode::Simulate | Mode::FoldCheck);
    let mut scene = None;
    let mut object = None;
    match (&mut config.scene, needs_scene) {
        (Some(spec), true) => {
            let built = build_scene(spec, units, config.seed, base, &mut errors);
            if let Some((s, o)) = built {
                scene = Some(s);
                object = o;
            }
        }
        (None, true) => errors.push("scene", "missing"),
        _ => {}
    }

    let a = &config.analysis;
    if a.smoothing == 0 {
        errors.push("analysis.smoothing", "must be >= 1");
    }
    let [min, max, step] = a.scale_sweep;
    if !(min > 0.0 && max >= min && step > 0.0) {
        errors.push(
            "analysis.scale_sweep",
            "expected [min > 0, max >= min, step > 0]",
        );
    }
    if config.analysis.fold_seed.is_none() {
        config.analysis.fold_seed = Some(config.seed.wrapping_add(1));
    }

    let t = &config.thresholds;
    if let Some(m) = t.magnification {
        errors.positive("thresholds.magnification.expected", m.expected);
        errors.non_negative("thresholds.magnification.tolerance", m.tolerance);
    }
    for (path, range) in [
        ("thresholds.reduced_chi2", t.reduced_chi2),
        ("thresholds.slope", t.slope),
    ] {
        if let Some([lo, hi]) = range {
            if !(lo <= hi) {
                errors.push(path, "expected [min, max] with min <= max");
            }
        }
    }

    let sweep = build_sweep(&config.sweep, config.seed, &mut errors);

    if !errors.0.is_empty() {
        return Err(ConfigError::Invalid(errors.0));
    }
    Ok(Loaded {
        config,
        scene,
        object,
        sweep,
        scale_sweep: ScaleSweep { min, max, step },
    })
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn build_sweep(spec: &SweepSpec, seed: u64, errors: &mut Errors) -> SweepConfig {
    if spec.draws == 0 {
        errors.push("sweep.draws", "must be >= 1");
    }
    if spec.h_rel.len() < 4 {
        errors.push("sweep.h_rel", "need at least 4 heights");
    }
    for (path, [lo, hi]) in [
        ("sweep.p_over_r", spec.p_over_r),
        ("sweep.split", spec.split),
    ] {
        if !(lo > 0.0 && lo <= hi) {
            errors.push(path, "expected [min > 0, max >= min]");
        }
    }
    if !(spec.split[1] < 1.0) {
        errors.push("sweep.split", "signal fraction must stay below 1");
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&spec.theta_ps_max) {
        errors.push("sweep.theta_ps_max", "must lie in [0, pi/2)");
    }
    errors.positive("sweep.max_q_over_p", spec.max_q_over_p);
    errors.positive("sweep.separation", spec.separation);
    if spec.richardson_levels == 0 {
        errors.push("sweep.richardson_levels", "must be >= 1");
    }
    SweepConfig {
        draws: spec.draws,
        seed,
        h_rel: spec.h_rel.clone(),
        p_over_r: (spec.p_over_r[0], spec.p_over_r[1]),
        split: (spec.split[0], spec.split[1]),
        theta_ps_max: spec.theta_ps_max,
        max_q_over_p: spec.max_q_over_p,
        options: OracleOptions {
            separation: spec.separation,
            richardson_levels: spec.richardson_levels,
        },
    }
}

/// Builds the scene, filling derived defaults into `spec`. Returns `None`
/// when any error was recorded.
fn build_scene(
    spec: &mut SceneSpec,
    units: UnitsSpec,
    seed: u64,
    base: &Path,
    errors: &mut Errors,
) -> Option<(Scene, Option<Mask>)> {
    let start = errors.0.len();
    let c = Units::from(units).c();

    let omega_p = match (spec.pump.omega_p, spec.pump.wavelength, units) {
        (Some(_), Some(_), _) => {
            errors.push("scene.pump", "give either omega_p or wavelength, not both");
            None
        }
        (Some(w), None, _) => Some(w),
        (None, Some(l), _) => {
            errors.positive("scene.pump.wavelength", l);
            Some(std::f64::consts::TAU * c / l)
        }
        (None, None, UnitsSpec::Normalized) => Some(1.0),
        (None, None, UnitsSpec::Si) => {
            errors.push("scene.pump.omega_p", "missing (or give wavelength)");
            None
        }
    };
    if let Some(w) = omega_p {
        errors.positive("scene.pump.omega_p", w);
        if spec.pump.wavelength.is_none() {
            spec.pump.omega_p = Some(w);
        }
    }
    let axis = vec3(spec.pump.axis);
    let vertex = vec3(spec.pump.vertex);
    match (spec.pump.kind, spec.pump.radius) {
        (PumpKindSpec::Plane, Some(_)) => {
            errors.push("scene.pump.radius", "only spherical pumps have a radius")
        }
        (PumpKindSpec::Spherical, None) => errors.push("scene.pump.radius", "missing"),
        (PumpKindSpec::Spherical, Some(r)) if !(r.is_finite() && r != 0.0) => {
            errors.push("scene.pump.radius", "must be finite and nonzero")
        }
        _ => {}
    }
    let pump = omega_p.and_then(|w| {
        let built = match (spec.pump.kind, spec.pump.radius) {
            (PumpKindSpec::Spherical, Some(r)) => {
                PumpModel::spherical(axis, w, vertex, r, units.into())
            }
            _ => PumpModel::plane(axis, w, units.into()),
        };
        built.map_err(|e| errors.push("scene.pump", e)).ok()
    });

    let src = &mut spec.source;
    if let Some(w) = omega_p {
        let band = *src.omega_s.get_or_insert([0.5 * w, 0.5 * w]);
        for v in band {
            if !(v.is_finite() && v > 0.0 && v < w) {
                errors.push(
                    "scene.source.omega_s",
                    format!("{v} must lie in (0, omega_p = {w}); omega_s must be below omega_p"),
                );
            }
        }
        if band[0] > band[1] {
            errors.push(
                "scene.source.omega_s",
                "expected [min, max] with min <= max",
            );
        }
    }
    match src.sigma_k {
        None => errors.push("scene.source.sigma_k", "missing"),
        Some(s) => errors.non_negative("scene.source.sigma_k", s),
    }
    errors.non_negative("scene.source.spot_radius", src.spot_radius);
    let normal = *src.crystal_normal.get_or_insert(spec.pump.axis);
    let crystal = CrystalPlane::new(vec3(src.crystal_point), vec3(normal))
        .map_err(|e| errors.push("scene.source.crystal_normal", e))
        .ok();

    if let Some(bg) = spec.background {
        errors.non_negative("scene.background.dark_mean", bg.dark_mean);
        errors.non_negative("scene.background.accidental_mean", bg.accidental_mean);
    }

    let mut object = None;
    let mut arms = Vec::new();
    for (name, role, arm) in [
        ("signal_arm", ArmRole::Signal, &spec.signal_arm),
        ("idler_arm", ArmRole::Idler, &spec.idler_arm),
    ] {
        let path = format!("scene.{name}");
        let Some(arm) = arm else {
            errors.push(&path, "missing");
            continue;
        };
        if role == ArmRole::Idler
            && arm
                .elements
                .iter()
                .any(|e| matches!(e, ElementSpec::Mask(_)))
        {
            errors.push(&path, "object must be in signal arm only");
            continue;
        }
        let elements: Vec<Element> = arm
            .elements
            .iter()
            .enumerate()
            .filter_map(|(i, e)| element(e, base, &format!("{path}.elements[{i}]"), errors))
            .collect();
        if elements.len() != arm.elements.len() {
            continue;
        }
        if role == ArmRole::Signal {
            object = elements.iter().find_map(|e| match e {
                Element::Mask(m) => Some(m.clone()),
                _ => None,
            });
        }
        match Arm::new(role, vec3(arm.origin), vec3(arm.axis), elements) {
            Ok(a) => arms.push(a),
            Err(e) => errors.push(&path, e),
        }
    }

    if errors.0.len() > start {
        return None;
    }
    let idler_arm = arms.pop()?;
    let signal_arm = arms.pop()?;
    let band = spec.source.omega_s?;
    let scene = Scene {
        pump: pump?,
        spdc: SpdcConfig {
            crystal: crystal?,
            spectral_band: (band[0], band[1]),
            sigma_k: spec.source.sigma_k?,
            law: match spec.source.law {
                LawSpec::Gaussian => SamplingLaw::Gaussian,
                LawSpec::UniformDisk => SamplingLaw::UniformDisk,
            },
            spot_radius: spec.source.spot_radius,
            seed,
        },
        signal_arm,
        idler_arm,
        n_pairs: spec.n_pairs,
        background: spec.background.map(|b| Background {
            dark_mean: b.dark_mean,
            accidental_mean: b.accidental_mean,
        }),
    };
    match scene.validate() {
        Ok(()) => Some((scene, object)),
        Err(e) => {
            errors.push("scene", e);
            None
        }
    }
}

fn element(spec: &ElementSpec, base: &Path, path: &str, errors: &mut Errors) -> Option<Element> {
    Some(match spec {
        ElementSpec::FreeSpace { d } => Element::FreeSpace { d: *d },
        ElementSpec::ThinLens { f, aperture_radius } => Element::ThinLens {
            f: *f,
            aperture_radius: *aperture_radius,
        },
        ElementSpec::PlaneMirror => Element::PlaneMirror,
        ElementSpec::Bucket { radius } => Element::BucketDetector { radius: *radius },
        ElementSpec::ScanningDetector { nx, ny, pitch } => Element::ScanningDetector(PixelGrid {
            nx: *nx,
            ny: *ny,
            pitch: *pitch,
        }),
        ElementSpec::Mask(m) => Element::Mask(mask(m, base, path, errors)?),
    })
}

fn mask(spec: &MaskSpec, base: &Path, path: &str, errors: &mut Errors) -> Option<Mask> {
    let m = match spec {
        MaskSpec::Open => Mask::Open,
        MaskSpec::Opaque => Mask::Opaque,
        MaskSpec::Shapes(shapes) => Mask::Shapes(shapes.iter().map(shape).collect()),
        MaskSpec::DoubleSlit {
            separation,
            width,
            height,
        } => match height {
            None => Mask::double_slit(*separation, *width),
            Some(h) => Mask::Shapes(
                [-0.5, 0.5]
                    .iter()
                    .map(|s| Shape::Rect {
                        center: [s * separation, 0.0],
                        size: [*width, *h],
                    })
                    .collect(),
            ),
        },
        MaskSpec::Pgm { path: file, pitch } => {
            match RasterMask::from_pgm(base.join(file), *pitch) {
                Ok(r) => Mask::Raster(r),
                Err(e) => {
                    errors.push(path, e);
                    return None;
                }
            }
        }
    };
    if let Err(e) = m.validate() {
        errors.push(path, e);
        return None;
    }
    Some(m)
}

fn shape(spec: &ShapeSpec) -> Shape {
    match spec {
        ShapeSpec::Rect { center, size } => Shape::Rect {
            center: *center,
            size: *size,
        },
        ShapeSpec::Slit { x, width } => Shape::Slit {
            x: *x,
            width: *width,
        },
        ShapeSpec::Disk { center, radius } => Shape::Disk {
            center: *center,
            radius: *radius,
        },
        ShapeSpec::Polygon { vertices } => Shape::Polygon {
            vertices: vertices.clone(),
        },
    }
}
