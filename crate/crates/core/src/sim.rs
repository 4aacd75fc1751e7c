//! Monte Carlo ghost imaging: pairs are traced through both arms and the
//! idler pixel is counted in coincidence whenever the signal bucket fires.
//!
//! Work is split into the sampler's fixed chunks; each chunk fills its own
//! histograms and the integer sums are merged, so results depend only on the
//! seed and never on the worker count.

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

use crate::bench::{fold_klyshko, trace, trace_local, Arm, BenchError, Element, Mask, PixelGrid};
use crate::model::{PumpModel, Ray};
use crate::source::{chunk_count, chunk_rng, for_each_pair_in_chunk, SourceError, SpdcConfig};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("image is empty")]
    EmptyImage,
    #[error("no object feature found (peak correlation {peak:.3})")]
    NoFeature { peak: f64 },
    #[error("contrast undefined for an all-zero histogram")]
    UndefinedContrast,
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T, SimError>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Uncorrelated Poisson counts added after the pair run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Background {
    /// Mean dark counts per idler pixel (singles only).
    pub dark_mean: f64,
    /// Mean accidental coincidences per pixel (added to both histograms).
    pub accidental_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub pump: PumpModel,
    pub spdc: SpdcConfig,
    pub signal_arm: Arm,
    pub idler_arm: Arm,
    pub n_pairs: u64,
    pub background: Option<Background>,
}

impl Scene {
    pub fn validate(&self) -> Result<(), SimError> {
        self.spdc.validate(self.pump.omega_p())?;
        if self.idler_arm.masks().next().is_some() {
            return Err(SimError::Scene("object must be in signal arm only".into()));
        }
        if !matches!(self.signal_arm.detector(), Element::BucketDetector { .. }) {
            return Err(SimError::Scene(
                "signal arm must end in a bucket detector".into(),
            ));
        }
        match self.idler_arm.pixel_grid() {
            Some(g) if !g.is_empty() => {}
            Some(_) => return Err(SimError::Scene("idler detector has zero pixels".into())),
            None => {
                return Err(SimError::Scene(
                    "idler arm must end in a scanning detector".into(),
                ))
            }
        }
        let scale = self
            .signal_arm
            .length()
            .max(self.idler_arm.length())
            .max(1.0);
        for (name, arm) in [("signal", &self.signal_arm), ("idler", &self.idler_arm)] {
            if self.spdc.crystal.offset(&arm.frame.origin).abs() > 1e-12 * scale {
                return Err(SimError::Scene(format!(
                    "{name} arm is not anchored on the crystal plane"
                )));
            }
        }
        if let Some(bg) = self.background {
            for (name, v) in [
                ("dark_mean", bg.dark_mean),
                ("accidental_mean", bg.accidental_mean),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(SimError::Scene(format!("background {name} = {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> PixelGrid {
        self.idler_arm
            .pixel_grid()
            .expect("validated scene has a scanning idler detector")
    }
}

/// Integer counts on an `nx x ny` grid, row-major with `iy` as the row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram2 {
    pub nx: usize,
    pub ny: usize,
    counts: Vec<u64>,
}

impl Histogram2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            counts: vec![0; nx * ny],
        }
    }

    pub fn from_counts(nx: usize, ny: usize, counts: Vec<u64>) -> Result<Self, SimError> {
        if counts.len() != nx * ny {
            return Err(SimError::Parameter(format!(
                "{} counts for a {nx}x{ny} grid",
                counts.len()
            )));
        }
        Ok(Self { nx, ny, counts })
    }

    pub fn get(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.nx + ix]
    }

    pub fn add(&mut self, ix: usize, iy: usize, n: u64) {
        self.counts[iy * self.nx + ix] += n;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceImage {
    pub grid: PixelGrid,
    pub coincidence: Histogram2,
    pub singles_idler: Histogram2,
    pub singles_signal_bucket: u64,
    pub n_emitted: u64,
}

impl CoincidenceImage {
    fn empty(grid: PixelGrid) -> Self {
        Self {
            grid,
            coincidence: Histogram2::new(grid.nx, grid.ny),
            singles_idler: Histogram2::new(grid.nx, grid.ny),
            singles_signal_bucket: 0,
            n_emitted: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.coincidence.merge(&other.coincidence);
        self.singles_idler.merge(&other.singles_idler);
        self.singles_signal_bucket += other.singles_signal_bucket;
        self.n_emitted += other.n_emitted;
        self
    }
}

/// A ray that cannot advance along an arm never reaches its detector.
fn trace_or_miss(ray: &Ray, arm: &Arm) -> Option<crate::bench::DetectionEvent> {
    match trace(ray, arm) {
        Ok(ev) => Some(ev),
        Err(BenchError::NonAdvancing) => None,
        Err(e) => unreachable!("trace of a validated arm: {e}"),
    }
}

/// Substream for background counts, past any chunk index a run can reach.
const BACKGROUND_STREAM: u64 = u64::MAX;

fn add_background(
    image: &mut CoincidenceImage,
    bg: &Background,
    seed: u64,
) -> Result<(), SimError> {
    let mut rng = chunk_rng(seed, BACKGROUND_STREAM);
    let draw = |mean: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Result<u64, SimError> {
        if mean == 0.0 {
            return Ok(0);
        }
        let d = Poisson::new(mean).map_err(|e| SimError::Parameter(e.to_string()))?;
        Ok(d.sample(rng) as u64)
    };
    for iy in 0..image.grid.ny {
        for ix in 0..image.grid.nx {
            let dark = draw(bg.dark_mean, &mut rng)?;
            let acc = draw(bg.accidental_mean, &mut rng)?;
            image.singles_idler.add(ix, iy, dark + acc);
            image.coincidence.add(ix, iy, acc);
        }
    }
    Ok(())
}

/// Runs the two-arm experiment on `workers` threads.
pub fn run_simulation(scene: &Scene, workers: usize) -> Result<CoincidenceImage, SimError> {
    scene.validate()?;
    let grid = scene.grid();
    let n = scene.n_pairs;
    let seed = scene.spdc.seed;
    let chunks = with_workers(workers, || {
        (0..chunk_count(n))
            .into_par_iter()
            .map(|chunk| {
                let mut part = CoincidenceImage::empty(grid);
                for_each_pair_in_chunk(&scene.pump, &scene.spdc, seed, chunk, n, |pair| {
                    part.n_emitted += 1;
                    let idler = trace_or_miss(&pair.idler, &scene.idler_arm);
                    let signal = trace_or_miss(&pair.signal, &scene.signal_arm);
                    let bucket = signal.is_some_and(|ev| ev.fired);
                    if bucket {
                        part.singles_signal_bucket += 1;
                    }
                    if let Some((ix, iy)) = idler.and_then(|ev| ev.pixel) {
                        part.singles_idler.add(ix, iy, 1);
                        if bucket {
                            part.coincidence.add(ix, iy, 1);
                        }
                    }
                })?;
                Ok(part)
            })
            .collect::<Result<Vec<_>, SimError>>()
    })??;
    let mut image = chunks
        .into_iter()
        .fold(CoincidenceImage::empty(grid), CoincidenceImage::merge);
    if let Some(bg) = &scene.background {
        add_background(&mut image, bg, seed)?;
    }
    Ok(image)
}

/// Classical single-arm image of the Klyshko-folded setup.
///
/// Idler rays drawn from the source with `seed` are traced to the idler
/// detector, launched backwards from their pixel through the folded arm, and
/// the pixel is counted when the bucket fires. Requires a degenerate plane
/// pump.
pub fn run_folded(scene: &Scene, seed: u64, workers: usize) -> Result<Histogram2, SimError> {
    scene.validate()?;
    let (lo, hi) = scene.spdc.spectral_band;
    if lo != hi {
        return Err(BenchError::UnsupportedFold("source band is not monochromatic".into()).into());
    }
    let folded = fold_klyshko(&scene.signal_arm, &scene.idler_arm, &scene.pump, lo)?;
    let grid = scene.grid();
    let n = scene.n_pairs;
    let idler_arm = &scene.idler_arm;
    let parts = with_workers(workers, || {
        (0..chunk_count(n))
            .into_par_iter()
            .map(|chunk| {
                let mut hist = Histogram2::new(grid.nx, grid.ny);
                for_each_pair_in_chunk(&scene.pump, &scene.spdc, seed, chunk, n, |pair| {
                    let local = idler_arm.frame.to_local(&pair.idler);
                    let Ok((event, at_detector)) = trace_local(&local, idler_arm) else {
                        return;
                    };
                    let Some((ix, iy)) = event.pixel else { return };
                    let origin = idler_arm.frame.to_world(at_detector.origin());
                    let back = -idler_arm.frame.direction_to_world(at_detector.direction());
                    let ray = Ray::new(origin, back, at_detector.omega())
                        .expect("reversed detector ray is valid");
                    if trace_or_miss(&ray, &folded).is_some_and(|ev| ev.fired) {
                        hist.add(ix, iy, 1);
                    }
                })?;
                Ok(hist)
            })
            .collect::<Result<Vec<_>, SimError>>()
    })??;
    Ok(parts
        .into_iter()
        .fold(Histogram2::new(grid.nx, grid.ny), |mut acc, h| {
            acc.merge(&h);
            acc
        }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub dof: usize,
    pub reduced: f64,
    pub pixels: usize,
}

/// Two-sample Poisson chi-square between histograms of possibly different
/// totals, over pixels whose combined count is at least `min_combined`.
/// One degree of freedom is spent on the normalization ratio.
pub fn compare_images(
    a: &Histogram2,
    b: &Histogram2,
    min_combined: u64,
) -> Result<ChiSquare, SimError> {
    if (a.nx, a.ny) != (b.nx, b.ny) {
        return Err(SimError::Parameter("histogram shapes differ".into()));
    }
    let (na, nb) = (a.total() as f64, b.total() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(SimError::EmptyImage);
    }
    let k = na / nb;
    let mut chi2 = 0.0;
    let mut pixels = 0;
    for (&x, &y) in a.counts().iter().zip(b.counts()) {
        if x + y < min_combined || x + y == 0 {
            continue;
        }
        let (x, y) = (x as f64, y as f64);
        chi2 += (x - k * y).powi(2) / (x + k * k * y);
        pixels += 1;
    }
    if pixels < 2 {
        return Err(SimError::Parameter(format!(
            "only {pixels} pixels reach {min_combined} counts"
        )));
    }
    let dof = pixels - 1;
    Ok(ChiSquare {
        chi2,
        dof,
        reduced: chi2 / dof as f64,
        pixels,
    })
}

/// Grid of trial magnifications `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSweep {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for ScaleSweep {
    fn default() -> Self {
        Self {
            min: 0.25,
            max: 4.0,
            step: 0.01,
        }
    }
}

impl ScaleSweep {
    fn values(&self) -> Result<Vec<f64>, SimError> {
        if !(self.min > 0.0 && self.max >= self.min && self.step > 0.0) {
            return Err(SimError::Parameter(format!("scale sweep {self:?}")));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnificationEstimate {
    /// Magnitude of the best trial scale.
    pub m_hat: f64,
    /// Peak normalized cross-correlation.
    pub confidence: f64,
    /// `Some(true)` if the inverted template fits better, `None` if both
    /// orientations score the same (symmetric objects).
    pub inverted: Option<bool>,
}

/// Sub-pixel samples per axis when rendering the scaled object.
const TEMPLATE_SUPERSAMPLE: usize = 8;
/// Minimum peak correlation accepted as a detected feature.
pub const MIN_CONFIDENCE: f64 = 0.2;

fn ncc(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Scale of the object transmission that best matches the image, by
/// normalized cross-correlation over `sweep`, trying both orientations.
pub fn estimate_magnification(
    image: &Histogram2,
    grid: PixelGrid,
    object: &Mask,
    sweep: &ScaleSweep,
) -> Result<MagnificationEstimate, SimError> {
    if (image.nx, image.ny) != (grid.nx, grid.ny) {
        return Err(SimError::Parameter(
            "image does not match the pixel grid".into(),
        ));
    }
    if image.total() == 0 {
        return Err(SimError::EmptyImage);
    }
    let values: Vec<f64> = image.counts().iter().map(|&c| c as f64).collect();
    let scales = sweep.values()?;
    let scores: Vec<(f64, f64, f64)> = scales
        .par_iter()
        .map(|&s| {
            let score = |sign: f64| {
                let template: Vec<f64> = (0..grid.ny)
                    .flat_map(|iy| (0..grid.nx).map(move |ix| (ix, iy)))
                    .map(|(ix, iy)| {
                        let (x, y) = grid.center(ix, iy);
                        object.coverage(
                            sign * x / s,
                            sign * y / s,
                            grid.pitch / s,
                            TEMPLATE_SUPERSAMPLE,
                        )
                    })
                    .collect();
                ncc(&values, &template)
            };
            (s, score(1.0), score(-1.0))
        })
        .collect();
    let peaks: Vec<f64> = scores.iter().map(|(_, u, i)| u.max(*i)).collect();
    let peak = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak >= MIN_CONFIDENCE) {
        return Err(SimError::NoFeature { peak });
    }
    // coarse pixels leave runs of scales with identical templates; take the
    // middle of the first run that reaches the peak
    let tied = |k: usize| peaks[k] >= peak - 1e-12 * peak.abs();
    let first = (0..peaks.len())
        .find(|&k| tied(k))
        .expect("peak is attained");
    let last = (first..peaks.len())
        .take_while(|&k| tied(k))
        .last()
        .unwrap_or(first);
    let (_, upright, inverted) = scores[(first + last) / 2];
    let m_hat = if (first + last) % 2 == 0 {
        scores[(first + last) / 2].0
    } else {
        0.5 * (scores[(first + last) / 2].0 + scores[(first + last) / 2 + 1].0)
    };
    let orientation = if (upright - inverted).abs() <= 1e-12 {
        None
    } else {
        Some(inverted > upright)
    };
    Ok(MagnificationEstimate {
        m_hat,
        confidence: peak,
        inverted: orientation,
    })
}

/// Boxcar window used for contrast unless configured otherwise.
pub const DEFAULT_SMOOTHING: usize = 5;

/// Visibility `(max - min) / (max + min)` of the `window x window` boxcar
/// means, taken over windows that fit entirely inside the grid.
pub fn image_contrast(hist: &Histogram2, window: usize) -> Result<f64, SimError> {
    if window == 0 || window > hist.nx || window > hist.ny {
        return Err(SimError::Parameter(format!(
            "smoothing window {window} does not fit a {}x{} grid",
            hist.nx, hist.ny
        )));
    }
    if hist.total() == 0 {
        return Err(SimError::UndefinedContrast);
    }
    let (mut lo, mut hi) = (u64::MAX, 0u64);
    for y0 in 0..=hist.ny - window {
        for x0 in 0..=hist.nx - window {
            let sum: u64 = (y0..y0 + window)
                .flat_map(|iy| (x0..x0 + window).map(move |ix| (ix, iy)))
                .map(|(ix, iy)| hist.get(ix, iy))
                .sum();
            lo = lo.min(sum);
            hi = hi.max(sum);
        }
    }
    // window sums share one normalization, so it cancels
    Ok((hi - lo) as f64 / (hi + lo) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{ArmRole, Shape};
    use crate::model::{Units, Vec3};
    use crate::source::{CrystalPlane, SamplingLaw};
    use approx::assert_abs_diff_eq;

    fn grid() -> PixelGrid {
        PixelGrid {
            nx: 16,
            ny: 16,
            pitch: 0.1,
        }
    }

    fn scene(mask: Mask, n_pairs: u64) -> Scene {
        let pump = PumpModel::plane(Vec3::z(), 1.0, Units::Normalized).unwrap();
        let spdc = SpdcConfig {
            crystal: CrystalPlane::new(Vec3::zeros(), Vec3::z()).unwrap(),
            spectral_band: (0.5, 0.5),
            sigma_k: 0.05,
            law: SamplingLaw::Gaussian,
            spot_radius: 0.5,
            seed: 3,
        };
        let signal_arm = Arm::new(
            ArmRole::Signal,
            Vec3::zeros(),
            Vec3::z(),
            vec![
                Element::FreeSpace { d: 1.0 },
                Element::Mask(mask),
                Element::BucketDetector { radius: 10.0 },
            ],
        )
        .unwrap();
        let idler_arm = Arm::new(
            ArmRole::Idler,
            Vec3::zeros(),
            Vec3::z(),
            vec![
                Element::FreeSpace { d: 1.0 },
                Element::ScanningDetector(grid()),
            ],
        )
        .unwrap();
        Scene {
            pump,
            spdc,
            signal_arm,
            idler_arm,
            n_pairs,
            background: None,
        }
    }

    #[test]
    fn zero_pairs_give_empty_histograms() {
        let img = run_simulation(&scene(Mask::Open, 0), 1).unwrap();
        assert_eq!(img.coincidence.total(), 0);
        assert_eq!(img.singles_idler.total(), 0);
        assert_eq!(img.singles_signal_bucket, 0);
        assert_eq!(img.n_emitted, 0);
    }

    #[test]
    fn opaque_object_blocks_all_coincidences() {
        let img = run_simulation(&scene(Mask::Opaque, 5000), 2).unwrap();
        assert!(img.singles_idler.total() > 0);
        assert_eq!(img.coincidence.total(), 0);
        assert_eq!(img.singles_signal_bucket, 0);
    }

    #[test]
    fn coincidences_are_a_subset_of_singles() {
        let mut s = scene(Mask::double_slit(0.4, 0.2), 20_000);
        s.background = Some(Background {
            dark_mean: 0.5,
            accidental_mean: 0.2,
        });
        let img = run_simulation(&s, 3).unwrap();
        for (c, i) in img
            .coincidence
            .counts()
            .iter()
            .zip(img.singles_idler.counts())
        {
            assert!(c <= i);
        }
        assert!(img.coincidence.total() > 0);
        assert_eq!(img.n_emitted, 20_000);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let s = scene(Mask::double_slit(0.4, 0.2), 10_000);
        let a = run_simulation(&s, 1).unwrap();
        let b = run_simulation(&s, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scene_validation() {
        let mut s = scene(Mask::Open, 10);
        s.idler_arm = Arm::new(
            ArmRole::Idler,
            Vec3::zeros(),
            Vec3::z(),
            vec![
                Element::FreeSpace { d: 1.0 },
                Element::Mask(Mask::Open),
                Element::ScanningDetector(grid()),
            ],
        )
        .unwrap();
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("object must be in signal arm only"), "{err}");

        let mut s = scene(Mask::Open, 10);
        s.idler_arm.frame.origin = Vec3::new(0.0, 0.0, 0.2);
        assert!(s.validate().is_err());
    }

    #[test]
    fn folding_requires_degenerate_source() {
        let mut s = scene(Mask::Open, 10);
        s.spdc.spectral_band = (0.4, 0.6);
        assert!(matches!(
            run_folded(&s, 1, 1),
            Err(SimError::Bench(BenchError::UnsupportedFold(_)))
        ));
    }

    #[test]
    fn contrast_examples() {
        let uniform = Histogram2::from_counts(4, 4, vec![7; 16]).unwrap();
        assert_eq!(image_contrast(&uniform, 3).unwrap(), 0.0);

        let mut half = Histogram2::new(8, 4);
        for iy in 0..4 {
            for ix in 4..8 {
                half.add(ix, iy, 10);
            }
        }
        assert_eq!(image_contrast(&half, 3).unwrap(), 1.0);
        assert!(matches!(
            image_contrast(&Histogram2::new(4, 4), 3),
            Err(SimError::UndefinedContrast)
        ));
        assert!(image_contrast(&uniform, 5).is_err());
    }

    fn two_slits() -> Mask {
        Mask::Shapes(vec![
            Shape::Rect {
                center: [-0.5, 0.1],
                size: [0.2, 1.0],
            },
            Shape::Rect {
                center: [0.5, 0.1],
                size: [0.2, 1.0],
            },
        ])
    }

    #[test]
    fn magnification_of_a_scaled_object() {
        let g = PixelGrid {
            nx: 48,
            ny: 48,
            pitch: 0.05,
        };
        let object = two_slits();
        let mut img = Histogram2::new(g.nx, g.ny);
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let (x, y) = g.center(ix, iy);
                // inverted image at twice the object size
                if object.transmits(-x / 2.0, -y / 2.0) {
                    img.add(ix, iy, 100);
                }
            }
        }
        let sweep = ScaleSweep::default();
        let est = estimate_magnification(&img, g, &object, &sweep).unwrap();
        assert_abs_diff_eq!(est.m_hat, 2.0, epsilon = sweep.step + 1e-12);
        assert_eq!(est.inverted, Some(true));
        assert!(est.confidence > 0.9);
    }

    #[test]
    fn noise_has_no_feature() {
        let g = PixelGrid {
            nx: 32,
            ny: 32,
            pitch: 0.05,
        };
        let mut rng = chunk_rng(11, 0);
        let counts = (0..g.len())
            .map(|_| rand::Rng::random_range(&mut rng, 0..100u64))
            .collect();
        let img = Histogram2::from_counts(g.nx, g.ny, counts).unwrap();
        assert!(matches!(
            estimate_magnification(&img, g, &two_slits(), &ScaleSweep::default()),
            Err(SimError::NoFeature { .. })
        ));
    }

    #[test]
    fn identical_images_have_zero_chi_square() {
        let a = Histogram2::from_counts(2, 2, vec![30, 40, 50, 0]).unwrap();
        let chi = compare_images(&a, &a, 20).unwrap();
        assert_eq!(chi.chi2, 0.0);
        assert_eq!(chi.pixels, 3);
        assert_eq!(chi.dof, 2);
    }
}
