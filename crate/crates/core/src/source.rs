//! Thin-crystal SPDC pair sampler.
//!
//! Energy is conserved exactly and transverse momentum is conserved exactly
//! relative to the local pump direction; each daughter photon takes its
//! longitudinal component on-shell and forward.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{transverse_basis, unit, ModelError, PhotonPair, PumpModel, Ray, Vec3};

/// Number of pairs drawn from one counter-based substream.
pub const CHUNK_PAIRS: u64 = 4096;

/// Smallest acceptable probability that a transverse draw is propagating.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("spectral band [{min}, {max}] must satisfy 0 < min <= max < omega_p = {omega_p}")]
    InvalidBand { min: f64, max: f64, omega_p: f64 },
    #[error("transverse spread must be finite and non-negative, got {0}")]
    InvalidSpread(f64),
    #[error("pump spot radius must be finite and non-negative, got {0}")]
    InvalidSpot(f64),
    #[error("angular spread too wide: only {acceptance:.3e} of draws are propagating")]
    MisconfiguredSpread { acceptance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl CrystalPlane {
    pub fn new(point: Vec3, normal: Vec3) -> Result<Self, SourceError> {
        Ok(Self {
            point,
            normal: unit(&normal)?,
        })
    }

    /// Signed distance of `p` from the plane.
    pub fn offset(&self, p: &Vec3) -> f64 {
        (p - self.point).dot(&self.normal)
    }
}

/// Law for the signal transverse wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingLaw {
    /// Isotropic Gaussian, standard deviation `sigma_k` per component.
    #[default]
    Gaussian,
    /// Uniform over the disk of radius `sigma_k`.
    UniformDisk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcConfig {
    pub crystal: CrystalPlane,
    /// `[omega_s_min, omega_s_max]`, sampled uniformly.
    pub spectral_band: (f64, f64),
    pub sigma_k: f64,
    pub law: SamplingLaw,
    /// Radius of the uniformly illuminated pump spot on the crystal.
    pub spot_radius: f64,
    pub seed: u64,
}

impl SpdcConfig {
    pub fn validate(&self, omega_p: f64) -> Result<(), SourceError> {
        let (min, max) = self.spectral_band;
        if !(min > 0.0 && min <= max && max < omega_p && max.is_finite()) {
            return Err(SourceError::InvalidBand { min, max, omega_p });
        }
        if !(self.sigma_k.is_finite() && self.sigma_k >= 0.0) {
            return Err(SourceError::InvalidSpread(self.sigma_k));
        }
        if !(self.spot_radius.is_finite() && self.spot_radius >= 0.0) {
            return Err(SourceError::InvalidSpot(self.spot_radius));
        }
        Ok(())
    }

    pub fn is_degenerate(&self, omega_p: f64) -> bool {
        let half = 0.5 * omega_p;
        let tol = 1e-12 * omega_p;
        (self.spectral_band.0 - half).abs() <= tol && (self.spectral_band.1 - half).abs() <= tol
    }
}

/// Pump wavevector at a crystal point.
pub fn local_pump_wavevector(pump: &PumpModel, point: &Vec3) -> Result<Vec3, ModelError> {
    Ok(pump.local_direction(point)? * pump.k_p())
}

/// Probability that a transverse draw stays below `k_max`.
fn acceptance(law: SamplingLaw, sigma_k: f64, k_max: f64) -> f64 {
    if sigma_k == 0.0 {
        return 1.0;
    }
    match law {
        SamplingLaw::Gaussian => -(-(k_max * k_max) / (2.0 * sigma_k * sigma_k)).exp_m1(),
        SamplingLaw::UniformDisk => ((k_max / sigma_k).powi(2)).min(1.0),
    }
}

fn sample_disk<R: Rng>(rng: &mut R, radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    (r * phi.cos(), r * phi.sin())
}

/// Splits a pump photon at a random point of the pump spot.
pub fn sample_pair<R: Rng>(
    pump: &PumpModel,
    cfg: &SpdcConfig,
    rng: &mut R,
) -> Result<PhotonPair, SourceError> {
    let c = pump.units.c();
    let omega_p = pump.omega_p();

    let (e1, e2) = transverse_basis(&cfg.crystal.normal);
    let (bx, by) = sample_disk(rng, cfg.spot_radius);
    let birth_point = cfg.crystal.point + e1 * bx + e2 * by;
    let u = pump.local_direction(&birth_point)?;

    let (lo, hi) = cfg.spectral_band;
    let omega_s = if hi > lo {
        lo + (hi - lo) * rng.random::<f64>()
    } else {
        lo
    };
    let omega_i = omega_p - omega_s;

    let ks = omega_s / c;
    let ki = omega_i / c;
    let k_max = ks.min(ki);
    let acc = acceptance(cfg.law, cfg.sigma_k, k_max);
    if acc < MIN_ACCEPTANCE {
        return Err(SourceError::MisconfiguredSpread { acceptance: acc });
    }

    let (t1, t2) = loop {
        let (t1, t2) = match cfg.law {
            SamplingLaw::Gaussian => (
                cfg.sigma_k * rng.sample::<f64, _>(StandardNormal),
                cfg.sigma_k * rng.sample::<f64, _>(StandardNormal),
            ),
            SamplingLaw::UniformDisk => sample_disk(rng, cfg.sigma_k),
        };
        if t1.hypot(t2) < k_max || cfg.sigma_k == 0.0 {
            break (t1, t2);
        }
    };

    let (a1, a2) = transverse_basis(&u);
    let t = a1 * t1 + a2 * t2;
    let tn2 = t1 * t1 + t2 * t2;
    let ls = ((ks - tn2.sqrt()) * (ks + tn2.sqrt())).sqrt();
    let li = ((ki - tn2.sqrt()) * (ki + tn2.sqrt())).sqrt();

    let signal = Ray::new(birth_point, t + u * ls, omega_s)?;
    let idler = Ray::new(birth_point, -t + u * li, omega_i)?.with_pol(signal.pol().conjugate());
    Ok(PhotonPair {
        signal,
        idler,
        birth_point,
        local_pump_k: u * pump.k_p(),
    })
}

/// Conservation residuals of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairResiduals {
    /// `|omega_s + omega_i - omega_p| / omega_p`
    pub energy_rel: f64,
    /// `|k_s_perp + k_i_perp|` relative to the local pump direction.
    pub transverse_abs: f64,
}

impl PairResiduals {
    pub fn max(self, other: Self) -> Self {
        Self {
            energy_rel: self.energy_rel.max(other.energy_rel),
            transverse_abs: self.transverse_abs.max(other.transverse_abs),
        }
    }
}

pub fn validate_pair(pair: &PhotonPair, pump: &PumpModel) -> PairResiduals {
    let omega_p = pump.omega_p();
    let u = pump
        .local_direction(&pair.birth_point)
        .unwrap_or(*pump.axis());
    let k = pair.signal.wavevector(pump.units) + pair.idler.wavevector(pump.units);
    let transverse = k - u * k.dot(&u);
    PairResiduals {
        energy_rel: (pair.signal.omega() + pair.idler.omega() - omega_p).abs() / omega_p,
        transverse_abs: transverse.norm(),
    }
}

/// Generator for substream `chunk` of the run seeded by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Number of substreams covering `n_pairs`.
pub fn chunk_count(n_pairs: u64) -> u64 {
    n_pairs.div_ceil(CHUNK_PAIRS)
}

/// Pairs `[chunk * CHUNK_PAIRS, min(n_pairs, (chunk + 1) * CHUNK_PAIRS))`,
/// delivered to `sink` in order.
pub fn for_each_pair_in_chunk<F>(
    pump: &PumpModel,
    cfg: &SpdcConfig,
    seed: u64,
    chunk: u64,
    n_pairs: u64,
    mut sink: F,
) -> Result<(), SourceError>
where
    F: FnMut(&PhotonPair),
{
    let start = chunk * CHUNK_PAIRS;
    let end = (start + CHUNK_PAIRS).min(n_pairs);
    let mut rng = chunk_rng(seed, chunk);
    for _ in start..end {
        let pair = sample_pair(pump, cfg, &mut rng)?;
        sink(&pair);
    }
    Ok(())
}

/// The first `n` pairs of the stream seeded by `cfg.seed`.
pub fn sample_pairs(
    pump: &PumpModel,
    cfg: &SpdcConfig,
    n: u64,
) -> Result<Vec<PhotonPair>, SourceError> {
    cfg.validate(pump.omega_p())?;
    let mut out = Vec::with_capacity(n as usize);
    for chunk in 0..chunk_count(n) {
        for_each_pair_in_chunk(pump, cfg, cfg.seed, chunk, n, |p| out.push(*p))?;
    }
    Ok(out)
}

/// Same pairs as [`sample_pairs`], with chunks drawn in parallel on the
/// current rayon pool.
pub fn sample_pairs_par(
    pump: &PumpModel,
    cfg: &SpdcConfig,
    n: u64,
) -> Result<Vec<PhotonPair>, SourceError> {
    cfg.validate(pump.omega_p())?;
    let chunks = (0..chunk_count(n))
        .into_par_iter()
        .map(|chunk| {
            let mut part = Vec::with_capacity(CHUNK_PAIRS as usize);
            for_each_pair_in_chunk(pump, cfg, cfg.seed, chunk, n, |p| part.push(*p))?;
            Ok(part)
        })
        .collect::<Result<Vec<_>, SourceError>>()?;
    Ok(chunks.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Units;
    use approx::assert_abs_diff_eq;

    fn plane() -> PumpModel {
        PumpModel::plane(Vec3::z(), 1.0, Units::Normalized).unwrap()
    }

    fn cfg(band: (f64, f64), sigma_k: f64) -> SpdcConfig {
        SpdcConfig {
            crystal: CrystalPlane::new(Vec3::zeros(), Vec3::z()).unwrap(),
            spectral_band: band,
            sigma_k,
            law: SamplingLaw::Gaussian,
            spot_radius: 0.0,
            seed: 11,
        }
    }

    #[test]
    fn local_pump_examples() {
        let k = local_pump_wavevector(&plane(), &Vec3::new(3.0, -2.0, 0.0)).unwrap();
        assert_eq!(k, Vec3::z());

        let sph =
            PumpModel::spherical(Vec3::z(), 1.0, Vec3::zeros(), 5.0, Units::Normalized).unwrap();
        let k = local_pump_wavevector(&sph, &Vec3::zeros()).unwrap();
        assert_abs_diff_eq!(k, Vec3::z(), epsilon = 1e-15);

        // hand-normalized: (-0.6, 0, 1) / sqrt(1.36)
        let sph =
            PumpModel::spherical(Vec3::z(), 1.0, Vec3::zeros(), 1.0, Units::Normalized).unwrap();
        let k = local_pump_wavevector(&sph, &Vec3::new(0.6, 0.0, 0.0)).unwrap();
        let n = 1.36_f64.sqrt();
        assert_abs_diff_eq!(k, Vec3::new(-0.6 / n, 0.0, 1.0 / n), epsilon = 1e-15);

        assert!(local_pump_wavevector(&sph, &Vec3::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn collinear_degenerate() {
        let pairs = sample_pairs(&plane(), &cfg((0.5, 0.5), 0.0), 10).unwrap();
        for p in pairs {
            assert_eq!(p.signal.omega(), 0.5);
            assert_eq!(p.idler.omega(), 0.5);
            assert_eq!(*p.signal.direction(), Vec3::z());
            assert_eq!(*p.idler.direction(), Vec3::z());
            assert_eq!(p.longitudinal_mismatch(Units::Normalized), 0.0);
        }
    }

    #[test]
    fn degenerate_pairs_leave_at_equal_angles() {
        let pairs = sample_pairs(&plane(), &cfg((0.5, 0.5), 0.05), 2000).unwrap();
        for p in pairs {
            let s = p.signal.direction();
            let i = p.idler.direction();
            // mirror images about the pump axis
            assert_abs_diff_eq!(s.x, -i.x, epsilon = 1e-15);
            assert_abs_diff_eq!(s.y, -i.y, epsilon = 1e-15);
            assert_abs_diff_eq!(s.z, i.z, epsilon = 1e-15);
            assert!(s.z > 0.0);
        }
    }

    #[test]
    fn hand_built_pairs() {
        let pump = plane();
        let s = Ray::new(Vec3::zeros(), Vec3::z(), 0.5).unwrap();
        let pair = PhotonPair {
            signal: s,
            idler: s,
            birth_point: Vec3::zeros(),
            local_pump_k: Vec3::z(),
        };
        assert_eq!(validate_pair(&pair, &pump), PairResiduals::default());

        let pair = PhotonPair {
            signal: Ray::new(Vec3::zeros(), Vec3::z(), 1.0).unwrap(),
            idler: Ray::new(Vec3::zeros(), Vec3::z(), 0.25).unwrap(),
            ..pair
        };
        let r = validate_pair(&pair, &pump);
        assert_eq!(r.energy_rel, 0.25);
        assert_eq!(r.transverse_abs, 0.0);
    }

    #[test]
    fn spread_too_wide_is_rejected() {
        // k_max = 0.5, sigma = 100 -> acceptance ~ 1.25e-5
        let err = sample_pairs(&plane(), &cfg((0.5, 0.5), 100.0), 1).unwrap_err();
        assert!(matches!(err, SourceError::MisconfiguredSpread { .. }));
        // moderately wide spreads are resampled silently
        let pairs = sample_pairs(&plane(), &cfg((0.5, 0.5), 1.0), 200).unwrap();
        assert_eq!(pairs.len(), 200);
    }

    #[test]
    fn band_validation() {
        let bad = [(0.0, 0.5), (0.6, 0.5), (0.2, 1.0), (0.2, 1.5)];
        for band in bad {
            assert!(matches!(
                cfg(band, 0.0).validate(1.0),
                Err(SourceError::InvalidBand { .. })
            ));
        }
        assert!(cfg((0.3, 0.5), -1.0).validate(1.0).is_err());
        assert!(cfg((0.3, 0.7), 0.1).validate(1.0).is_ok());
    }

    #[test]
    fn stream_is_reproducible() {
        let mut c = cfg((0.3, 0.7), 0.1);
        c.spot_radius = 1e-3;
        let a = sample_pairs(&plane(), &c, 5000).unwrap();
        let b = sample_pairs(&plane(), &c, 5000).unwrap();
        assert_eq!(a, b);
        c.seed += 1;
        let d = sample_pairs(&plane(), &c, 10).unwrap();
        assert_ne!(a[..10], d[..]);
    }

    #[test]
    fn spherical_pump_pairs_match_locally() {
        let pump =
            PumpModel::spherical(Vec3::z(), 1.0, Vec3::zeros(), 0.3, Units::Normalized).unwrap();
        let mut c = cfg((0.2, 0.8), 0.05);
        c.spot_radius = 0.05;
        for p in sample_pairs(&pump, &c, 2000).unwrap() {
            let r = validate_pair(&p, &pump);
            assert!(r.energy_rel < 1e-12 && r.transverse_abs < 1e-12);
            let u = pump.local_direction(&p.birth_point).unwrap();
            assert!(p.signal.direction().dot(&u) > 0.0);
            assert!(p.idler.direction().dot(&u) > 0.0);
            assert!(p.longitudinal_mismatch(Units::Normalized) >= -1e-15);
        }
    }
}
