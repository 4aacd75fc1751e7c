//! Reference scenes in SI units.

use crate::bench::{Arm, ArmRole, Element, Mask, PixelGrid, Shape};
use crate::model::{PumpModel, Units, Vec3, SPEED_OF_LIGHT};
use crate::sim::{Scene, SimError};
use crate::source::{CrystalPlane, SamplingLaw, SpdcConfig};

pub const PUMP_WAVELENGTH: f64 = 351.1e-9;
/// Object to lens.
pub const OBJECT_DISTANCE: f64 = 0.6;
pub const FOCAL_LENGTH: f64 = 0.4;
/// Lens to crystal.
pub const LENS_DISTANCE: f64 = 0.4;
/// Crystal to idler detector.
pub const IDLER_DISTANCE: f64 = 0.8;

/// Two 0.2 mm x 1.2 mm slits with centers 1 mm apart.
pub fn double_slit_object() -> Mask {
    let slit = |x: f64| Shape::Rect {
        center: [x, 0.0],
        size: [0.2e-3, 1.2e-3],
    };
    Mask::Shapes(vec![slit(-0.5e-3), slit(0.5e-3)])
}

/// Ghost imaging of a double slit through a 2f-free thin-lens layout:
/// folded image distance `0.4 + 0.8 = 1.2 m` against a `0.6 m` object
/// distance, so the image is inverted with `|M| = 2`.
pub fn pittman_double_slit(n_pairs: u64, seed: u64) -> Result<Scene, SimError> {
    let omega_p = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / PUMP_WAVELENGTH;
    let pump = PumpModel::plane(Vec3::z(), omega_p, Units::Si)
        .map_err(crate::source::SourceError::from)?;
    let k_s = 0.5 * omega_p / SPEED_OF_LIGHT;
    let spdc = SpdcConfig {
        crystal: CrystalPlane::new(Vec3::zeros(), Vec3::z())?,
        spectral_band: (0.5 * omega_p, 0.5 * omega_p),
        // 0.625 mrad angular spread
        sigma_k: 0.625e-3 * k_s,
        law: SamplingLaw::Gaussian,
        spot_radius: 4e-3,
        seed,
    };
    let signal_arm = Arm::new(
        ArmRole::Signal,
        Vec3::zeros(),
        Vec3::z(),
        vec![
            Element::FreeSpace { d: LENS_DISTANCE },
            Element::ThinLens {
                f: FOCAL_LENGTH,
                aperture_radius: 12.7e-3,
            },
            Element::FreeSpace { d: OBJECT_DISTANCE },
            Element::Mask(double_slit_object()),
            Element::BucketDetector { radius: 25e-3 },
        ],
    )?;
    let idler_arm = Arm::new(
        ArmRole::Idler,
        Vec3::zeros(),
        Vec3::z(),
        vec![
            Element::FreeSpace { d: IDLER_DISTANCE },
            Element::ScanningDetector(PixelGrid {
                nx: 32,
                ny: 32,
                pitch: 0.1e-3,
            }),
        ],
    )?;
    let scene = Scene {
        pump,
        spdc,
        signal_arm,
        idler_arm,
        n_pairs,
        background: None,
    };
    scene.validate()?;
    Ok(scene)
}
