//! The quantum mirror: crossing-symmetric signal-to-idler ray transform and
//! closed-form imaging laws for plane and spherical pumps and for the
//! two-photon thin lens.
//!
//! Sign conventions: distances are positive along propagation away from the
//! crystal plane. A negative image distance is a virtual image behind the
//! mirror plane.

use thiserror::Error;

use crate::model::{ModelError, PumpModel, Ray, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MirrorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("signal frequency {omega_s} is not below the pump frequency {omega_p}")]
    FrequencyDomain { omega_s: f64, omega_p: f64 },
    #[error("conjugate photon would be evanescent (|k_perp| = {k_perp:.6e} > |k| = {k:.6e})")]
    Evanescent { k_perp: f64, k: f64 },
    #[error("signal mode does not propagate forward along the local pump direction")]
    NotForward,
    #[error("image at infinity")]
    ImageAtInfinity,
    #[error("invalid imaging parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Crossing-symmetric conversion of a signal mode into its idler partner.
///
/// `signal` is given in its emission orientation: the direction has a
/// positive projection on the local pump direction, i.e. it points from the
/// crystal towards where a time-reversed signal photon comes from. The
/// output leaves `crystal_point` with frequency `omega_p - omega_s`, the
/// opposite transverse wavevector, and an on-shell forward longitudinal
/// component. Applying the transform twice returns the original mode.
pub fn crossing_transform(
    signal: &Ray,
    pump: &PumpModel,
    crystal_point: &Vec3,
) -> Result<Ray, MirrorError> {
    let omega_p = pump.omega_p();
    let omega_s = signal.omega();
    if omega_s >= omega_p {
        return Err(MirrorError::FrequencyDomain { omega_s, omega_p });
    }
    let u = pump.local_direction(crystal_point)?;
    let c = pump.units.c();

    let ks = signal.wavevector(pump.units);
    let longitudinal = ks.dot(&u);
    if longitudinal <= 0.0 {
        return Err(MirrorError::NotForward);
    }
    let transverse = ks - u * longitudinal;

    let omega_i = omega_p - omega_s;
    let ki = omega_i / c;
    let kt = transverse.norm();
    if kt >= ki {
        return Err(MirrorError::Evanescent { k_perp: kt, k: ki });
    }
    let li = ((ki - kt) * (ki + kt)).sqrt();
    let idler = Ray::new(*crystal_point, u * li - transverse, omega_i)?;
    Ok(idler.with_pol(signal.pol().conjugate()))
}

/// Idler chief-ray angle phase-matched to a signal at `theta_ps`:
/// `omega_s sin(theta_ps) = omega_i sin(theta_pi)`.
pub fn matched_idler_angle(theta_ps: f64, omega_s: f64, omega_i: f64) -> Result<f64, MirrorError> {
    let s = omega_s * theta_ps.sin() / omega_i;
    if s.abs() >= 1.0 {
        return Err(MirrorError::Evanescent {
            k_perp: omega_s * theta_ps.sin(),
            k: omega_i,
        });
    }
    Ok(s.asin())
}

/// Inputs of the spherical-mirror laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqmParams {
    /// Axial object distance.
    pub p: f64,
    /// Signed pump curvature radius.
    pub radius: f64,
    pub omega_s: f64,
    pub omega_i: f64,
    pub theta_ps: f64,
    pub theta_pi: f64,
    /// Object height.
    pub h: f64,
}

impl SqmParams {
    /// Parameters with `theta_pi` derived from `theta_ps` by transverse matching.
    pub fn matched(
        p: f64,
        radius: f64,
        omega_s: f64,
        omega_i: f64,
        theta_ps: f64,
        h: f64,
    ) -> Result<Self, MirrorError> {
        Ok(Self {
            p,
            radius,
            omega_s,
            omega_i,
            theta_ps,
            theta_pi: matched_idler_angle(theta_ps, omega_s, omega_i)?,
            h,
        })
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_s + self.omega_i
    }

    fn validate(&self) -> Result<(), MirrorError> {
        check_positive("p", self.p)?;
        check_positive("omega_s", self.omega_s)?;
        check_positive("omega_i", self.omega_i)?;
        if !(self.radius.is_finite() && self.radius != 0.0) {
            return Err(MirrorError::InvalidParameter {
                name: "radius",
                value: self.radius,
            });
        }
        for (name, theta) in [("theta_ps", self.theta_ps), ("theta_pi", self.theta_pi)] {
            if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
                return Err(MirrorError::InvalidParameter { name, value: theta });
            }
        }
        Ok(())
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), MirrorError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(MirrorError::InvalidParameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingSolution {
    /// Signed image distance.
    pub q: f64,
    /// Signed transverse magnification.
    pub magnification: f64,
    /// `magnification * h` when an object height was supplied.
    pub h_image: Option<f64>,
}

/// `x` is treated as zero when it is this small relative to its terms.
fn vanishes(x: f64, scale: f64) -> bool {
    x.abs() <= 1e-14 * scale
}

/// Spherical quantum mirror with oblique chief rays:
/// `w_s cos(t_ps)/p + w_i cos(t_pi)/q = (w_s cos(t_ps) + w_i cos(t_pi))/R` and
/// `M = -q w_s cos(t_ps) / (p w_i cos(t_pi))`.
pub fn sqm_image(params: &SqmParams) -> Result<ImagingSolution, MirrorError> {
    params.validate()?;
    let a = params.omega_s * params.theta_ps.cos();
    let b = params.omega_i * params.theta_pi.cos();
    let focus = (a + b) / params.radius;
    let object = a / params.p;
    let denom = focus - object;
    if vanishes(denom, focus.abs().max(object.abs())) {
        return Err(MirrorError::ImageAtInfinity);
    }
    let q = b / denom;
    let magnification = -q * a / (params.p * b);
    Ok(ImagingSolution {
        q,
        magnification,
        h_image: Some(magnification * params.h),
    })
}

/// Paraxial spherical quantum mirror:
/// `w_s/p + w_i/q = w_p/R` and `M = -q w_s / (p w_i)`.
pub fn sqm_image_paraxial(
    p: f64,
    radius: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<ImagingSolution, MirrorError> {
    SqmParams {
        p,
        radius,
        omega_s,
        omega_i,
        theta_ps: 0.0,
        theta_pi: 0.0,
        h: 0.0,
    }
    .validate()?;
    let focus = (omega_s + omega_i) / radius;
    let object = omega_s / p;
    let denom = focus - object;
    if vanishes(denom, focus.abs().max(object.abs())) {
        return Err(MirrorError::ImageAtInfinity);
    }
    let q = omega_i / denom;
    Ok(ImagingSolution {
        q,
        magnification: -q * omega_s / (p * omega_i),
        h_image: None,
    })
}

/// Plane quantum mirror, distances along the chief rays:
/// `w_s/Z_s + w_i/Z_i = 0`, `M = 1`. The returned `q` is `Z_i`.
pub fn pqm_image(z_s: f64, omega_s: f64, omega_i: f64) -> Result<ImagingSolution, MirrorError> {
    check_positive("z_s", z_s)?;
    check_positive("omega_s", omega_s)?;
    check_positive("omega_i", omega_i)?;
    Ok(ImagingSolution {
        q: -z_s * omega_i / omega_s,
        magnification: 1.0,
        h_image: None,
    })
}

/// Thin lens seen through a plane quantum mirror: `1/S_o + 1/S_i = 1/f`,
/// `M = S_i/S_o = (S_i - f)/f`. The returned `q` is `S_i`.
pub fn ghost_thin_lens(s_o: f64, f: f64) -> Result<ImagingSolution, MirrorError> {
    check_positive("s_o", s_o)?;
    check_positive("f", f)?;
    let d = s_o - f;
    if vanishes(d, s_o.max(f)) {
        return Err(MirrorError::ImageAtInfinity);
    }
    let s_i = s_o * f / d;
    Ok(ImagingSolution {
        q: s_i,
        magnification: s_i / s_o,
        h_image: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Units;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn plane(omega_p: f64) -> PumpModel {
        PumpModel::plane(Vec3::z(), omega_p, Units::Normalized).unwrap()
    }

    #[test]
    fn collinear_degenerate_transform() {
        let s = Ray::new(Vec3::zeros(), Vec3::z(), 0.5).unwrap();
        let i = crossing_transform(&s, &plane(1.0), &Vec3::zeros()).unwrap();
        assert_eq!(i.omega(), 0.5);
        assert_eq!(*i.direction(), Vec3::z());
    }

    #[test]
    fn equal_angles_on_opposite_sides() {
        let sin = 0.1_f64;
        let s = Ray::new(
            Vec3::zeros(),
            Vec3::new(sin, 0.0, (1.0 - sin * sin).sqrt()),
            1.0,
        )
        .unwrap();
        let i = crossing_transform(&s, &plane(2.0), &Vec3::zeros()).unwrap();
        assert_eq!(i.omega(), 1.0);
        assert_abs_diff_eq!(i.direction().x, -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(i.direction().z, s.direction().z, epsilon = 1e-15);
    }

    #[test]
    fn transform_errors() {
        let s = Ray::new(Vec3::zeros(), Vec3::z(), 1.0).unwrap();
        assert!(matches!(
            crossing_transform(&s, &plane(1.0), &Vec3::zeros()),
            Err(MirrorError::FrequencyDomain { .. })
        ));
        // omega_s = 0.8 at 60 degrees: k_perp = 0.69 > omega_i = 0.2
        let s = Ray::new(Vec3::zeros(), Vec3::new(0.866, 0.0, 0.5), 0.8).unwrap();
        assert!(matches!(
            crossing_transform(&s, &plane(1.0), &Vec3::zeros()),
            Err(MirrorError::Evanescent { .. })
        ));
        let s = Ray::new(Vec3::zeros(), -Vec3::z(), 0.5).unwrap();
        assert_eq!(
            crossing_transform(&s, &plane(1.0), &Vec3::zeros()),
            Err(MirrorError::NotForward)
        );
    }

    #[test]
    fn polarization_tag_is_conjugated() {
        use crate::model::PolTag;
        let s = Ray::new(Vec3::zeros(), Vec3::z(), 0.5)
            .unwrap()
            .with_pol(PolTag(1));
        let i = crossing_transform(&s, &plane(1.0), &Vec3::zeros()).unwrap();
        assert_eq!(i.pol(), PolTag(-1));
    }

    #[test]
    fn sqm_symmetric_center_of_curvature() {
        let t = 0.3;
        let sol = sqm_image(&SqmParams {
            p: 1.7,
            radius: 1.7,
            omega_s: 0.5,
            omega_i: 0.5,
            theta_ps: t,
            theta_pi: t,
            h: 0.01,
        })
        .unwrap();
        assert_abs_diff_eq!(sol.q, 1.7, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.magnification, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.h_image.unwrap(), -0.01, epsilon = 1e-15);
    }

    #[test]
    fn sqm_nondegenerate_oblique() {
        // digits reproduced independently by the ray-tracing oracle in verify.rs
        let params = SqmParams::matched(2.0, 1.0, 2.0, 1.0, 0.3_f64.asin(), 0.0).unwrap();
        assert_abs_diff_eq!(params.theta_pi.sin(), 0.6, epsilon = 1e-15);
        let sol = sqm_image(&params).unwrap();
        assert_abs_diff_eq!(sol.q, 0.456116, epsilon = 5e-7);
        assert_abs_diff_eq!(sol.magnification, -0.543884, epsilon = 5e-7);
    }

    #[test]
    fn sqm_plane_limit_and_paraxial_agreement() {
        let mut params = SqmParams::matched(0.8, 1.0, 0.3, 0.7, 0.2, 0.0).unwrap();
        let a = params.omega_s * params.theta_ps.cos();
        let b = params.omega_i * params.theta_pi.cos();
        params.radius = 1e12;
        let sol = sqm_image(&params).unwrap();
        assert_abs_diff_eq!(sol.q, -params.p * b / a, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.magnification, 1.0, epsilon = 1e-11);

        let full = sqm_image(&SqmParams {
            p: 2.0,
            radius: 1.0,
            omega_s: 2.0,
            omega_i: 1.0,
            theta_ps: 0.0,
            theta_pi: 0.0,
            h: 0.0,
        })
        .unwrap();
        let par = sqm_image_paraxial(2.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(full.q, par.q);
        assert_eq!(full.magnification, par.magnification);
    }

    #[test]
    fn sqm_paraxial_examples() {
        let sol = sqm_image_paraxial(2.0, 2.0, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(sol.q, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.magnification, -1.0, epsilon = 1e-15);

        let sol = sqm_image_paraxial(2.0, 1.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(sol.q, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.magnification, -0.5, epsilon = 1e-15);

        // degenerate object at the focal point R/2
        assert_eq!(
            sqm_image_paraxial(1.0, 2.0, 0.5, 0.5),
            Err(MirrorError::ImageAtInfinity)
        );
        assert!(sqm_image_paraxial(-1.0, 2.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn sqm_image_at_infinity() {
        let params = SqmParams {
            p: 1.0,
            radius: 2.0,
            omega_s: 0.5,
            omega_i: 0.5,
            theta_ps: 0.2,
            theta_pi: 0.2,
            h: 0.0,
        };
        assert_eq!(sqm_image(&params), Err(MirrorError::ImageAtInfinity));
    }

    #[test]
    fn pqm_examples() {
        let sol = pqm_image(0.5, 0.5, 0.5).unwrap();
        assert_eq!(sol.q, -0.5);
        assert_eq!(sol.magnification, 1.0);
        let sol = pqm_image(0.6, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(sol.q, -0.3, epsilon = 1e-15);
        assert_eq!(sol.magnification, 1.0);
        assert!(pqm_image(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn thin_lens_examples() {
        let sol = ghost_thin_lens(600.0, 400.0).unwrap();
        assert_abs_diff_eq!(sol.q, 1200.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.magnification, 2.0, epsilon = 1e-15);
        let sol = ghost_thin_lens(0.8, 0.4).unwrap();
        assert_abs_diff_eq!(sol.q, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.magnification, 1.0, epsilon = 1e-15);
        assert_eq!(
            ghost_thin_lens(400.0, 400.0),
            Err(MirrorError::ImageAtInfinity)
        );
    }

    #[test]
    fn paraxial_deviation_is_second_order() {
        let residual = |t: f64| {
            let full = sqm_image(&SqmParams::matched(2.0, 1.0, 0.6, 0.4, t, 0.0).unwrap())
                .unwrap()
                .q;
            let par = sqm_image_paraxial(2.0, 1.0, 0.6, 0.4).unwrap().q;
            (full - par).abs()
        };
        let ratio = residual(0.02) / residual(0.01);
        assert!((ratio - 4.0).abs() < 0.01, "ratio {ratio}");
    }

    fn arb_signal() -> impl Strategy<Value = (Ray, f64)> {
        (0.05..0.95f64, 0.0..std::f64::consts::TAU, 0.0..1.0f64).prop_filter_map(
            "propagating idler",
            |(frac, phi, s)| {
                let omega_s = frac;
                let max_sin = ((1.0 - frac) / frac).min(1.0) * 0.999;
                let sin = s * max_sin;
                let d = Vec3::new(sin * phi.cos(), sin * phi.sin(), (1.0 - sin * sin).sqrt());
                Ray::new(Vec3::zeros(), d, omega_s).ok().map(|r| (r, frac))
            },
        )
    }

    proptest! {
        #[test]
        fn transform_is_an_involution((s, _) in arb_signal()) {
            let pump = plane(1.0);
            let i = crossing_transform(&s, &pump, &Vec3::zeros()).unwrap();
            prop_assert_eq!(s.omega() + i.omega(), 1.0);
            let back = crossing_transform(&i, &pump, &Vec3::zeros()).unwrap();
            prop_assert!((back.direction() - s.direction()).amax() < 1e-12);
            prop_assert!((back.omega() - s.omega()).abs() < 1e-12);
        }

        #[test]
        fn pqm_magnification_is_one(z in 1e-3..1e3f64, frac in 0.01..0.99f64) {
            let sol = pqm_image(z, frac, 1.0 - frac).unwrap();
            prop_assert_eq!(sol.magnification, 1.0);
            prop_assert!((sol.q + z * (1.0 - frac) / frac).abs() <= 1e-12 * z.max(1.0) * (1.0 - frac) / frac);
        }

        #[test]
        fn thin_lens_identity(s_o in 1e-3..1e3f64, f in 1e-3..1e3f64) {
            prop_assume!((s_o - f).abs() > 1e-3 * f);
            let sol = ghost_thin_lens(s_o, f).unwrap();
            prop_assume!(sol.magnification.abs() < 100.0);
            prop_assert!((sol.q / s_o - (sol.q - f) / f).abs() < 1e-12);
        }
    }
}
