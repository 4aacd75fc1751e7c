//! Photon rays, pump descriptions and wavevector arithmetic.
//!
//! Every photon is a classical ray carrying an angular frequency; its
//! wavevector is implicit, `k = (omega / c) * direction`, with vacuum
//! dispersion throughout. Two unit systems are supported: a normalized one
//! (`c = 1`, frequencies in units of the pump frequency) and SI.

use nalgebra::Vector3;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("zero-length vector has no direction")]
    ZeroVector,
    #[error("angular frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("non-finite vector component")]
    NonFinite,
    #[error("crystal point coincides with the pump curvature center")]
    DegenerateGeometry,
    #[error("curvature radius must be finite and nonzero, got {0}")]
    InvalidRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// `c = 1`, frequencies expressed in units of the pump frequency.
    #[default]
    Normalized,
    Si,
}

impl Units {
    pub fn c(self) -> f64 {
        match self {
            Units::Normalized => 1.0,
            Units::Si => SPEED_OF_LIGHT,
        }
    }
}

/// Opaque polarization label. Carried along, never used by any law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PolTag(pub i8);

impl PolTag {
    /// Label of the phase-conjugated partner (helicity flips sign).
    pub fn conjugate(self) -> Self {
        PolTag(-self.0)
    }
}

/// A classical photon ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Vec3,
    direction: Vec3,
    omega: f64,
    pol: PolTag,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3, omega: f64) -> Result<Self, ModelError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ModelError::InvalidFrequency(omega));
        }
        if !origin.iter().chain(direction.iter()).all(|c| c.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let direction = unit(&direction)?;
        Ok(Self {
            origin,
            direction,
            omega,
            pol: PolTag::default(),
        })
    }

    pub fn with_pol(mut self, pol: PolTag) -> Self {
        self.pol = pol;
        self
    }

    pub fn with_origin(mut self, origin: Vec3) -> Self {
        self.origin = origin;
        self
    }

    pub fn origin(&self) -> &Vec3 {
        &self.origin
    }

    pub fn direction(&self) -> &Vec3 {
        &self.direction
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn pol(&self) -> PolTag {
        self.pol
    }

    pub fn wavevector(&self, units: Units) -> Vec3 {
        wavevector(self, units)
    }

    /// Point reached after travelling a path length `t` along the ray.
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// `k = (omega / c) * direction`.
pub fn wavevector(ray: &Ray, units: Units) -> Vec3 {
    ray.direction * (ray.omega / units.c())
}

/// Angle in `[0, pi]` between `v` and `axis`.
pub fn angle_to_axis(v: &Vec3, axis: &Vec3) -> Result<f64, ModelError> {
    let nv = v.norm();
    let na = axis.norm();
    if nv == 0.0 || na == 0.0 {
        return Err(ModelError::ZeroVector);
    }
    // atan2 keeps full precision near 0 and pi where acos does not.
    Ok(v.cross(axis).norm().atan2(v.dot(axis)))
}

pub fn unit(v: &Vec3) -> Result<Vec3, ModelError> {
    let n = v.norm();
    if n == 0.0 {
        return Err(ModelError::ZeroVector);
    }
    if !n.is_finite() {
        return Err(ModelError::NonFinite);
    }
    Ok(v / n)
}

/// Right-handed orthonormal pair `(e1, e2)` perpendicular to the unit vector `n`.
///
/// Branchless construction of Duff et al. (2017); `n = +z` yields `(x, y)`.
pub fn transverse_basis(n: &Vec3) -> (Vec3, Vec3) {
    let sign = 1.0_f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let e1 = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let e2 = Vec3::new(b, sign + n.y * n.y * a, -n.y);
    (e1, e2)
}

/// Shape of the pump wavefront at the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpKind {
    Plane,
    /// Wavefront centered on `center`, which sits at signed distance `radius`
    /// from the crystal vertex along the pump axis. `radius > 0` puts the
    /// center on the downstream side (converging pump, concave mirror).
    Spherical {
        center: Vec3,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpModel {
    pub kind: PumpKind,
    axis: Vec3,
    omega_p: f64,
    pub units: Units,
}

impl PumpModel {
    pub fn plane(axis: Vec3, omega_p: f64, units: Units) -> Result<Self, ModelError> {
        if !(omega_p.is_finite() && omega_p > 0.0) {
            return Err(ModelError::InvalidFrequency(omega_p));
        }
        Ok(Self {
            kind: PumpKind::Plane,
            axis: unit(&axis)?,
            omega_p,
            units,
        })
    }

    /// Spherical pump whose wavefront passes through `vertex` with signed
    /// curvature radius `radius`; the curvature center is `vertex + radius * axis`.
    pub fn spherical(
        axis: Vec3,
        omega_p: f64,
        vertex: Vec3,
        radius: f64,
        units: Units,
    ) -> Result<Self, ModelError> {
        if !(radius.is_finite() && radius != 0.0) {
            return Err(ModelError::InvalidRadius(radius));
        }
        let mut pump = Self::plane(axis, omega_p, units)?;
        pump.kind = PumpKind::Spherical {
            center: vertex + pump.axis * radius,
            radius,
        };
        Ok(pump)
    }

    pub fn axis(&self) -> &Vec3 {
        &self.axis
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    /// Pump wavenumber `omega_p / c`.
    pub fn k_p(&self) -> f64 {
        self.omega_p / self.units.c()
    }

    /// Forward unit direction of the pump wavevector at `point`.
    ///
    /// A spherical pump propagates along the line through `point` and the
    /// curvature center, oriented so the direction has a positive projection
    /// on the axis: towards the center for `radius > 0`, away from it otherwise.
    pub fn local_direction(&self, point: &Vec3) -> Result<Vec3, ModelError> {
        match self.kind {
            PumpKind::Plane => Ok(self.axis),
            PumpKind::Spherical { center, radius } => {
                let towards = center - point;
                if towards.norm() == 0.0 {
                    return Err(ModelError::DegenerateGeometry);
                }
                Ok(unit(&towards)? * radius.signum())
            }
        }
    }

    /// Point where the crystal plane (through the wavefront vertex, normal to
    /// the axis) meets the axis. Plane pumps use the coordinate origin.
    pub fn vertex(&self) -> Vec3 {
        match self.kind {
            PumpKind::Plane => Vec3::zeros(),
            PumpKind::Spherical { center, radius } => center - self.axis * radius,
        }
    }
}

/// Signal and idler born together at one crystal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonPair {
    pub signal: Ray,
    pub idler: Ray,
    pub birth_point: Vec3,
    pub local_pump_k: Vec3,
}

impl PhotonPair {
    /// `k_p - k_s - k_i` projected on the local pump direction.
    ///
    /// Transverse matching with on-shell vacuum photons leaves a longitudinal
    /// deficit whenever the pair is not collinear; this reports it.
    pub fn longitudinal_mismatch(&self, units: Units) -> f64 {
        let kp = self.local_pump_k.norm();
        if kp == 0.0 {
            return f64::NAN;
        }
        let u = self.local_pump_k / kp;
        kp - (self.signal.wavevector(units) + self.idler.wavevector(units)).dot(&u)
    }
}
