//! Sequential ray tracing along straight-axis optical arms.
//!
//! Each arm has its own frame: the origin sits on the crystal plane, `z` runs
//! along the arm axis and `(x, y)` are transverse. Folding mirrors and beam
//! splitters are represented by unfolding, so every arm is a straight line.
//! Propagation between planes uses exact line-plane intersection; the thin
//! lens applies the paraxial slope kick `s' = s - x/f`.

pub mod mask;

use thiserror::Error;

use crate::model::{transverse_basis, unit, ModelError, PumpKind, PumpModel, Ray, Vec3};

pub use mask::{Mask, MaskError, RasterMask, Shape};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("ray does not advance along the arm axis")]
    NonAdvancing,
    #[error("invalid element #{index}: {reason}")]
    InvalidElement { index: usize, reason: String },
    #[error("arm must end with exactly one detector")]
    DetectorPlacement,
    #[error("cannot fold arms: {0}")]
    UnsupportedFold(String),
}

/// Regular pixel grid centered on the arm axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelGrid {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
}

impl PixelGrid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel containing `(x, y)`, by floor division of the offset from the
    /// grid corner.
    pub fn pixel(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = ((x + 0.5 * self.nx as f64 * self.pitch) / self.pitch).floor();
        let fy = ((y + 0.5 * self.ny as f64 * self.pitch) / self.pitch).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            (ix as f64 + 0.5 - 0.5 * self.nx as f64) * self.pitch,
            (iy as f64 + 0.5 - 0.5 * self.ny as f64) * self.pitch,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    FreeSpace {
        d: f64,
    },
    ThinLens {
        f: f64,
        aperture_radius: f64,
    },
    Mask(Mask),
    /// Unfolded plane mirror: leaves transverse coordinates untouched.
    PlaneMirror,
    BucketDetector {
        radius: f64,
    },
    ScanningDetector(PixelGrid),
}

impl Element {
    pub fn is_detector(&self) -> bool {
        matches!(
            self,
            Element::BucketDetector { .. } | Element::ScanningDetector(_)
        )
    }

    fn validate(&self, index: usize) -> Result<(), BenchError> {
        let bad = |reason: &str| {
            Err(BenchError::InvalidElement {
                index,
                reason: reason.to_string(),
            })
        };
        match self {
            Element::FreeSpace { d } if !(d.is_finite() && *d > 0.0) => bad("d must be > 0"),
            Element::ThinLens { f, .. } if !(f.is_finite() && *f != 0.0) => {
                bad("f must be nonzero")
            }
            Element::ThinLens {
                aperture_radius, ..
            } if !(*aperture_radius > 0.0) => bad("aperture radius must be > 0"),
            Element::BucketDetector { radius } if !(*radius > 0.0) => bad("radius must be > 0"),
            Element::ScanningDetector(g) if g.is_empty() => bad("detector has zero pixels"),
            Element::ScanningDetector(g) if !(g.pitch.is_finite() && g.pitch > 0.0) => {
                bad("pixel pitch must be > 0")
            }
            Element::Mask(m) => m.validate().map_err(|e| BenchError::InvalidElement {
                index,
                reason: e.to_string(),
            }),
            _ => Ok(()),
        }
    }
}

/// Local coordinate frame of an arm. `e1`, `e2` need not complete a
/// right-handed triad with `axis`; folded arms inherit the transverse axes
/// of the arm they were unfolded from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    pub axis: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl Frame {
    pub fn new(origin: Vec3, axis: Vec3) -> Result<Self, ModelError> {
        let axis = unit(&axis)?;
        let (e1, e2) = transverse_basis(&axis);
        Ok(Self {
            origin,
            axis,
            e1,
            e2,
        })
    }

    fn project(&self, v: &Vec3) -> Vec3 {
        Vec3::new(v.dot(&self.e1), v.dot(&self.e2), v.dot(&self.axis))
    }

    pub fn to_local(&self, ray: &Ray) -> Ray {
        let origin = self.project(&(ray.origin() - self.origin));
        let direction = self.project(ray.direction());
        // projection onto an orthonormal frame preserves the unit norm
        Ray::new(origin, direction, ray.omega())
            .expect("frame projection of a valid ray")
            .with_pol(ray.pol())
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.origin + self.e1 * local.x + self.e2 * local.y + self.axis * local.z
    }

    pub fn direction_to_world(&self, local: &Vec3) -> Vec3 {
        self.e1 * local.x + self.e2 * local.y + self.axis * local.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArmRole {
    Signal,
    Idler,
    Folded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub role: ArmRole,
    pub elements: Vec<Element>,
    pub frame: Frame,
}

impl Arm {
    pub fn new(
        role: ArmRole,
        origin: Vec3,
        axis: Vec3,
        elements: Vec<Element>,
    ) -> Result<Self, BenchError> {
        Self::with_frame(role, Frame::new(origin, axis)?, elements)
    }

    pub fn with_frame(
        role: ArmRole,
        frame: Frame,
        elements: Vec<Element>,
    ) -> Result<Self, BenchError> {
        let detectors = elements.iter().filter(|e| e.is_detector()).count();
        if detectors != 1 || !elements.last().is_some_and(Element::is_detector) {
            return Err(BenchError::DetectorPlacement);
        }
        for (i, e) in elements.iter().enumerate() {
            e.validate(i)?;
        }
        Ok(Self {
            role,
            elements,
            frame,
        })
    }

    pub fn detector(&self) -> &Element {
        self.elements.last().expect("validated arm has a detector")
    }

    pub fn pixel_grid(&self) -> Option<PixelGrid> {
        match self.detector() {
            Element::ScanningDetector(g) => Some(*g),
            _ => None,
        }
    }

    /// Total axial length from the arm origin to the detector plane.
    pub fn length(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                Element::FreeSpace { d } => *d,
                _ => 0.0,
            })
            .sum()
    }

    /// Axial distance from the arm origin to its first lens.
    pub fn distance_to_first_lens(&self) -> Option<f64> {
        let mut z = 0.0;
        for e in &self.elements {
            match e {
                Element::FreeSpace { d } => z += d,
                Element::ThinLens { .. } => return Some(z),
                _ => {}
            }
        }
        None
    }

    pub fn masks(&self) -> impl Iterator<Item = &Mask> {
        self.elements.iter().filter_map(|e| match e {
            Element::Mask(m) => Some(m),
            _ => None,
        })
    }
}

/// Outcome of tracing one photon through an arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub arm: ArmRole,
    /// Transverse position at the detector, or where the photon was absorbed.
    pub transverse_hit: [f64; 2],
    /// Stopped by a mask or a lens aperture.
    pub absorbed: bool,
    /// Reached the detector inside its sensitive area.
    pub fired: bool,
    /// Pixel index on a scanning detector.
    pub pixel: Option<(usize, usize)>,
}

/// Moves a local-frame ray forward by axial distance `d`.
pub fn propagate(ray: &Ray, d: f64) -> Result<Ray, BenchError> {
    let dz = ray.direction().z;
    if dz <= 0.0 {
        return Err(BenchError::NonAdvancing);
    }
    Ok(ray.with_origin(ray.at(d / dz)))
}

/// Thin-lens slope kick at the current plane; `None` if the ray misses the
/// clear aperture.
pub fn apply_thin_lens(ray: &Ray, f: f64, aperture_radius: f64) -> Option<Ray> {
    let o = ray.origin();
    if o.x.hypot(o.y) > aperture_radius {
        return None;
    }
    let d = ray.direction();
    let sx = d.x / d.z - o.x / f;
    let sy = d.y / d.z - o.y / f;
    Some(
        Ray::new(*o, Vec3::new(sx, sy, 1.0), ray.omega())
            .expect("kicked direction is finite")
            .with_pol(ray.pol()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transmission {
    Transmitted,
    Absorbed,
}

pub fn apply_mask(ray: &Ray, mask: &Mask) -> Transmission {
    if mask.transmits(ray.origin().x, ray.origin().y) {
        Transmission::Transmitted
    } else {
        Transmission::Absorbed
    }
}

/// Traces a world-frame ray through `arm`.
pub fn trace(ray: &Ray, arm: &Arm) -> Result<DetectionEvent, BenchError> {
    trace_local(&arm.frame.to_local(ray), arm).map(|(event, _)| event)
}

/// Traces a ray already expressed in the arm frame. The ray is first carried
/// to the entry plane `z = 0`; the final local ray is returned alongside the
/// event.
pub fn trace_local(ray: &Ray, arm: &Arm) -> Result<(DetectionEvent, Ray), BenchError> {
    let dz = ray.direction().z;
    if dz <= 0.0 {
        return Err(BenchError::NonAdvancing);
    }
    let mut ray = ray.with_origin(ray.at(-ray.origin().z / dz));
    let event = |ray: &Ray, absorbed: bool, fired: bool, pixel| DetectionEvent {
        arm: arm.role,
        transverse_hit: [ray.origin().x, ray.origin().y],
        absorbed,
        fired,
        pixel,
    };
    for element in &arm.elements {
        match element {
            Element::FreeSpace { d } => ray = propagate(&ray, *d)?,
            Element::ThinLens { f, aperture_radius } => {
                match apply_thin_lens(&ray, *f, *aperture_radius) {
                    Some(r) => ray = r,
                    None => return Ok((event(&ray, true, false, None), ray)),
                }
            }
            Element::Mask(mask) => {
                if apply_mask(&ray, mask) == Transmission::Absorbed {
                    return Ok((event(&ray, true, false, None), ray));
                }
            }
            Element::PlaneMirror => {}
            Element::BucketDetector { radius } => {
                let fired = ray.origin().x.hypot(ray.origin().y) <= *radius;
                return Ok((event(&ray, false, fired, None), ray));
            }
            Element::ScanningDetector(grid) => {
                let pixel = grid.pixel(ray.origin().x, ray.origin().y);
                return Ok((event(&ray, false, pixel.is_some(), pixel), ray));
            }
        }
    }
    unreachable!("validated arm ends with a detector")
}

/// Klyshko unfolding of a two-arm setup into one classical arm.
///
/// The result starts at the idler detector plane and runs backwards through
/// the idler arm to the crystal, where the quantum mirror is replaced by a
/// plane mirror, then forward through the signal arm up to its detector.
/// Only degenerate pairs from a plane pump fold without rescaling slopes.
pub fn fold_klyshko(
    signal_arm: &Arm,
    idler_arm: &Arm,
    pump: &PumpModel,
    omega_s: f64,
) -> Result<Arm, BenchError> {
    if !matches!(pump.kind, PumpKind::Plane) {
        return Err(BenchError::UnsupportedFold(
            "spherical pump does not act as a plane mirror".into(),
        ));
    }
    let omega_p = pump.omega_p();
    if (omega_s - 0.5 * omega_p).abs() > 1e-12 * omega_p {
        return Err(BenchError::UnsupportedFold(format!(
            "non-degenerate pair (omega_s = {omega_s}, omega_p = {omega_p})"
        )));
    }
    let gap = (signal_arm.frame.origin - idler_arm.frame.origin).norm();
    let scale = signal_arm.length().max(idler_arm.length());
    if gap > 1e-12 * scale.max(1.0) {
        return Err(BenchError::UnsupportedFold(
            "arms do not start at the same crystal point".into(),
        ));
    }

    let n = idler_arm.elements.len();
    let mut elements: Vec<Element> = idler_arm.elements[..n - 1].iter().rev().cloned().collect();
    elements.push(Element::PlaneMirror);
    elements.extend(signal_arm.elements.iter().cloned());

    let idler = &idler_arm.frame;
    let frame = Frame {
        origin: idler.origin + idler.axis * idler_arm.length(),
        axis: -idler.axis,
        e1: idler.e1,
        e2: idler.e2,
    };
    Arm::with_frame(ArmRole::Folded, frame, elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::ghost_thin_lens;
    use crate::model::Units;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ray(o: Vec3, d: Vec3) -> Ray {
        Ray::new(o, d, 1.0).unwrap()
    }

    fn grid() -> Element {
        Element::ScanningDetector(PixelGrid {
            nx: 10,
            ny: 10,
            pitch: 0.1,
        })
    }

    fn arm(elements: Vec<Element>) -> Arm {
        Arm::new(ArmRole::Idler, Vec3::zeros(), Vec3::z(), elements).unwrap()
    }

    #[test]
    fn propagate_examples() {
        let r = propagate(&ray(Vec3::zeros(), Vec3::z()), 1.0).unwrap();
        assert_eq!(*r.origin(), Vec3::new(0.0, 0.0, 1.0));

        let r = propagate(&ray(Vec3::zeros(), Vec3::new(0.6, 0.0, 0.8)), 0.8).unwrap();
        assert_abs_diff_eq!(r.origin().x, 0.6, epsilon = 1e-15);
        assert_eq!(r.direction(), &Vec3::new(0.6, 0.0, 0.8));

        for d in [1e-3, 1.0, 1e3] {
            let r = propagate(&ray(Vec3::new(0.2, -0.1, 0.0), Vec3::z()), d).unwrap();
            assert_eq!((r.origin().x, r.origin().y), (0.2, -0.1));
        }

        assert!(matches!(
            propagate(&ray(Vec3::zeros(), Vec3::x()), 1.0),
            Err(BenchError::NonAdvancing)
        ));
    }

    #[test]
    fn lens_examples() {
        let axial = ray(Vec3::zeros(), Vec3::z());
        assert_eq!(apply_thin_lens(&axial, 0.5, 1.0).unwrap(), axial);

        // parallel ray crosses the axis one focal length downstream
        let r = apply_thin_lens(&ray(Vec3::new(0.1, 0.0, 0.0), Vec3::z()), 0.5, 1.0).unwrap();
        let r = propagate(&r, 0.5).unwrap();
        assert_abs_diff_eq!(r.origin().x, 0.0, epsilon = 1e-15);

        assert!(apply_thin_lens(&ray(Vec3::new(2.0, 0.0, 0.0), Vec3::z()), 0.5, 1.0).is_none());
    }

    #[test]
    fn point_source_at_2f_reconverges_at_2f() {
        // two-ray intersection: both rays leave the on-axis point at 2f
        let f = 0.25;
        let mut hits = Vec::new();
        for slope in [1e-3, -2e-3] {
            let r = ray(Vec3::zeros(), Vec3::new(slope, 0.0, 1.0));
            let r = propagate(&r, 2.0 * f).unwrap();
            let r = apply_thin_lens(&r, f, 1.0).unwrap();
            // axial distance where the ray meets the axis
            hits.push(-r.origin().x * r.direction().z / r.direction().x);
        }
        assert_abs_diff_eq!(hits[0], 2.0 * f, epsilon = 1e-12);
        assert_abs_diff_eq!(hits[1], 2.0 * f, epsilon = 1e-12);
    }

    #[test]
    fn mask_examples() {
        let r = |x| ray(Vec3::new(x, 0.0, 0.0), Vec3::z());
        assert_eq!(apply_mask(&r(3.0), &Mask::Open), Transmission::Transmitted);
        assert_eq!(apply_mask(&r(3.0), &Mask::Opaque), Transmission::Absorbed);
        let slits = Mask::double_slit(1e-3, 0.2e-3);
        assert_eq!(apply_mask(&r(0.5e-3), &slits), Transmission::Transmitted);
        assert_eq!(apply_mask(&r(0.0), &slits), Transmission::Absorbed);
    }

    #[test]
    fn trace_examples() {
        let a = arm(vec![Element::FreeSpace { d: 1.0 }, grid()]);
        let ev = trace(&ray(Vec3::zeros(), Vec3::z()), &a).unwrap();
        assert_eq!(ev.transverse_hit, [0.0, 0.0]);
        assert!(ev.fired && !ev.absorbed);
        assert_eq!(ev.pixel, Some((5, 5)));

        let a = arm(vec![
            Element::FreeSpace { d: 1.0 },
            Element::Mask(Mask::Opaque),
            grid(),
        ]);
        let ev = trace(&ray(Vec3::zeros(), Vec3::z()), &a).unwrap();
        assert!(ev.absorbed && !ev.fired);
    }

    #[test]
    fn conjugate_planes_image_a_point() {
        let (s_o, f) = (0.6, 0.4);
        let s_i = ghost_thin_lens(s_o, f).unwrap().q;
        let a = arm(vec![
            Element::FreeSpace { d: s_o },
            Element::ThinLens {
                f,
                aperture_radius: 0.05,
            },
            Element::FreeSpace { d: s_i },
            Element::ScanningDetector(PixelGrid {
                nx: 1,
                ny: 1,
                pitch: 1.0,
            }),
        ]);
        let src = Vec3::new(1e-3, -5e-4, 0.0);
        let hits: Vec<_> = [(0.0, 0.0), (1e-3, 0.0), (-7e-4, 4e-4), (2e-4, -9e-4)]
            .iter()
            .map(|&(sx, sy)| {
                trace(&ray(src, Vec3::new(sx, sy, 1.0)), &a)
                    .unwrap()
                    .transverse_hit
            })
            .collect();
        for h in &hits {
            assert_abs_diff_eq!(h[0], hits[0][0], epsilon = 1e-9);
            assert_abs_diff_eq!(h[1], hits[0][1], epsilon = 1e-9);
        }
        assert_abs_diff_eq!(hits[0][0], -2e-3, epsilon = 1e-9);
    }

    #[test]
    fn arm_validation() {
        assert!(matches!(
            Arm::new(
                ArmRole::Signal,
                Vec3::zeros(),
                Vec3::z(),
                vec![Element::FreeSpace { d: 1.0 }]
            ),
            Err(BenchError::DetectorPlacement)
        ));
        assert!(matches!(
            Arm::new(
                ArmRole::Signal,
                Vec3::zeros(),
                Vec3::z(),
                vec![grid(), Element::FreeSpace { d: 1.0 }]
            ),
            Err(BenchError::DetectorPlacement)
        ));
        assert!(matches!(
            Arm::new(
                ArmRole::Signal,
                Vec3::zeros(),
                Vec3::z(),
                vec![Element::FreeSpace { d: -1.0 }, grid()]
            ),
            Err(BenchError::InvalidElement { index: 0, .. })
        ));
        let empty = Element::ScanningDetector(PixelGrid {
            nx: 0,
            ny: 4,
            pitch: 0.1,
        });
        assert!(Arm::new(ArmRole::Idler, Vec3::zeros(), Vec3::z(), vec![empty]).is_err());
    }

    fn pittman_arms() -> (Arm, Arm) {
        let signal = Arm::new(
            ArmRole::Signal,
            Vec3::zeros(),
            Vec3::z(),
            vec![
                Element::FreeSpace { d: 0.4 },
                Element::ThinLens {
                    f: 0.4,
                    aperture_radius: 0.0127,
                },
                Element::FreeSpace { d: 0.6 },
                Element::Mask(Mask::double_slit(1e-3, 0.2e-3)),
                Element::BucketDetector { radius: 0.025 },
            ],
        )
        .unwrap();
        let idler = Arm::new(
            ArmRole::Idler,
            Vec3::zeros(),
            Vec3::z(),
            vec![Element::FreeSpace { d: 0.8 }, grid()],
        )
        .unwrap();
        (signal, idler)
    }

    #[test]
    fn fold_lengths_add() {
        let (signal, idler) = pittman_arms();
        let pump = PumpModel::plane(Vec3::z(), 1.0, Units::Normalized).unwrap();
        let folded = fold_klyshko(&signal, &idler, &pump, 0.5).unwrap();
        assert_abs_diff_eq!(
            folded.distance_to_first_lens().unwrap(),
            1.2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            folded.length(),
            signal.length() + idler.length(),
            epsilon = 1e-15
        );
        assert!(matches!(folded.detector(), Element::BucketDetector { .. }));
        assert_eq!(folded.role, ArmRole::Folded);
    }

    #[test]
    fn fold_rejects_unsupported_setups() {
        let (signal, idler) = pittman_arms();
        let pump = PumpModel::plane(Vec3::z(), 1.0, Units::Normalized).unwrap();
        assert!(matches!(
            fold_klyshko(&signal, &idler, &pump, 0.4),
            Err(BenchError::UnsupportedFold(_))
        ));
        let sph =
            PumpModel::spherical(Vec3::z(), 1.0, Vec3::zeros(), 1.0, Units::Normalized).unwrap();
        assert!(fold_klyshko(&signal, &idler, &sph, 0.5).is_err());
        let mut moved = idler.clone();
        moved.frame.origin = Vec3::new(0.0, 0.0, 0.1);
        assert!(fold_klyshko(&signal, &moved, &pump, 0.5).is_err());
    }

    #[test]
    fn folded_mirror_preserves_transverse_coordinates() {
        // mirror with free space on both sides: a ray launched at the folded
        // entry keeps its transverse coordinate through the mirror plane
        let idler = arm(vec![Element::FreeSpace { d: 0.3 }, grid()]);
        let signal = Arm::new(
            ArmRole::Signal,
            Vec3::zeros(),
            Vec3::z(),
            vec![
                Element::FreeSpace { d: 0.3 },
                Element::BucketDetector { radius: 1.0 },
            ],
        )
        .unwrap();
        let pump = PumpModel::plane(Vec3::z(), 1.0, Units::Normalized).unwrap();
        let folded = fold_klyshko(&signal, &idler, &pump, 0.5).unwrap();
        let r = ray(Vec3::new(0.01, -0.02, 0.0), Vec3::new(3e-3, 1e-3, 1.0));
        let (_, at_mirror) = trace_local(
            &r,
            &Arm::with_frame(
                ArmRole::Folded,
                folded.frame,
                vec![
                    Element::FreeSpace { d: 0.3 },
                    Element::PlaneMirror,
                    Element::BucketDetector { radius: 1.0 },
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let straight = propagate(&r, 0.3).unwrap();
        assert_eq!(at_mirror.origin(), straight.origin());
    }

    proptest! {
        #[test]
        fn free_space_segments_commute(d1 in 0.01..2.0f64, d2 in 0.01..2.0f64,
                                       x in -0.1..0.1f64, sx in -0.05..0.05f64, sy in -0.05..0.05f64) {
            let r = ray(Vec3::new(x, 0.0, 0.0), Vec3::new(sx, sy, 1.0));
            let a = arm(vec![Element::FreeSpace { d: d1 }, Element::FreeSpace { d: d2 }, grid()]);
            let b = arm(vec![Element::FreeSpace { d: d2 }, Element::FreeSpace { d: d1 }, grid()]);
            let c = arm(vec![Element::FreeSpace { d: d1 + d2 }, grid()]);
            let ha = trace(&r, &a).unwrap().transverse_hit;
            let hb = trace(&r, &b).unwrap().transverse_hit;
            let hc = trace(&r, &c).unwrap().transverse_hit;
            for k in 0..2 {
                prop_assert!((ha[k] - hb[k]).abs() < 1e-12);
                prop_assert!((ha[k] - hc[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn trace_preserves_frequency(omega in 1e-3..1e3f64, sx in -0.01..0.01f64) {
            let a = arm(vec![
                Element::FreeSpace { d: 0.5 },
                Element::ThinLens { f: 0.2, aperture_radius: 1.0 },
                Element::FreeSpace { d: 0.5 },
                grid(),
            ]);
            let r = Ray::new(Vec3::zeros(), Vec3::new(sx, 0.0, 1.0), omega).unwrap();
            let (_, out) = trace_local(&r, &a).unwrap();
            prop_assert_eq!(out.omega(), omega);
        }
    }
}
