//! Transmission masks: analytic shape unions and raster bitmaps.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("cannot decode mask bitmap: {0}")]
    Decode(#[from] image::ImageError),
    #[error("mask pixel pitch must be positive, got {0}")]
    InvalidPitch(f64),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}

/// Open region of a mask, in transverse plane coordinates (m).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Rect {
        center: [f64; 2],
        size: [f64; 2],
    },
    /// Vertical slit, unbounded along y.
    Slit {
        x: f64,
        width: f64,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    /// Simple polygon, even-odd rule.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Rect { center, size } => {
                (x - center[0]).abs() <= 0.5 * size[0] && (y - center[1]).abs() <= 0.5 * size[1]
            }
            Shape::Slit { x: cx, width } => (x - cx).abs() <= 0.5 * width,
            Shape::Disk { center, radius } => (x - center[0]).hypot(y - center[1]) <= *radius,
            Shape::Polygon { vertices } => point_in_polygon(vertices, x, y),
        }
    }

    pub fn validate(&self) -> Result<(), MaskError> {
        let ok = match self {
            Shape::Rect { size, .. } => size.iter().all(|s| s.is_finite() && *s > 0.0),
            Shape::Slit { width, .. } => width.is_finite() && *width > 0.0,
            Shape::Disk { radius, .. } => radius.is_finite() && *radius > 0.0,
            Shape::Polygon { vertices } => vertices.len() >= 3,
        };
        if ok {
            Ok(())
        } else {
            Err(MaskError::InvalidShape(format!("{self:?}")))
        }
    }
}

fn point_in_polygon(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        let (xi, yi) = (v[i][0], v[i][1]);
        let (xj, yj) = (v[j][0], v[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Bitmap mask centered on the axis. Row 0 is the top (+y) edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    pub width: usize,
    pub height: usize,
    pub pitch: f64,
    open: Vec<bool>,
}

impl RasterMask {
    pub fn new(
        width: usize,
        height: usize,
        pitch: f64,
        open: Vec<bool>,
    ) -> Result<Self, MaskError> {
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(MaskError::InvalidPitch(pitch));
        }
        if open.len() != width * height {
            return Err(MaskError::InvalidShape(format!(
                "raster has {} cells, expected {width}x{height}",
                open.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pitch,
            open,
        })
    }

    /// Reads a P2/P5 graymap; pixels at or above half scale are open.
    pub fn from_pgm(path: impl AsRef<Path>, pitch: f64) -> Result<Self, MaskError> {
        let img = image::ImageReader::open(path.as_ref())
            .map_err(image::ImageError::IoError)?
            .with_guessed_format()
            .map_err(image::ImageError::IoError)?
            .decode()?;
        Self::from_luma(img.to_luma16(), pitch)
    }

    pub fn from_pgm_bytes(bytes: &[u8], pitch: f64) -> Result<Self, MaskError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Pnm)?;
        Self::from_luma(img.to_luma16(), pitch)
    }

    fn from_luma(
        img: image::ImageBuffer<image::Luma<u16>, Vec<u16>>,
        pitch: f64,
    ) -> Result<Self, MaskError> {
        let (w, h) = img.dimensions();
        let open = img.pixels().map(|p| p.0[0] >= 0x8000).collect();
        Self::new(w as usize, h as usize, pitch, open)
    }

    /// Nearest-pixel lookup; outside the bitmap is opaque.
    pub fn is_open(&self, x: f64, y: f64) -> bool {
        let col = (x / self.pitch + 0.5 * self.width as f64).floor();
        let row = (0.5 * self.height as f64 - y / self.pitch).floor();
        if col < 0.0 || row < 0.0 {
            return false;
        }
        let (col, row) = (col as usize, row as usize);
        col < self.width && row < self.height && self.open[row * self.width + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mask {
    Open,
    Opaque,
    /// Transmits inside the union of `open`.
    Shapes(Vec<Shape>),
    Raster(RasterMask),
}

impl Mask {
    /// Symmetric double slit of unbounded height.
    pub fn double_slit(separation: f64, width: f64) -> Self {
        Mask::Shapes(vec![
            Shape::Slit {
                x: -0.5 * separation,
                width,
            },
            Shape::Slit {
                x: 0.5 * separation,
                width,
            },
        ])
    }

    pub fn transmits(&self, x: f64, y: f64) -> bool {
        match self {
            Mask::Open => true,
            Mask::Opaque => false,
            Mask::Shapes(shapes) => shapes.iter().any(|s| s.contains(x, y)),
            Mask::Raster(r) => r.is_open(x, y),
        }
    }

    pub fn validate(&self) -> Result<(), MaskError> {
        if let Mask::Shapes(shapes) = self {
            shapes.iter().try_for_each(Shape::validate)?;
        }
        Ok(())
    }

    /// Fraction of a `size`-square centered at `(x, y)` that transmits,
    /// estimated on an `n x n` sub-grid.
    pub fn coverage(&self, x: f64, y: f64, size: f64, n: usize) -> f64 {
        let n = n.max(1);
        let step = size / n as f64;
        let x0 = x - 0.5 * size + 0.5 * step;
        let y0 = y - 0.5 * size + 0.5 * step;
        let mut open = 0usize;
        for j in 0..n {
            for i in 0..n {
                if self.transmits(x0 + i as f64 * step, y0 + j as f64 * step) {
                    open += 1;
                }
            }
        }
        open as f64 / (n * n) as f64
    }
}
