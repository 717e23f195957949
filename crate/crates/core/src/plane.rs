//! Row-major 2-D sample containers.
//!
//! [`Plane`] is the general real-valued matrix used for every intermediate
//! map (filter responses, normalized features, similarity maps).
//! [`GrayImage`] wraps a plane holding luminance in `[0, 255]` and is what
//! the metric entry points accept.

use std::ops::Deref;
use std::path::Path;

use image::{ColorType, DynamicImage};

use crate::error::{Error, Result};

/// Rec. 601 luma weights.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Wraps `data` (row-major, `width * height` samples).
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateInput(format!(
                "plane must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} samples do not fill a {width}x{height} plane",
                data.len()
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Plane::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane::new(width, height, data)
    }

    /// Builds a plane from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Plane::new(width, height, rows.concat())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn same_shape(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_shape(&self, other: &Plane) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            })
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two planes of equal shape.
    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Plane> {
        self.check_same_shape(other)?;
        Ok(Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Copies the `width x height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Plane> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{} plane",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            let start = y * self.width + x0;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    /// Rotates the plane 90 degrees counter-clockwise.
    pub fn rotate90(&self) -> Plane {
        let (w, h) = (self.width, self.height);
        let mut data = Vec::with_capacity(w * h);
        // out(x', y') with out width h, height w; out(x', y') = in(w-1-y', x')
        for yo in 0..w {
            for xo in 0..h {
                data.push(self.get(w - 1 - yo, xo));
            }
        }
        Plane {
            width: h,
            height: w,
            data,
        }
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Plane {
        let mut data = Vec::with_capacity(self.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        Plane {
            width: self.height,
            height: self.width,
            data,
        }
    }

    pub fn max_abs_diff(&self, other: &Plane) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Luminance image with samples in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage(Plane);

impl GrayImage {
    /// Validates that every sample is finite. Range is not clamped; callers
    /// feeding `[0, 1]` data must rescale first since the stabilizing
    /// constants assume an 8-bit scale.
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        GrayImage::from_plane(Plane::new(width, height, samples)?)
    }

    pub fn from_plane(plane: Plane) -> Result<Self> {
        if let Some(i) = plane.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample at ({}, {})",
                i % plane.width(),
                i / plane.width()
            )));
        }
        Ok(GrayImage(plane))
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        GrayImage::from_plane(Plane::from_fn(width, height, f)?)
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn into_plane(self) -> Plane {
        self.0
    }

    /// Converts a decoded image to luminance. Gray inputs are taken as-is,
    /// color inputs go through Rec. 601 luma. 16-bit and float inputs are
    /// rescaled to the 8-bit range.
    pub fn from_dynamic(img: &DynamicImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let data: Vec<f64> = match img.color() {
            ColorType::L8 | ColorType::La8 => img
                .to_luma8()
                .into_raw()
                .into_iter()
                .map(f64::from)
                .collect(),
            ColorType::Rgb8 | ColorType::Rgba8 => img
                .to_rgb8()
                .into_raw()
                .chunks_exact(3)
                .map(|p| luma(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])))
                .collect(),
            ColorType::L16 | ColorType::La16 => img
                .to_luma16()
                .into_raw()
                .into_iter()
                .map(|v| f64::from(v) * 255.0 / 65535.0)
                .collect(),
            _ => img
                .to_rgb32f()
                .into_raw()
                .chunks_exact(3)
                .map(|p| 255.0 * luma(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])))
                .collect(),
        };
        GrayImage(Plane {
            width: w,
            height: h,
            data,
        })
    }

    /// Decodes a PNG or BMP file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::ImageDecode {
                path: path.to_path_buf(),
                source: other,
            },
        })?;
        Ok(GrayImage::from_dynamic(&img))
    }

    /// Writes the image as 8-bit grayscale PNG, rounding and clamping samples.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes: Vec<u8> = self
            .0
            .data
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect();
        let buf = image::GrayImage::from_raw(self.width() as u32, self.height() as u32, bytes)
            .expect("buffer length matches dimensions");
        buf.save(path).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::ImageDecode {
                path: path.to_path_buf(),
                source: other,
            },
        })
    }
}

impl Deref for GrayImage {
    type Target = Plane;

    fn deref(&self) -> &Plane {
        &self.0
    }
}

#[inline]
fn luma(r: f64, g: f64, b: f64) -> f64 {
    LUMA_R * r + LUMA_G * g + LUMA_B * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Plane::new(0, 3, vec![]).is_err());
        assert!(Plane::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Plane::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(GrayImage::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn rotate_four_times_is_identity() {
        let p = Plane::from_fn(5, 3, |x, y| (x * 10 + y) as f64).unwrap();
        let r = p.rotate90();
        assert_eq!((r.width(), r.height()), (3, 5));
        assert_eq!(r.rotate90().rotate90().rotate90(), p);
    }

    #[test]
    fn crop_window() {
        let p = Plane::from_fn(4, 3, |x, y| (x + 4 * y) as f64).unwrap();
        let c = p.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.as_slice(), &[5.0, 6.0, 9.0, 10.0]);
        assert!(p.crop(3, 0, 2, 1).is_err());
    }

    #[test]
    fn color_conversion_uses_rec601() {
        let rgb = image::RgbImage::from_raw(2, 1, vec![255, 0, 0, 10, 20, 30]).unwrap();
        let g = GrayImage::from_dynamic(&DynamicImage::ImageRgb8(rgb));
        assert!((g.get(0, 0) - 0.299 * 255.0).abs() < 1e-12);
        assert!((g.get(1, 0) - (2.99 + 11.74 + 3.42)).abs() < 1e-12);
    }

    #[test]
    fn gray_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let img = GrayImage::from_fn(7, 5, |x, y| (x * 30 + y) as f64).unwrap();
        img.save_png(&path).unwrap();
        let back = GrayImage::open(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = GrayImage::open("/nonexistent/nope.png").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
