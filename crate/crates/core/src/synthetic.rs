//! Seeded synthetic test material: natural-looking scenes and simple
//! distortions. Used by tests, the acceptance suite and demo manifests
//! where real databases are not available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::filters::{convolve, make_gaussian, Boundary};
use crate::plane::{GrayImage, Plane};

const OCTAVE_RATIO: f64 = 1.7;
const MIN_CELL: f64 = 2.0;

/// Lattice noise with cell size `cell`, sampled bilinearly at a random
/// sub-cell phase so that octaves do not share a common grid.
fn value_noise(w: usize, h: usize, cell: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gw = (w as f64 / cell) as usize + 3;
    let gh = (h as f64 / cell) as usize + 3;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (px, py) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let fy = y as f64 / cell + py;
        let (y0, ty) = (fy.floor() as usize, fy.fract());
        // smoothstep keeps the interpolant C1 across cells
        let ty = ty * ty * (3.0 - 2.0 * ty);
        for x in 0..w {
            let fx = x as f64 / cell + px;
            let (x0, tx) = (fx.floor() as usize, fx.fract());
            let tx = tx * tx * (3.0 - 2.0 * tx);
            let at = |gx: usize, gy: usize| lattice[gy * gw + gx];
            let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
            let bottom = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

/// A deterministic scene with 1/f-like texture, shaded background, hard-edged
/// shapes and thin lines, scaled into `[10, 245]`.
pub fn natural_image(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width, height);
    let mut data = vec![0.0; w * h];

    // texture: amplitude proportional to cell size; the non-dyadic ratio
    // keeps octave grids from realigning under integer shifts
    let mut cell = w.max(h) as f64 / 2.0;
    while cell >= MIN_CELL {
        let layer = value_noise(w, h, cell, &mut rng);
        data.iter_mut()
            .zip(&layer)
            .for_each(|(d, l)| *d += cell * l);
        cell /= OCTAVE_RATIO;
    }

    // illumination ramp
    let (gx, gy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    for y in 0..h {
        for x in 0..w {
            data[y * w + x] += 20.0 * (gx * x as f64 / w as f64 + gy * y as f64 / h as f64);
        }
    }

    // hard-edged ellipses and rectangles
    let shapes = 6 + (seed % 4) as usize;
    for i in 0..shapes {
        let cx = rng.random_range(0.0..w as f64);
        let cy = rng.random_range(0.0..h as f64);
        let rx = rng.random_range(0.05..0.25) * w as f64;
        let ry = rng.random_range(0.05..0.25) * h as f64;
        let level = rng.random_range(-60.0..60.0);
        let ellipse = i % 2 == 0;
        for y in 0..h {
            for x in 0..w {
                let dx = (x as f64 - cx) / rx;
                let dy = (y as f64 - cy) / ry;
                let inside = if ellipse {
                    dx * dx + dy * dy <= 1.0
                } else {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                };
                if inside {
                    data[y * w + x] += level;
                }
            }
        }
    }

    // a few thin lines
    for _ in 0..3 {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let offset = rng.random_range(0.0..(w.min(h) as f64));
        let level = rng.random_range(-40.0..40.0);
        let (s, c) = angle.sin_cos();
        for y in 0..h {
            for x in 0..w {
                let d = x as f64 * c + y as f64 * s - offset;
                if d.abs() < 0.8 {
                    data[y * w + x] += level;
                }
            }
        }
    }

    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-9);
    data.iter_mut()
        .for_each(|v| *v = 10.0 + 235.0 * (*v - lo) / span);
    GrayImage::new(w, h, data)
}

/// Uniform white noise in `[0, 255)`.
pub fn random_image(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height)
        .map(|_| rng.random_range(0.0..255.0))
        .collect();
    GrayImage::new(width, height, data)
}

/// Adds zero-mean Gaussian noise with standard deviation `std` and clamps to
/// `[0, 255]`. A given seed always draws the same unit-variance field, so
/// increasing `std` scales one realization.
pub fn add_gaussian_noise(img: &GrayImage, std: f64, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = img.map(|v| {
        let n: f64 = StandardNormal.sample(&mut rng);
        (v + std * n).clamp(0.0, 255.0)
    });
    GrayImage::from_plane(noisy)
}

pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    GrayImage::from_plane(convolve(img, &make_gaussian(sigma)?, Boundary::Reflect)?)
}

/// Uniform quantization to `levels` gray levels.
pub fn quantize(img: &GrayImage, levels: u32) -> Result<GrayImage> {
    let step = 255.0 / (levels.max(2) - 1) as f64;
    GrayImage::from_plane(img.map(|v| (v / step).round() * step))
}

/// Crops the plane into a gray image (helper for shifting tests).
pub fn crop_image(img: &GrayImage, x0: usize, y0: usize, w: usize, h: usize) -> Result<GrayImage> {
    GrayImage::from_plane(Plane::crop(img, x0, y0, w, h)?)
}
