//! Sampled Gaussian, Laplacian-of-Gaussian and derivative-of-Gaussian
//! kernels, and 2-D convolution with mirrored borders.
//!
//! Kernels are sampled at integer offsets out to `ceil(3 * sigma)` (at least
//! one tap on each side). Offsets use image orientation: `x` grows to the
//! right, `y` grows downward.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Border extension used by [`convolve`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Boundary {
    /// Mirror about the edge sample without repeating it: `... c b | a b c ...`.
    #[default]
    Reflect,
}

/// Separable factorization `tap(x, y) = horizontal[x] * vertical[y]`.
#[derive(Clone, Debug, PartialEq)]
struct Factors {
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
}

/// Square filter with odd side `2 * radius + 1`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    sigma: f64,
    taps: Vec<f64>,
    factors: Option<Factors>,
}

impl Kernel2D {
    /// Builds a kernel from explicit row-major taps.
    pub fn from_taps(radius: usize, taps: Vec<f64>, sigma: f64) -> Result<Self> {
        let side = 2 * radius + 1;
        if radius == 0 {
            return Err(Error::InvalidArgument("kernel radius must be >= 1".into()));
        }
        if taps.len() != side * side {
            return Err(Error::InvalidArgument(format!(
                "{} taps do not form a {side}x{side} kernel",
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("kernel taps must be finite".into()));
        }
        Ok(Kernel2D {
            radius,
            sigma,
            taps,
            factors: None,
        })
    }

    /// 3x3 kernel with a single unit tap at the center.
    pub fn identity() -> Self {
        let mut taps = vec![0.0; 9];
        taps[4] = 1.0;
        Kernel2D {
            radius: 1,
            sigma: f64::NAN,
            taps,
            factors: None,
        }
    }

    fn separable(radius: usize, sigma: f64, horizontal: Vec<f64>, vertical: Vec<f64>) -> Self {
        let taps = vertical
            .iter()
            .flat_map(|&v| horizontal.iter().map(move |&h| h * v))
            .collect();
        Kernel2D {
            radius,
            sigma,
            taps,
            factors: Some(Factors {
                horizontal,
                vertical,
            }),
        }
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Generating scale; NaN for hand-built kernels.
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at offset `(x, y)` from the center.
    pub fn tap(&self, x: isize, y: isize) -> f64 {
        let r = self.radius as isize;
        assert!(
            x.abs() <= r && y.abs() <= r,
            "offset ({x}, {y}) outside radius {r}"
        );
        self.taps[((y + r) as usize) * self.side() + (x + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn is_separable(&self) -> bool {
        self.factors.is_some()
    }

    /// Same taps with rows and columns swapped.
    pub fn transposed(&self) -> Kernel2D {
        let side = self.side();
        let mut taps = vec![0.0; side * side];
        for y in 0..side {
            for x in 0..side {
                taps[x * side + y] = self.taps[y * side + x];
            }
        }
        Kernel2D {
            radius: self.radius,
            sigma: self.sigma,
            taps,
            factors: self.factors.as_ref().map(|f| Factors {
                horizontal: f.vertical.clone(),
                vertical: f.horizontal.clone(),
            }),
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
            reason: "must be finite and > 0",
        })
    }
}

/// Truncation radius shared by every kernel: `ceil(3 * sigma)`, at least 1.
pub fn kernel_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

fn offsets(radius: usize) -> impl Iterator<Item = f64> {
    let r = radius as isize;
    (-r..=r).map(|i| i as f64)
}

/// Unnormalized Gaussian envelope `exp(-t^2 / (2 sigma^2))` over the offsets.
fn envelope(radius: usize, sigma: f64) -> Vec<f64> {
    let two_var = 2.0 * sigma * sigma;
    offsets(radius).map(|t| (-t * t / two_var).exp()).collect()
}

/// Unit-sum 1-D Gaussian taps over `-radius..=radius`.
pub fn gaussian_1d(sigma: f64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    let mut g = envelope(kernel_radius(sigma), sigma);
    let total: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= total);
    Ok(g)
}

/// 2-D Gaussian, renormalized to unit sum after truncation.
pub fn make_gaussian(sigma: f64) -> Result<Kernel2D> {
    let g = gaussian_1d(sigma)?;
    Ok(Kernel2D::separable(
        kernel_radius(sigma),
        sigma,
        g.clone(),
        g,
    ))
}

/// Continuous LoG profile
/// `-(1 / (pi sigma^4)) (1 - (x^2 + y^2) / (2 sigma^2)) exp(-(x^2 + y^2) / (2 sigma^2))`.
pub fn log_value(x: f64, y: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let rho = (x * x + y * y) / (2.0 * s2);
    -(1.0 / (PI * s2 * s2)) * (1.0 - rho) * (-rho).exp()
}

/// Laplacian of Gaussian with the sampled taps shifted to sum to zero.
pub fn make_log(sigma: f64) -> Result<Kernel2D> {
    check_sigma(sigma)?;
    let radius = kernel_radius(sigma);
    let mut taps: Vec<f64> = offsets(radius)
        .flat_map(|y| offsets(radius).map(move |x| log_value(x, y, sigma)))
        .collect();
    let dc = taps.iter().sum::<f64>() / taps.len() as f64;
    taps.iter_mut().for_each(|t| *t -= dc);
    Ok(Kernel2D {
        radius,
        sigma,
        taps,
        factors: None,
    })
}

/// Horizontal derivative of Gaussian,
/// `-(1 / (2 pi sigma^4)) x exp(-(x^2 + y^2) / (2 sigma^2))`.
pub fn make_dx(sigma: f64) -> Result<Kernel2D> {
    check_sigma(sigma)?;
    let radius = kernel_radius(sigma);
    let scale = -1.0 / (2.0 * PI * sigma.powi(4));
    let env = envelope(radius, sigma);
    let horizontal = offsets(radius)
        .zip(&env)
        .map(|(x, &e)| scale * x * e)
        .collect();
    Ok(Kernel2D::separable(radius, sigma, horizontal, env))
}

/// Vertical derivative of Gaussian; the transpose of [`make_dx`].
pub fn make_dy(sigma: f64) -> Result<Kernel2D> {
    Ok(make_dx(sigma)?.transposed())
}

/// Reflected index for `i` on an axis of length `n` (edge sample not repeated).
#[inline]
fn mirror(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

fn check_support(img: &Plane, radius: usize) -> Result<()> {
    let limit = img.width().min(img.height());
    if radius > limit {
        return Err(Error::DegenerateInput(format!(
            "kernel side {} exceeds 2 * min({}, {}) + 1",
            2 * radius + 1,
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Mirror-padded copy with `radius` extra samples on every side.
fn pad(img: &Plane, radius: usize) -> (Vec<f64>, usize) {
    let (w, h) = (img.width(), img.height());
    let pw = w + 2 * radius;
    let r = radius as isize;
    let mut out = Vec::with_capacity(pw * (h + 2 * radius));
    for py in 0..(h + 2 * radius) as isize {
        let row = img.row(mirror(py - r, h));
        for px in 0..pw as isize {
            out.push(row[mirror(px - r, w)]);
        }
    }
    (out, pw)
}

/// True 2-D convolution (kernel flipped) of `img` with `kernel`.
///
/// Separable kernels take a two-pass path; [`convolve_dense`] always uses the
/// full tap matrix.
pub fn convolve(img: &Plane, kernel: &Kernel2D, boundary: Boundary) -> Result<Plane> {
    match &kernel.factors {
        Some(f) => {
            check_support(img, kernel.radius)?;
            convolve_separable(img, &f.horizontal, &f.vertical, boundary)
        }
        None => convolve_dense(img, kernel, boundary),
    }
}

pub fn convolve_dense(img: &Plane, kernel: &Kernel2D, _boundary: Boundary) -> Result<Plane> {
    let r = kernel.radius;
    check_support(img, r)?;
    let (w, h) = (img.width(), img.height());
    let side = kernel.side();
    let (padded, pw) = pad(img, r);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let acc = &mut out[y * w..(y + 1) * w];
        for ky in 0..side {
            // tap row v = ky - r multiplies input row y - v, i.e. padded row y + 2r - ky
            let src_row = &padded[(y + 2 * r - ky) * pw..(y + 2 * r - ky + 1) * pw];
            for kx in 0..side {
                let t = kernel.taps[ky * side + kx];
                if t == 0.0 {
                    continue;
                }
                let src = &src_row[2 * r - kx..2 * r - kx + w];
                for (a, &s) in acc.iter_mut().zip(src) {
                    *a += t * s;
                }
            }
        }
    }
    Plane::new(w, h, out)
}

/// Two 1-D passes: `horizontal` along rows, then `vertical` along columns.
/// Both factors must have the same odd length.
pub fn convolve_separable(
    img: &Plane,
    horizontal: &[f64],
    vertical: &[f64],
    _boundary: Boundary,
) -> Result<Plane> {
    if horizontal.len().is_multiple_of(2) || horizontal.len() != vertical.len() {
        return Err(Error::InvalidArgument(
            "separable factors must share an odd length".into(),
        ));
    }
    let r = horizontal.len() / 2;
    check_support(img, r)?;
    let (w, h) = (img.width(), img.height());
    let ri = r as isize;

    let mut tmp = vec![0.0; w * h];
    let mut line = vec![0.0; w + 2 * r];
    for y in 0..h {
        let row = img.row(y);
        for (i, v) in line.iter_mut().enumerate() {
            *v = row[mirror(i as isize - ri, w)];
        }
        let acc = &mut tmp[y * w..(y + 1) * w];
        for (k, &t) in horizontal.iter().enumerate() {
            let src = &line[2 * r - k..2 * r - k + w];
            for (a, &s) in acc.iter_mut().zip(src) {
                *a += t * s;
            }
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let acc = &mut out[y * w..(y + 1) * w];
        for (k, &t) in vertical.iter().enumerate() {
            let sy = mirror(y as isize + ri - k as isize, h);
            let src = &tmp[sy * w..(sy + 1) * w];
            for (a, &s) in acc.iter_mut().zip(src) {
                *a += t * s;
            }
        }
    }
    Plane::new(w, h, out)
}
