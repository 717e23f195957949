//! QGL feature extraction and the mQGL / sQGL quality scores.
//!
//! For an image `I` at scale `sigma`:
//!
//! * `L = I * LoG(sigma)` and `D = |I * grad G(sigma)|`,
//! * `E = G(norm_scale_mult * sigma) * (D^2 + k^2 L^2)` is the local energy,
//! * `U = k L / sqrt(E + c0)`, `V = D / sqrt(E + c0)`,
//! * `q = sqrt(U^2 + V^2)`.
//!
//! Reference and distorted `q` maps are compared pixelwise with
//! `(2 qr qd + c1) / (qr^2 + qd^2 + c1)` and pooled by mean (mQGL, higher is
//! better) or population standard deviation (sQGL, higher is worse).

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::filters::{convolve, make_dx, make_dy, make_gaussian, make_log, Boundary};
use crate::plane::{GrayImage, Plane};

/// Tunables of the QGL model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QglConfig {
    /// Scale of the LoG and derivative-of-Gaussian filters.
    pub sigma: f64,
    /// Weight of the LoG response relative to the gradient magnitude.
    pub k: f64,
    /// Stabilizer inside the normalization square root.
    pub c0: f64,
    /// Stabilizer of the similarity map.
    pub c1: f64,
    /// Normalization window scale as a multiple of `sigma`.
    pub norm_scale_mult: f64,
    pub boundary: Boundary,
}

impl QglConfig {
    pub const QUALITY_SIGMA: f64 = 0.5;
    pub const SHIFT_SIGMA: f64 = 1.0;
    pub const DEFAULT_C0: f64 = 1.0;
    pub const DEFAULT_C1: f64 = 0.0009;
    pub const DEFAULT_NORM_SCALE_MULT: f64 = 2.0;

    /// Defaults at the given scale, with `k = sqrt(2) * sigma`.
    pub fn with_sigma(sigma: f64) -> Self {
        QglConfig {
            sigma,
            k: SQRT_2 * sigma,
            c0: Self::DEFAULT_C0,
            c1: Self::DEFAULT_C1,
            norm_scale_mult: Self::DEFAULT_NORM_SCALE_MULT,
            boundary: Boundary::Reflect,
        }
    }

    /// Settings for quality prediction on registered pairs (`sigma = 0.5`).
    pub fn quality() -> Self {
        Self::with_sigma(Self::QUALITY_SIGMA)
    }

    /// Settings for the translation experiments (`sigma = 1`).
    pub fn shift() -> Self {
        Self::with_sigma(Self::SHIFT_SIGMA)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(name: &'static str, v: f64, ok: bool, reason: &'static str) -> Result<()> {
            if v.is_finite() && ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason,
                })
            }
        }
        check(
            "sigma",
            self.sigma,
            self.sigma > 0.0,
            "must be finite and > 0",
        )?;
        check("k", self.k, self.k > 0.0, "must be finite and > 0")?;
        check("c0", self.c0, self.c0 >= 0.0, "must be finite and >= 0")?;
        check("c1", self.c1, self.c1 > 0.0, "must be finite and > 0")?;
        check(
            "norm_scale_mult",
            self.norm_scale_mult,
            self.norm_scale_mult > 0.0,
            "must be finite and > 0",
        )
    }
}

impl Default for QglConfig {
    fn default() -> Self {
        Self::quality()
    }
}

/// Normalized LoG map `u`, normalized gradient magnitude `v` and their
/// quadratic sum `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePair {
    pub u: Plane,
    pub v: Plane,
    pub q: Plane,
}

/// Pooled scores for one image pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QglScores {
    pub mqgl: f64,
    pub sqgl: f64,
}

pub fn log_response(img: &Plane, sigma: f64) -> Result<Plane> {
    convolve(img, &make_log(sigma)?, Boundary::Reflect)
}

/// Gradient magnitude `sqrt(dx^2 + dy^2)` of derivative-of-Gaussian responses.
pub fn gradient_magnitude(img: &Plane, sigma: f64) -> Result<Plane> {
    let dx = convolve(img, &make_dx(sigma)?, Boundary::Reflect)?;
    let dy = convolve(img, &make_dy(sigma)?, Boundary::Reflect)?;
    dx.zip_map(&dy, f64::hypot)
}

/// Divides `k L` and `D` by the root of the locally pooled energy.
///
/// Returns `(U, V)`. Fails with [`Error::DivisionDegeneracy`] when `c0 = 0`
/// and the pooled energy vanishes somewhere.
pub fn divisive_normalize(gm: &Plane, log: &Plane, cfg: &QglConfig) -> Result<(Plane, Plane)> {
    cfg.validate()?;
    gm.check_same_shape(log)?;
    if gm.as_slice().iter().any(|&d| d < 0.0) {
        return Err(Error::InvalidArgument(
            "gradient magnitude must be non-negative".into(),
        ));
    }
    let k = cfg.k;
    let energy = gm.zip_map(log, |d, l| d * d + k * k * l * l)?;
    let window = make_gaussian(cfg.norm_scale_mult * cfg.sigma)?;
    let pooled = convolve(&energy, &window, cfg.boundary)?;

    let (w, h) = (gm.width(), gm.height());
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for (i, ((&d, &l), &e)) in gm
        .as_slice()
        .iter()
        .zip(log.as_slice())
        .zip(pooled.as_slice())
        .enumerate()
    {
        // pooled energy can dip a hair below zero through rounding
        let denom = (e.max(0.0) + cfg.c0).sqrt();
        if denom <= 0.0 {
            return Err(Error::DivisionDegeneracy { x: i % w, y: i / w });
        }
        u.push(k * l / denom);
        v.push(d / denom);
    }
    Ok((Plane::new(w, h, u)?, Plane::new(w, h, v)?))
}

pub fn qgl_feature(img: &GrayImage, cfg: &QglConfig) -> Result<FeaturePair> {
    cfg.validate()?;
    let log = log_response(img, cfg.sigma)?;
    let gm = gradient_magnitude(img, cfg.sigma)?;
    let (u, v) = divisive_normalize(&gm, &log, cfg)?;
    let q = u.zip_map(&v, f64::hypot)?;
    Ok(FeaturePair { u, v, q })
}

/// Pixelwise similarity of two QGL maps; every entry lies in `(0, 1]`.
pub fn similarity_map(q_ref: &Plane, q_dist: &Plane, c1: f64) -> Result<Plane> {
    if !(c1.is_finite() && c1 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c1",
            value: c1,
            reason: "must be finite and > 0",
        });
    }
    q_ref.zip_map(q_dist, |a, b| (2.0 * a * b + c1) / (a * a + b * b + c1))
}

fn non_empty(q: &Plane) -> Result<()> {
    if q.is_empty() {
        Err(Error::InvalidArgument("empty similarity map".into()))
    } else {
        Ok(())
    }
}

/// Mean of the similarity map.
pub fn mqgl(q: &Plane) -> Result<f64> {
    non_empty(q)?;
    Ok(q.as_slice().iter().sum::<f64>() / q.len() as f64)
}

/// Population standard deviation of the similarity map.
pub fn sqgl(q: &Plane) -> Result<f64> {
    non_empty(q)?;
    // shifted by the first sample so a constant map gives exactly zero
    let shift = q.as_slice()[0];
    let n = q.len() as f64;
    let (s1, s2) = q.as_slice().iter().fold((0.0, 0.0), |(a, b), &v| {
        let d = v - shift;
        (a + d, b + d * d)
    });
    let var = (s2 - s1 * s1 / n) / n;
    Ok(var.max(0.0).sqrt())
}

/// Similarity map between the QGL features of two images.
pub fn quality_map(reference: &GrayImage, distorted: &GrayImage, cfg: &QglConfig) -> Result<Plane> {
    reference.check_same_shape(distorted)?;
    let fr = qgl_feature(reference, cfg)?;
    let fd = qgl_feature(distorted, cfg)?;
    similarity_map(&fr.q, &fd.q, cfg.c1)
}

/// Full pipeline: features of both images, similarity map, both poolings.
pub fn score_pair(
    reference: &GrayImage,
    distorted: &GrayImage,
    cfg: &QglConfig,
) -> Result<QglScores> {
    let q = quality_map(reference, distorted, cfg)?;
    Ok(QglScores {
        mqgl: mqgl(&q)?,
        sqgl: sqgl(&q)?,
    })
}
