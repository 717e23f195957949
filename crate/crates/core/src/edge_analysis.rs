//! Closed-form 1-D analysis of the QGL response to an ideal step edge.
//!
//! A unit step smoothed by a Gaussian of scale `sigma` has first derivative
//! `d1(x) = G(x)` and second derivative `d2(x) = G'(x)`. Their weighted
//! energy
//!
//! ```text
//! R(x) = d1(x)^2 + (k d2(x))^2 = (sigma^4 + k^2 x^2) / (2 pi sigma^6) * exp(-x^2 / sigma^2)
//! ```
//!
//! is flat to fourth order around the edge exactly when `k = sigma`, which is
//! what makes the feature tolerant of small translations.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Number of interior samples used for the ideal-k tables.
pub const BETA_SAMPLES: usize = 512;

/// Sampled step-edge responses for one `(sigma, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeProfile {
    pub xs: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub sigma: f64,
    pub k: f64,
}

impl EdgeProfile {
    pub fn new(xs: Vec<f64>, sigma: f64, k: f64) -> Result<Self> {
        if xs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "sample positions must be sorted".into(),
            ));
        }
        let (d1, d2) = edge_response(&xs, sigma)?;
        let r = r_profile(&xs, sigma, k)?;
        let f = r_derivative(&xs, sigma, k)?;
        Ok(EdgeProfile {
            xs,
            d1,
            d2,
            r,
            f,
            sigma,
            k,
        })
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be finite and > 0",
        })
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// First and second derivatives of a Gaussian-smoothed unit step.
pub fn edge_response(xs: &[f64], sigma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    positive("sigma", sigma)?;
    let d1 = xs.iter().map(|&x| gaussian(x, sigma)).collect();
    let d2 = xs
        .iter()
        .map(|&x| -x / (sigma * sigma) * gaussian(x, sigma))
        .collect();
    Ok((d1, d2))
}

/// `R(x)` in closed form.
pub fn r_profile(xs: &[f64], sigma: f64, k: f64) -> Result<Vec<f64>> {
    positive("sigma", sigma)?;
    positive("k", k)?;
    let s2 = sigma * sigma;
    let norm = 2.0 * PI * s2 * s2 * s2;
    Ok(xs
        .iter()
        .map(|&x| (s2 * s2 + k * k * x * x) / norm * (-x * x / s2).exp())
        .collect())
}

/// Analytic derivative of `R`:
/// `x (k^2 sigma^2 - sigma^4 - k^2 x^2) / (pi sigma^8) * exp(-x^2 / sigma^2)`.
pub fn r_derivative(xs: &[f64], sigma: f64, k: f64) -> Result<Vec<f64>> {
    positive("sigma", sigma)?;
    positive("k", k)?;
    let s2 = sigma * sigma;
    let k2 = k * k;
    let norm = PI * s2 * s2 * s2 * s2;
    Ok(xs
        .iter()
        .map(|&x| x * (k2 * s2 - s2 * s2 - k2 * x * x) / norm * (-x * x / s2).exp())
        .collect())
}

/// Ideal `k` curves for flatness over `[-beta sigma, beta sigma]`.
///
/// Returns `(k_a, k_b)` with `k_a = sigma / sqrt(1 - beta^2)` and
/// `k_b = sigma sqrt((1 - 2 beta^2) / (2 beta^4 - 5 beta^2 + 1))`. Entries of
/// `k_b` whose radicand is not positive (or whose denominator vanishes) are NaN.
pub fn ideal_k_curves(betas: &[f64], sigma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    positive("sigma", sigma)?;
    if let Some(&b) = betas.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
        return Err(Error::InvalidArgument(format!("beta {b} outside (0, 1)")));
    }
    let k_a = betas
        .iter()
        .map(|&b| sigma / (1.0 - b * b).sqrt())
        .collect();
    let k_b = betas
        .iter()
        .map(|&b| {
            let b2 = b * b;
            let den = 2.0 * b2 * b2 - 5.0 * b2 + 1.0;
            let radicand = (1.0 - 2.0 * b2) / den;
            if den != 0.0 && radicand.is_finite() && radicand > 0.0 {
                sigma * radicand.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok((k_a, k_b))
}

/// `BETA_SAMPLES` uniform points strictly inside `(0, 1)`.
pub fn beta_grid() -> Vec<f64> {
    let n = BETA_SAMPLES;
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// `n` evenly spaced samples covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Largest `x >= 0` such that `R(t) >= level * R(0)` for all `t` in `[0, x]`,
/// located by scanning with `step` and refining by bisection.
pub fn flat_half_width(sigma: f64, k: f64, level: f64, step: f64) -> Result<f64> {
    positive("step", step)?;
    let r = |x: f64| r_profile(&[x], sigma, k).map(|v| v[0]);
    let r0 = r(0.0)?;
    let thresh = level * r0;
    let mut x = 0.0;
    let limit = 10.0 * sigma;
    while x < limit {
        let next = x + step;
        if r(next)? < thresh {
            let (mut lo, mut hi) = (x, next);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if r(mid)? >= thresh {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        x = next;
    }
    Ok(limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erf_step(x: f64, sigma: f64) -> f64 {
        // Smoothed unit step 0.5 (1 + erf(x / (sigma sqrt 2))), via a
        // high-order series so the oracle does not depend on `gaussian`.
        0.5 * (1.0 + erf(x / (sigma * 2f64.sqrt())))
    }

    /// Maclaurin series for |z| < 3, continued-fraction tail beyond.
    fn erf(z: f64) -> f64 {
        if z.abs() > 3.0 {
            return z.signum() * (1.0 - erfc_cf(z.abs()));
        }
        let mut term = z;
        let mut sum = z;
        let z2 = z * z;
        for n in 1..200 {
            term *= -z2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    }

    fn erfc_cf(z: f64) -> f64 {
        // Lentz-free backward evaluation of the Laplace continued fraction.
        let mut f = 0.0;
        for n in (1..60).rev() {
            f = (n as f64 / 2.0) / (z + f);
        }
        (-z * z).exp() / PI.sqrt() / (z + f)
    }

    #[test]
    fn response_at_origin() {
        let (d1, d2) = edge_response(&[0.0], 1.0).unwrap();
        assert_eq!(d2[0], 0.0);
        assert!((d1[0] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((d1[0] - 0.39894).abs() < 1e-5);
        for s in [0.3, 4.0] {
            assert_eq!(edge_response(&[0.0], s).unwrap().1[0], 0.0);
        }
    }

    #[test]
    fn response_matches_finite_differences_of_erf() {
        let xs = linspace(-5.0, 5.0, 1001);
        let sigma = 1.0;
        let (d1, d2) = edge_response(&xs, sigma).unwrap();
        let h = 1e-3;
        for (i, &x) in xs.iter().enumerate() {
            let u = |t: f64| erf_step(t, sigma);
            let fd1 = (u(x + h) - u(x - h)) / (2.0 * h);
            let fd2 = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
            assert!((d1[i] - fd1).abs() < 1e-6, "d1 at {x}");
            assert!((d2[i] - fd2).abs() < 1e-6, "d2 at {x}: {} vs {fd2}", d2[i]);
        }
    }

    #[test]
    fn r_profile_values() {
        assert!((r_profile(&[0.0], 1.0, 0.3).unwrap()[0] - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((r_profile(&[0.0], 1.0, 1.0).unwrap()[0] - 0.159155).abs() < 1e-6);
        let r = r_profile(&[0.0, 0.3], 1.0, 1.0).unwrap();
        assert!(r[1] / r[0] >= 0.99);
        let xs = linspace(-3.0, 3.0, 61);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_eq!(
            r_profile(&xs, 1.3, 0.7).unwrap(),
            r_profile(&neg, 1.3, 0.7).unwrap()
        );
    }

    #[test]
    fn r_is_sum_of_squares() {
        let xs = linspace(-4.0, 4.0, 161);
        for (s, k) in [(0.5, 0.5), (1.0, 1.5), (2.0, 0.7)] {
            let p = EdgeProfile::new(xs.clone(), s, k).unwrap();
            for i in 0..xs.len() {
                let direct = p.d1[i].powi(2) + (k * p.d2[i]).powi(2);
                assert!((p.r[i] - direct).abs() < 1e-12);
                assert!(p.d1[i] > 0.0 && p.r[i] > 0.0);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = 1e-5;
        for (s, k) in [(0.5, 0.5), (1.0, 1.0), (2.0, 3.0), (1.0, 0.25)] {
            let xs = linspace(-4.0 * s, 4.0 * s, 81);
            let f = r_derivative(&xs, s, k).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                let r = r_profile(&[x - h, x + h], s, k).unwrap();
                let fd = (r[1] - r[0]) / (2.0 * h);
                assert!((f[i] - fd).abs() < 1e-7, "sigma {s} k {k} x {x}");
            }
            assert_eq!(r_derivative(&[0.0], s, k).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn printed_derivative_is_twice_the_true_one() {
        // The alternative form 2x(...)/(pi sigma^8) exp(...) fails the
        // finite-difference check by exactly a factor of two.
        let (s, k, x) = (1.0f64, 0.8f64, 0.7f64);
        let h = 1e-5;
        let r = r_profile(&[x - h, x + h], s, k).unwrap();
        let fd = (r[1] - r[0]) / (2.0 * h);
        let printed = 2.0 * x * (k * k * s * s - s.powi(4) - k * k * x * x) / (PI * s.powi(8))
            * (-x * x / (s * s)).exp();
        assert!((printed / fd - 2.0).abs() < 1e-6);
    }

    #[test]
    fn flat_top_at_k_equal_sigma() {
        let h = 1e-4;
        let sigma = 1.0;
        let r = r_profile(&[-h, 0.0, h], sigma, sigma).unwrap();
        let first = (r[2] - r[0]) / (2.0 * h);
        let second = (r[2] - 2.0 * r[1] + r[0]) / (h * h);
        assert!(first.abs() < 1e-8);
        assert!(second.abs() < 1e-6 * r[1]);
    }

    #[test]
    fn k_above_sigma_makes_origin_a_minimum() {
        let sigma = 1.0;
        let r = r_profile(&[0.0, 0.1 * sigma], sigma, 1.5 * sigma).unwrap();
        assert!(r[1] > r[0]);
    }

    #[test]
    fn flat_width_is_maximized_at_k_equal_sigma() {
        for sigma in [0.5, 1.0, 2.0] {
            let widths: Vec<f64> = [0.25, 0.5, 0.75, 1.0]
                .iter()
                .map(|m| flat_half_width(sigma, m * sigma, 0.99, 1e-3).unwrap())
                .collect();
            assert!(widths.windows(2).all(|w| w[0] < w[1]), "{widths:?}");
        }
    }

    #[test]
    fn normalized_profiles_collapse_across_scales() {
        let t = linspace(-4.0, 4.0, 161);
        let norm = |sigma: f64| -> Vec<f64> {
            let xs: Vec<f64> = t.iter().map(|v| v * sigma).collect();
            r_profile(&xs, sigma, sigma)
                .unwrap()
                .into_iter()
                .map(|r| r * 2.0 * PI * sigma * sigma)
                .collect()
        };
        let base = norm(1.0);
        for s in [0.5, 2.0] {
            for (a, b) in norm(s).iter().zip(&base) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ideal_k_values() {
        let (ka, kb) = ideal_k_curves(&[0.5], 1.0).unwrap();
        assert!((ka[0] - 1.0 / 0.75f64.sqrt()).abs() < 1e-12);
        assert!((ka[0] - 1.154701).abs() < 1e-6);
        assert!(kb[0].is_nan());

        let (ka, kb) = ideal_k_curves(&[1e-4], 2.0).unwrap();
        assert!((ka[0] - 2.0).abs() < 1e-6 && (kb[0] - 2.0).abs() < 1e-6);

        assert!(ideal_k_curves(&[0.0], 1.0).is_err());
        assert!(ideal_k_curves(&[1.0], 1.0).is_err());
        assert!(ideal_k_curves(&[0.3], 0.0).is_err());
    }

    #[test]
    fn beta_grid_is_open_interval() {
        let g = beta_grid();
        assert_eq!(g.len(), BETA_SAMPLES);
        assert!(g[0] > 0.0 && *g.last().unwrap() < 1.0);
        assert!(ideal_k_curves(&g, 1.0).is_ok());
    }

    #[test]
    fn invalid_parameters() {
        assert!(edge_response(&[0.0], 0.0).is_err());
        assert!(r_profile(&[0.0], 1.0, -1.0).is_err());
        assert!(r_derivative(&[0.0], f64::NAN, 1.0).is_err());
        assert!(EdgeProfile::new(vec![1.0, 0.0], 1.0, 1.0).is_err());
    }
}
