//! Rank correlation and baseline metrics for the benchmark harness.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::plane::GrayImage;

/// Paired objective scores and subjective ratings (DMOS or MOS).
#[derive(Clone, Debug, PartialEq)]
pub struct ScorePairs {
    objective: Vec<f64>,
    subjective: Vec<f64>,
}

impl ScorePairs {
    pub fn new(objective: Vec<f64>, subjective: Vec<f64>) -> Result<Self> {
        if objective.len() != subjective.len() {
            return Err(Error::InvalidArgument(format!(
                "length mismatch: {} objective vs {} subjective",
                objective.len(),
                subjective.len()
            )));
        }
        if objective.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two score pairs".into(),
            ));
        }
        if objective.iter().chain(&subjective).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("scores must be finite".into()));
        }
        Ok(ScorePairs {
            objective,
            subjective,
        })
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn subjective(&self) -> &[f64] {
        &self.subjective
    }

    pub fn len(&self) -> usize {
        self.objective.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objective.is_empty()
    }
}

/// 1-based ranks with ties sharing the mean of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean((i+1)..=j)
        let rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input vector"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank-order correlation: Pearson correlation of average ranks.
pub fn srocc(pairs: &ScorePairs) -> Result<f64> {
    let rx = average_ranks(&pairs.objective);
    let ry = average_ranks(&pairs.subjective);
    pearson(&rx, &ry)
}

/// Convenience wrapper over [`srocc`] for raw slices.
pub fn srocc_slices(objective: &[f64], subjective: &[f64]) -> Result<f64> {
    srocc(&ScorePairs::new(objective.to_vec(), subjective.to_vec())?)
}

/// Peak signal-to-noise ratio in dB; `+inf` for identical images.
pub fn psnr(reference: &GrayImage, distorted: &GrayImage, peak: f64) -> Result<f64> {
    reference.check_same_shape(distorted)?;
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::InvalidParameter {
            name: "peak",
            value: peak,
            reason: "must be finite and > 0",
        });
    }
    let mse = reference
        .as_slice()
        .iter()
        .zip(distorted.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// `sum(w * s) / sum(w)`.
pub fn weighted_average(values: &[f64], weights: &[u64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values vs {} weights",
            values.len(),
            weights.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("nothing to average".into()));
    }
    if weights.contains(&0) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let total = weights.iter().sum::<u64>() as f64;
    Ok(values
        .iter()
        .zip(weights)
        .map(|(v, &w)| v * (w as f64 / total))
        .sum())
}
