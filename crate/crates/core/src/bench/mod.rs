//! Database evaluation and translation-robustness experiments.
//!
//! Records are scored in parallel; aggregation always runs over results in
//! manifest order, so reports do not depend on the thread count.

mod manifest;
pub mod reference;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::plane::{GrayImage, Plane};
use crate::qgl::{score_pair, QglConfig};
use crate::stats::{psnr, srocc_slices};

pub use manifest::{load_manifest, ManifestRecord, MANIFEST_HEADER};
pub use report::{
    emit_report, emit_scores, emit_shift_curves, format_value, read_report_rows, read_shift_rows,
    summary_path, ReportRow, ShiftRow, ALL_DISTORTIONS,
};

/// Objective metrics the harness can evaluate. Ordered by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Mqgl,
    Psnr,
    Sqgl,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mqgl, Metric::Psnr, Metric::Sqgl];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mqgl => "mqgl",
            Metric::Psnr => "psnr",
            Metric::Sqgl => "sqgl",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mqgl" => Ok(Metric::Mqgl),
            "sqgl" => Ok(Metric::Sqgl),
            "psnr" => Ok(Metric::Psnr),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

/// Sorted, de-duplicated metric list.
pub fn normalize_metrics(metrics: &[Metric]) -> Vec<Metric> {
    let mut m = metrics.to_vec();
    m.sort();
    m.dedup();
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Horizontal, Direction::Vertical];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
        }
    }

    /// `(dx, dy)` for a displacement of `d` pixels.
    pub fn offset(self, d: usize) -> (isize, isize) {
        match self {
            Direction::Horizontal => (d as isize, 0),
            Direction::Vertical => (0, d as isize),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "horizontal" | "h" => Ok(Direction::Horizontal),
            "vertical" | "v" => Ok(Direction::Vertical),
            other => Err(Error::InvalidArgument(format!(
                "unknown direction `{other}`"
            ))),
        }
    }
}

fn overlap(img: &Plane, dx: isize, dy: isize) -> Result<(usize, usize)> {
    let (adx, ady) = (dx.unsigned_abs(), dy.unsigned_abs());
    if adx >= img.width() || ady >= img.height() {
        return Err(Error::InvalidArgument(format!(
            "displacement ({dx}, {dy}) does not fit a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    Ok((img.width() - adx, img.height() - ady))
}

/// The image displaced by `(dx, dy)`, cropped to the overlap with the
/// undisplaced frame: `out(x, y) = img(x + dx, y + dy)` for non-negative
/// offsets. Pair it with [`anchor_crop`] of the comparison image.
pub fn translate_crop(img: &GrayImage, dx: isize, dy: isize) -> Result<GrayImage> {
    let (w, h) = overlap(img, dx, dy)?;
    let plane = img.crop(dx.max(0) as usize, dy.max(0) as usize, w, h)?;
    GrayImage::from_plane(plane)
}

/// Companion window to [`translate_crop`]: same size, anchored at the origin
/// for non-negative offsets.
pub fn anchor_crop(img: &GrayImage, dx: isize, dy: isize) -> Result<GrayImage> {
    let (w, h) = overlap(img, dx, dy)?;
    let plane = img.crop((-dx).max(0) as usize, (-dy).max(0) as usize, w, h)?;
    GrayImage::from_plane(plane)
}

/// Scores one pair with every metric, in the order given.
pub fn score_metrics(
    reference: &GrayImage,
    distorted: &GrayImage,
    cfg: &QglConfig,
    metrics: &[Metric],
) -> Result<Vec<f64>> {
    let needs_qgl = metrics
        .iter()
        .any(|m| matches!(m, Metric::Mqgl | Metric::Sqgl));
    let qgl = if needs_qgl {
        Some(score_pair(reference, distorted, cfg)?)
    } else {
        reference.check_same_shape(distorted)?;
        None
    };
    metrics
        .iter()
        .map(|m| match m {
            Metric::Mqgl => Ok(qgl.expect("computed above").mqgl),
            Metric::Sqgl => Ok(qgl.expect("computed above").sqgl),
            Metric::Psnr => psnr(reference, distorted, 255.0),
        })
        .collect()
}

/// |SROCC| of one group, or `None` when it is undefined (fewer than two
/// pairs or a constant vector). Infinite PSNR values rank above all finite
/// ones.
pub fn group_srocc(objective: &[f64], subjective: &[f64]) -> Option<f64> {
    if objective.len() < 2 {
        return None;
    }
    let finite: Vec<f64> = objective
        .iter()
        .map(|&v| {
            if v == f64::INFINITY {
                f64::MAX
            } else if v == f64::NEG_INFINITY {
                f64::MIN
            } else {
                v
            }
        })
        .collect();
    srocc_slices(&finite, subjective).ok().map(f64::abs)
}

/// |SROCC| per metric for one group of records.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupResult {
    pub pairs: usize,
    pub srocc: BTreeMap<Metric, Option<f64>>,
}

/// Objective scores of one manifest record.
#[derive(Clone, Debug, PartialEq)]
pub struct PairScore {
    pub record: ManifestRecord,
    pub scores: BTreeMap<Metric, f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct EvalReport {
    pub metrics: Vec<Metric>,
    pub per_database: BTreeMap<String, GroupResult>,
    pub per_distortion: BTreeMap<(String, String), GroupResult>,
    /// Per-database |SROCC| averaged with pair-count weights, over the
    /// databases where it is defined.
    pub weighted_average: BTreeMap<Metric, Option<f64>>,
    /// Per-distortion groups in which the metric ranks in the top three of
    /// the evaluated metrics.
    pub hit_number: BTreeMap<Metric, u32>,
    pub pair_scores: Vec<PairScore>,
}

fn group_result(
    metrics: &[Metric],
    members: &[usize],
    scores: &[Vec<f64>],
    subjective: &[f64],
) -> GroupResult {
    let subj: Vec<f64> = members.iter().map(|&i| subjective[i]).collect();
    let srocc = metrics
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            let obj: Vec<f64> = members.iter().map(|&i| scores[i][mi]).collect();
            (m, group_srocc(&obj, &subj))
        })
        .collect();
    GroupResult {
        pairs: members.len(),
        srocc,
    }
}

/// Number of groups where each metric is within the top three. A metric is
/// in the top three when fewer than three metrics score strictly higher.
pub fn hit_numbers<'a>(
    metrics: &[Metric],
    groups: impl IntoIterator<Item = &'a GroupResult>,
) -> BTreeMap<Metric, u32> {
    let mut hits: BTreeMap<Metric, u32> = metrics.iter().map(|&m| (m, 0)).collect();
    for g in groups {
        for &m in metrics {
            let Some(Some(v)) = g.srocc.get(&m) else {
                continue;
            };
            let better = g
                .srocc
                .values()
                .filter(|o| matches!(o, Some(x) if x > v))
                .count();
            if better < 3 {
                *hits.get_mut(&m).expect("seeded") += 1;
            }
        }
    }
    hits
}

impl EvalReport {
    /// Aggregates precomputed scores. `scores[i][j]` is metric `metrics[j]`
    /// on `records[i]`.
    pub fn from_scores(
        records: &[ManifestRecord],
        metrics: &[Metric],
        scores: &[Vec<f64>],
    ) -> Result<Self> {
        if records.len() != scores.len() || scores.iter().any(|s| s.len() != metrics.len()) {
            return Err(Error::InvalidArgument("score table shape mismatch".into()));
        }
        let subjective: Vec<f64> = records.iter().map(|r| r.subjective).collect();

        let mut by_db: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut by_dist: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            by_db.entry(r.database.clone()).or_default().push(i);
            by_dist
                .entry((r.database.clone(), r.distortion_type.clone()))
                .or_default()
                .push(i);
        }

        let per_database: BTreeMap<String, GroupResult> = by_db
            .into_iter()
            .map(|(k, m)| (k, group_result(metrics, &m, scores, &subjective)))
            .collect();
        let per_distortion: BTreeMap<(String, String), GroupResult> = by_dist
            .into_iter()
            .map(|(k, m)| (k, group_result(metrics, &m, scores, &subjective)))
            .collect();

        let weighted_average = metrics
            .iter()
            .map(|&m| {
                let (vals, weights): (Vec<f64>, Vec<u64>) = per_database
                    .values()
                    .filter_map(|g| g.srocc[&m].map(|s| (s, g.pairs as u64)))
                    .unzip();
                let avg = crate::stats::weighted_average(&vals, &weights).ok();
                (m, avg)
            })
            .collect();
        let hit_number = hit_numbers(metrics, per_distortion.values());

        let pair_scores = records
            .iter()
            .zip(scores)
            .map(|(r, s)| PairScore {
                record: r.clone(),
                scores: metrics.iter().copied().zip(s.iter().copied()).collect(),
            })
            .collect();

        Ok(EvalReport {
            metrics: metrics.to_vec(),
            per_database,
            per_distortion,
            weighted_average,
            hit_number,
            pair_scores,
        })
    }
}

fn load_pair(rec: &ManifestRecord) -> Result<(GrayImage, GrayImage)> {
    let r = GrayImage::open(&rec.ref_path)?;
    let d = GrayImage::open(&rec.dist_path)?;
    r.check_same_shape(&d)?;
    Ok((r, d))
}

/// Scores every record and aggregates |SROCC| tables.
///
/// Runs on the ambient rayon pool; see [`with_threads`].
pub fn evaluate_database(
    records: &[ManifestRecord],
    cfg: &QglConfig,
    metrics: &[Metric],
) -> Result<EvalReport> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to evaluate".into()));
    }
    let metrics = normalize_metrics(metrics);
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("no metrics requested".into()));
    }
    let scores: Vec<Vec<f64>> = records
        .par_iter()
        .map(|rec| {
            let (r, d) = load_pair(rec)?;
            score_metrics(&r, &d, cfg, &metrics)
        })
        .collect::<Result<_>>()?;
    EvalReport::from_scores(records, &metrics, &scores)
}

/// |SROCC| against displacement for one database and direction.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCurve {
    pub database: String,
    pub direction: Direction,
    pub displacements: Vec<usize>,
    pub metrics: Vec<Metric>,
    /// `srocc[m][d]` for `metrics[m]` at `displacements[d]`.
    pub srocc: Vec<Vec<Option<f64>>>,
    /// Records contributing to every point of the curve.
    pub pairs: usize,
}

impl ShiftCurve {
    pub fn value(&self, metric: Metric, displacement: usize) -> Option<f64> {
        let m = self.metrics.iter().position(|&x| x == metric)?;
        let d = self.displacements.iter().position(|&x| x == displacement)?;
        self.srocc[m][d]
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ShiftReport {
    pub curves: Vec<ShiftCurve>,
    /// Manifest indices skipped because the image is not larger than the
    /// maximum displacement.
    pub excluded: Vec<usize>,
}

/// Scores of one record for every `(direction, displacement)`; the
/// zero-displacement entry is shared by all directions.
fn shift_scores(
    rec: &ManifestRecord,
    cfg: &QglConfig,
    metrics: &[Metric],
    max_shift: usize,
    directions: &[Direction],
) -> Result<Option<Vec<Vec<Vec<f64>>>>> {
    let (r, d) = load_pair(rec)?;
    if r.width() <= max_shift || r.height() <= max_shift {
        return Ok(None);
    }
    let base = score_metrics(&r, &d, cfg, metrics)?;
    let mut per_dir = Vec::with_capacity(directions.len());
    for &dir in directions {
        let mut row = Vec::with_capacity(max_shift + 1);
        row.push(base.clone());
        for disp in 1..=max_shift {
            let (dx, dy) = dir.offset(disp);
            let rs = translate_crop(&r, dx, dy)?;
            let ds = anchor_crop(&d, dx, dy)?;
            row.push(score_metrics(&rs, &ds, cfg, metrics)?);
        }
        per_dir.push(row);
    }
    Ok(Some(per_dir))
}

/// Shifts every reference by `0..=max_shift` pixels along each direction,
/// crops the distorted image to the matching window and tracks |SROCC|
/// against the subjective scores. One curve per (database, direction).
pub fn shift_experiment(
    records: &[ManifestRecord],
    cfg: &QglConfig,
    metrics: &[Metric],
    max_shift: usize,
    directions: &[Direction],
) -> Result<ShiftReport> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to evaluate".into()));
    }
    let metrics = normalize_metrics(metrics);
    let mut directions = directions.to_vec();
    directions.sort();
    directions.dedup();
    if metrics.is_empty() || directions.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one metric and direction".into(),
        ));
    }

    let results: Vec<Option<Vec<Vec<Vec<f64>>>>> = records
        .par_iter()
        .map(|rec| shift_scores(rec, cfg, &metrics, max_shift, &directions))
        .collect::<Result<_>>()?;

    let excluded: Vec<usize> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.is_none().then_some(i))
        .collect();
    if !excluded.is_empty() {
        log::warn!(
            "{} record(s) too small for a {max_shift}px shift were excluded",
            excluded.len()
        );
    }

    let mut by_db: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        if results[i].is_some() {
            by_db.entry(&rec.database).or_default().push(i);
        }
    }

    let mut curves = Vec::new();
    for (db, members) in by_db {
        let subj: Vec<f64> = members.iter().map(|&i| records[i].subjective).collect();
        for (di, &dir) in directions.iter().enumerate() {
            let srocc = (0..metrics.len())
                .map(|mi| {
                    (0..=max_shift)
                        .map(|disp| {
                            let obj: Vec<f64> = members
                                .iter()
                                .map(|&i| results[i].as_ref().expect("included")[di][disp][mi])
                                .collect();
                            group_srocc(&obj, &subj)
                        })
                        .collect()
                })
                .collect();
            curves.push(ShiftCurve {
                database: db.to_string(),
                direction: dir,
                displacements: (0..=max_shift).collect(),
                metrics: metrics.clone(),
                srocc,
                pairs: members.len(),
            });
        }
    }
    Ok(ShiftReport { curves, excluded })
}

/// Runs `f` on a dedicated pool of `threads` workers (`None` = all cores).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidArgument("thread count must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
