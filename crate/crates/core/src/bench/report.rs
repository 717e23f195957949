//! Deterministic CSV serialization of evaluation results.
//!
//! Every real value is written with exactly six fractional digits; undefined
//! correlations are written as `NA`. Rows are ordered by database, then
//! distortion tag, then metric name (byte-wise lexicographic). Database-wide
//! rows use the distortion tag `*`, which sorts before any alphanumeric tag.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{EvalReport, Metric, ShiftCurve};

pub const ALL_DISTORTIONS: &str = "*";
const NA: &str = "NA";

pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => NA.to_string(),
    }
}

fn parse_value(s: &str, line: u64) -> Result<Option<f64>> {
    if s == NA {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::ManifestParse {
            line,
            message: format!("bad value `{s}`: {e}"),
        })
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Sibling file holding weighted averages and hit numbers:
/// `report.csv` becomes `report.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

/// One line of the group table.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub database: String,
    pub distortion_type: String,
    pub metric: String,
    pub pairs: usize,
    pub srocc: Option<f64>,
}

fn report_rows(report: &EvalReport) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (db, g) in &report.per_database {
        for (m, v) in &g.srocc {
            rows.push(ReportRow {
                database: db.clone(),
                distortion_type: ALL_DISTORTIONS.into(),
                metric: m.name().into(),
                pairs: g.pairs,
                srocc: *v,
            });
        }
    }
    for ((db, dist), g) in &report.per_distortion {
        for (m, v) in &g.srocc {
            rows.push(ReportRow {
                database: db.clone(),
                distortion_type: dist.clone(),
                metric: m.name().into(),
                pairs: g.pairs,
                srocc: *v,
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.database, &a.distortion_type, &a.metric).cmp(&(
            &b.database,
            &b.distortion_type,
            &b.metric,
        ))
    });
    rows
}

fn csv_body<R, F>(header: &[&str], rows: &[R], fields: F) -> Result<String>
where
    F: Fn(&R) -> Vec<String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv encoding: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(fields(r)).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the group table to `path` and the per-metric summary to
/// [`summary_path`].
///
/// Group table: `database,distortion_type,metric,pairs,srocc`.
/// Summary: `metric,weighted_average,hit_number`.
pub fn emit_report(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let rows = report_rows(report);
    let body = csv_body(
        &["database", "distortion_type", "metric", "pairs", "srocc"],
        &rows,
        |r| {
            vec![
                r.database.clone(),
                r.distortion_type.clone(),
                r.metric.clone(),
                r.pairs.to_string(),
                format_value(r.srocc),
            ]
        },
    )?;
    write_file(path, &body)?;

    let metrics: Vec<Metric> = report.weighted_average.keys().copied().collect();
    let summary = csv_body(
        &["metric", "weighted_average", "hit_number"],
        &metrics,
        |m| {
            vec![
                m.name().to_string(),
                format_value(report.weighted_average[m]),
                report.hit_number.get(m).copied().unwrap_or(0).to_string(),
            ]
        },
    )?;
    write_file(&summary_path(path), &summary)
}

/// Per-pair scores: `database,distortion_type,ref_path,dist_path,subjective,<metrics...>`.
pub fn emit_scores(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut header = vec![
        "database",
        "distortion_type",
        "ref_path",
        "dist_path",
        "subjective",
    ];
    header.extend(report.metrics.iter().map(|m| m.name()));
    let body = csv_body(&header, &report.pair_scores, |p| {
        let mut f = vec![
            p.record.database.clone(),
            p.record.distortion_type.clone(),
            p.record.ref_path.display().to_string(),
            p.record.dist_path.display().to_string(),
            format!("{:.6}", p.record.subjective),
        ];
        f.extend(p.scores.values().map(|v| format!("{v:.6}")));
        f
    })?;
    write_file(path, &body)
}

/// One line of a shift-curve table.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftRow {
    pub database: String,
    pub direction: String,
    pub displacement: usize,
    pub metric: String,
    pub pairs: usize,
    pub srocc: Option<f64>,
}

/// Writes `database,direction,displacement,metric,pairs,srocc`.
pub fn emit_shift_curves(curves: &[ShiftCurve], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut rows = Vec::new();
    for c in curves {
        for (mi, m) in c.metrics.iter().enumerate() {
            for (di, &d) in c.displacements.iter().enumerate() {
                rows.push(ShiftRow {
                    database: c.database.clone(),
                    direction: c.direction.name().into(),
                    displacement: d,
                    metric: m.name().into(),
                    pairs: c.pairs,
                    srocc: c.srocc[mi][di],
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.database, &a.direction, a.displacement, &a.metric).cmp(&(
            &b.database,
            &b.direction,
            b.displacement,
            &b.metric,
        ))
    });
    let body = csv_body(
        &[
            "database",
            "direction",
            "displacement",
            "metric",
            "pairs",
            "srocc",
        ],
        &rows,
        |r| {
            vec![
                r.database.clone(),
                r.direction.clone(),
                r.displacement.to_string(),
                r.metric.clone(),
                r.pairs.to_string(),
                format_value(r.srocc),
            ]
        },
    )?;
    write_file(path, &body)
}

fn read_rows(path: &Path) -> Result<Vec<(u64, csv::StringRecord)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::ManifestParse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str> {
    rec.get(i).ok_or(Error::ManifestParse {
        line,
        message: format!("missing column {i}"),
    })
}

fn parse_count(s: &str, line: u64) -> Result<usize> {
    s.parse().map_err(|_| Error::ManifestParse {
        line,
        message: format!("bad count `{s}`"),
    })
}

/// Parses a group table written by [`emit_report`].
pub fn read_report_rows(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    read_rows(path.as_ref())?
        .into_iter()
        .map(|(line, r)| {
            Ok(ReportRow {
                database: field(&r, 0, line)?.into(),
                distortion_type: field(&r, 1, line)?.into(),
                metric: field(&r, 2, line)?.into(),
                pairs: parse_count(field(&r, 3, line)?, line)?,
                srocc: parse_value(field(&r, 4, line)?, line)?,
            })
        })
        .collect()
}

/// Parses a table written by [`emit_shift_curves`].
pub fn read_shift_rows(path: impl AsRef<Path>) -> Result<Vec<ShiftRow>> {
    read_rows(path.as_ref())?
        .into_iter()
        .map(|(line, r)| {
            Ok(ShiftRow {
                database: field(&r, 0, line)?.into(),
                direction: field(&r, 1, line)?.into(),
                displacement: parse_count(field(&r, 2, line)?, line)?,
                metric: field(&r, 3, line)?.into(),
                pairs: parse_count(field(&r, 4, line)?, line)?,
                srocc: parse_value(field(&r, 5, line)?, line)?,
            })
        })
        .collect()
}
