use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_HEADER: [&str; 5] = [
    "database",
    "distortion_type",
    "ref_path",
    "dist_path",
    "subjective",
];

/// One scored image pair from a subjective-rating database.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub database: String,
    pub distortion_type: String,
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
    /// DMOS or MOS.
    pub subjective: f64,
}

/// Reads and validates a manifest CSV.
///
/// Relative image paths are resolved against the manifest's directory. Every
/// row is checked (image headers readable, equal dimensions, finite score)
/// and any failure rejects the whole file, listing the offending lines.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::Fields)
        .from_reader(file);

    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let missing: Vec<&str> = MANIFEST_HEADER
        .iter()
        .copied()
        .filter(|h| !headers.iter().any(|c| c == *h))
        .collect();
    if !missing.is_empty() {
        return Err(Error::ManifestParse {
            line: 1,
            message: format!("header missing column(s): {}", missing.join(", ")),
        });
    }

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let mut rec: ManifestRecord =
            row.deserialize(Some(&headers))
                .map_err(|e| Error::ManifestParse {
                    line,
                    message: e.to_string(),
                })?;
        lines.push(line);
        rec.ref_path = resolve(&base, &rec.ref_path);
        rec.dist_path = resolve(&base, &rec.dist_path);
        records.push(rec);
    }

    let mut bad = Vec::new();
    for (rec, &line) in records.iter().zip(&lines) {
        if let Err(why) = validate(rec) {
            bad.push((line, why));
        }
    }
    if !bad.is_empty() {
        return Err(Error::ManifestValidation { rows: bad });
    }
    Ok(records)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::ManifestParse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn validate(rec: &ManifestRecord) -> std::result::Result<(), String> {
    if !rec.subjective.is_finite() {
        return Err("subjective score is not finite".into());
    }
    let dims = |p: &Path| {
        image::image_dimensions(p).map_err(|e| format!("cannot read {}: {e}", p.display()))
    };
    let r = dims(&rec.ref_path)?;
    let d = dims(&rec.dist_path)?;
    if r != d {
        return Err(format!(
            "reference {}x{} and distorted {}x{} differ in size",
            r.0, r.1, d.0, d.1
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::GrayImage;

    fn write_img(dir: &Path, name: &str, w: usize, h: usize) -> PathBuf {
        let p = dir.join(name);
        GrayImage::new(w, h, vec![100.0; w * h])
            .unwrap()
            .save_png(&p)
            .unwrap();
        p
    }

    #[test]
    fn header_only_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            "database,distortion_type,ref_path,dist_path,subjective\n",
        )
        .unwrap();
        assert!(load_manifest(&m).unwrap().is_empty());
    }

    #[test]
    fn one_row_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_img(dir.path(), "r.png", 8, 6);
        let d = write_img(dir.path(), "d.png", 8, 6);
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            format!(
                "database,distortion_type,ref_path,dist_path,subjective\nLIVE,jp2k,\"{}\",{},42.125\n",
                r.display(),
                d.display()
            ),
        )
        .unwrap();
        let recs = load_manifest(&m).unwrap();
        assert_eq!(
            recs,
            vec![ManifestRecord {
                database: "LIVE".into(),
                distortion_type: "jp2k".into(),
                ref_path: r,
                dist_path: d,
                subjective: 42.125,
            }]
        );
    }

    #[test]
    fn relative_paths_resolve_against_manifest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("imgs")).unwrap();
        write_img(&dir.path().join("imgs"), "a.png", 5, 5);
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            "database,distortion_type,ref_path,dist_path,subjective\nX,n,imgs/a.png,imgs/a.png,1\n",
        )
        .unwrap();
        let recs = load_manifest(&m).unwrap();
        assert_eq!(recs[0].ref_path, dir.path().join("imgs/a.png"));
    }

    #[test]
    fn mismatched_dimensions_name_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_img(dir.path(), "r.png", 8, 6);
        let d = write_img(dir.path(), "d.png", 8, 6);
        let small = write_img(dir.path(), "s.png", 4, 6);
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            format!(
                "database,distortion_type,ref_path,dist_path,subjective\n\
                 A,x,{r},{d},1\nA,x,{r},{s},2\nA,x,{r},{d},3\n",
                r = r.display(),
                d = d.display(),
                s = small.display()
            ),
        )
        .unwrap();
        match load_manifest(&m).unwrap_err() {
            Error::ManifestValidation { rows } => {
                assert_eq!(rows.len(), 1);
                assert_eq!(rows[0].0, 3);
                assert!(rows[0].1.contains("8x6") && rows[0].1.contains("4x6"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_image_and_bad_score() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_img(dir.path(), "r.png", 8, 6);
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            format!(
                "database,distortion_type,ref_path,dist_path,subjective\nA,x,{r},nope.png,1\nA,x,{r},{r},NaN\n",
                r = r.display()
            ),
        )
        .unwrap();
        match load_manifest(&m).unwrap_err() {
            Error::ManifestValidation { rows } => {
                assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![2, 3]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            "database,distortion_type,ref_path,dist_path,subjective\nA,x,a,b,1\nA,x,a,b,notanumber\n",
        )
        .unwrap();
        match load_manifest(&m).unwrap_err() {
            Error::ManifestParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }

        std::fs::write(&m, "database,ref_path,dist_path,subjective\n").unwrap();
        assert!(matches!(
            load_manifest(&m).unwrap_err(),
            Error::ManifestParse { line: 1, .. }
        ));

        assert!(matches!(
            load_manifest(dir.path().join("absent.csv")).unwrap_err(),
            Error::Io { .. }
        ));
    }
}
