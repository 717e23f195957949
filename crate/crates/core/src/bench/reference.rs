//! Published |SROCC| figures for side-by-side comparison with local runs.
//! Competitor rows are static data; only mQGL, sQGL and PSNR are computed
//! by this crate.

/// Benchmark database with its distorted-image count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Database {
    pub name: &'static str,
    pub images: u64,
}

pub const DATABASES: [Database; 3] = [
    Database {
        name: "LIVE",
        images: 779,
    },
    Database {
        name: "CSIQ",
        images: 866,
    },
    Database {
        name: "TID2013",
        images: 3000,
    },
];

/// Whole-database |SROCC|: `(metric, [LIVE, CSIQ, TID2013, weighted average])`.
pub const DATABASE_SROCC: [(&str, [f64; 4]); 13] = [
    ("PSNR", [0.8756, 0.8058, 0.6394, 0.7100]),
    ("SSIM", [0.9479, 0.8756, 0.7417, 0.8012]),
    ("MS-SSIM", [0.9513, 0.9133, 0.7859, 0.8374]),
    ("IW-SSIM", [0.9567, 0.9213, 0.7779, 0.8346]),
    ("IFC", [0.9259, 0.7671, 0.5390, 0.6463]),
    ("VIF", [0.9636, 0.9195, 0.6770, 0.7703]),
    ("FSIM", [0.9634, 0.9240, 0.8022, 0.8519]),
    ("NLOG-MSE", [0.9405, 0.9259, 0.7734, 0.8299]),
    ("NLOG-COR", [0.9429, 0.9308, 0.7772, 0.8336]),
    ("GMSD", [0.9603, 0.9570, 0.8044, 0.8590]),
    ("RFSIM", [0.9438, 0.9292, 0.7744, 0.8317]),
    ("mQGL", [0.9524, 0.9227, 0.7903, 0.8422]),
    ("sQGL", [0.9574, 0.9550, 0.8103, 0.8619]),
];

/// mQGL |SROCC| at a 10 px shift (sigma = 1): `(database, horizontal, vertical)`.
pub const MQGL_SHIFT10: [(&str, f64, f64); 2] = [("CSIQ", 0.575, 0.529), ("TID2013", 0.441, 0.486)];

/// Published row for `metric` (case-insensitive).
pub fn database_srocc(metric: &str) -> Option<[f64; 4]> {
    DATABASE_SROCC
        .iter()
        .find(|(m, _)| m.eq_ignore_ascii_case(metric))
        .map(|(_, v)| *v)
}

/// Column index of `database` in [`DATABASE_SROCC`] rows (case-insensitive).
pub fn database_column(database: &str) -> Option<usize> {
    DATABASES
        .iter()
        .position(|d| d.name.eq_ignore_ascii_case(database))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::weighted_average;

    #[test]
    fn weighted_column_is_consistent() {
        let weights: Vec<u64> = DATABASES.iter().map(|d| d.images).collect();
        for (name, row) in DATABASE_SROCC {
            let avg = weighted_average(&row[..3], &weights).unwrap();
            assert!((avg - row[3]).abs() < 6e-4, "{name}: {avg} vs {}", row[3]);
        }
    }

    #[test]
    fn lookups() {
        assert_eq!(database_srocc("sqgl").unwrap()[2], 0.8103);
        assert_eq!(database_column("tid2013"), Some(2));
        assert_eq!(database_column("kadid"), None);
    }
}
