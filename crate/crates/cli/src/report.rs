//! Serialized bound reports, instance digests and the batch CSV.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparselb::BoundReport;

use crate::CliError;

/// JSON form of a certified bound. Floats use the shortest representation
/// that round-trips, so parsing a report gives back the same bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub command: String,
    pub seed: u64,
    pub instance_digest: String,
    pub k: usize,
    pub dual_value: f64,
    pub exact_value: f64,
    pub gap: f64,
    /// 1-based support of the exact minimizer.
    pub exact_support: Vec<usize>,
    pub certificate_y: Vec<f64>,
    pub inner_sup_tolerance: f64,
    pub wallclock_s: f64,
    pub library_version: String,
}

impl ReportJson {
    pub fn new(command: &str, seed: u64, digest: String, k: usize, r: &BoundReport) -> Self {
        ReportJson {
            command: command.to_string(),
            seed,
            instance_digest: digest,
            k,
            dual_value: r.dual_value,
            exact_value: r.exact_value,
            gap: r.gap,
            exact_support: r.exact_support.one_based(),
            certificate_y: r.certificate_y.clone(),
            inner_sup_tolerance: r.inner_sup_tolerance,
            wallclock_s: r.wallclock,
            library_version: sparselb::VERSION.to_string(),
        }
    }

    /// The guard applied before anything is written:
    /// `dual_value <= exact_value + inner_sup_tolerance`.
    pub fn check_bound(&self) -> Result<(), CliError> {
        let ok = self.dual_value.is_finite()
            && self.exact_value.is_finite()
            && self.dual_value <= self.exact_value + self.inner_sup_tolerance;
        if ok {
            Ok(())
        } else {
            Err(CliError::Numeric(format!(
                "certified bound violated on instance {}: dual {} > exact {} + {}",
                self.instance_digest, self.dual_value, self.exact_value, self.inner_sup_tolerance
            )))
        }
    }
}

/// SHA-256 over a tag, the shape, the little-endian bits of `A` (row-major)
/// and `z`, and `k`.
pub fn instance_digest(tag: &str, a: &DMatrix<f64>, z: &[f64], k: usize) -> String {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update((a.nrows() as u64).to_le_bytes());
    h.update((a.ncols() as u64).to_le_bytes());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            h.update(a[(i, j)].to_le_bytes());
        }
    }
    for v in z {
        h.update(v.to_le_bytes());
    }
    h.update((k as u64).to_le_bytes());
    hex::encode(h.finalize())
}

pub const BATCH_CSV_HEADER: [&str; 9] = [
    "index",
    "instance_digest",
    "k",
    "dual_value",
    "exact_value",
    "gap",
    "inner_sup_tolerance",
    "wallclock_s",
    "seed",
];

/// Plot-ready table, one row per report.
pub fn batch_csv(reports: &[ReportJson]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("CSV: {e}"));
    w.write_record(BATCH_CSV_HEADER).map_err(err)?;
    for (i, r) in reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.instance_digest.clone(),
            r.k.to_string(),
            r.dual_value.to_string(),
            r.exact_value.to_string(),
            r.gap.to_string(),
            r.inner_sup_tolerance.to_string(),
            r.wallclock_s.to_string(),
            r.seed.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportJson {
        ReportJson {
            command: "lb-lsq".into(),
            seed: 1,
            instance_digest: "00".into(),
            k: 1,
            dual_value: 0.1 + 0.2,
            exact_value: 1.0 / 3.0,
            gap: 1.0 / 3.0 - 0.3,
            exact_support: vec![2],
            certificate_y: vec![1e-300, -std::f64::consts::PI, 5e-324],
            inner_sup_tolerance: 1e-9,
            wallclock_s: 0.5,
            library_version: "0".into(),
        }
    }

    #[test]
    fn report_round_trips_bit_for_bit() {
        let r = sample();
        let back: ReportJson = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back.dual_value.to_bits(), r.dual_value.to_bits());
        for (a, b) in back.certificate_y.iter().zip(&r.certificate_y) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back, r);
    }

    #[test]
    fn guard_trips_on_corrupted_bound() {
        let mut r = sample();
        r.check_bound().unwrap();
        r.dual_value = r.exact_value + 1e-3;
        assert_eq!(r.check_bound().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn digest_depends_on_every_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let d0 = instance_digest("lsq", &a, &[1.0, 2.0], 1);
        assert_eq!(d0.len(), 64);
        assert_ne!(d0, instance_digest("lsq", &a, &[1.0, 2.0], 2));
        assert_ne!(d0, instance_digest("lsq", &a, &[1.0, 2.5], 1));
        assert_ne!(d0, instance_digest("lsq", &a.transpose().scale(2.0), &[1.0, 2.0], 1));
    }

    #[test]
    fn batch_table_has_one_row_per_report() {
        let csv = batch_csv(&vec![sample(); 50]).unwrap();
        assert_eq!(csv.lines().count(), 51);
        assert!(csv.starts_with("index,instance_digest"));
    }
}
