//! Loading MotionSense DeviceMotion trials.
//!
//! The dataset stores one CSV per (activity, subject) pair as
//! `A_DeviceMotion_data/<activity>/sub_<subject>.csv`, with a header row and a
//! leading unnamed row-index column. Columns are looked up by name, so their
//! order in the file does not matter.

use std::path::{Path, PathBuf};

use crate::error::{FusionError, Result};
use crate::types::{Channel, MultiTimeSeries};

/// The twelve device-motion modalities, in channel order.
pub const MOTIONSENSE_MODALITIES: [&str; 12] = [
    "attitude.roll",
    "attitude.pitch",
    "attitude.yaw",
    "gravity.x",
    "gravity.y",
    "gravity.z",
    "rotationRate.x",
    "rotationRate.y",
    "rotationRate.z",
    "userAcceleration.x",
    "userAcceleration.y",
    "userAcceleration.z",
];

pub const DEFAULT_MAX_ROWS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    /// Trial folder name such as `dws_1`.
    pub activity: String,
    pub subject: u32,
    pub max_rows: usize,
    pub channels: Vec<String>,
    /// Shift and scale each channel to mean 0 and sample standard deviation 1.
    pub standardize: bool,
}

impl TrialSpec {
    pub fn new(activity: impl Into<String>, subject: u32) -> Self {
        TrialSpec {
            activity: activity.into(),
            subject,
            max_rows: DEFAULT_MAX_ROWS,
            channels: MOTIONSENSE_MODALITIES.iter().map(|s| s.to_string()).collect(),
            standardize: false,
        }
    }

    /// Location of this trial under an extracted dataset root.
    pub fn path_in(&self, root: &Path) -> PathBuf {
        root.join("A_DeviceMotion_data")
            .join(&self.activity)
            .join(format!("sub_{}.csv", self.subject))
    }
}

/// Reads the first `spec.max_rows` rows of the named columns.
pub fn load_motionsense(path: &Path, spec: &TrialSpec) -> Result<MultiTimeSeries> {
    let file = std::fs::File::open(path).map_err(|e| FusionError::Io(format!("{}: {e}", path.display())))?;
    read_motionsense(file, spec)
}

/// As [`load_motionsense`], from any reader.
pub fn read_motionsense<R: std::io::Read>(reader: R, spec: &TrialSpec) -> Result<MultiTimeSeries> {
    if spec.channels.is_empty() || spec.max_rows == 0 {
        return Err(FusionError::EmptyInput);
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let columns = spec
        .channels
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| FusionError::MissingColumn(name.clone()))
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.max_rows); columns.len()];
    let mut rows = 0;
    for record in rdr.records() {
        if rows == spec.max_rows {
            break;
        }
        let record = record?;
        for (c, &col) in columns.iter().enumerate() {
            let raw = record.get(col).unwrap_or("").trim();
            let value: f64 = raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                FusionError::UnparseableNumber {
                    row: rows + 1,
                    column: spec.channels[c].clone(),
                    value: raw.to_string(),
                }
            })?;
            data[c].push(value);
        }
        rows += 1;
    }
    if rows < spec.max_rows {
        return Err(FusionError::TooFewRows { needed: spec.max_rows, found: rows });
    }
    if spec.standardize {
        data.iter_mut().for_each(|v| standardize(v));
    }
    let channels = data
        .iter()
        .zip(&spec.channels)
        .map(|(v, name)| Channel::scalar(v).with_name(name.clone()))
        .collect();
    MultiTimeSeries::new(channels)
}

/// Mean 0, sample standard deviation 1; a constant series becomes all zeros.
pub fn standardize(values: &mut [f64]) {
    let n = values.len();
    if n == 0 {
        return;
    }
    if values.iter().all(|&v| v == values[0]) || n < 2 {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    values.iter_mut().for_each(|v| *v = (*v - mean) / sd);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn csv_text(order: &[usize], rows: usize) -> String {
        let mut names: Vec<&str> = vec![""];
        names.extend(order.iter().map(|&c| MOTIONSENSE_MODALITIES[c]));
        let mut s = names.join(",") + "\n";
        for r in 0..rows {
            let mut fields = vec![r.to_string()];
            fields.extend(order.iter().map(|&c| format!("{}", (c * 7 + r * 3) as f64 * 0.01 + (r as f64).sin())));
            s += &(fields.join(",") + "\n");
        }
        s
    }

    fn spec(rows: usize) -> TrialSpec {
        TrialSpec { max_rows: rows, ..TrialSpec::new("dws_1", 1) }
    }

    #[test]
    fn loads_named_channels_in_order() {
        let ts = read_motionsense(csv_text(&(0..12).collect::<Vec<_>>(), 210).as_bytes(), &spec(200)).unwrap();
        assert_eq!((ts.n_channels(), ts.len()), (12, 200));
        assert_eq!(ts.names()[5], "gravity.z");
        assert_eq!(ts.channel(0).unwrap().values()[0], 0.0);
    }

    #[test]
    fn missing_column() {
        let order: Vec<usize> = (0..12).filter(|&c| c != 5).collect();
        let err = read_motionsense(csv_text(&order, 10).as_bytes(), &spec(10)).unwrap_err();
        assert_eq!(err, FusionError::MissingColumn("gravity.z".into()));
    }

    #[test]
    fn too_few_rows_and_bad_numbers() {
        let all: Vec<usize> = (0..12).collect();
        assert_eq!(
            read_motionsense(csv_text(&all, 5).as_bytes(), &spec(6)).unwrap_err(),
            FusionError::TooFewRows { needed: 6, found: 5 }
        );
        let text = csv_text(&all, 3).replacen("\n1,", "\n1,abc", 1);
        let err = read_motionsense(text.as_bytes(), &spec(3)).unwrap_err();
        assert!(matches!(err, FusionError::UnparseableNumber { row: 2, ref column, .. } if column == "attitude.roll"));
    }

    #[test]
    fn constant_channel_standardizes_to_zero() {
        let mut v = vec![0.1; 50];
        standardize(&mut v);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    proptest! {
        #[test]
        fn column_order_is_irrelevant(order in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
            let base = read_motionsense(csv_text(&(0..12).collect::<Vec<_>>(), 20).as_bytes(), &spec(20)).unwrap();
            let perm = read_motionsense(csv_text(&order, 20).as_bytes(), &spec(20)).unwrap();
            prop_assert_eq!(base, perm);
        }

        #[test]
        fn standardized_moments(v in prop::collection::vec(-1e3f64..1e3, 3..200)) {
            prop_assume!(v.iter().any(|&x| x != v[0]));
            let mut s = v.clone();
            standardize(&mut s);
            let n = s.len() as f64;
            let mean = s.iter().sum::<f64>() / n;
            let sd = (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            prop_assert!(mean.abs() < 1e-12);
            prop_assert!((sd - 1.0).abs() < 1e-9);
        }
    }
}
