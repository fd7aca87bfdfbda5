use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::chain_rng;

const SYNTHETIC_STREAM: u64 = u64::MAX - 3;

/// Binary classification data: `n` feature rows `z_i` with labels `y_i` in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: DMatrix<f64>,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<f64>) -> Result<Self> {
        let data = LabeledDataset { features, labels };
        data.validate()?;
        Ok(data)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.labels.is_empty() || self.features.ncols() == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.features.nrows() != self.labels.len() {
            return Err(Error::DimensionMismatch { expected: self.labels.len(), found: self.features.nrows() });
        }
        for (row, &y) in self.labels.iter().enumerate() {
            if y != 1.0 && y != -1.0 {
                return Err(Error::InvalidLabel { row, value: y.to_string() });
            }
        }
        for row in 0..self.features.nrows() {
            for col in 0..self.features.ncols() {
                if !self.features[(row, col)].is_finite() {
                    return Err(Error::NonFiniteFeature { row, col });
                }
            }
        }
        Ok(())
    }

    /// Standard-normal features with labels drawn from a logistic model whose
    /// weights are themselves standard normal. Deterministic in `seed`.
    pub fn synthetic(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = chain_rng(seed, SYNTHETIC_STREAM);
        let weights: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let features = DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal));
        let labels = (0..n)
            .map(|i| {
                let z: f64 = (0..d).map(|j| features[(i, j)] * weights[j]).sum();
                if rng.random::<f64>() < 1.0 / (1.0 + (-z).exp()) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Self::new(features, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Reads a CSV with a header row. The column named `label` holds `0`/`1`
    /// (mapped to `-1`/`+1`); every other column is a numeric feature.
    /// With `standardize`, each feature column is shifted to zero mean and scaled
    /// to unit (population) standard deviation; constant columns are only centered.
    pub fn from_csv_reader<R: Read>(reader: R, standardize: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let label_col = headers.iter().position(|h| h == "label").ok_or(Error::MissingLabelColumn)?;
        let d = headers.len() - 1;

        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (col, field) in record.iter().enumerate() {
                if col == label_col {
                    let y = match field {
                        "0" | "0.0" => -1.0,
                        "1" | "1.0" => 1.0,
                        other => return Err(Error::InvalidLabel { row, value: other.to_string() }),
                    };
                    labels.push(y);
                } else {
                    let feature_col = if col < label_col { col } else { col - 1 };
                    let v: f64 = field.parse().map_err(|_| Error::NonFiniteFeature { row, col: feature_col })?;
                    if !v.is_finite() {
                        return Err(Error::NonFiniteFeature { row, col: feature_col });
                    }
                    values.push(v);
                }
            }
        }
        if labels.is_empty() || d == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut features = DMatrix::from_row_slice(labels.len(), d, &values);
        if standardize {
            standardize_columns(&mut features);
        }
        LabeledDataset::new(features, labels)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, standardize: bool) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), standardize)
    }
}

fn standardize_columns(features: &mut DMatrix<f64>) {
    let n = features.nrows() as f64;
    for mut col in features.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n).sqrt();
        if sd > 0.0 {
            col /= sd;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_is_reproducible_and_mixed() {
        let a = LabeledDataset::synthetic(200, 3, 4).unwrap();
        assert_eq!(a, LabeledDataset::synthetic(200, 3, 4).unwrap());
        assert_ne!(a, LabeledDataset::synthetic(200, 3, 5).unwrap());
        let positives = a.labels().iter().filter(|&&y| y > 0.0).count();
        assert!(positives > 20 && positives < 180);
    }

    #[test]
    fn reads_csv_and_maps_labels() {
        let csv = "age,label,chol\n50,1,200\n60,0,240\n70,1,220\n";
        let data = LabeledDataset::from_csv_reader(csv.as_bytes(), false).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.dim(), 2);
        assert_eq!(data.labels(), &[1.0, -1.0, 1.0]);
        assert_eq!(data.features()[(1, 1)], 240.0);
    }

    #[test]
    fn standardizes_columns() {
        let csv = "a,b,label\n1,5,0\n2,5,1\n3,5,1\n";
        let data = LabeledDataset::from_csv_reader(csv.as_bytes(), true).unwrap();
        let col = data.features().column(0);
        assert!(col.sum().abs() < 1e-14);
        assert!((col.norm_squared() / 3.0 - 1.0).abs() < 1e-14);
        assert!(data.features().column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            LabeledDataset::from_csv_reader("a,b\n1,2\n".as_bytes(), false),
            Err(Error::MissingLabelColumn)
        ));
        assert!(matches!(
            LabeledDataset::from_csv_reader("a,label\n1,2\n".as_bytes(), false),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(matches!(
            LabeledDataset::from_csv_reader("a,label\nNaN,1\n".as_bytes(), false),
            Err(Error::NonFiniteFeature { .. })
        ));
        assert!(matches!(LabeledDataset::from_csv_reader("a,label\n".as_bytes(), false), Err(Error::EmptyDataset)));
        assert!(LabeledDataset::new(DMatrix::from_row_slice(1, 1, &[1.0]), vec![0.5]).is_err());
    }
}
