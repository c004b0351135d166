use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Feature rows with one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub name: String,
    num_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::shape(
                "dataset",
                features.shape(),
                (labels.len(), 1),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                classes: num_classes,
            });
        }
        Ok(Self {
            features,
            labels,
            name: name.into(),
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Rows per class, indexed by label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: self.name.clone(),
            num_classes: self.num_classes,
        }
    }

    /// Copy with features replaced (same row count).
    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        Dataset::new(features, self.labels.clone(), self.num_classes, self.name.clone())
    }
}

/// Seeded random split into `(train, test)`. Each part keeps the original
/// row order.
pub fn split(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = ds.len();
    let n_train = (fraction * n as f64).round() as usize;
    let perm = Rng::new(seed).permutation(n);
    let mut train: Vec<usize> = perm[..n_train].to_vec();
    let mut test: Vec<usize> = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, -(i as f64)]).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        Dataset::new(Matrix::from_rows(&rows).unwrap(), labels, 2, "toy").unwrap()
    }

    #[test]
    fn half_split_is_even() {
        let (a, b) = split(&toy(200), 0.5, 3).unwrap();
        assert_eq!((a.len(), b.len()), (100, 100));
    }

    #[test]
    fn split_is_exhaustive_and_disjoint() {
        let ds = toy(57);
        let (a, b) = split(&ds, 0.3, 8).unwrap();
        let mut seen: Vec<i64> = a
            .features
            .column(0)
            .into_iter()
            .chain(b.features.column(0))
            .map(|v| v as i64)
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..57).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy(90);
        assert_eq!(split(&ds, 0.4, 11).unwrap(), split(&ds, 0.4, 11).unwrap());
        assert_ne!(split(&ds, 0.4, 11).unwrap().0, split(&ds, 0.4, 12).unwrap().0);
    }

    #[test]
    fn bad_fraction_rejected() {
        assert!(split(&toy(4), 1.0, 0).is_err());
        assert!(split(&toy(4), 0.0, 0).is_err());
    }

    #[test]
    fn labels_validated() {
        let err = Dataset::new(Matrix::zeros(2, 1), vec![0, 2], 2, "x").unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { label: 2, classes: 2 }));
        assert!(Dataset::new(Matrix::zeros(2, 1), vec![0], 2, "x").is_err());
    }
}
