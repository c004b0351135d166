use std::fmt;
use std::str::FromStr;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// Same standard deviation in every dimension.
    Isotropic(f64),
    /// Per-dimension variances.
    Diagonal(Vec<f64>),
    Full(Matrix),
}

impl Covariance {
    /// Lower-triangular factor `L` with `L Lᵀ = Σ`.
    fn cholesky(&self, dim: usize) -> Result<Matrix> {
        let full = match self {
            Covariance::Isotropic(s) => {
                if !(*s > 0.0) {
                    return Err(Error::Domain(format!("standard deviation {s} is not positive")));
                }
                return Ok(Matrix::identity(dim).scale(*s));
            }
            Covariance::Diagonal(v) => {
                if v.len() != dim {
                    return Err(Error::shape("covariance", (v.len(), 1), (dim, 1)));
                }
                let mut m = Matrix::zeros(dim, dim);
                for (i, &var) in v.iter().enumerate() {
                    if !(var > 0.0) {
                        return Err(Error::Domain(format!(
                            "covariance is not positive-definite (variance {var} in dimension {i})"
                        )));
                    }
                    m.row_mut(i)[i] = var.sqrt();
                }
                return Ok(m);
            }
            Covariance::Full(m) => m,
        };
        if full.shape() != (dim, dim) {
            return Err(Error::shape("covariance", full.shape(), (dim, dim)));
        }
        let mut l = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                if (full[(i, j)] - full[(j, i)]).abs() > 1e-12 * full[(i, j)].abs().max(1.0) {
                    return Err(Error::Domain("covariance is not symmetric".into()));
                }
                let mut sum = full[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::Domain("covariance is not positive-definite".into()));
                    }
                    l.row_mut(i)[i] = sum.sqrt();
                } else {
                    l.row_mut(i)[j] = sum / l[(j, j)];
                }
            }
        }
        Ok(l)
    }
}

/// One Gaussian cluster of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub class: usize,
    pub center: Vec<f64>,
    pub covariance: Covariance,
    pub count: usize,
}

impl MixtureComponent {
    pub fn isotropic(class: usize, center: Vec<f64>, std: f64, count: usize) -> Self {
        Self {
            class,
            center,
            covariance: Covariance::Isotropic(std),
            count,
        }
    }
}

/// Draws every component in order. Rows keep component order.
pub fn gen_mixture(components: &[MixtureComponent], rng: &mut Rng, name: &str) -> Result<Dataset> {
    let first = components
        .first()
        .ok_or_else(|| Error::InvalidConfig("mixture has no components".into()))?;
    let dim = first.center.len();
    if dim == 0 {
        return Err(Error::InvalidConfig("mixture components need at least one dimension".into()));
    }
    let factors = components
        .iter()
        .map(|c| {
            if c.count == 0 {
                return Err(Error::InvalidConfig("mixture component count must be ≥ 1".into()));
            }
            if c.center.len() != dim {
                return Err(Error::shape("mixture center", (c.center.len(), 1), (dim, 1)));
            }
            c.covariance.cholesky(dim)
        })
        .collect::<Result<Vec<_>>>()?;

    let total: usize = components.iter().map(|c| c.count).sum();
    let mut data = Vec::with_capacity(total * dim);
    let mut labels = Vec::with_capacity(total);
    let mut z = vec![0.0; dim];
    for (c, l) in components.iter().zip(&factors) {
        for _ in 0..c.count {
            z.iter_mut().for_each(|v| *v = rng.gaussian());
            for i in 0..dim {
                let offset: f64 = (0..=i).map(|k| l[(i, k)] * z[k]).sum();
                data.push(c.center[i] + offset);
            }
            labels.push(c.class);
        }
    }
    let num_classes = components.iter().map(|c| c.class).max().unwrap_or(0) + 1;
    Dataset::new(Matrix::new(total, dim, data)?, labels, num_classes, name)
}

/// Named two-dimensional scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// One tight cluster per class, far apart.
    Separable,
    /// Both classes drawn from the same cluster.
    Overlap,
    /// Two training classes plus a held-out cluster that only appears in
    /// the test set, labelled with class index 2.
    OpenSet,
    /// Separable clusters alongside a shared overlap cluster.
    Composite,
}

/// Train/test pair produced by a preset.
#[derive(Debug, Clone)]
pub struct PresetData {
    pub train: Dataset,
    pub test: Dataset,
    /// Label carried by held-out test rows, if the preset has any.
    pub held_out_label: Option<usize>,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Separable,
        Preset::Overlap,
        Preset::OpenSet,
        Preset::Composite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Separable => "separable",
            Preset::Overlap => "overlap",
            Preset::OpenSet => "openset",
            Preset::Composite => "composite",
        }
    }

    /// Cluster layout with `(component, held_out)` flags; counts are relative
    /// weights filled in by [`Preset::generate`].
    fn layout(self) -> Vec<(MixtureComponent, bool)> {
        let c = |class, x: f64, y: f64, std| MixtureComponent::isotropic(class, vec![x, y], std, 1);
        match self {
            Preset::Separable => vec![(c(0, -2.0, 0.0, 0.5), false), (c(1, 2.0, 0.0, 0.5), false)],
            Preset::Overlap => vec![(c(0, 0.0, 0.0, 1.0), false), (c(1, 0.0, 0.0, 1.0), false)],
            Preset::OpenSet => vec![
                (c(0, -3.0, 0.0, 0.6), false),
                (c(1, 3.0, 0.0, 0.6), false),
                (c(2, 0.0, 4.0, 0.6), true),
            ],
            Preset::Composite => vec![
                (c(0, -3.0, -1.5, 0.5), false),
                (c(1, 3.0, -1.5, 0.5), false),
                (c(0, 0.0, 2.0, 0.7), false),
                (c(1, 0.0, 2.0, 0.7), false),
            ],
        }
    }

    /// Generates `n_train` training and `n_test` test rows, split evenly
    /// over the components that belong to each set. Held-out components
    /// never contribute training rows.
    pub fn generate(self, n_train: usize, n_test: usize, seed: u64) -> Result<PresetData> {
        let layout = self.layout();
        let held_out_label = layout.iter().find(|(_, h)| *h).map(|(c, _)| c.class);
        let build = |n: usize, include_held_out: bool, label: &str| -> Result<Dataset> {
            let chosen: Vec<&MixtureComponent> = layout
                .iter()
                .filter(|(_, h)| include_held_out || !*h)
                .map(|(c, _)| c)
                .collect();
            let k = chosen.len();
            if n < k {
                return Err(Error::InvalidConfig(format!(
                    "preset {} needs at least {k} rows per set, got {n}",
                    self.name()
                )));
            }
            let comps: Vec<MixtureComponent> = chosen
                .iter()
                .enumerate()
                .map(|(i, c)| MixtureComponent {
                    count: n / k + usize::from(i < n % k),
                    ..(*c).clone()
                })
                .collect();
            let mut rng = Rng::derive(seed, label);
            gen_mixture(&comps, &mut rng, self.name())
        };
        let train = build(n_train, false, "data/train")?;
        let test = build(n_test, true, "data/test")?;
        Ok(PresetData {
            train,
            test,
            held_out_label,
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown preset {s:?} (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_components_balanced() {
        let comps = [
            MixtureComponent::isotropic(0, vec![0.0, 0.0], 1.0, 100),
            MixtureComponent::isotropic(1, vec![3.0, 0.0], 1.0, 100),
        ];
        let ds = gen_mixture(&comps, &mut Rng::new(1), "t").unwrap();
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.class_counts(), vec![100, 100]);
    }

    #[test]
    fn non_pd_covariance_rejected() {
        let bad = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        let comps = [MixtureComponent {
            class: 0,
            center: vec![0.0, 0.0],
            covariance: Covariance::Full(bad),
            count: 5,
        }];
        assert!(matches!(gen_mixture(&comps, &mut Rng::new(0), "t"), Err(Error::Domain(_))));
        let diag = [MixtureComponent {
            covariance: Covariance::Diagonal(vec![1.0, 0.0]),
            ..comps[0].clone()
        }];
        assert!(gen_mixture(&diag, &mut Rng::new(0), "t").is_err());
    }

    #[test]
    fn full_covariance_moments() {
        let cov = Matrix::from_rows(&[[2.0, 0.8], [0.8, 1.0]]).unwrap();
        let comps = [MixtureComponent {
            class: 0,
            center: vec![1.0, -1.0],
            covariance: Covariance::Full(cov.clone()),
            count: 50_000,
        }];
        let ds = gen_mixture(&comps, &mut Rng::new(5), "t").unwrap();
        let n = ds.len() as f64;
        let m: Vec<f64> = ds.features.sum_rows().iter().map(|s| s / n).collect();
        let mut s = [[0.0; 2]; 2];
        for r in 0..ds.len() {
            let x = ds.features.row(r);
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += (x[i] - m[i]) * (x[j] - m[j]) / (n - 1.0);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[i][j] - cov[(i, j)]).abs() < 0.05, "cov[{i}][{j}] = {}", s[i][j]);
            }
        }
    }

    #[test]
    fn openset_train_has_no_held_out_rows() {
        let p = Preset::OpenSet.generate(300, 300, 4).unwrap();
        assert_eq!(p.held_out_label, Some(2));
        assert!(p.train.labels.iter().all(|&l| l < 2));
        assert_eq!(p.train.num_classes(), 2);
        assert_eq!(p.test.class_counts(), vec![100, 100, 100]);
    }

    #[test]
    fn presets_deterministic() {
        for p in Preset::ALL {
            let a = p.generate(40, 40, 9).unwrap();
            let b = p.generate(40, 40, 9).unwrap();
            assert_eq!(a.train, b.train);
            assert_eq!(a.test, b.test);
            assert_ne!(a.train.features, a.test.features);
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        let err = "bogus".parse::<Preset>().unwrap_err().to_string();
        assert!(err.contains("separable") && err.contains("openset"));
    }
}
