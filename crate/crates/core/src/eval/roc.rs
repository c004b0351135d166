//! ROC curves with rank-exact AUC.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive. The first point uses
    /// `+inf`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweeps every distinct score from high to low. Tied scores move the curve
/// diagonally, which gives them half credit in the trapezoid area, so the
/// AUC equals the Mann–Whitney statistic exactly.
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::shape("roc_auc", (scores.len(), 1), (labels.len(), 1)));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::LabelOutOfRange { label: bad, classes: 2 });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("ROC scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Domain("ROC needs both classes present".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the Mann–Whitney U, kept integral
    let mut u2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut gtp, mut gfp) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                gtp += 1;
            } else {
                gfp += 1;
            }
            i += 1;
        }
        u2 += u128::from(gfp) * u128::from(2 * tp + gtp);
        tp += gtp;
        fp += gfp;
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: s,
        });
    }
    let auc = u2 as f64 / (2 * u128::from(pos) * u128::from(neg)) as f64;
    Ok(RocCurve { points, auc })
}

impl RocCurve {
    /// Area by the trapezoid rule over the stored points.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
            .sum()
    }
}
