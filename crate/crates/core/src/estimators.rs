//! The four location estimators: forward search anchored at `μ₀`, sample
//! mean, coordinatewise median and coordinatewise Hodges–Lehmann.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    mahalanobis_sq_unchecked, median_in_place, retained_count, smallest_indices, Sample,
    SpdMatrix,
};

/// Which estimator produced an [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    ForwardSearch { gamma: f64 },
    Mean,
    CwMedian,
    HodgesLehmann,
}

/// A location estimate with the estimator that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Vec<f64>,
    pub kind: EstimatorKind,
    /// Number of observations averaged (`⌊nγ⌋` for forward search, else `n`).
    pub n_used: usize,
}

/// Anchor, scatter and retention fraction for [`forward_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSearchConfig {
    gamma: f64,
    mu0: Vec<f64>,
    sigma: SpdMatrix,
}

impl ForwardSearchConfig {
    pub fn new(gamma: f64, mu0: Vec<f64>, sigma: SpdMatrix) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        if mu0.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                got: mu0.len(),
            });
        }
        if let Some(pos) = mu0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { gamma, mu0, sigma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu0(&self) -> &[f64] {
        &self.mu0
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    /// Squared Mahalanobis distance of every row to the anchor.
    pub fn distances(&self, data: &Sample) -> Result<Vec<f64>> {
        check_data(data, Some(self.mu0.len()))?;
        Ok(data
            .rows()
            .map(|y| mahalanobis_sq_unchecked(y, &self.mu0, &self.sigma))
            .collect())
    }
}

fn check_data(data: &Sample, dim: Option<usize>) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    match dim {
        Some(d) if d != data.dim() => Err(Error::DimensionMismatch {
            expected: d,
            got: data.dim(),
        }),
        _ => Ok(()),
    }
}

/// Sum of the selected rows in ascending index order, divided by the count.
fn mean_of_rows(data: &Sample, indices: impl Iterator<Item = usize>) -> Vec<f64> {
    let mut acc = vec![0.0; data.dim()];
    let mut count = 0usize;
    for i in indices {
        for (a, v) in acc.iter_mut().zip(data.row(i)) {
            *a += v;
        }
        count += 1;
    }
    acc.iter_mut().for_each(|a| *a /= count as f64);
    acc
}

/// Mean of the `⌊nγ⌋` observations closest to `μ₀` in Mahalanobis distance.
pub fn forward_search(data: &Sample, cfg: &ForwardSearchConfig) -> Result<Estimate> {
    let distances = cfg.distances(data)?;
    let m = retained_count(data.len(), cfg.gamma);
    let kept = smallest_indices(&distances, m);
    Ok(Estimate {
        value: mean_of_rows(data, kept.into_iter()),
        kind: EstimatorKind::ForwardSearch { gamma: cfg.gamma },
        n_used: m,
    })
}

pub fn sample_mean(data: &Sample) -> Result<Estimate> {
    check_data(data, None)?;
    Ok(Estimate {
        value: mean_of_rows(data, 0..data.len()),
        kind: EstimatorKind::Mean,
        n_used: data.len(),
    })
}

pub fn cw_median(data: &Sample) -> Result<Estimate> {
    check_data(data, None)?;
    let mut column = vec![0.0; data.len()];
    let value = (0..data.dim())
        .map(|k| {
            for (c, row) in column.iter_mut().zip(data.rows()) {
                *c = row[k];
            }
            median_in_place(&mut column)
        })
        .collect();
    Ok(Estimate {
        value,
        kind: EstimatorKind::CwMedian,
        n_used: data.len(),
    })
}

/// Per coordinate, the median of all Walsh averages `(y_i + y_j)/2`, `i ≤ j`.
pub fn hodges_lehmann(data: &Sample) -> Result<Estimate> {
    check_data(data, None)?;
    let n = data.len();
    let mut column = vec![0.0; n];
    let mut walsh = Vec::with_capacity(n * (n + 1) / 2);
    let value = (0..data.dim())
        .map(|k| {
            for (c, row) in column.iter_mut().zip(data.rows()) {
                *c = row[k];
            }
            walsh.clear();
            for i in 0..n {
                for j in i..n {
                    walsh.push(0.5 * (column[i] + column[j]));
                }
            }
            median_in_place(&mut walsh)
        })
        .collect();
    Ok(Estimate {
        value,
        kind: EstimatorKind::HodgesLehmann,
        n_used: n,
    })
}
