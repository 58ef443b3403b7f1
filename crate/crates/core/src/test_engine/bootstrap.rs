//! Nonparametric bootstrap p-values.

use rand::Rng;

use super::{TestKind, TestSetup};
use crate::error::{invalid, Error, Result};
use crate::linalg::Sample;
use crate::parallel::try_par_map;
use crate::rng::Seed;

/// Smallest accepted number of resamples.
pub const MIN_RESAMPLES: usize = 100;

/// Fraction of `resamples` bootstrap statistics strictly greater than the
/// observed one. Resamples are drawn with replacement from `data` and
/// compared against the same anchor `μ₀`.
pub fn bootstrap_p_value(
    kind: TestKind,
    data: &Sample,
    setup: &TestSetup,
    resamples: usize,
    seed: Seed,
) -> Result<f64> {
    if resamples < MIN_RESAMPLES {
        return Err(invalid(format!(
            "at least {MIN_RESAMPLES} bootstrap resamples are required, got {resamples}"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let observed = setup.statistic(kind, data)?;
    let n = data.len();
    let exceed = try_par_map(resamples, |k| {
        let mut rng = seed.stream("bootstrap", k as u64);
        let mut resample = Sample::with_capacity(data.dim(), n);
        for _ in 0..n {
            resample.push(data.row(rng.random_range(0..n)));
        }
        setup.statistic(kind, &resample).map(|t| t > observed)
    })?;
    Ok(exceed.iter().filter(|&&e| e).count() as f64 / resamples as f64)
}
