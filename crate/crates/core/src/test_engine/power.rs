//! Finite-sample power under the mixture alternatives `(1 - β) F + β G`,
//! `G` being `F` moved by a constant shift in every coordinate.

use serde::{Deserialize, Serialize};

use super::calibration::{empirical_critical_value, null_statistics, Calibration};
use super::weighted_chisq::{check_alpha, critical_value};
use super::{limit_weights, TestKind, TestSetup};
use crate::elliptical::{EllipticalModel, Family, MixtureModel};
use crate::error::{invalid, Error, Result};
use crate::parallel::try_par_map;
use crate::rng::Seed;

/// Per-coordinate location of the contaminating component.
pub const ALTERNATIVE_SHIFT: f64 = 5.0;

/// Settings shared by every row of a power campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub reps: usize,
    pub calibration: Calibration,
    /// Weighted chi-squared draws (formula) or null datasets (empirical).
    pub mc_samples: usize,
    pub shift: f64,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            n: 100,
            d: 4,
            gamma: 0.5,
            alpha: 0.05,
            reps: 1000,
            calibration: Calibration::Empirical,
            mc_samples: 2000,
            shift: ALTERNATIVE_SHIFT,
            seed: 0,
        }
    }
}

impl PowerConfig {
    fn validate(&self, beta_grid: &[f64]) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.n == 0 || self.d == 0 || self.reps == 0 || self.mc_samples == 0 {
            return Err(invalid("n, d, reps and mc_samples must be positive"));
        }
        if let Some(b) = beta_grid.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(invalid(format!("beta values must lie in [0, 1], got {b}")));
        }
        if beta_grid.is_empty() {
            return Err(invalid("beta grid is empty"));
        }
        Ok(())
    }
}

/// Rejection rates of one test under one family across the β grid.
///
/// `power` is `None` when the test has no critical value (the mean under
/// the Cauchy family with formula calibration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub family: Family,
    pub kind: TestKind,
    pub critical_value: Option<f64>,
    pub beta: Vec<f64>,
    pub power: Vec<Option<f64>>,
    pub std_error: Vec<Option<f64>>,
}

fn family_critical_values(
    family: Family,
    kinds: &[TestKind],
    setup: &TestSetup,
    cfg: &PowerConfig,
    seed: Seed,
) -> Result<Vec<Option<f64>>> {
    match cfg.calibration {
        Calibration::Formula => kinds
            .iter()
            .map(|&k| match limit_weights(k, family, setup.sigma(), setup.gamma()) {
                Ok(spec) => {
                    critical_value(&spec, cfg.alpha, cfg.mc_samples, seed.derive("critical", k.index() as u64))
                        .map(|cv| Some(cv.value))
                }
                Err(Error::InfiniteVariance(_) | Error::DivergentIntegral(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect(),
        Calibration::Empirical => {
            let null = null_statistics(family, setup, kinds, cfg.n, cfg.mc_samples, seed.derive("null", 0))?;
            Ok(null
                .into_iter()
                .map(|s| Some(empirical_critical_value(s, cfg.alpha).value))
                .collect())
        }
    }
}

/// Power of every test in `kinds` for every family, one row per pair in
/// family-major order.
pub fn power_table(
    families: &[Family],
    kinds: &[TestKind],
    beta_grid: &[f64],
    cfg: &PowerConfig,
) -> Result<Vec<PowerRow>> {
    cfg.validate(beta_grid)?;
    let setup = TestSetup::standard(cfg.d, cfg.gamma)?;
    let root = Seed(cfg.seed);
    let mut rows = Vec::with_capacity(families.len() * kinds.len());
    for &family in families {
        let seed = root.derive(family.name(), 0);
        let critical = family_critical_values(family, kinds, &setup, cfg, seed)?;
        let base = EllipticalModel::standard(family, cfg.d)?;
        let shift = vec![cfg.shift; cfg.d];
        // rejections[β index][kind position]
        let mut rejections = Vec::with_capacity(beta_grid.len());
        for (b, &beta) in beta_grid.iter().enumerate() {
            let mixture = MixtureModel::new(beta, base.clone(), &shift)?;
            let beta_seed = seed.derive("beta", b as u64);
            let per_rep = try_par_map(cfg.reps, |r| {
                let data = mixture.sample(cfg.n, &mut beta_seed.stream("power-data", r as u64));
                kinds
                    .iter()
                    .zip(&critical)
                    .map(|(&k, cv)| match cv {
                        Some(c) => setup.statistic(k, &data).map(|t| t > *c),
                        None => Ok(false),
                    })
                    .collect::<Result<Vec<bool>>>()
            })?;
            let counts: Vec<usize> = (0..kinds.len())
                .map(|j| per_rep.iter().filter(|row| row[j]).count())
                .collect();
            rejections.push(counts);
        }
        for (j, &kind) in kinds.iter().enumerate() {
            let (power, std_error) = rejections
                .iter()
                .map(|counts| match critical[j] {
                    Some(_) => {
                        let p = counts[j] as f64 / cfg.reps as f64;
                        (Some(p), Some((p * (1.0 - p) / cfg.reps as f64).sqrt()))
                    }
                    None => (None, None),
                })
                .unzip();
            rows.push(PowerRow {
                family,
                kind,
                critical_value: critical[j],
                beta: beta_grid.to_vec(),
                power,
                std_error,
            });
        }
    }
    Ok(rows)
}

/// `(β, power)` pairs for one test and family.
pub fn power_curve(kind: TestKind, family: Family, beta_grid: &[f64], cfg: &PowerConfig) -> Result<Vec<(f64, f64)>> {
    let row = power_table(&[family], &[kind], beta_grid, cfg)?.remove(0);
    row.beta
        .iter()
        .zip(&row.power)
        .map(|(&b, p)| {
            p.map(|p| (b, p)).ok_or_else(|| {
                Error::InfiniteVariance(format!("{kind} has no formula critical value under {family}"))
            })
        })
        .collect()
}
