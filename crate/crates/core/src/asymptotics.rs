//! Asymptotic efficiencies of the forward-search estimator and asymptotic
//! power under contiguous alternatives `μₙ = μ₀ + δ/√n`.
//!
//! Efficiencies are ratios of limiting variance scalars: `e1 = σ₂²/c1`
//! (versus the mean), `e2 = σ₃²/c1` (versus the coordinatewise median) and
//! `e3 = σ₄²/c1` (versus Hodges–Lehmann).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elliptical::{
    marginal_constants_numeric, radial_integral_numeric, EllipticalModel, Family, RadialPower,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{sym_eigenvalues, SquareMatrix};
use crate::parallel::try_par_map;
use crate::quadrature::{ln_gamma, ln_sphere_factor};
use crate::rng::Seed;
use crate::test_engine::{
    critical_value, exceedance_probability, limit_weights, LimitSpec, TestKind, TestSetup,
};

/// Printed constant in the light-tailed `e3` closed form.
pub const LIGHT_TAIL_E3_CONSTANT: f64 = 53188.48;

/// Which competitor the forward-search estimator is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EfficiencyKind {
    /// Versus the sample mean.
    E1,
    /// Versus the coordinatewise median.
    E2,
    /// Versus Hodges–Lehmann.
    E3,
}

impl EfficiencyKind {
    pub const ALL: [EfficiencyKind; 3] = [EfficiencyKind::E1, EfficiencyKind::E2, EfficiencyKind::E3];

    pub fn competitor(self) -> &'static str {
        match self {
            EfficiencyKind::E1 => "sample mean",
            EfficiencyKind::E2 => "cw median",
            EfficiencyKind::E3 => "hodges-lehmann",
        }
    }

    fn label(self) -> &'static str {
        match self {
            EfficiencyKind::E1 => "e1",
            EfficiencyKind::E2 => "e2",
            EfficiencyKind::E3 => "e3",
        }
    }
}

impl fmt::Display for EfficiencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EfficiencyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e1" | "mean" => Ok(EfficiencyKind::E1),
            "e2" | "median" => Ok(EfficiencyKind::E2),
            "e3" | "hl" => Ok(EfficiencyKind::E3),
            other => Err(invalid(format!("unknown efficiency '{other}' (expected e1, e2 or e3)"))),
        }
    }
}

/// Where an efficiency value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EfficiencySource {
    /// The closed forms as printed for each family.
    Printed,
    /// Defining ratio with every integral evaluated by quadrature.
    Quadrature,
}

fn check_args(d: usize, gamma: f64) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

/// Printed closed form; `+∞` for the mean under the Cauchy family.
pub fn efficiency(family: Family, which: EfficiencyKind, d: usize, gamma: f64) -> Result<f64> {
    check_args(d, gamma)?;
    let h = d as f64 / 2.0;
    let (ln_pi, ln2, lg) = (std::f64::consts::PI.ln(), 2f64.ln(), gamma.ln());
    let ln_e = match family {
        Family::Gaussian => match which {
            EfficiencyKind::E1 => lg - h * (ln2 + ln_pi),
            EfficiencyKind::E2 => lg + (1.0 - h) * ln_pi - (1.0 + h) * ln2,
            EfficiencyKind::E3 => lg + (1.0 - h) * ln_pi - 3f64.ln() - h * ln2,
        },
        Family::Cauchy => {
            let base = lg + (d as f64).ln() + (1.5 - h) * ln_pi + ln_gamma(h + 0.5);
            match which {
                EfficiencyKind::E1 => return Ok(f64::INFINITY),
                EfficiencyKind::E2 => base - 4f64.ln(),
                EfficiencyKind::E3 => base - 12f64.ln(),
            }
        }
        Family::LightTail100 => {
            let base = (d as f64).ln() + lg + ln_gamma(h) - h * ln_pi - ln_gamma((h + 1.0) / 100.0);
            match which {
                EfficiencyKind::E1 => base + 100f64.ln(),
                EfficiencyKind::E2 => base + 2.0 * ln_gamma(1.0 / 200.0) - 400f64.ln(),
                EfficiencyKind::E3 => base + LIGHT_TAIL_E3_CONSTANT.ln(),
            }
        }
    };
    Ok(ln_e.exp())
}

/// Defining ratio evaluated by quadrature for any family.
pub fn efficiency_quadrature(family: Family, which: EfficiencyKind, d: usize, gamma: f64) -> Result<f64> {
    check_args(d, gamma)?;
    let i1 = radial_integral_numeric(family, d, RadialPower::One)?;
    let ln_c1 = ln_sphere_factor(d) + i1.ln() - (d as f64 * gamma).ln();
    let numerator = match which {
        EfficiencyKind::E1 => {
            let i0 = radial_integral_numeric(family, d, RadialPower::Zero)?;
            i1 / (d as f64 * i0)
        }
        EfficiencyKind::E2 => {
            let m = marginal_constants_numeric(family, d)?;
            1.0 / (4.0 * m.density_at_zero.powi(2))
        }
        EfficiencyKind::E3 => {
            let m = marginal_constants_numeric(family, d)?;
            1.0 / (12.0 * m.squared_density_integral.powi(2))
        }
    };
    Ok((numerator.ln() - ln_c1).exp())
}

/// One row of the asymptotic-efficiency table: `e^{1/d}` across dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub family: Family,
    pub which: EfficiencyKind,
    pub source: EfficiencySource,
    pub d: Vec<usize>,
    pub value: Vec<f64>,
}

/// `efficiency^{1/d}` for each competitor over `d_grid`.
pub fn efficiency_table4(
    family: Family,
    d_grid: &[usize],
    gamma: f64,
    source: EfficiencySource,
) -> Result<Vec<EfficiencyRow>> {
    EfficiencyKind::ALL
        .iter()
        .map(|&which| {
            let value = d_grid
                .iter()
                .map(|&d| {
                    let e = match source {
                        EfficiencySource::Printed => efficiency(family, which, d, gamma)?,
                        EfficiencySource::Quadrature => efficiency_quadrature(family, which, d, gamma)?,
                    };
                    Ok(e.powf(1.0 / d as f64))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(EfficiencyRow {
                family,
                which,
                source,
                d: d_grid.to_vec(),
                value,
            })
        })
        .collect()
}

/// Direction in which the printed efficiency moves as `d → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitDirection {
    Zero,
    Infinity,
}

/// Printed efficiencies on `d = 1..=d_max` and whether they cross the
/// threshold that confirms the stated limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTrend {
    pub family: Family,
    pub which: EfficiencyKind,
    pub direction: LimitDirection,
    pub values: Vec<(usize, f64)>,
    /// Eventually monotone over the second half of the grid.
    pub monotone_tail: bool,
    /// First `d` below `1e-6` (limit zero) or above `1e3` (limit infinity).
    pub crossing: Option<usize>,
}

/// Threshold below which a vanishing efficiency counts as zero.
pub const LIMIT_ZERO_THRESHOLD: f64 = 1e-6;
/// Threshold above which a growing efficiency counts as infinite.
pub const LIMIT_INFINITY_THRESHOLD: f64 = 1e3;

pub fn limit_behavior_check(family: Family, which: EfficiencyKind, d_max: usize, gamma: f64) -> Result<LimitTrend> {
    if d_max < 10 {
        return Err(invalid(format!("d_max must be at least 10, got {d_max}")));
    }
    let direction = match family {
        Family::Gaussian => LimitDirection::Zero,
        Family::Cauchy | Family::LightTail100 => LimitDirection::Infinity,
    };
    let values = (1..=d_max)
        .map(|d| efficiency(family, which, d, gamma).map(|e| (d, e)))
        .collect::<Result<Vec<_>>>()?;
    let tail = &values[d_max / 2..];
    let monotone_tail = tail.windows(2).all(|w| match direction {
        LimitDirection::Zero => w[1].1 <= w[0].1,
        LimitDirection::Infinity => w[1].1 >= w[0].1,
    });
    let crossing = values
        .iter()
        .find(|(_, e)| match direction {
            LimitDirection::Zero => *e < LIMIT_ZERO_THRESHOLD,
            LimitDirection::Infinity => *e > LIMIT_INFINITY_THRESHOLD,
        })
        .map(|(d, _)| *d);
    Ok(LimitTrend {
        family,
        which,
        direction,
        values,
        monotone_tail,
        crossing,
    })
}

/// Monte Carlo settings for offset estimation and contiguous power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContiguousConfig {
    /// Sample size of each simulated dataset.
    pub n: usize,
    /// Number of simulated datasets.
    pub reps: usize,
    pub gamma: f64,
    /// Weighted chi-squared draws for the critical value and the power.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for ContiguousConfig {
    fn default() -> Self {
        Self {
            n: 100,
            reps: 5000,
            gamma: 0.5,
            mc_samples: 200_000,
            seed: 0,
        }
    }
}

/// Monte Carlo estimates of the offsets with their standard errors, plus
/// the covariance of `√n(μ̂ - μ₀)` over the same datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offsets {
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub estimator_covariance: SquareMatrix,
}

/// `aᵢ ≈ E[(μ̂ᵢ - μ₀ᵢ) Σₖ δ'∇_μ log f(yₖ; μ₀)]` averaged over datasets
/// drawn under `H₀` (standard model, `μ₀ = 0`, `Σ = I`); the score is
/// summed over the whole sample.
pub fn estimate_offsets(kind: TestKind, family: Family, delta: &[f64], cfg: &ContiguousConfig) -> Result<Offsets> {
    let d = delta.len();
    if d == 0 {
        return Err(invalid("delta must have at least one coordinate"));
    }
    if cfg.n == 0 || cfg.reps < 2 {
        return Err(invalid("offset estimation needs n >= 1 and reps >= 2"));
    }
    let model = EllipticalModel::standard(family, d)?;
    let setup = TestSetup::standard(d, cfg.gamma)?;
    let seed = Seed(cfg.seed).derive("offsets", kind.index() as u64);
    let root_n = (cfg.n as f64).sqrt();
    let per_rep = try_par_map(cfg.reps, |r| {
        let data = model.sample(cfg.n, &mut seed.stream("offset-data", r as u64));
        let est = setup.estimate(kind, &data)?.value;
        let score: f64 = data
            .rows()
            .map(|y| model.score_unchecked(y).iter().zip(delta).map(|(s, dj)| s * dj).sum::<f64>())
            .sum();
        let products: Vec<f64> = est.iter().map(|e| e * score).collect();
        let scaled: Vec<f64> = est.iter().map(|e| root_n * e).collect();
        Ok::<_, Error>((products, scaled))
    })?;
    let reps = cfg.reps as f64;
    let mut values = vec![0.0; d];
    for (p, _) in &per_rep {
        values.iter_mut().zip(p).for_each(|(v, x)| *v += x);
    }
    values.iter_mut().for_each(|v| *v /= reps);
    let mut std_errors = vec![0.0; d];
    for (p, _) in &per_rep {
        std_errors
            .iter_mut()
            .zip(p.iter().zip(&values))
            .for_each(|(s, (x, m))| *s += (x - m) * (x - m));
    }
    std_errors
        .iter_mut()
        .for_each(|s| *s = (*s / (reps - 1.0) / reps).sqrt());
    let mut cov = SquareMatrix::zeros(d);
    for (_, z) in &per_rep {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += z[i] * z[j];
            }
        }
    }
    let estimator_covariance = cov.scaled(1.0 / reps);
    Ok(Offsets {
        values,
        std_errors,
        estimator_covariance,
    })
}

/// Where the weights of a contiguous-power calculation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    /// Eigenvalues of the limit covariance constant times `Σ`.
    Formula,
    /// Eigenvalues of the simulated covariance of `√n(μ̂ - μ₀)`, used when
    /// the formula constant diverges.
    Simulated,
    /// No limit law; power is zero by rule.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContiguousPower {
    pub kind: TestKind,
    pub family: Family,
    pub delta: Vec<f64>,
    pub power: f64,
    pub std_error: f64,
    pub offsets: Vec<f64>,
    pub offset_std_errors: Vec<f64>,
    pub weights: Vec<f64>,
    pub weight_source: WeightSource,
    pub critical_value: f64,
}

/// `P(Σ λᵢ (Zᵢ + aᵢ)² > c_α)` with `c_α` the central `(1 - α)` quantile.
/// The mean under the Cauchy family has power zero by rule.
pub fn contiguous_power(
    kind: TestKind,
    family: Family,
    delta: &[f64],
    alpha: f64,
    cfg: &ContiguousConfig,
) -> Result<ContiguousPower> {
    let d = delta.len();
    if kind == TestKind::T2 && family == Family::Cauchy {
        return Ok(ContiguousPower {
            kind,
            family,
            delta: delta.to_vec(),
            power: 0.0,
            std_error: 0.0,
            offsets: vec![0.0; d],
            offset_std_errors: vec![0.0; d],
            weights: Vec::new(),
            weight_source: WeightSource::None,
            critical_value: f64::INFINITY,
        });
    }
    let offsets = estimate_offsets(kind, family, delta, cfg)?;
    let sigma = crate::linalg::SpdMatrix::identity(d);
    let (central, weight_source) = match limit_weights(kind, family, &sigma, cfg.gamma) {
        Ok(spec) => (spec, WeightSource::Formula),
        Err(Error::DivergentIntegral(_)) => {
            let eig = sym_eigenvalues(&offsets.estimator_covariance)?;
            (LimitSpec::central(eig)?, WeightSource::Simulated)
        }
        Err(e) => return Err(e),
    };
    let seed = Seed(cfg.seed).derive("contiguous", kind.index() as u64);
    let cv = critical_value(&central, alpha, cfg.mc_samples, seed.derive("central", 0))?;
    let shifted = central.with_offsets(offsets.values.clone())?;
    let (power, std_error) = exceedance_probability(&shifted, cv.value, cfg.mc_samples, seed.derive("shifted", 0))?;
    Ok(ContiguousPower {
        kind,
        family,
        delta: delta.to_vec(),
        power,
        std_error,
        offsets: offsets.values,
        offset_std_errors: offsets.std_errors,
        weights: central.weights().to_vec(),
        weight_source,
        critical_value: cv.value,
    })
}

/// Monte Carlo mean of `-∂²/∂μⱼ² log f(y; μ)` at `μ₀` by central
/// differences; finite entries are necessary for contiguity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationDiagnostic {
    pub family: Family,
    pub diagonal: Vec<f64>,
    pub finite: bool,
}

pub fn information_diagnostic(family: Family, d: usize, reps: usize, seed: u64) -> Result<InformationDiagnostic> {
    const STEP: f64 = 1e-4;
    if reps == 0 {
        return Err(invalid("reps must be positive"));
    }
    let model = EllipticalModel::standard(family, d)?;
    let data = model.sample(reps, &mut Seed(seed).stream("information", 0));
    let mut diagonal = vec![0.0; d];
    for (j, slot) in diagonal.iter_mut().enumerate() {
        let mut up = vec![0.0; d];
        up[j] = STEP;
        let mut down = vec![0.0; d];
        down[j] = -STEP;
        let plus = model.with_location(up)?;
        let minus = model.with_location(down)?;
        let mut acc = 0.0;
        for y in data.rows() {
            let second = (plus.log_density(y)? - 2.0 * model.log_density(y)? + minus.log_density(y)?)
                / (STEP * STEP);
            acc -= second;
        }
        *slot = acc / reps as f64;
    }
    let finite = diagonal.iter().all(|v| v.is_finite());
    Ok(InformationDiagnostic {
        family,
        diagonal,
        finite,
    })
}
