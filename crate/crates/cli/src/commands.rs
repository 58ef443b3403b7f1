//! One function per subcommand; each validates its flags, runs the
//! campaign and returns the rendered document.

use std::path::{Path, PathBuf};

use clap::Args;
use fstest::asymptotics::{contiguous_power, efficiency, efficiency_quadrature, ContiguousConfig, EfficiencyKind};
use fstest::dataset::{read_dataset_path, read_scatter_path};
use fstest::robustness::{breakdown_experiment, default_magnitudes, finite_sample_efficiency, predicted_break_fraction};
use fstest::test_engine::{bootstrap_p_value, calibrate, power_table, run_test, PowerConfig, TestReport};
use fstest::{Calibration, Cell, Error, Family, Seed, SpdMatrix, Table, TestKind, TestSetup};

use crate::output::{render, Format};
use crate::CliError;

/// Null datasets drawn for empirical calibration unless `--mc-samples` is set.
const DEFAULT_EMPIRICAL_SAMPLES: usize = 2000;
/// Weighted chi-squared draws for formula calibration unless `--mc-samples` is set.
const DEFAULT_FORMULA_SAMPLES: usize = 100_000;

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Destination file; written to a temporary sibling and renamed into place.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn mc_samples_for(calibration: Calibration, requested: Option<usize>) -> usize {
    requested.unwrap_or(match calibration {
        Calibration::Formula => DEFAULT_FORMULA_SAMPLES,
        Calibration::Empirical => DEFAULT_EMPIRICAL_SAMPLES,
    })
}

fn no_limit_law(e: &Error) -> bool {
    matches!(e, Error::InfiniteVariance(_) | Error::DivergentIntegral(_))
}

fn load_sigma(spec: &str, d: usize) -> Result<SpdMatrix, CliError> {
    if spec.eq_ignore_ascii_case("identity") {
        return Ok(SpdMatrix::identity(d));
    }
    let sigma = read_scatter_path(Path::new(spec))?;
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: sigma.dim() }.into());
    }
    Ok(sigma)
}

fn require_nonempty<T>(flag: &str, values: &[T]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("--{flag} needs at least one value")));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct PowerTableArgs {
    /// Families to simulate (comma-separated).
    #[arg(long, value_delimiter = ',', default_values = ["gaussian", "cauchy", "light100"])]
    pub family: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_values = ["T1", "T2", "T3", "T4"])]
    pub kind: Vec<TestKind>,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Null datasets (empirical) or weighted chi-squared draws (formula).
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, default_value = "empirical")]
    pub calibration: Calibration,
    /// Contamination fractions of the mixture alternative.
    #[arg(long, value_delimiter = ',', default_values = ["0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "1"])]
    pub beta_grid: Vec<f64>,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn power_table_cmd(args: &PowerTableArgs) -> Result<String, CliError> {
    require_nonempty("family", &args.family)?;
    require_nonempty("kind", &args.kind)?;
    let cfg = PowerConfig {
        n: args.n,
        d: args.d,
        gamma: args.gamma,
        alpha: args.alpha,
        reps: args.reps,
        calibration: args.calibration,
        mc_samples: mc_samples_for(args.calibration, args.mc_samples),
        seed: args.seed,
        ..PowerConfig::default()
    };
    let rows = power_table(&args.family, &args.kind, &args.beta_grid, &cfg)?;
    let mut columns = vec!["family".to_string(), "test".to_string(), "critical_value".to_string()];
    for b in &args.beta_grid {
        columns.push(format!("power_{b}"));
        columns.push(format!("se_{b}"));
    }
    let mut table = Table::new("power-table", columns);
    for row in rows {
        let mut cells: Vec<Cell> = vec![row.family.name().into(), row.kind.label().into(), row.critical_value.into()];
        for (p, se) in row.power.iter().zip(&row.std_error) {
            cells.push((*p).into());
            cells.push((*se).into());
        }
        table.push(cells)?;
    }
    Ok(render(&table, args.output.format_or(Format::Csv)))
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Observations, one per row; an optional header row is detected.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_values = ["T1", "T2", "T3", "T4"])]
    pub kind: Vec<TestKind>,
    /// Hypothesized location (comma-separated); defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu0: Option<Vec<f64>>,
    /// `identity` or a CSV file holding a symmetric positive definite matrix.
    #[arg(long, default_value = "identity")]
    pub sigma: String,
    /// Null family used to calibrate the critical value.
    #[arg(long, default_value = "gaussian")]
    pub family: Family,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "empirical")]
    pub calibration: Calibration,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Bootstrap resamples for a p-value; 0 skips the bootstrap.
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn test_cmd(args: &TestArgs) -> Result<String, CliError> {
    require_nonempty("kind", &args.kind)?;
    let data = read_dataset_path(&args.data)?.sample;
    let d = data.dim();
    let mu0 = args.mu0.clone().unwrap_or_else(|| vec![0.0; d]);
    if mu0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mu0.len() }.into());
    }
    let setup = TestSetup::new(mu0, load_sigma(&args.sigma, d)?, args.gamma)?;
    let mc = mc_samples_for(args.calibration, args.mc_samples);
    let mut reports: Vec<TestReport> = Vec::with_capacity(args.kind.len());
    for &kind in &args.kind {
        let mut report = run_test(kind, &data, &setup, args.family, args.alpha, args.calibration, mc, args.seed)?;
        if args.bootstrap > 0 {
            let seed = Seed(args.seed).derive("bootstrap", kind.index() as u64);
            report.p_value = Some(bootstrap_p_value(kind, &data, &setup, args.bootstrap, seed)?);
        }
        reports.push(report);
    }
    match args.output.format_or(Format::Json) {
        Format::Json => {
            let mut s = if let [single] = reports.as_slice() {
                single.to_json()
            } else {
                serde_json::to_string_pretty(&reports).expect("reports serialize")
            };
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut table = Table::new(
                "test",
                [
                    "schema", "statistic", "value", "critical_value", "critical_value_se", "alpha", "decision",
                    "p_value", "calibration", "mc_samples", "seed",
                ],
            );
            for r in &reports {
                table.push(vec![
                    r.schema.clone().into(),
                    r.statistic.label().into(),
                    r.value.into(),
                    r.critical_value.into(),
                    r.critical_value_se.into(),
                    r.alpha.into(),
                    r.decision.to_string().into(),
                    r.p_value.into(),
                    r.calibration.to_string().into(),
                    r.mc_samples.into(),
                    r.seed.into(),
                ])?;
            }
            Ok(table.to_csv())
        }
    }
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long, value_delimiter = ',', default_values = ["gaussian", "cauchy", "light100"])]
    pub family: Vec<Family>,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Common value of every coordinate of the contiguous shift, one row each.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values = ["0.5", "-0.5", "5", "-5"])]
    pub delta: Vec<f64>,
    /// Sample size of each dataset in the offset simulation.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Datasets in the offset simulation.
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    /// Weighted chi-squared draws for the critical value and the power.
    #[arg(long, default_value_t = 200_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn table2_cmd(args: &Table2Args) -> Result<String, CliError> {
    require_nonempty("family", &args.family)?;
    require_nonempty("delta", &args.delta)?;
    if args.d == 0 {
        return Err(CliError::Usage("--d must be positive".into()));
    }
    let cfg = ContiguousConfig {
        n: args.n,
        reps: args.reps,
        gamma: args.gamma,
        mc_samples: args.mc_samples,
        seed: args.seed,
    };
    let mut columns = vec!["family".to_string(), "delta".to_string(), "delta_norm".to_string()];
    for kind in TestKind::ALL {
        columns.push(kind.label().to_string());
        columns.push(format!("{}_se", kind.label()));
    }
    let mut table = Table::new("table2", columns);
    for &family in &args.family {
        for &c in &args.delta {
            let delta = vec![c; args.d];
            let norm = c.abs() * (args.d as f64).sqrt();
            let mut cells: Vec<Cell> = vec![family.name().into(), c.into(), norm.into()];
            for kind in TestKind::ALL {
                let p = contiguous_power(kind, family, &delta, args.alpha, &cfg)?;
                cells.push(p.power.into());
                cells.push(p.std_error.into());
            }
            table.push(cells)?;
        }
    }
    Ok(render(&table, args.output.format_or(Format::Csv)))
}

#[derive(Debug, Args)]
pub struct Table3Args {
    #[arg(long, value_delimiter = ',', default_values = ["gaussian", "cauchy", "light100"])]
    pub family: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_values = ["10", "100"])]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values = ["2", "4", "10", "20", "50", "100"])]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn table3_cmd(args: &Table3Args) -> Result<String, CliError> {
    require_nonempty("family", &args.family)?;
    require_nonempty("n", &args.n)?;
    require_nonempty("d", &args.d)?;
    let mut columns = vec!["family".to_string(), "n".to_string(), "estimator".to_string()];
    for d in &args.d {
        columns.push(format!("d_{d}"));
        columns.push(format!("se_d_{d}"));
    }
    let mut table = Table::new("table3", columns);
    for &family in &args.family {
        for &n in &args.n {
            for kind in [TestKind::T2, TestKind::T3, TestKind::T4] {
                let mut cells: Vec<Cell> = vec![family.name().into(), n.into(), kind.estimator_name().into()];
                for &d in &args.d {
                    let e = finite_sample_efficiency(kind, TestKind::T1, family, n, d, args.reps, args.gamma, args.seed)?;
                    cells.push(e.value.into());
                    cells.push(e.std_error.into());
                }
                table.push(cells)?;
            }
        }
    }
    Ok(render(&table, args.output.format_or(Format::Csv)))
}

#[derive(Debug, Args)]
pub struct Table4Args {
    #[arg(long, value_delimiter = ',', default_values = ["gaussian", "cauchy", "light100"])]
    pub family: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_values = ["2", "4", "10", "20", "50", "100"])]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Printed closed forms and, beside them, the quadrature evaluation of the
/// same ratio; quadrature cells are empty where the integral diverges.
pub fn table4_cmd(args: &Table4Args) -> Result<String, CliError> {
    require_nonempty("family", &args.family)?;
    require_nonempty("d", &args.d)?;
    let mut columns = vec!["family".to_string(), "estimator".to_string(), "source".to_string()];
    columns.extend(args.d.iter().map(|d| format!("d_{d}")));
    let mut table = Table::new("table4", columns);
    for &family in &args.family {
        for which in EfficiencyKind::ALL {
            let mut printed: Vec<Cell> = vec![family.name().into(), which.competitor().into(), "printed".into()];
            let mut quadrature: Vec<Cell> = vec![family.name().into(), which.competitor().into(), "quadrature".into()];
            for &d in &args.d {
                let root = |e: f64| e.powf(1.0 / d as f64);
                printed.push(root(efficiency(family, which, d, args.gamma)?).into());
                quadrature.push(match efficiency_quadrature(family, which, d, args.gamma) {
                    Ok(e) => root(e).into(),
                    Err(e) if no_limit_law(&e) || matches!(e, Error::QuadratureFailed { .. }) => Cell::Missing,
                    Err(e) => return Err(e.into()),
                });
            }
            table.push(printed)?;
            table.push(quadrature)?;
        }
    }
    Ok(render(&table, args.output.format_or(Format::Csv)))
}

#[derive(Debug, Args)]
pub struct BreakdownArgs {
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn breakdown_cmd(args: &BreakdownArgs) -> Result<String, CliError> {
    let magnitudes = default_magnitudes();
    let result = breakdown_experiment(args.gamma, args.n, args.d, &magnitudes, args.seed)?;
    let mut columns = vec!["corrupted".to_string(), "fraction".to_string(), "broke".to_string()];
    columns.extend(magnitudes.iter().map(|m| format!("deviation_{m:e}")));
    let mut table = Table::new("breakdown", columns);
    for level in &result.levels {
        let mut cells: Vec<Cell> = vec![
            level.corrupted.into(),
            level.fraction.into(),
            if level.broke { "yes" } else { "no" }.into(),
        ];
        cells.extend(level.deviations.iter().map(|&v| Cell::from(v)));
        table.push(cells)?;
    }
    let observed = result.break_fraction.map_or_else(|| "none".to_string(), |f| f.to_string());
    eprintln!(
        "break fraction {observed} (counting argument {})",
        predicted_break_fraction(args.gamma, args.n)
    );
    Ok(render(&table, args.output.format_or(Format::Csv)))
}

#[derive(Debug, Args)]
pub struct CriticalValueArgs {
    #[arg(long, default_value = "gaussian")]
    pub family: Family,
    #[arg(long, value_delimiter = ',', default_values = ["T1", "T2", "T3", "T4"])]
    pub kind: Vec<TestKind>,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Dataset size for empirical calibration.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "identity")]
    pub sigma: String,
    #[arg(long, default_value = "empirical")]
    pub calibration: Calibration,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Rows without a limit law (formula calibration of a divergent constant)
/// carry empty value cells.
pub fn critical_value_cmd(args: &CriticalValueArgs) -> Result<String, CliError> {
    require_nonempty("kind", &args.kind)?;
    if args.d == 0 {
        return Err(CliError::Usage("--d must be positive".into()));
    }
    let setup = TestSetup::new(vec![0.0; args.d], load_sigma(&args.sigma, args.d)?, args.gamma)?;
    let mc = mc_samples_for(args.calibration, args.mc_samples);
    let mut table = Table::new(
        "critical-value",
        ["family", "test", "calibration", "alpha", "critical_value", "std_error", "mc_samples"],
    );
    for &kind in &args.kind {
        let seed = Seed(args.seed).derive("critical-value", kind.index() as u64);
        let (value, se) = match calibrate(kind, args.family, &setup, args.n, args.alpha, args.calibration, mc, seed) {
            Ok(cv) => (Some(cv.value), Some(cv.std_error)),
            Err(e) if no_limit_law(&e) => (None, None),
            Err(e) => return Err(e.into()),
        };
        table.push(vec![
            args.family.name().into(),
            kind.label().into(),
            args.calibration.to_string().into(),
            args.alpha.into(),
            value.into(),
            se.into(),
            mc.into(),
        ])?;
    }
    Ok(render(&table, args.output.format_or(Format::Csv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_defaults_follow_calibration() {
        assert_eq!(mc_samples_for(Calibration::Formula, None), DEFAULT_FORMULA_SAMPLES);
        assert_eq!(mc_samples_for(Calibration::Empirical, None), DEFAULT_EMPIRICAL_SAMPLES);
        assert_eq!(mc_samples_for(Calibration::Formula, Some(7)), 7);
    }

    #[test]
    fn identity_sigma_needs_no_file() {
        assert!(load_sigma("identity", 3).unwrap().is_identity());
        assert!(load_sigma("IDENTITY", 1).unwrap().is_identity());
        assert!(matches!(load_sigma("/nonexistent/sigma.csv", 2), Err(CliError::Core(Error::Io(_)))));
    }

    #[test]
    fn divergent_constants_are_not_errors_for_tables() {
        assert!(no_limit_law(&Error::DivergentIntegral("x".into())));
        assert!(no_limit_law(&Error::InfiniteVariance("x".into())));
        assert!(!no_limit_law(&Error::EmptyData));
    }
}
