//! Python module `fstest`: estimators, statistics, calibrated tests and the
//! asymptotic efficiency formulas. Datasets are lists of rows (any
//! sequence of float sequences, including 2-D NumPy arrays).

use fstest::asymptotics::{efficiency as core_efficiency, EfficiencyKind};
use fstest::estimators::{cw_median, hodges_lehmann, sample_mean};
use fstest::robustness::{breakdown_experiment, default_magnitudes};
use fstest::test_engine::{bootstrap_p_value, calibrate, power_curve as core_power_curve, run_test, PowerConfig};
use fstest::{Calibration, EllipticalModel, Error, Family, Sample, Seed, SpdMatrix, SquareMatrix, TestKind};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyOSError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(raw: &str) -> PyResult<T> {
    raw.parse().map_err(to_py)
}

fn sample_from(rows: &[Vec<f64>]) -> PyResult<Sample> {
    Sample::from_rows(rows).map_err(to_py)
}

fn sigma_from(sigma: Option<Vec<Vec<f64>>>, d: usize) -> PyResult<SpdMatrix> {
    match sigma {
        None => Ok(SpdMatrix::identity(d)),
        Some(rows) => SquareMatrix::from_rows(&rows).and_then(SpdMatrix::new).map_err(to_py),
    }
}

/// Anchor `mu0`, scatter `sigma` (identity when omitted) and trimming
/// fraction `gamma` shared by the four statistics.
#[pyclass(name = "TestSetup", frozen)]
struct PyTestSetup {
    inner: fstest::TestSetup,
}

#[pymethods]
impl PyTestSetup {
    #[new]
    #[pyo3(signature = (mu0, sigma=None, gamma=0.5))]
    fn new(mu0: Vec<f64>, sigma: Option<Vec<Vec<f64>>>, gamma: f64) -> PyResult<Self> {
        let sigma = sigma_from(sigma, mu0.len())?;
        Ok(Self {
            inner: fstest::TestSetup::new(mu0, sigma, gamma).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn mu0(&self) -> Vec<f64> {
        self.inner.mu0().to_vec()
    }

    /// Location estimate of the estimator behind `kind` ("T1".."T4").
    fn estimate(&self, kind: &str, data: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let kind: TestKind = parse(kind)?;
        let data = sample_from(&data)?;
        self.inner.estimate(kind, &data).map(|e| e.value).map_err(to_py)
    }

    /// `n‖estimate − mu0‖²`.
    fn statistic(&self, kind: &str, data: Vec<Vec<f64>>) -> PyResult<f64> {
        let kind: TestKind = parse(kind)?;
        let data = sample_from(&data)?;
        self.inner.statistic(kind, &data).map_err(to_py)
    }

    fn all_statistics(&self, data: Vec<Vec<f64>>) -> PyResult<[f64; 4]> {
        let data = sample_from(&data)?;
        self.inner.all_statistics(&data).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("TestSetup(mu0={:?}, gamma={})", self.inner.mu0(), self.inner.gamma())
    }
}

/// Outcome of one test; `to_json()` gives the `fstest/1` report.
#[pyclass(name = "TestReport", frozen)]
struct PyTestReport {
    inner: fstest::TestReport,
}

#[pymethods]
impl PyTestReport {
    #[getter]
    fn statistic(&self) -> &'static str {
        self.inner.statistic.label()
    }

    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn critical_value(&self) -> f64 {
        self.inner.critical_value
    }

    #[getter]
    fn critical_value_se(&self) -> f64 {
        self.inner.critical_value_se
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn decision(&self) -> String {
        self.inner.decision.to_string()
    }

    #[getter]
    fn reject(&self) -> bool {
        self.inner.decision == fstest::test_engine::Decision::Reject
    }

    #[getter]
    fn p_value(&self) -> Option<f64> {
        self.inner.p_value
    }

    #[getter]
    fn calibration(&self) -> String {
        self.inner.calibration.to_string()
    }

    #[getter]
    fn mc_samples(&self) -> usize {
        self.inner.mc_samples
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "TestReport(statistic={}, value={}, critical_value={}, decision={})",
            self.inner.statistic, self.inner.value, self.inner.critical_value, self.inner.decision
        )
    }
}

/// Mean of the `⌊n·gamma⌋` points closest to `mu0` in Mahalanobis distance.
#[pyfunction]
#[pyo3(signature = (data, gamma, mu0=None, sigma=None))]
fn forward_search(data: Vec<Vec<f64>>, gamma: f64, mu0: Option<Vec<f64>>, sigma: Option<Vec<Vec<f64>>>) -> PyResult<Vec<f64>> {
    let data = sample_from(&data)?;
    let mu0 = mu0.unwrap_or_else(|| vec![0.0; data.dim()]);
    let setup = fstest::TestSetup::new(mu0, sigma_from(sigma, data.dim())?, gamma).map_err(to_py)?;
    setup.estimate(TestKind::T1, &data).map(|e| e.value).map_err(to_py)
}

#[pyfunction]
fn mean(data: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    sample_mean(&sample_from(&data)?).map(|e| e.value).map_err(to_py)
}

#[pyfunction]
fn median(data: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    cw_median(&sample_from(&data)?).map(|e| e.value).map_err(to_py)
}

#[pyfunction(name = "hodges_lehmann")]
fn hodges_lehmann_py(data: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    hodges_lehmann(&sample_from(&data)?).map(|e| e.value).map_err(to_py)
}

/// `n` draws from the standard `family` model in `d` dimensions, shifted
/// to `location` when given.
#[pyfunction]
#[pyo3(signature = (family, n, d, seed, location=None))]
fn sample(family: &str, n: usize, d: usize, seed: u64, location: Option<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let family: Family = parse(family)?;
    let mut model = EllipticalModel::standard(family, d).map_err(to_py)?;
    if let Some(loc) = location {
        model = model.with_location(loc).map_err(to_py)?;
    }
    Ok(model.sample(n, &mut Seed(seed).stream("python-sample", 0)).to_rows())
}

/// Runs one test on `data`; `bootstrap > 0` adds a bootstrap p-value.
#[pyfunction(name = "run_test")]
#[pyo3(signature = (
    data, kind, seed, mu0=None, sigma=None, family="gaussian", gamma=0.5, alpha=0.05,
    calibration="empirical", mc_samples=2000, bootstrap=0
))]
#[allow(clippy::too_many_arguments)]
fn run_test_py(
    py: Python<'_>,
    data: Vec<Vec<f64>>,
    kind: &str,
    seed: u64,
    mu0: Option<Vec<f64>>,
    sigma: Option<Vec<Vec<f64>>>,
    family: &str,
    gamma: f64,
    alpha: f64,
    calibration: &str,
    mc_samples: usize,
    bootstrap: usize,
) -> PyResult<PyTestReport> {
    let kind: TestKind = parse(kind)?;
    let family: Family = parse(family)?;
    let calibration: Calibration = parse(calibration)?;
    let data = sample_from(&data)?;
    let mu0 = mu0.unwrap_or_else(|| vec![0.0; data.dim()]);
    let setup = fstest::TestSetup::new(mu0, sigma_from(sigma, data.dim())?, gamma).map_err(to_py)?;
    let inner = py
        .detach(|| {
            let mut report = run_test(kind, &data, &setup, family, alpha, calibration, mc_samples, seed)?;
            if bootstrap > 0 {
                let bs_seed = Seed(seed).derive("bootstrap", kind.index() as u64);
                report.p_value = Some(bootstrap_p_value(kind, &data, &setup, bootstrap, bs_seed)?);
            }
            Ok(report)
        })
        .map_err(to_py)?;
    Ok(PyTestReport { inner })
}

/// `(value, standard error)` of the critical value for `kind`.
#[pyfunction]
#[pyo3(signature = (kind, family, d, seed, gamma=0.5, alpha=0.05, calibration="empirical", mc_samples=2000, n=100))]
#[allow(clippy::too_many_arguments)]
fn critical_value(
    py: Python<'_>,
    kind: &str,
    family: &str,
    d: usize,
    seed: u64,
    gamma: f64,
    alpha: f64,
    calibration: &str,
    mc_samples: usize,
    n: usize,
) -> PyResult<(f64, f64)> {
    let kind: TestKind = parse(kind)?;
    let family: Family = parse(family)?;
    let calibration: Calibration = parse(calibration)?;
    let setup = fstest::TestSetup::standard(d, gamma).map_err(to_py)?;
    let cv = py
        .detach(|| calibrate(kind, family, &setup, n, alpha, calibration, mc_samples, Seed(seed)))
        .map_err(to_py)?;
    Ok((cv.value, cv.std_error))
}

/// Printed asymptotic efficiency `e1`, `e2` or `e3` (not root-scaled).
#[pyfunction]
#[pyo3(signature = (family, which, d, gamma=0.5))]
fn efficiency(family: &str, which: &str, d: usize, gamma: f64) -> PyResult<f64> {
    let family: Family = parse(family)?;
    let which: EfficiencyKind = parse(which)?;
    core_efficiency(family, which, d, gamma).map_err(to_py)
}

/// `[(beta, power)]` under the mixture alternative with shift 5 per coordinate.
#[pyfunction]
#[pyo3(signature = (kind, family, beta_grid, seed, n=100, d=4, gamma=0.5, alpha=0.05, reps=1000, calibration="empirical", mc_samples=2000))]
#[allow(clippy::too_many_arguments)]
fn power_curve(
    py: Python<'_>,
    kind: &str,
    family: &str,
    beta_grid: Vec<f64>,
    seed: u64,
    n: usize,
    d: usize,
    gamma: f64,
    alpha: f64,
    reps: usize,
    calibration: &str,
    mc_samples: usize,
) -> PyResult<Vec<(f64, f64)>> {
    let cfg = PowerConfig {
        n,
        d,
        gamma,
        alpha,
        reps,
        calibration: parse(calibration)?,
        mc_samples,
        seed,
        ..PowerConfig::default()
    };
    let kind: TestKind = parse(kind)?;
    let family: Family = parse(family)?;
    py.detach(|| core_power_curve(kind, family, &beta_grid, &cfg)).map_err(to_py)
}

/// Smallest corrupted fraction that carries the forward-search estimate
/// away, or `None` if no level broke.
#[pyfunction]
#[pyo3(signature = (gamma, n, d, seed))]
fn breakdown_fraction(py: Python<'_>, gamma: f64, n: usize, d: usize, seed: u64) -> PyResult<Option<f64>> {
    let magnitudes = default_magnitudes();
    py.detach(|| breakdown_experiment(gamma, n, d, &magnitudes, seed))
        .map(|r| r.break_fraction)
        .map_err(to_py)
}

#[pymodule]
#[pyo3(name = "fstest")]
fn fstest_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA", fstest::test_engine::REPORT_SCHEMA)?;
    m.add_class::<PyTestSetup>()?;
    m.add_class::<PyTestReport>()?;
    m.add_function(wrap_pyfunction!(forward_search, m)?)?;
    m.add_function(wrap_pyfunction!(mean, m)?)?;
    m.add_function(wrap_pyfunction!(median, m)?)?;
    m.add_function(wrap_pyfunction!(hodges_lehmann_py, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(run_test_py, m)?)?;
    m.add_function(wrap_pyfunction!(critical_value, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(power_curve, m)?)?;
    m.add_function(wrap_pyfunction!(breakdown_fraction, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Sample::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(sample_from(&[vec![1.0, 2.0], vec![3.0, 4.0]]).is_ok());
    }

    #[test]
    fn missing_sigma_is_identity() {
        assert!(sigma_from(None, 3).unwrap().is_identity());
    }
}
