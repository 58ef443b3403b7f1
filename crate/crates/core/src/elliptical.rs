//! Elliptical models `f(y) = k |Σ|^{-1/2} g((y-μ)ᵀ Σ^{-1} (y-μ))`.
//!
//! Three density generators ship: the Gaussian `g(x) = e^{-x/2}`, the
//! multivariate Cauchy `g(x) = (1+x)^{-(d+1)/2}` and the very light-tailed
//! `g(x) = e^{-x^{100}}`. Radial integrals
//! `I_a = ∫₀^∞ x^{a} g(x) dx` drive the normalizing constant, the marginal
//! variance and the forward-search limit constants; they have closed forms
//! for all three families and a quadrature path that works for any
//! generator (used as an independent check).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{mahalanobis_sq_unchecked, Sample, SpdMatrix};
use crate::quadrature::{
    integrate, integrate_to_infinity, ln_gamma, ln_sphere_factor, QuadratureOptions,
};

const RADIAL_OPTS: QuadratureOptions = QuadratureOptions {
    rel_tol: 1e-11,
    abs_tol: 0.0,
    max_intervals: 4000,
};

/// Density generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Cauchy,
    #[serde(rename = "light100")]
    LightTail100,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Cauchy, Family::LightTail100];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Cauchy => "cauchy",
            Family::LightTail100 => "light100",
        }
    }

    /// `ln g(x)` for the `d`-dimensional member of the family.
    pub fn ln_g(self, x: f64, d: usize) -> f64 {
        match self {
            Family::Gaussian => -0.5 * x,
            Family::Cauchy => -0.5 * (d as f64 + 1.0) * x.ln_1p(),
            Family::LightTail100 => -x.powi(100),
        }
    }

    /// `g'(x) / g(x)`.
    pub fn dln_g(self, x: f64, d: usize) -> f64 {
        match self {
            Family::Gaussian => -0.5,
            Family::Cauchy => -0.5 * (d as f64 + 1.0) / (1.0 + x),
            Family::LightTail100 => -100.0 * x.powi(99),
        }
    }

    /// Squared radius beyond which `g` is numerically zero, if any.
    fn cutoff(self) -> Option<f64> {
        match self {
            Family::LightTail100 => Some(1.0),
            _ => None,
        }
    }

    /// Closed form of `∫₀^∞ x^{a} g(x) dx`, as a natural log.
    fn ln_power_integral_closed(self, d: usize, a: f64) -> Result<f64> {
        if a <= -1.0 {
            return Err(Error::DivergentIntegral(format!(
                "x^{a} is not integrable at the origin"
            )));
        }
        match self {
            // ∫ x^a e^{-x/2} = 2^{a+1} Γ(a+1)
            Family::Gaussian => Ok((a + 1.0) * 2f64.ln() + ln_gamma(a + 1.0)),
            // ∫ x^a (1+x)^{-(d+1)/2} = B(a+1, (d+1)/2 - a - 1)
            Family::Cauchy => {
                let b = 0.5 * (d as f64 + 1.0) - a - 1.0;
                if b <= 0.0 {
                    return Err(Error::DivergentIntegral(format!(
                        "cauchy generator in d = {d}: x^{a}(1+x)^(-{}) decays too slowly",
                        0.5 * (d as f64 + 1.0)
                    )));
                }
                Ok(ln_gamma(a + 1.0) + ln_gamma(b) - ln_gamma(a + 1.0 + b))
            }
            // t = x^100 turns this into Γ((a+1)/100) / 100
            Family::LightTail100 => Ok(ln_gamma((a + 1.0) / 100.0) - 100f64.ln()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "cauchy" => Ok(Family::Cauchy),
            "light100" | "lighttail100" | "spherical" => Ok(Family::LightTail100),
            other => Err(invalid(format!(
                "unknown family '{other}' (expected gaussian, cauchy or light100)"
            ))),
        }
    }
}

/// Which radial integral: `I₀(d) = ∫ x^{d/2-1} g` or `I₁(d) = ∫ x^{d/2} g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialPower {
    Zero,
    One,
}

impl RadialPower {
    fn exponent(self, d: usize) -> f64 {
        let base = d as f64 / 2.0 - 1.0;
        match self {
            RadialPower::Zero => base,
            RadialPower::One => base + 1.0,
        }
    }
}

/// `I₀(d)` or `I₁(d)`, using the family's closed form.
pub fn radial_integral(family: Family, d: usize, power: RadialPower) -> Result<f64> {
    check_dim(d)?;
    family
        .ln_power_integral_closed(d, power.exponent(d))
        .map(f64::exp)
}

/// `I₀(d)` or `I₁(d)` by adaptive quadrature, with a tail test that reports
/// [`Error::DivergentIntegral`] when `x·x^a g(x)` fails to decay.
pub fn radial_integral_numeric(family: Family, d: usize, power: RadialPower) -> Result<f64> {
    check_dim(d)?;
    power_integral_numeric(family, d, power.exponent(d), 0.0, f64::INFINITY)
}

/// `∫_lo^hi x^a g_d(x) dx` by quadrature (`hi` may be infinite).
fn power_integral_numeric(family: Family, d: usize, a: f64, lo: f64, hi: f64) -> Result<f64> {
    if a <= -1.0 {
        return Err(Error::DivergentIntegral(format!(
            "x^{a} is not integrable at the origin"
        )));
    }
    let ln_h = |x: f64| a * x.ln() + family.ln_g(x, d);
    if hi.is_infinite() {
        let r1 = (ln_h(1e8) + 1e8f64.ln()).exp();
        let r2 = (ln_h(1e12) + 1e12f64.ln()).exp();
        if r1 > 0.0 && r2 > 0.5 * r1 {
            return Err(Error::DivergentIntegral(format!(
                "{family} generator in d = {d}: x^{a} g(x) decays no faster than 1/x"
            )));
        }
    }
    // x = s² on the finite head removes the x^{a} singularity for a > -1
    let head_end = hi.min(1.0).max(lo);
    let mut total = 0.0;
    if head_end > lo {
        let f = |s: f64| {
            let x = s * s;
            if x <= 0.0 {
                return 0.0;
            }
            2.0 * (ln_h(x) + s.ln()).exp()
        };
        let mut breaks = Vec::new();
        if let Some(c) = family.cutoff() {
            breaks.push(c.sqrt());
        }
        total += integrate(f, lo.sqrt(), head_end.sqrt(), &breaks, RADIAL_OPTS)?.value;
    }
    if hi > 1.0 {
        let start = lo.max(1.0);
        let h = |x: f64| ln_h(x).exp();
        total += if hi.is_infinite() {
            integrate_to_infinity(h, start, start, RADIAL_OPTS)?.value
        } else {
            let breaks: Vec<f64> = family.cutoff().into_iter().collect();
            integrate(h, start, hi, &breaks, RADIAL_OPTS)?.value
        };
    }
    Ok(total)
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("dimension must be >= 1"))
    } else {
        Ok(())
    }
}

/// `ln k` with `k = Γ(d/2) π^{-d/2} / I₀(d)`.
pub fn ln_normalizing_constant(family: Family, d: usize) -> Result<f64> {
    check_dim(d)?;
    let ln_i0 = family.ln_power_integral_closed(d, RadialPower::Zero.exponent(d))?;
    Ok(-ln_sphere_factor(d) - ln_i0)
}

/// `Var(Y₁) = I₁ / (d I₀)` for the standardized model; `+∞` if `I₁` diverges.
pub fn marginal_variance(family: Family, d: usize) -> Result<f64> {
    check_dim(d)?;
    let i0 = radial_integral(family, d, RadialPower::Zero)?;
    match radial_integral(family, d, RadialPower::One) {
        Ok(i1) => Ok(i1 / (d as f64 * i0)),
        Err(Error::DivergentIntegral(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Density of the first coordinate of the standardized model at `t`.
pub fn marginal_density(family: Family, d: usize, t: f64) -> Result<f64> {
    check_dim(d)?;
    let ln_k = ln_normalizing_constant(family, d)?;
    if d == 1 {
        return Ok((ln_k + family.ln_g(t * t, d)).exp());
    }
    // integrate out the remaining d-1 coordinates in polar form, u = s²
    let m = d - 1;
    let t2 = t * t;
    let f = |s: f64| {
        if s <= 0.0 {
            return if m == 1 { 2.0 * family.ln_g(t2, d).exp() } else { 0.0 };
        }
        2.0 * ((m as f64 - 1.0) * s.ln() + family.ln_g(t2 + s * s, d)).exp()
    };
    let breaks: Vec<f64> = family
        .cutoff()
        .filter(|&c| c > t2)
        .map(|c| (c - t2).sqrt())
        .into_iter()
        .collect();
    let head = integrate(f, 0.0, 1.0, &breaks, RADIAL_OPTS)?.value;
    let tail = integrate_to_infinity(f, 1.0, 1.0, RADIAL_OPTS)?.value;
    Ok((ln_k + ln_sphere_factor(m)).exp() * (head + tail))
}

/// `g₁(0)` and `∫ g₁²` for the standardized model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalConstants {
    pub density_at_zero: f64,
    pub squared_density_integral: f64,
}

/// Closed forms for the Gaussian and Cauchy families; quadrature (cached)
/// otherwise.
pub fn marginal_constants(family: Family, d: usize) -> Result<MarginalConstants> {
    check_dim(d)?;
    match family {
        Family::Gaussian => Ok(MarginalConstants {
            density_at_zero: 1.0 / (2.0 * PI).sqrt(),
            squared_density_integral: 1.0 / (2.0 * PI.sqrt()),
        }),
        Family::Cauchy => Ok(MarginalConstants {
            density_at_zero: 1.0 / PI,
            squared_density_integral: 1.0 / (2.0 * PI),
        }),
        Family::LightTail100 => {
            static CACHE: OnceLock<Mutex<HashMap<(Family, usize), MarginalConstants>>> =
                OnceLock::new();
            let cache = CACHE.get_or_init(Default::default);
            if let Some(c) = cache.lock().expect("cache poisoned").get(&(family, d)) {
                return Ok(*c);
            }
            let c = marginal_constants_numeric(family, d)?;
            cache.lock().expect("cache poisoned").insert((family, d), c);
            Ok(c)
        }
    }
}

/// Quadrature path for [`marginal_constants`], usable for every family.
pub fn marginal_constants_numeric(family: Family, d: usize) -> Result<MarginalConstants> {
    let density_at_zero = marginal_density(family, d, 0.0)?;
    let sq = |t: f64| marginal_density(family, d, t).map(|v| v * v).unwrap_or(f64::NAN);
    let opts = QuadratureOptions {
        rel_tol: 1e-9,
        ..RADIAL_OPTS
    };
    let half = match family.cutoff() {
        Some(c) => integrate(sq, 0.0, 1.5 * c.sqrt(), &[c.sqrt()], opts)?.value,
        None => {
            integrate(sq, 0.0, 1.0, &[], opts)?.value
                + integrate_to_infinity(sq, 1.0, 1.0, opts)?.value
        }
    };
    Ok(MarginalConstants {
        density_at_zero,
        squared_density_integral: 2.0 * half,
    })
}

/// `P(R² ≤ q)` for the standardized model.
pub fn radial_cdf(family: Family, d: usize, q: f64) -> Result<f64> {
    check_dim(d)?;
    if q <= 0.0 {
        return Ok(0.0);
    }
    let a = RadialPower::Zero.exponent(d);
    let i0 = radial_integral(family, d, RadialPower::Zero)?;
    Ok((power_integral_numeric(family, d, a, 0.0, q)? / i0).min(1.0))
}

/// `E[R² 1{R² ≤ q}]` for the standardized model.
pub fn truncated_radial_moment(family: Family, d: usize, q: f64) -> Result<f64> {
    check_dim(d)?;
    if q <= 0.0 {
        return Ok(0.0);
    }
    let a = RadialPower::One.exponent(d);
    let i0 = radial_integral(family, d, RadialPower::Zero)?;
    Ok(power_integral_numeric(family, d, a, 0.0, q)? / i0)
}

/// The `p`-quantile of `R²` (bisection on [`radial_cdf`]).
pub fn radial_quantile(family: Family, d: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("probability must lie in (0, 1), got {p}")));
    }
    let mut hi = 1.0;
    while radial_cdf(family, d, hi)? < p {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(invalid("quantile search did not bracket"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radial_cdf(family, d, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// An elliptical distribution with known location and scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalModel {
    family: Family,
    location: Vec<f64>,
    scatter: SpdMatrix,
    ln_k: f64,
}

impl EllipticalModel {
    pub fn new(family: Family, location: Vec<f64>, scatter: SpdMatrix) -> Result<Self> {
        let d = scatter.dim();
        if location.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: location.len(),
            });
        }
        if let Some(pos) = location.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        let ln_k = ln_normalizing_constant(family, d)?;
        Ok(Self {
            family,
            location,
            scatter,
            ln_k,
        })
    }

    /// Centered at the origin with identity scatter.
    pub fn standard(family: Family, d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::new(family, vec![0.0; d], SpdMatrix::identity(d))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn scatter(&self) -> &SpdMatrix {
        &self.scatter
    }

    pub fn normalizing_constant(&self) -> f64 {
        self.ln_k.exp()
    }

    /// Same family and scatter, location moved by `shift`.
    pub fn shifted(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        let location = self.location.iter().zip(shift).map(|(a, b)| a + b).collect();
        Self::new(self.family, location, self.scatter.clone())
    }

    pub fn with_location(&self, location: Vec<f64>) -> Result<Self> {
        Self::new(self.family, location, self.scatter.clone())
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        self.check(y)?;
        let u = mahalanobis_sq_unchecked(y, &self.location, &self.scatter);
        Ok(self.ln_k - 0.5 * self.scatter.log_determinant() + self.family.ln_g(u, self.dim()))
    }

    /// `∇_μ log f(y; μ)` at the model's location:
    /// `-2 (g'/g)(u) Σ^{-1}(y - μ)`.
    pub fn location_score(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        Ok(self.score_unchecked(y))
    }

    pub(crate) fn score_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let u = mahalanobis_sq_unchecked(y, &self.location, &self.scatter);
        let c = -2.0 * self.family.dln_g(u, self.dim());
        let diff: Vec<f64> = y.iter().zip(&self.location).map(|(a, b)| a - b).collect();
        self.scatter.solve(&diff).into_iter().map(|v| c * v).collect()
    }

    /// One draw `μ + L·R·U` written into `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let radial: Vec<f64> = match self.family {
            Family::Gaussian => z,
            Family::Cauchy => {
                // multivariate t with one degree of freedom
                let w: f64 = rng.sample::<f64, _>(StandardNormal).abs();
                z.into_iter().map(|v| v / w).collect()
            }
            Family::LightTail100 => {
                // R² = T^{1/100}, T ~ Gamma(d/200); ln T drawn directly as
                // ln Gamma(1 + d/200) + ln(U)·200/d to avoid underflow
                let shape = d as f64 / 200.0;
                let g1: f64 = Gamma::new(1.0 + shape, 1.0)
                    .expect("valid gamma shape")
                    .sample(rng);
                let u: f64 = 1.0 - rng.random::<f64>();
                let ln_t = g1.ln() + u.ln() / shape;
                let r = (ln_t / 200.0).exp();
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                z.into_iter().map(|v| r * v / norm).collect()
            }
        };
        let scaled = self.scatter.scale_vec(&radial);
        for ((o, m), s) in out.iter_mut().zip(&self.location).zip(scaled) {
            *o = m + s;
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Sample {
        let d = self.dim();
        let mut values = vec![0.0; n * d];
        for row in values.chunks_exact_mut(d) {
            self.draw_into(rng, row);
        }
        Sample::from_flat(d, values).expect("draws are finite")
    }
}

/// `(1 - β) F + β G` where `G` is `F` moved to another location.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    beta: f64,
    base: EllipticalModel,
    shifted: EllipticalModel,
}

impl MixtureModel {
    pub fn new(beta: f64, base: EllipticalModel, shift: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(invalid(format!("beta must lie in [0, 1], got {beta}")));
        }
        let shifted = base.shifted(shift)?;
        Ok(Self {
            beta,
            base,
            shifted,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn base(&self) -> &EllipticalModel {
        &self.base
    }

    pub fn shifted(&self) -> &EllipticalModel {
        &self.shifted
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Sample {
        let d = self.base.dim();
        let mut values = vec![0.0; n * d];
        for row in values.chunks_exact_mut(d) {
            let from_g = rng.random::<f64>() < self.beta;
            if from_g {
                self.shifted.draw_into(rng, row);
            } else {
                self.base.draw_into(rng, row);
            }
        }
        Sample::from_flat(d, values).expect("draws are finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use crate::rng::Seed;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_radial_integrals() {
        // ∫ x e^{-x/2} dx = 2² Γ(2)
        assert_relative_eq!(radial_integral(Family::Gaussian, 2, RadialPower::One).unwrap(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(radial_integral(Family::Gaussian, 2, RadialPower::Zero).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(radial_integral_numeric(Family::Gaussian, 2, RadialPower::One).unwrap(), 4.0, max_relative = 1e-9);
        assert_relative_eq!(radial_integral_numeric(Family::Gaussian, 2, RadialPower::Zero).unwrap(), 2.0, max_relative = 1e-9);
    }

    #[test]
    fn light_tail_radial_integral_substitution_oracle() {
        let oracle = crate::quadrature::gamma(1.0 / 50.0) / 100.0;
        let closed = radial_integral(Family::LightTail100, 4, RadialPower::Zero).unwrap();
        let numeric = radial_integral_numeric(Family::LightTail100, 4, RadialPower::Zero).unwrap();
        assert_relative_eq!(closed, oracle, max_relative = 1e-12);
        assert_relative_eq!(numeric, oracle, max_relative = 1e-9);
    }

    #[test]
    fn closed_and_numeric_radial_integrals_agree() {
        for family in Family::ALL {
            for d in [1usize, 2, 3, 4, 7, 10] {
                for power in [RadialPower::Zero, RadialPower::One] {
                    let closed = radial_integral(family, d, power);
                    let numeric = radial_integral_numeric(family, d, power);
                    match (closed, numeric) {
                        (Ok(c), Ok(n)) => assert!(
                            (c - n).abs() <= 1e-9 * c,
                            "{family} d={d} {power:?}: {c} vs {n}"
                        ),
                        (Err(Error::DivergentIntegral(_)), Err(Error::DivergentIntegral(_))) => {}
                        other => panic!("{family} d={d} {power:?}: {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn cauchy_second_radial_moment_diverges() {
        for d in [1, 2, 4, 10] {
            assert!(matches!(
                radial_integral_numeric(Family::Cauchy, d, RadialPower::One),
                Err(Error::DivergentIntegral(_))
            ));
        }
        assert_eq!(marginal_variance(Family::Cauchy, 4).unwrap(), f64::INFINITY);
    }

    #[test]
    fn log_density_reference_values() {
        let g2 = EllipticalModel::standard(Family::Gaussian, 2).unwrap();
        assert_relative_eq!(g2.log_density(&[0.0, 0.0]).unwrap(), -(2.0 * PI).ln(), max_relative = 1e-12);
        let g1 = EllipticalModel::standard(Family::Gaussian, 1).unwrap();
        assert_relative_eq!(g1.log_density(&[1.0]).unwrap(), -0.5 * (2.0 * PI).ln() - 0.5, max_relative = 1e-12);
        let c4 = EllipticalModel::standard(Family::Cauchy, 4).unwrap();
        let expect = (ln_gamma(2.5) - 2.0 * PI.ln() - ln_gamma(0.5)).exp();
        assert_relative_eq!(c4.log_density(&[0.0; 4]).unwrap().exp(), expect, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_log_density_matches_mvn() {
        let sigma = SpdMatrix::new(SquareMatrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]).unwrap()).unwrap();
        let m = EllipticalModel::new(Family::Gaussian, vec![1.0, -1.0], sigma.clone()).unwrap();
        let y = [0.2, 0.5];
        let u = crate::linalg::mahalanobis_sq(&y, &[1.0, -1.0], &sigma).unwrap();
        let mvn = -(2.0 * PI).ln() - 0.5 * sigma.determinant().ln() - 0.5 * u;
        assert_relative_eq!(m.log_density(&y).unwrap(), mvn, epsilon = 1e-10);
    }

    #[test]
    fn score_examples() {
        let g = EllipticalModel::standard(Family::Gaussian, 3).unwrap();
        assert_eq!(g.location_score(&[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);
        let c = EllipticalModel::standard(Family::Cauchy, 1).unwrap();
        assert_relative_eq!(c.location_score(&[1.0]).unwrap()[0], 1.0, epsilon = 1e-15);
        for family in Family::ALL {
            let m = EllipticalModel::standard(family, 2).unwrap().shifted(&[1.0, 2.0]).unwrap();
            assert_eq!(m.location_score(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn gaussian_marginal_constants_by_quadrature() {
        for d in [1usize, 2, 4] {
            let numeric = marginal_constants_numeric(Family::Gaussian, d).unwrap();
            let closed = marginal_constants(Family::Gaussian, d).unwrap();
            assert_relative_eq!(numeric.density_at_zero, closed.density_at_zero, max_relative = 1e-8);
            assert_relative_eq!(numeric.squared_density_integral, closed.squared_density_integral, max_relative = 1e-7);
        }
        let c = marginal_constants_numeric(Family::Cauchy, 4).unwrap();
        assert_relative_eq!(c.density_at_zero, 1.0 / PI, max_relative = 1e-8);
        assert_relative_eq!(c.squared_density_integral, 1.0 / (2.0 * PI), max_relative = 1e-7);
    }

    #[test]
    fn light_tail_marginal_density_integrates_to_one() {
        let opts = QuadratureOptions { rel_tol: 1e-9, ..Default::default() };
        let mass = integrate(|t| marginal_density(Family::LightTail100, 3, t).unwrap(), 0.0, 1.5, &[1.0], opts)
            .unwrap()
            .value;
        assert_relative_eq!(2.0 * mass, 1.0, max_relative = 1e-7);
    }

    #[test]
    fn radial_quantile_matches_chi_square() {
        // R² ~ χ²₄ for the Gaussian, whose CDF is 1 - e^{-x/2}(1 + x/2)
        let q = radial_quantile(Family::Gaussian, 4, 0.5).unwrap();
        let cdf = 1.0 - (-q / 2.0).exp() * (1.0 + q / 2.0);
        assert_relative_eq!(cdf, 0.5, max_relative = 1e-10);
        assert_relative_eq!(radial_cdf(Family::Gaussian, 2, 2.0).unwrap(), 1.0 - (-1.0f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn sampling_is_reproducible() {
        for family in Family::ALL {
            let m = EllipticalModel::standard(family, 3).unwrap();
            let a = m.sample(50, &mut Seed(9).stream("t", 1));
            let b = m.sample(50, &mut Seed(9).stream("t", 1));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mixture_endpoints() {
        let base = EllipticalModel::standard(Family::Gaussian, 2).unwrap();
        let all_g = MixtureModel::new(1.0, base.clone(), &[100.0, 100.0]).unwrap();
        let s = all_g.sample(200, &mut Seed(1).stream("mix", 0));
        assert!(s.rows().all(|r| r[0] > 90.0));
        let none = MixtureModel::new(0.0, base, &[100.0, 100.0]).unwrap();
        let s = none.sample(200, &mut Seed(1).stream("mix", 0));
        assert!(s.rows().all(|r| r[0] < 10.0));
        assert!(MixtureModel::new(1.5, EllipticalModel::standard(Family::Cauchy, 2).unwrap(), &[0.0, 0.0]).is_err());
    }
}
