//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and semi-infinite
//! ranges, plus the gamma-function helpers the radial integrals need.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kron += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kron * half;
    let err = ((kron - gauss) * half).abs();
    (value, err)
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection.
///
/// `breakpoints` inside `(a, b)` seed the initial partition, which helps
/// with integrands that have sharp features at known locations.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadratureOptions,
) -> Result<Quadrature> {
    let mut points = vec![a];
    points.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    points.push(b);
    points.sort_by(f64::total_cmp);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (value, error) = kronrod(&f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let mut count = heap.len();
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailed {
                estimate: total,
                error: total_err,
            });
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if count >= opts.max_intervals {
            // accept if only round-off remains
            if total_err <= 1e3 * f64::EPSILON * total.abs() {
                break;
            }
            return Err(Error::QuadratureFailed {
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split; keep its contribution
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        count += 1;
    }

    // re-sum to shed accumulated cancellation from the running updates
    let segments = heap.into_vec();
    let value = segments.iter().map(|s| s.value).sum();
    let abs_error = segments.iter().map(|s| s.error).sum();
    Ok(Quadrature { value, abs_error })
}

/// Integrates `f` over `[a, ∞)` via the substitution `x = a + scale·(eˢ - 1)`
/// on `s ∈ [0, s_max]`. The integrand must decay at least like `x^{-1-ε}`;
/// callers are responsible for checking that.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    opts: QuadratureOptions,
) -> Result<Quadrature> {
    const S_MAX: f64 = 90.0;
    let g = |s: f64| {
        let e = s.exp();
        let x = a + scale * (e - 1.0);
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * scale * e
        }
    };
    integrate(g, 0.0, S_MAX, &[1.0, 5.0, 20.0], opts)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `ln(π^{m/2} / Γ(m/2))`, the log of half the surface area of the unit
/// sphere in `m` dimensions; zero-dimensional case returns 0.
pub fn ln_sphere_factor(m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let h = m as f64 / 2.0;
    h * std::f64::consts::PI.ln() - ln_gamma(h)
}
