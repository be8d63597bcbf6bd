//! The kernel ψ_m of the error-functional norm, its moments for `m = 2`, and
//! an adaptive Gauss–Kronrod integrator used as an independent oracle for
//! those moments.
//!
//! ψ_m(x) = (sign x / 2)·(sinh x − Σ_{k=1}^{m−1} x^{2k−1}/(2k−1)!)
//!
//! The bracket is the odd Taylor tail of `sinh`, so the function is even and
//! is evaluated on `|x|`; near zero the tail is summed directly instead of
//! being formed as a difference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{cosh_minus_quadratic, sinh_minus_x, Real};
use crate::sum::NeumaierSum;

/// Order `m ≥ 1` of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelOrder(u32);

impl KernelOrder {
    /// The order every closed form in this crate uses.
    pub const TWO: KernelOrder = KernelOrder(2);

    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("kernel order must be at least 1".into()));
        }
        Ok(KernelOrder(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

// Above this argument the tail is formed as sinh minus its partial sum.
const DIRECT_LIMIT: f64 = 32.0;

/// `sinh t − Σ_{k=1}^{m−1} t^{2k−1}/(2k−1)!` for `t ≥ 0`.
fn sinh_tail(m: u32, t: f64) -> f64 {
    if m == 2 {
        return sinh_minus_x(t);
    }
    if t == 0.0 {
        return 0.0;
    }
    if t < DIRECT_LIMIT {
        let lead = 2 * m as usize - 1;
        let mut term = 1.0;
        for j in 1..=lead {
            term *= t / j as f64;
        }
        let mut acc = NeumaierSum::new();
        acc += term;
        let t2 = t * t;
        let mut j = lead;
        loop {
            term *= t2 / ((j + 1) * (j + 2)) as f64;
            j += 2;
            acc += term;
            if term <= 1e-18 * acc.value() || term == 0.0 {
                break;
            }
        }
        acc.value()
    } else if m == 1 {
        t.sinh()
    } else {
        let mut partial = NeumaierSum::new();
        let mut term = t;
        partial += term;
        for k in 2..m as usize {
            term *= t * t / ((2 * k - 2) * (2 * k - 1)) as f64;
            partial += term;
        }
        t.sinh() - partial.value()
    }
}

/// ψ_m(x).
pub fn psi(order: KernelOrder, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "psi argument must be finite, got {x}"
        )));
    }
    Ok(0.5 * sinh_tail(order.0, x.abs()))
}

/// ψ₂(x) = (sinh|x| − |x|)/2 in any [`Real`].
pub fn psi2<T: Real>(x: T) -> T {
    sinh_minus_x(x.abs()) / T::from_f64(2.0)
}

/// `∫₀¹ ψ₂(x − y) dx` without domain checks.
///
/// The closed form `(e^y + e^{−y} + e^{1−y} + e^{y−1} − 4)/4 − (y² + (1−y)²)/4`
/// is regrouped exactly as
/// `½[cosh y − 1 − y²/2] + ½[cosh(1−y) − 1 − (1−y)²/2]`,
/// a sum of two nonnegative Taylor tails.
pub fn moment_in<T: Real>(y: T) -> T {
    let half = T::from_f64(0.5);
    half * cosh_minus_quadratic(y) + half * cosh_minus_quadratic(T::one() - y)
}

/// `∫₀¹ ψ₂(x − y) dx` for `y ∈ [0, 1]`.
pub fn moment(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("moment needs y in [0, 1], got {y}")));
    }
    Ok(moment_in(y))
}

/// `∫₀¹∫₀¹ ψ₂(x − y) dx dy = (e² − 1)/(2e) − 7/6 = sinh 1 − 7/6`,
/// summed as `Σ_{k≥2} 1/(2k+1)!`.
pub fn double_moment_in<T: Real>() -> T {
    let mut term = T::one() / T::from_f64(120.0);
    let mut sum = term;
    for k in 3..40usize {
        term = term / T::from_usize((2 * k) * (2 * k + 1));
        sum += term;
        if term.to_f64() < T::EPSILON * 1e-3 {
            break;
        }
    }
    sum
}

pub fn double_moment() -> f64 {
    double_moment_in::<f64>()
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// Gauss–Kronrod 7/15 abscissae and weights on [−1, 1] (nonnegative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // largest error first; ties broken by position so the order is total
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error }
}

/// Adaptive bisection with an embedded Gauss–Kronrod 7/15 rule.
///
/// Segments are refined largest-error first until the summed error estimate
/// drops below `max(abs_tol, rel_tol·|value|)`.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveIntegrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl AdaptiveIntegrator {
    pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

    pub fn new(tol: f64) -> Self {
        AdaptiveIntegrator {
            abs_tol: tol,
            rel_tol: tol,
            max_evaluations: Self::DEFAULT_MAX_EVALUATIONS,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<IntegrationResult> {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
        }
        if !(self.abs_tol > 0.0) || self.rel_tol < 0.0 {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        if a == b {
            return Ok(IntegrationResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: 1,
            });
        }

        let first = kronrod15(&f, a, b);
        let mut evaluations = 15;
        let mut total_value = first.value;
        let mut total_error = first.error;
        let mut heap = BinaryHeap::new();
        let mut frozen: Vec<Segment> = Vec::new();
        heap.push(first);

        loop {
            let target = self.abs_tol.max(self.rel_tol * total_value.abs());
            if total_error <= target {
                break;
            }
            let Some(worst) = heap.pop() else {
                break;
            };
            let mid = 0.5 * (worst.a + worst.b);
            if !(worst.a < mid && mid < worst.b) {
                // cannot bisect further at this precision
                frozen.push(worst);
                continue;
            }
            if evaluations + 30 > self.max_evaluations {
                heap.push(worst);
                let value = sum_values(&heap, &frozen);
                return Err(Error::OracleFailure {
                    best_estimate: value,
                    error_estimate: total_error,
                    evaluations,
                });
            }
            let left = kronrod15(&f, worst.a, mid);
            let right = kronrod15(&f, mid, worst.b);
            evaluations += 30;
            total_value += left.value + right.value - worst.value;
            total_error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }

        let value = sum_values(&heap, &frozen);
        let error_estimate = heap
            .iter()
            .chain(frozen.iter())
            .map(|s| s.error)
            .sum::<NeumaierSum>()
            .value();
        let target = self.abs_tol.max(self.rel_tol * value.abs());
        if error_estimate > target && !frozen.is_empty() && heap.is_empty() {
            return Err(Error::OracleFailure {
                best_estimate: value,
                error_estimate,
                evaluations,
            });
        }
        Ok(IntegrationResult {
            value,
            error_estimate,
            evaluations,
        })
    }
}

fn sum_values(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> f64 {
    // order the pieces by position so the result does not depend on heap layout
    let mut parts: Vec<(f64, f64)> = heap
        .iter()
        .chain(frozen.iter())
        .map(|s| (s.a, s.value))
        .collect();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    parts.into_iter().map(|p| p.1).sum::<NeumaierSum>().value()
}

/// `∫_a^b f` to within `tol` (absolute or relative, whichever is looser).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<IntegrationResult> {
    AdaptiveIntegrator::new(tol).integrate(f, a, b)
}
