//! Scalar abstraction shared by every closed form in the crate.
//!
//! The formulas are written once, generic over [`Real`], and instantiated
//! either with `f64` (to exercise the cancellation-controlled forms at working
//! precision) or with [`Dd`], a double-double type carrying roughly 32
//! significant digits. The norm routes cancel quantities of size `1e-2` down
//! to results of size `1e-10` and below, so the reporting pipeline runs in
//! [`Dd`] and rounds to `f64` only at the boundary.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Serialize, Serializer};

/// Minimal real-number interface needed by the closed forms.
pub trait Real:
    Copy
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        // exact for n < 2^53, which covers every grid size we accept
        Self::from_f64(n as f64)
    }

    fn abs(self) -> Self {
        if self.to_f64() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON / 2.0;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Integer power by repeated squaring.
///
/// Results whose magnitude drops below the smallest normal `f64` are flushed
/// to an exact zero: such a term is beyond the precision of every sum it
/// enters.
pub fn powi<T: Real>(x: T, mut n: u64) -> T {
    let mut base = x;
    let mut acc = T::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        n >>= 1;
        if n > 0 {
            base *= base;
            if base.to_f64().abs() < f64::MIN_POSITIVE {
                base = T::zero();
            }
        }
    }
    if acc.to_f64().abs() < f64::MIN_POSITIVE {
        T::zero()
    } else {
        acc
    }
}

/// Below this magnitude the helpers below sum their Taylor tails; above it
/// the direct difference loses at most one digit.
pub const SERIES_LIMIT: f64 = 2.0;

const MAX_SERIES_TERMS: usize = 200;

/// Sums `first + Σ next(term, k)` until the terms stop contributing.
fn sum_series<T: Real>(first: T, mut next: impl FnMut(T, usize) -> T) -> T {
    let mut term = first;
    let mut sum = first;
    for k in 1..MAX_SERIES_TERMS {
        term = next(term, k);
        sum += term;
        if term.to_f64().abs() <= T::EPSILON * 1e-2 * sum.to_f64().abs() {
            break;
        }
    }
    sum
}

/// `sinh x − x`, odd in `x`.
pub fn sinh_minus_x<T: Real>(x: T) -> T {
    let xf = x.to_f64();
    if xf == 0.0 {
        return T::zero();
    }
    if xf.abs() <= SERIES_LIMIT {
        // x^3/3! + x^5/5! + ...
        let x2 = x * x;
        let first = x * x2 / T::from_f64(6.0);
        sum_series(first, |t, k| {
            let m = (2 * k + 2) * (2 * k + 3);
            t * x2 / T::from_usize(m)
        })
    } else {
        let e = x.exp();
        (e - e.recip()) / T::from_f64(2.0) - x
    }
}

/// `x cosh x − sinh x = Σ_{k≥1} 2k x^{2k+1} / (2k+1)!`, odd in `x`.
pub fn x_cosh_minus_sinh<T: Real>(x: T) -> T {
    let xf = x.to_f64();
    if xf == 0.0 {
        return T::zero();
    }
    if xf.abs() <= SERIES_LIMIT {
        // carry p_k = x^{2k+1}/(2k+1)! and weight it by 2k
        let x2 = x * x;
        let mut p = x * x2 / T::from_f64(6.0);
        let mut sum = p * T::from_f64(2.0);
        for k in 2..MAX_SERIES_TERMS {
            p = p * x2 / T::from_usize((2 * k) * (2 * k + 1));
            let term = p * T::from_usize(2 * k);
            sum += term;
            if term.to_f64().abs() <= T::EPSILON * 1e-2 * sum.to_f64().abs() {
                break;
            }
        }
        sum
    } else {
        let e = x.exp();
        let ei = e.recip();
        x * (e + ei) / T::from_f64(2.0) - (e - ei) / T::from_f64(2.0)
    }
}

/// `e^x − 1 − x`.
pub fn expm1_minus_x<T: Real>(x: T) -> T {
    let xf = x.to_f64();
    if xf == 0.0 {
        return T::zero();
    }
    if xf.abs() <= SERIES_LIMIT {
        let first = x * x / T::from_f64(2.0);
        sum_series(first, |t, k| t * x / T::from_usize(k + 2))
    } else {
        x.exp_m1() - x
    }
}

/// `cosh x − 1 − x²/2`, even in `x` and nonnegative.
pub fn cosh_minus_quadratic<T: Real>(x: T) -> T {
    let xf = x.to_f64();
    if xf == 0.0 {
        return T::zero();
    }
    if xf.abs() <= SERIES_LIMIT {
        let x2 = x * x;
        let first = x2 * x2 / T::from_f64(24.0);
        sum_series(first, |t, k| {
            let m = (2 * k + 3) * (2 * k + 4);
            t * x2 / T::from_usize(m)
        })
    } else {
        let e = x.exp();
        (e + e.recip()) / T::from_f64(2.0) - T::one() - x * x / T::from_f64(2.0)
    }
}

/// Double-double number: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renormalized(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        Dd::renormalized(p1, p2 + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::from(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Dd::from(b).mul_f64(q2);
        let q3 = r.hi / b;
        Dd::renormalized(q1, q2) + Dd::from(q3)
    }

    /// Exact scaling by `2^k`.
    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn exp_impl(self) -> Self {
        if self.hi > 709.78 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::default();
        }
        if self.hi == 0.0 {
            return Dd::from(1.0);
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-10);
        let s = expm1_taylor(r);
        // (e^a − 1) → (e^{2a} − 1) = s (s + 2), applied ten times
        let mut s = s;
        for _ in 0..10 {
            s = s * (s + Dd::from(2.0));
        }
        let s = s + Dd::from(1.0);
        // split the scale so that 2^k is representable
        let k = k as i32;
        if k > 1000 {
            s.ldexp(1000).ldexp(k - 1000)
        } else if k < -1000 {
            s.ldexp(-1000).ldexp(k + 1000)
        } else {
            s.ldexp(k)
        }
    }
}

/// `e^r − 1` for `|r| ≲ 1e-3` by Taylor series.
fn expm1_taylor(r: Dd) -> Dd {
    let mut term = r;
    let mut sum = r;
    for i in 2..=14u32 {
        term = (term * r).div_f64(f64::from(i));
        sum += term;
        if term.hi.abs() < 1e-36 * sum.hi.abs() {
            break;
        }
    }
    sum
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl From<Dd> for f64 {
    fn from(x: Dd) -> Self {
        x.hi + x.lo
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl Serialize for Dd {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renormalized(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        Dd::renormalized(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        Dd::renormalized(q1, q2) + Dd::from(q3)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::default(), |a, b| a + b)
    }
}

impl Real for Dd {
    const EPSILON: f64 = 4.93e-32;

    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn exp(self) -> Self {
        self.exp_impl()
    }

    fn exp_m1(self) -> Self {
        if self.hi.abs() < 0.5 {
            expm1_minus_x(self) + self
        } else {
            self.exp_impl() - Dd::from(1.0)
        }
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::default()
            } else {
                Dd::from(f64::NAN)
            };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p, e) = two_prod(ax, ax);
        let corr = (self - Dd { hi: p, lo: e }).hi * (x * 0.5);
        let (s, t) = two_sum(ax, corr);
        Dd::renormalized(s, t)
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, rel: f64) -> bool {
        let d = (a - b).abs().to_f64();
        d <= rel * b.abs().to_f64()
    }

    #[test]
    fn dd_arithmetic_carries_the_low_word() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let back = third * Dd::from(3.0);
        assert!((back - Dd::from(1.0)).abs().to_f64() < 1e-31);
        let x = Dd::from(1.0) + Dd::from(1e-20);
        assert_eq!(x.hi(), 1.0);
        assert_eq!(x.lo(), 1e-20);
    }

    #[test]
    fn dd_exp_matches_known_digits() {
        // e = 2.71828182845904523536028747135266249775724709369995
        let e = Dd::from(1.0).exp();
        let reference = Dd::new(std::f64::consts::E, 1.445_646_891_729_250_2e-16);
        assert!(close(e, reference, 1e-30), "{e:?}");
        let prod = Dd::from(0.37).exp() * Dd::from(-0.37).exp();
        assert!((prod - Dd::from(1.0)).abs().to_f64() < 1e-30);
        assert_eq!(Dd::from(-800.0).exp().to_f64(), 0.0);
    }

    #[test]
    fn dd_sqrt_squares_back() {
        for &v in &[2.0, 0.5, 1e-10, 12345.678] {
            let r = Dd::from(v).sqrt();
            assert!(close(r * r, Dd::from(v), 1e-30));
        }
    }

    #[test]
    fn series_helpers_match_direct_forms_away_from_zero() {
        for &x in &[0.3_f64, 0.7, 0.999, 1.2, -0.6] {
            let d = Dd::from(x);
            let e = d.exp();
            let sinh = (e - e.recip()) / Dd::from(2.0);
            let cosh = (e + e.recip()) / Dd::from(2.0);
            assert!(close(sinh_minus_x(d), sinh - d, 1e-28));
            assert!(close(x_cosh_minus_sinh(d), d * cosh - sinh, 1e-27));
            assert!(close(expm1_minus_x(d), e - Dd::from(1.0) - d, 1e-28));
            assert!(close(
                cosh_minus_quadratic(d),
                cosh - Dd::from(1.0) - d * d / Dd::from(2.0),
                1e-27
            ));
        }
    }

    #[test]
    fn series_branches_agree_at_the_seam() {
        let below = f64::from_bits(SERIES_LIMIT.to_bits() - 1);
        let a = sinh_minus_x(below);
        let b = below.sinh() - below;
        assert!((a - b).abs() <= 1e-14 * b.abs());
        let a = x_cosh_minus_sinh(below);
        let b = below * below.cosh() - below.sinh();
        assert!((a - b).abs() <= 1e-14 * b.abs());
    }

    #[test]
    fn powi_flushes_below_normal_range() {
        assert_eq!(powi(0.5_f64, 10), 1.0 / 1024.0);
        assert_eq!(powi(0.25_f64, 600), 0.0);
        assert_eq!(powi(Dd::from(-0.5), 3).to_f64(), -0.125);
        assert_eq!(powi(3.0_f64, 0), 1.0);
    }
}
