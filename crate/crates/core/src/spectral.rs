//! The spectral constant λ₁ of the uniform-grid solution and the amplitude
//! K(h) of its boundary layers.
//!
//! On the grid `x_β = hβ` the stationarity rows have the characteristic
//! quadratic `D z² − 2A z + D = 0` with
//!
//! ```text
//! A = h(e^{2h} + 1) − e^{2h} + 1 = 2e^h (h cosh h − sinh h)
//! D = 1 − e^{2h} + 2h e^h       = −2e^h (sinh h − h)
//! ```
//!
//! so `A² − D² = (e^h − 1)² [h²(e^h+1)² + 2h(1 − e^{2h})]` and the roots are
//! `(A ∓ (e^h − 1)√R)/D`, reciprocal to each other. [`Root::Decaying`] is the
//! root inside the unit disk (≈ √3 − 2 for small h), which reproduces the
//! solution of the linear system. [`Root::AsPrinted`] evaluates the literal printed
//! expression verbatim, whose radicand reads `2h(1 − e^h)` in place of
//! `2h(1 − e^{2h})`; it yields a root larger than one that does not solve the
//! system, and is kept so that its consequences can be reported.
//!
//! Both A and D are Θ(h³) differences of Θ(h) quantities; they are formed
//! from the Taylor tails in [`crate::real`] so that no subtraction cancels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{powi, sinh_minus_x, x_cosh_minus_sinh, Real};

/// Which λ₁ the closed forms use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Root {
    /// Root of the characteristic quadratic with |λ₁| < 1.
    #[default]
    Decaying,
    /// The literal expression, verbatim (λ₁ > 1).
    AsPrinted,
}

impl Root {
    pub fn name(self) -> &'static str {
        match self {
            Root::Decaying => "decaying",
            Root::AsPrinted => "as_printed",
        }
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Domain(format!("step h must lie in (0, 1], got {h}")));
    }
    Ok(())
}

struct Pieces<T> {
    e: T,
    em1: T,
    a: T,
    d: T,
}

fn pieces<T: Real>(h: T) -> Pieces<T> {
    let e = h.exp();
    let two_e = T::from_f64(2.0) * e;
    Pieces {
        e,
        em1: h.exp_m1(),
        a: two_e * x_cosh_minus_sinh(h),
        d: -(two_e * sinh_minus_x(h)),
    }
}

/// `h(e^h + 1) − 2(e^h − 1) = 4 e^{h/2} (t cosh t − sinh t)`, `t = h/2`.
///
/// Positive for `h > 0`, leading term `h³/6`.
pub(crate) fn trapezoid_defect<T: Real>(h: T) -> T {
    let t = h / T::from_f64(2.0);
    T::from_f64(4.0) * t.exp() * x_cosh_minus_sinh(t)
}

/// λ₁ from the literal printed expression,
/// `[h(e^{2h}+1) − e^{2h} + 1 − (e^h−1)√(h²(e^h+1)² + 2h(1−e^h))] / (1 − e^{2h} + 2he^h)`.
pub fn lambda1_printed<T: Real>(h: T) -> Result<T> {
    check_step(h.to_f64())?;
    let p = pieces(h);
    let ep1 = p.e + T::one();
    // h²(e^h+1)² − 2h(e^h − 1): 4h² against 2h², no destructive cancellation
    let radicand = h * h * ep1 * ep1 - T::from_f64(2.0) * h * p.em1;
    if !(radicand.to_f64() > 0.0) {
        return Err(Error::NumericDomain(format!(
            "radicand {:e} is not positive at h = {}",
            radicand.to_f64(),
            h.to_f64()
        )));
    }
    if p.d.to_f64() == 0.0 {
        return Err(Error::NumericDomain("vanishing denominator".into()));
    }
    Ok((p.a - p.em1 * radicand.sqrt()) / p.d)
}

/// The root of the characteristic quadratic with `|λ₁| < 1`.
///
/// Evaluated as `D / (A + (e^h−1)√R)`, the reciprocal of the other root, so
/// that the numerator is a sum of positive terms.
pub fn lambda1_decaying<T: Real>(h: T) -> Result<T> {
    check_step(h.to_f64())?;
    let p = pieces(h);
    // h²(e^h+1)² + 2h(1 − e^{2h}) = h (e^h+1) · [h(e^h+1) − 2(e^h−1)]
    let radicand = h * (p.e + T::one()) * trapezoid_defect(h);
    if !(radicand.to_f64() > 0.0) {
        return Err(Error::NumericDomain(format!(
            "radicand {:e} is not positive at h = {}",
            radicand.to_f64(),
            h.to_f64()
        )));
    }
    let denom = p.a + p.em1 * radicand.sqrt();
    if denom.to_f64() == 0.0 {
        return Err(Error::NumericDomain("vanishing denominator".into()));
    }
    Ok(p.d / denom)
}

pub fn lambda1<T: Real>(h: T, root: Root) -> Result<T> {
    match root {
        Root::Decaying => lambda1_decaying(h),
        Root::AsPrinted => lambda1_printed(h),
    }
}

/// Constants of the closed-form coefficients for a grid of `n` intervals.
///
/// The boundary-layer corrections are always written as
/// `amplitude · ratio^k` with `|ratio| < 1` and `k ≥ 0`:
///
/// * decaying root: `ratio = λ₁`, `amplitude = K`;
/// * printed root: `ratio = q = 1/λ₁`, `amplitude = K̃ = K·λ₁^{N+1}`, using
///   `λ₁ + λ₁^{N+1} = λ₁^{N+1}(1 + q^N)`. Here `K` itself is `O(q^N)` and
///   underflows for large `n`; it is kept for reporting only.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralConstants<T = f64> {
    pub n: usize,
    pub h: T,
    pub root: Root,
    pub lambda1: T,
    pub ratio: T,
    pub k: T,
    pub k_scaled: T,
}

impl<T: Real> SpectralConstants<T> {
    pub fn new(n: usize, root: Root) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("grid size N must be at least 1".into()));
        }
        let h = T::one() / T::from_usize(n);
        let lambda1 = lambda1(h, root)?;
        let em1 = h.exp_m1();
        // 2e^h − 2 − he^h − h = −[h(e^h+1) − 2(e^h−1)]
        let factor = -trapezoid_defect(h);
        let base = factor * (lambda1 - T::one()) / (T::from_f64(2.0) * em1 * em1);
        let n64 = n as u64;
        let (ratio, k, k_scaled) = match root {
            Root::Decaying => {
                let k = base / (lambda1 + powi(lambda1, n64 + 1));
                (lambda1, k, k)
            }
            Root::AsPrinted => {
                let q = lambda1.recip();
                let k_scaled = base / (T::one() + powi(q, n64));
                (q, k_scaled * powi(q, n64 + 1), k_scaled)
            }
        };
        Ok(SpectralConstants {
            n,
            h,
            root,
            lambda1,
            ratio,
            k,
            k_scaled,
        })
    }

    pub fn to_f64(&self) -> SpectralConstants<f64> {
        SpectralConstants {
            n: self.n,
            h: self.h.to_f64(),
            root: self.root,
            lambda1: self.lambda1.to_f64(),
            ratio: self.ratio.to_f64(),
            k: self.k.to_f64(),
            k_scaled: self.k_scaled.to_f64(),
        }
    }
}

/// [`SpectralConstants`] in `f64`.
pub fn constants(n: usize, root: Root) -> Result<SpectralConstants<f64>> {
    SpectralConstants::<f64>::new(n, root)
}
