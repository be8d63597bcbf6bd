//! Applying rules to test integrands, the seminorm `(∫₀¹(φ″ + φ′)²)^{1/2}`,
//! the Cauchy–Schwarz bound and convergence studies.

use std::fmt;

use serde::Serialize;

use crate::coefficients::{optimal_coefficients, QuadratureRule};
use crate::error::{Error, Result};
use crate::kernel::integrate_adaptive;
use crate::norm::norm_quadratic_form;
use crate::real::{Dd, Real};

/// Tolerance of the adaptive integration behind [`sobolev_seminorm`].
pub const SEMINORM_TOL: f64 = 1e-12;

/// Built-in integrands with analytic derivatives and integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction {
    Const1,
    X,
    X2,
    ExpNeg,
    Exp,
    Sin,
    /// `a + b e^{−x}`, annihilated by the seminorm.
    NullSpace {
        a: f64,
        b: f64,
    },
}

impl TestFunction {
    /// Names accepted by [`TestFunction::from_name`].
    pub const CATALOG: [&'static str; 7] =
        ["const1", "x", "x2", "exp_neg", "exp", "sin", "null_space"];

    /// Everything in the catalog; `null_space` with `a = 2, b = −3`.
    pub fn catalog() -> Vec<TestFunction> {
        Self::CATALOG
            .iter()
            .map(|n| Self::from_name(n).expect("catalog names parse"))
            .collect()
    }

    pub fn from_name(name: &str) -> Result<TestFunction> {
        Ok(match name {
            "const1" => TestFunction::Const1,
            "x" => TestFunction::X,
            "x2" => TestFunction::X2,
            "exp_neg" => TestFunction::ExpNeg,
            "exp" => TestFunction::Exp,
            "sin" => TestFunction::Sin,
            "null_space" => TestFunction::NullSpace { a: 2.0, b: -3.0 },
            other => {
                return Err(Error::Domain(format!(
                    "unknown function '{other}'; available: {}",
                    Self::CATALOG.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Const1 => "const1",
            TestFunction::X => "x",
            TestFunction::X2 => "x2",
            TestFunction::ExpNeg => "exp_neg",
            TestFunction::Exp => "exp",
            TestFunction::Sin => "sin",
            TestFunction::NullSpace { .. } => "null_space",
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Const1 => 1.0,
            TestFunction::X => x,
            TestFunction::X2 => x * x,
            TestFunction::ExpNeg => (-x).exp(),
            TestFunction::Exp => x.exp(),
            TestFunction::Sin => x.sin(),
            TestFunction::NullSpace { a, b } => a + b * (-x).exp(),
        }
    }

    pub fn first_derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Const1 => 0.0,
            TestFunction::X => 1.0,
            TestFunction::X2 => 2.0 * x,
            TestFunction::ExpNeg => -(-x).exp(),
            TestFunction::Exp => x.exp(),
            TestFunction::Sin => x.cos(),
            TestFunction::NullSpace { b, .. } => -b * (-x).exp(),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Const1 | TestFunction::X => 0.0,
            TestFunction::X2 => 2.0,
            TestFunction::ExpNeg => (-x).exp(),
            TestFunction::Exp => x.exp(),
            TestFunction::Sin => -x.sin(),
            TestFunction::NullSpace { b, .. } => b * (-x).exp(),
        }
    }

    /// `∫₀¹ φ`.
    pub fn exact_integral(&self) -> f64 {
        let e = std::f64::consts::E;
        match *self {
            TestFunction::Const1 => 1.0,
            TestFunction::X => 0.5,
            TestFunction::X2 => 1.0 / 3.0,
            TestFunction::ExpNeg => -(-1f64).exp_m1(),
            TestFunction::Exp => e - 1.0,
            TestFunction::Sin => 1.0 - 1f64.cos(),
            TestFunction::NullSpace { a, b } => a - b * (-1f64).exp_m1(),
        }
    }

    /// Largest relative mismatch between the analytic derivatives and central
    /// differences with step `1e-6`, over a few interior points.
    pub fn derivative_mismatch(&self) -> f64 {
        let step = 1e-6;
        let rel =
            |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(1.0);
        [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&x| {
                let d1 = (self.value(x + step) - self.value(x - step)) / (2.0 * step);
                let d2 = (self.first_derivative(x + step) - self.first_derivative(x - step))
                    / (2.0 * step);
                rel(self.first_derivative(x), d1).max(rel(self.second_derivative(x), d2))
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `Σ C_β φ(x_β)`.
pub fn apply(rule: &QuadratureRule, f: &TestFunction) -> f64 {
    rule.weights_dd()
        .iter()
        .zip(rule.nodes_dd())
        .map(|(&c, x)| c * Dd::from(f.value(x.to_f64())))
        .sum::<Dd>()
        .to_f64()
}

/// `(∫₀¹ (φ″ + φ′)² dx)^{1/2}`.
pub fn sobolev_seminorm(f: &TestFunction) -> Result<f64> {
    let r = integrate_adaptive(
        |x| {
            let g = f.second_derivative(x) + f.first_derivative(x);
            g * g
        },
        0.0,
        1.0,
        SEMINORM_TOL,
    )?;
    Ok(r.value.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorCheck {
    pub quad_value: f64,
    pub true_value: f64,
    pub abs_error: f64,
    pub norm_bound: f64,
    pub bound_satisfied: bool,
}

/// Compare the true error with `‖ℓ‖·‖φ‖`.
pub fn error_check(rule: &QuadratureRule, f: &TestFunction, norm_sq: f64) -> Result<ErrorCheck> {
    if !(norm_sq >= 0.0) {
        return Err(Error::Domain(format!(
            "squared norm must be nonnegative, got {norm_sq}"
        )));
    }
    let quad_value = apply(rule, f);
    let true_value = f.exact_integral();
    let abs_error = (quad_value - true_value).abs();
    let norm_bound = norm_sq.sqrt() * sobolev_seminorm(f)?;
    Ok(ErrorCheck {
        quad_value,
        true_value,
        abs_error,
        norm_bound,
        bound_satisfied: abs_error <= norm_bound * (1.0 + 1e-8) + 1e-14,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    pub norm_sq: f64,
    pub ratio: Option<f64>,
    pub order_estimate: Option<f64>,
    pub abs_error: Option<f64>,
}

/// `‖ℓ‖²` of the optimal rule for each `N`, with the ratio to the previous
/// row and the order `log₂(prev/cur)/log₂(N_cur/N_prev)`.
pub fn convergence_table(ns: &[usize], f: Option<&TestFunction>) -> Result<Vec<ConvergenceRow>> {
    if ns.is_empty() {
        return Err(Error::Domain("the list of N is empty".into()));
    }
    if ns.contains(&0) {
        return Err(Error::Domain("every N must be at least 1".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "the list of N must be strictly increasing".into(),
        ));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let rule = optimal_coefficients(n)?;
        let norm_sq = norm_quadratic_form(&rule);
        let (ratio, order_estimate) = match rows.last() {
            Some(prev) => (
                Some(norm_sq / prev.norm_sq),
                Some((prev.norm_sq / norm_sq).log2() / (n as f64 / prev.n as f64).log2()),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            h: 1.0 / n as f64,
            norm_sq,
            ratio,
            order_estimate,
            abs_error: f.map(|f| (apply(&rule, f) - f.exact_integral()).abs()),
        });
    }
    Ok(rows)
}
