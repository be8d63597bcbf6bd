//! Closed-form optimal coefficients on the uniform grid.
//!
//! ```text
//! C₀   = (e^h − 1 − h)/(e^h − 1)   − K(λ₁ − λ₁^N)
//! C_β  = h − K[(λ₁ − e^h)λ₁^β + (λ₁e^h − 1)λ₁^{N−β}],   1 ≤ β ≤ N−1
//! C_N  = (he^h − e^h + 1)/(e^h − 1) − K(λ₁ − λ₁^N)e^h
//! ```
//!
//! Every correction is evaluated as `amplitude · ratio^k` with `|ratio| < 1`
//! (see [`SpectralConstants`]); for the printed root this is the identity
//! `K·λ₁^k = K̃·q^{N+1−k}`, so no power of λ₁ above the first is formed.

use crate::error::{Error, Result};
use crate::real::{expm1_minus_x, powi, Dd, Real};
use crate::spectral::{Root, SpectralConstants};

/// Nodes and weights of a quadrature rule on `[0, 1]`, held in double-double.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<Dd>,
    weights: Vec<Dd>,
    uniform: bool,
}

fn uniform_nodes(n: usize) -> Vec<Dd> {
    let nn = Dd::from_usize(n);
    (0..=n).map(|b| Dd::from_usize(b) / nn).collect()
}

impl QuadratureRule {
    /// Rule on the uniform grid `x_β = β/N`, `N = weights.len() − 1`.
    pub fn uniform(weights: &[f64]) -> Result<Self> {
        Self::uniform_dd(weights.iter().map(|&w| Dd::from(w)).collect())
    }

    pub fn uniform_dd(weights: Vec<Dd>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Domain("a rule needs at least two nodes".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("weights must be finite".into()));
        }
        Ok(QuadratureRule {
            nodes: uniform_nodes(weights.len() - 1),
            weights,
            uniform: true,
        })
    }

    /// Rule on arbitrary strictly increasing nodes in `[0, 1]`.
    pub fn with_nodes(nodes: &[f64], weights: &[f64]) -> Result<Self> {
        validate_nodes(nodes)?;
        if nodes.len() != weights.len() {
            return Err(Error::Domain(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        Ok(QuadratureRule {
            nodes: nodes.iter().map(|&x| Dd::from(x)).collect(),
            weights: weights.iter().map(|&w| Dd::from(w)).collect(),
            uniform: false,
        })
    }

    pub(crate) fn from_parts(nodes: Vec<Dd>, weights: Vec<Dd>, uniform: bool) -> Self {
        debug_assert_eq!(nodes.len(), weights.len());
        QuadratureRule {
            nodes,
            weights,
            uniform,
        }
    }

    /// Number of intervals `N`; the rule has `N + 1` nodes.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `1/N`; the grid step when the rule is uniform.
    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.nodes.iter().map(|x| x.to_f64()).collect()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.to_f64()).collect()
    }

    pub fn nodes_dd(&self) -> &[Dd] {
        &self.nodes
    }

    pub fn weights_dd(&self) -> &[Dd] {
        &self.weights
    }
}

pub(crate) fn validate_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::Domain("at least two nodes are required".into()));
    }
    if let Some(x) = nodes.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("node {x} lies outside [0, 1]")));
    }
    if let Some(w) = nodes.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(format!(
            "nodes must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// The coefficients of `r^β` and `r^{N−β}` in the interior correction, and
/// the boundary term `w` with `C₀ = base₀ − amplitude·w`.
struct Layer<T> {
    left: T,
    right: T,
    ends: T,
}

fn layer<T: Real>(c: &SpectralConstants<T>, e: T) -> Layer<T> {
    let r = c.ratio;
    let rn = powi(r, c.n as u64);
    match c.root {
        // K[(λ−e^h)λ^β + (λe^h−1)λ^{N−β}],  K(λ − λ^N)
        Root::Decaying => Layer {
            left: r - e,
            right: r * e - T::one(),
            ends: r - rn,
        },
        // K̃[(e^h−q)q^β + (1−e^h q)q^{N−β}],  K̃(q^N − q)
        Root::AsPrinted => Layer {
            left: e - r,
            right: T::one() - e * r,
            ends: rn - r,
        },
    }
}

/// `ratio^k` for `k = 0..=n`, truncated where it underflows.
fn power_table<T: Real>(ratio: T, n: usize) -> Vec<T> {
    let mut table = Vec::with_capacity(n.min(2048) + 1);
    let mut p = T::one();
    for _ in 0..=n {
        if p.to_f64().abs() < f64::MIN_POSITIVE {
            break;
        }
        table.push(p);
        p *= ratio;
    }
    table
}

/// Closed-form weights in any [`Real`], together with the constants used.
pub fn theorem1_weights<T: Real>(n: usize, root: Root) -> Result<(SpectralConstants<T>, Vec<T>)> {
    let c = SpectralConstants::<T>::new(n, root)?;
    let h = c.h;
    let e = h.exp();
    let em1 = h.exp_m1();
    // (e^h − 1 − h)/(e^h − 1) and (he^h − e^h + 1)/(e^h − 1) = e^h(e^{−h} − 1 + h)/(e^h − 1)
    let base_first = expm1_minus_x(h) / em1;
    let base_last = e * expm1_minus_x(-h) / em1;
    let l = layer(&c, e);
    let amp = c.k_scaled;
    let pows = power_table(c.ratio, n);
    let pow = |k: usize| pows.get(k).copied().unwrap_or_else(T::zero);

    let mut w = Vec::with_capacity(n + 1);
    w.push(base_first - amp * l.ends);
    for beta in 1..n {
        w.push(h - amp * (l.left * pow(beta) + l.right * pow(n - beta)));
    }
    w.push(base_last - amp * l.ends * e);
    Ok((c, w))
}

/// Upper bound on `|C_β − h|` for interior β: `|amplitude|(|left| + |right|)|ratio|^{min(β, N−β)}`.
pub fn interior_decay_bound<T: Real>(c: &SpectralConstants<T>, beta: usize) -> T {
    let e = c.h.exp();
    let l = layer(c, e);
    let m = beta.min(c.n - beta) as u64;
    c.k_scaled.abs() * (l.left.abs() + l.right.abs()) * powi(c.ratio.abs(), m)
}

/// Closed-form rule for the chosen λ₁.
pub fn theorem1_coefficients(n: usize, root: Root) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Domain("grid size N must be at least 1".into()));
    }
    let (_, w) = theorem1_weights::<Dd>(n, root)?;
    Ok(QuadratureRule::from_parts(uniform_nodes(n), w, true))
}

/// The optimal rule on `N + 1` uniform nodes.
pub fn optimal_coefficients(n: usize) -> Result<QuadratureRule> {
    theorem1_coefficients(n, Root::Decaying)
}

/// `(|Σ C_β − 1|, |Σ C_β e^{−x_β} − (1 − e^{−1})|)`.
pub fn constraint_residuals(rule: &QuadratureRule) -> (f64, f64) {
    let one = Dd::from(1.0);
    let total: Dd = rule.weights.iter().copied().sum();
    let exp_sum: Dd = rule
        .weights
        .iter()
        .zip(&rule.nodes)
        .map(|(&c, &x)| c * (-x).exp())
        .sum();
    let target = one - (-one).exp();
    (
        (total - one).abs().to_f64(),
        (exp_sum - target).abs().to_f64(),
    )
}
