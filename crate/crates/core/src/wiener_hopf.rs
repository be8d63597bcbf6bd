//! The stationarity system of the constrained norm minimization, assembled
//! for arbitrary nodes and solved densely.
//!
//! Unknowns are `C_0..C_{M−1}`, the constant `b₀` and the multiplier `d`:
//!
//! ```text
//! Σ_γ C_γ ψ₂(x_β − x_γ) + b₀ + d e^{−x_β} = ∫₀¹ ψ₂(x − x_β) dx,   β = 0..M−1
//! Σ_γ C_γ                                 = 1
//! Σ_γ C_γ e^{−x_γ}                         = 1 − e^{−1}
//! ```
//!
//! Entries are formed in double-double. The solve factors a row-equilibrated
//! `f64` copy with partial pivoting and then refines the double-double
//! solution against the double-double residual, so the result is limited by
//! the entries rather than by the factorization.

use crate::coefficients::{validate_nodes, QuadratureRule};
use crate::error::{Error, Result};
use crate::kernel::{moment_in, psi2};
use crate::real::{Dd, Real};

/// Largest node count the dense oracle is run for by the command line.
pub const ORACLE_MAX_NODES: usize = 513;

/// Pivots below this fraction of the (equilibrated) row scale are singular.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

const MAX_REFINEMENTS: usize = 16;

/// Square system of size `M + 2` for `M` nodes.
#[derive(Clone, Debug)]
pub struct DenseSystem {
    size: usize,
    nodes: Vec<Dd>,
    uniform: bool,
    matrix: Vec<Dd>,
    rhs: Vec<Dd>,
}

impl DenseSystem {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.size + j].to_f64()
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.rhs[i].to_f64()
    }

    fn row(&self, i: usize) -> &[Dd] {
        &self.matrix[i * self.size..(i + 1) * self.size]
    }
}

fn assemble(nodes: Vec<Dd>, uniform: bool) -> DenseSystem {
    let m = nodes.len();
    let size = m + 2;
    let mut matrix = vec![Dd::default(); size * size];
    let mut rhs = vec![Dd::default(); size];
    let decay: Vec<Dd> = nodes.iter().map(|&x| (-x).exp()).collect();

    // ψ₂ depends only on |β − γ| on a uniform grid
    let table: Vec<Dd> = if uniform {
        let n = Dd::from_usize(m - 1);
        (0..m).map(|k| psi2(Dd::from_usize(k) / n)).collect()
    } else {
        Vec::new()
    };

    for beta in 0..m {
        let row = &mut matrix[beta * size..(beta + 1) * size];
        for gamma in 0..m {
            row[gamma] = if uniform {
                table[beta.abs_diff(gamma)]
            } else {
                psi2(nodes[beta] - nodes[gamma])
            };
        }
        row[m] = Dd::from(1.0);
        row[m + 1] = decay[beta];
        rhs[beta] = moment_in(nodes[beta]);
    }
    for gamma in 0..m {
        matrix[m * size + gamma] = Dd::from(1.0);
        matrix[(m + 1) * size + gamma] = decay[gamma];
    }
    let one = Dd::from(1.0);
    rhs[m] = one;
    rhs[m + 1] = one - (-one).exp();

    DenseSystem {
        size,
        nodes,
        uniform,
        matrix,
        rhs,
    }
}

/// Assemble the system for arbitrary strictly increasing nodes in `[0, 1]`.
pub fn build_system(nodes: &[f64]) -> Result<DenseSystem> {
    validate_nodes(nodes)?;
    Ok(assemble(
        nodes.iter().map(|&x| Dd::from(x)).collect(),
        false,
    ))
}

/// Assemble the system on `x_β = β/N`, `β = 0..N`, with exactly rounded nodes.
pub fn build_uniform_system(n: usize) -> Result<DenseSystem> {
    if n == 0 {
        return Err(Error::Domain("grid size N must be at least 1".into()));
    }
    let nn = Dd::from_usize(n);
    let nodes = (0..=n).map(|b| Dd::from_usize(b) / nn).collect();
    Ok(assemble(nodes, true))
}

/// Solution of the stationarity system.
#[derive(Clone, Debug)]
pub struct SystemSolution {
    pub nodes: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub b0: f64,
    pub d: f64,
    /// Max absolute residual over all rows after refinement.
    pub residual_inf: f64,
    /// Refinement sweeps performed after the initial solve.
    pub refinements: usize,
    rule: QuadratureRule,
    b0_dd: Dd,
    d_dd: Dd,
}

impl SystemSolution {
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn b0_dd(&self) -> Dd {
        self.b0_dd
    }

    pub fn d_dd(&self) -> Dd {
        self.d_dd
    }
}

struct Lu {
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Result<Lu> {
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (p, pivot) =
                (col..n)
                    .map(|r| (r, a[r * n + col].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(pivot >= PIVOT_THRESHOLD) {
                return Err(Error::Singular { column: col, pivot });
            }
            if p != col {
                for j in 0..n {
                    a.swap(col * n + j, p * n + j);
                }
                perm.swap(col, p);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / d;
                if factor == 0.0 {
                    continue;
                }
                a[r * n + col] = factor;
                for j in col + 1..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
            }
        }
        Ok(Lu { n, a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.a[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, xj)| a * xj).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.a[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(a, xj)| a * xj).sum();
            x[i] = (x[i] - s) / self.a[i * n + i];
        }
        x
    }
}

fn residual(sys: &DenseSystem, scale: &[f64], x: &[Dd]) -> Vec<Dd> {
    (0..sys.size)
        .map(|i| {
            let ax: Dd = sys.row(i).iter().zip(x).map(|(&a, &xj)| a * xj).sum();
            (sys.rhs[i] - ax) * Dd::from(scale[i])
        })
        .collect()
}

/// Solve with row equilibration, partial pivoting and iterative refinement.
pub fn solve_dense(sys: &DenseSystem) -> Result<SystemSolution> {
    let n = sys.size;
    // power-of-two row scales keep the equilibration exact
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let max = sys
                .row(i)
                .iter()
                .map(|a| a.to_f64().abs())
                .fold(0.0, f64::max);
            if max == 0.0 {
                1.0
            } else {
                2f64.powi(-(max.log2().floor() as i32))
            }
        })
        .collect();
    let scaled: Vec<f64> = (0..n * n)
        .map(|k| sys.matrix[k].to_f64() * scale[k / n])
        .collect();
    let lu = Lu::factor(scaled, n)?;

    let b: Vec<f64> = (0..n).map(|i| sys.rhs[i].to_f64() * scale[i]).collect();
    let mut x: Vec<Dd> = lu.solve(&b).into_iter().map(Dd::from).collect();
    let mut refinements = 0;
    for _ in 0..MAX_REFINEMENTS {
        let r: Vec<f64> = residual(sys, &scale, &x)
            .iter()
            .map(|v| v.to_f64())
            .collect();
        let dx = lu.solve(&r);
        refinements += 1;
        let mut step = 0.0f64;
        let mut size = 0.0f64;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += Dd::from(*di);
            step = step.max(di.abs());
            size = size.max(xi.to_f64().abs());
        }
        if step <= 1e-31 * size {
            break;
        }
    }

    let residual_inf = residual(sys, &vec![1.0; n], &x)
        .iter()
        .map(|r| r.to_f64().abs())
        .fold(0.0, f64::max);

    let m = sys.nodes.len();
    let weights = x[..m].to_vec();
    let rule = QuadratureRule::from_parts(sys.nodes.clone(), weights, sys.uniform);
    Ok(SystemSolution {
        nodes: rule.nodes(),
        coefficients: rule.coefficients(),
        b0: x[m].to_f64(),
        d: x[m + 1].to_f64(),
        residual_inf,
        refinements,
        rule,
        b0_dd: x[m],
        d_dd: x[m + 1],
    })
}

/// Dense solve on the uniform grid with `N` intervals.
pub fn solve_uniform(n: usize) -> Result<SystemSolution> {
    solve_dense(&build_uniform_system(n)?)
}
