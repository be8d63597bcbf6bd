//! The `optquad` command line.
//!
//! Exit codes: 0 on success, 1 when `validate` finds a failing check (or an
//! internal solve fails), 2 for usage and domain errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::coefficients::{
    constraint_residuals, optimal_coefficients, theorem1_coefficients, QuadratureRule,
};
use crate::error::{Error, Result};
use crate::norm::{
    build_report, geometric_sums, norm_expanded, norm_quadratic_form, norm_theorem2,
    norm_via_multipliers, reference_multipliers, rel_diff, MultiplierPair,
};
use crate::quadrature::{apply, convergence_table, error_check, TestFunction};
use crate::real::{powi, Dd, Real};
use crate::spectral::{constants, Root};
use crate::wiener_hopf::{solve_uniform, ORACLE_MAX_NODES};

/// Largest N accepted by `--method system` and the other dense-solve paths.
pub const SYSTEM_MAX_N: usize = ORACLE_MAX_NODES - 1;

#[derive(Parser, Debug)]
#[command(
    name = "optquad",
    version,
    about = "Optimal quadrature weights, oracles and error-functional norms"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients of the rule on N + 1 uniform nodes.
    Coeffs {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        /// λ₁ used by the closed form.
        #[arg(long, value_enum, default_value_t = RootArg::Decaying)]
        root: RootArg,
        #[command(flatten)]
        output: Output,
    },
    /// Squared norm of the error functional.
    Norm {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Methods::All)]
        methods: Methods,
        #[command(flatten)]
        output: Output,
    },
    /// Run the consistency checks; exit 1 if any fails.
    Validate {
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// ‖ℓ‖² of the optimal rule over a list of N.
    Convergence {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        function: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Apply the optimal rule to a catalog function.
    Apply {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        function: String,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the closed form under both roots against the dense solve.
    Audit {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    System,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RootArg {
    Decaying,
    AsPrinted,
}

impl From<RootArg> for Root {
    fn from(r: RootArg) -> Root {
        match r {
            RootArg::Decaying => Root::Decaying,
            RootArg::AsPrinted => Root::AsPrinted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Methods {
    All,
    Quadform,
    Multiplier,
    Expanded,
    Theorem2,
}

/// A JSON document plus the flat rows its CSV form is made of.
struct Document {
    json: Value,
    rows: Vec<Map<String, Value>>,
}

impl Document {
    fn single(record: Map<String, Value>) -> Self {
        Document {
            json: Value::Object(record.clone()),
            rows: vec![record],
        }
    }

    fn table(rows: Vec<Map<String, Value>>) -> Self {
        Document {
            json: Value::Array(rows.iter().cloned().map(Value::Object).collect()),
            rows,
        }
    }
}

fn record<T: Serialize>(value: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(value)? {
        Value::Object(m) => Ok(m),
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            Ok(m)
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => u.to_string(),
            (_, Some(i), _) if !n.is_f64() => i.to_string(),
            (_, _, Some(x)) => format!("{x:.16e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(doc: &Document, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&doc.json)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if let Some(first) = doc.rows.first() {
                w.write_record(first.keys())?;
            }
            for row in &doc.rows {
                w.write_record(row.values().map(csv_cell))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}

fn emit(doc: &Document, output: &Output) -> Result<()> {
    let bytes = render(doc, output.format)?;
    match &output.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("--n must be at least 1".into()));
    }
    Ok(())
}

fn check_system_n(n: usize) -> Result<()> {
    check_n(n)?;
    if n > SYSTEM_MAX_N {
        return Err(Error::Domain(format!(
            "the dense solve is limited to N <= {SYSTEM_MAX_N}, got {n}"
        )));
    }
    Ok(())
}

fn cmd_coeffs(n: usize, method: Method, root: Root, output: &Output) -> Result<()> {
    let (rule, multipliers) = match method {
        Method::Closed => {
            check_n(n)?;
            (theorem1_coefficients(n, root)?, None)
        }
        Method::System => {
            check_system_n(n)?;
            let sol = solve_uniform(n)?;
            (sol.rule().clone(), Some((sol.b0, sol.d, sol.residual_inf)))
        }
    };
    let c = constants(n, root)?;
    let k_scaled = match root {
        Root::AsPrinted => c.k_scaled,
        Root::Decaying => c.k * powi(c.lambda1, n as u64 + 1),
    };
    let (res_sum, res_exp) = constraint_residuals(&rule);
    let mut meta = Map::new();
    meta.insert("N".into(), json!(n));
    meta.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
    meta.insert("root".into(), json!(root.name()));
    meta.insert("lambda1".into(), json!(c.lambda1));
    meta.insert("q".into(), json!(1.0 / c.lambda1));
    meta.insert("k".into(), json!(c.k));
    meta.insert("k_scaled".into(), json!(k_scaled));
    meta.insert("residual_sum".into(), json!(res_sum));
    meta.insert("residual_exp".into(), json!(res_exp));
    if let Some((b0, d, residual_inf)) = multipliers {
        meta.insert("b0".into(), json!(b0));
        meta.insert("d".into(), json!(d));
        meta.insert("residual_inf".into(), json!(residual_inf));
    }

    let nodes = rule.nodes();
    let weights = rule.coefficients();
    let points: Vec<Map<String, Value>> = nodes
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(beta, (x, w))| {
            let mut m = Map::new();
            m.insert("beta".into(), json!(beta));
            m.insert("x".into(), json!(x));
            m.insert("c".into(), json!(w));
            m
        })
        .collect();
    let rows = points
        .iter()
        .map(|p| {
            let mut row = p.clone();
            row.extend(meta.clone());
            row
        })
        .collect();
    let mut json = meta;
    json.insert(
        "coefficients".into(),
        Value::Array(points.into_iter().map(Value::Object).collect()),
    );
    emit(
        &Document {
            json: Value::Object(json),
            rows,
        },
        output,
    )
}

fn cmd_norm(n: usize, methods: Methods, output: &Output) -> Result<()> {
    check_n(n)?;
    if methods == Methods::All {
        return emit(&Document::single(record(&build_report(n)?)?), output);
    }
    let mut m = Map::new();
    m.insert("N".into(), json!(n));
    m.insert("h".into(), json!(1.0 / n as f64));
    match methods {
        Methods::Quadform => {
            let qf = norm_quadratic_form(&optimal_coefficients(n)?);
            m.insert("via_quadratic_form".into(), json!(qf));
        }
        Methods::Multiplier | Methods::Expanded => {
            let (rule, mult, skipped) = reference_multipliers(n)?;
            let (key, value) = if methods == Methods::Multiplier {
                ("via_multipliers", norm_via_multipliers(&rule, &mult)?)
            } else {
                ("via_expanded", norm_expanded(&rule, &mult)?)
            };
            m.insert(key.into(), json!(value));
            m.insert("oracle_skipped".into(), json!(skipped));
        }
        Methods::Theorem2 => {
            m.insert(
                "via_theorem2".into(),
                json!(norm_theorem2(n, Root::AsPrinted)?),
            );
            m.insert(
                "via_theorem2_decaying".into(),
                json!(norm_theorem2(n, Root::Decaying)?),
            );
        }
        Methods::All => unreachable!(),
    }
    emit(&Document::single(m), output)
}

#[derive(Debug, Serialize)]
struct CheckRow {
    check: &'static str,
    worst: f64,
    tol: f64,
    cases: usize,
    passed: bool,
}

/// N values the dense-solve checks run on: every N up to 64, then powers of
/// two up to the oracle cap.
fn oracle_grid(max_n: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (1..=max_n.min(64)).collect();
    let mut p = 128;
    while p <= max_n.min(SYSTEM_MAX_N) {
        ns.push(p);
        p *= 2;
    }
    ns
}

fn brute_geometric(lambda: f64, n: usize) -> (f64, f64) {
    let l = Dd::from(lambda);
    let (mut a, mut b) = (Dd::zero(), Dd::zero());
    let mut p = l;
    for g in 1..n {
        let gg = Dd::from_usize(g);
        a += p * gg;
        b += p * gg * gg;
        p *= l;
    }
    (a.to_f64(), b.to_f64())
}

fn run_checks(max_n: usize, tol: f64) -> Result<Vec<CheckRow>> {
    let grid = oracle_grid(max_n);
    let mut rows = Vec::new();
    let mut push = |check, worst: f64, cases| {
        rows.push(CheckRow {
            check,
            worst,
            tol,
            cases,
            passed: worst <= tol,
        })
    };

    let mut coeff_gap = 0.0f64;
    let mut route = 0.0f64;
    let mut solutions = Vec::with_capacity(grid.len());
    for &n in &grid {
        let sol = solve_uniform(n)?;
        let closed = optimal_coefficients(n)?.coefficients();
        for (a, b) in closed.iter().zip(&sol.coefficients) {
            coeff_gap = coeff_gap.max((a - b).abs());
        }
        let mult = MultiplierPair::from_solution(&sol);
        let qf = norm_quadratic_form(sol.rule());
        route = route.max(rel_diff(qf, norm_via_multipliers(sol.rule(), &mult)?));
        solutions.push(n);
    }
    push("closed_vs_system", coeff_gap, grid.len());

    let mut residual = 0.0f64;
    let mut exactness = 0.0f64;
    let null = TestFunction::NullSpace { a: 2.0, b: -3.0 };
    for n in 1..=max_n {
        let rule = optimal_coefficients(n)?;
        let (r1, r2) = constraint_residuals(&rule);
        residual = residual.max(r1).max(r2);
        for f in [TestFunction::Const1, TestFunction::ExpNeg, null] {
            let scale = match f {
                TestFunction::NullSpace { a, b } => a.abs() + b.abs(),
                _ => 1.0,
            };
            exactness = exactness.max((apply(&rule, &f) - f.exact_integral()).abs() / scale);
        }
    }
    push("constraint_residuals", residual, max_n);
    push("route_agreement", route, solutions.len());
    push("exactness", exactness, 3 * max_n);

    let mut geometric = 0.0f64;
    let mut cases = 0;
    for i in -9..=9 {
        if i == 0 {
            continue;
        }
        let lambda = i as f64 / 10.0;
        for n in 2..=50 {
            let (a, b) = geometric_sums(lambda, n)?;
            let (ea, eb) = brute_geometric(lambda, n);
            geometric = geometric.max(rel_diff(a, ea)).max(rel_diff(b, eb));
            cases += 1;
        }
    }
    push("geometric_sums", geometric, cases);
    Ok(rows)
}

/// Exit status of `validate`.
fn cmd_validate(max_n: usize, tol: f64, output: &Output) -> Result<i32> {
    if max_n == 0 {
        return Err(Error::Domain("--max-n must be at least 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("--tol must be positive, got {tol}")));
    }
    let rows = run_checks(max_n, tol)?;
    let records = rows.iter().map(record).collect::<Result<Vec<_>>>()?;
    emit(&Document::table(records), output)?;
    match rows.iter().find(|r| !r.passed) {
        Some(r) => {
            eprintln!(
                "validation failed: {} (worst {:e} > tol {:e})",
                r.check, r.worst, r.tol
            );
            Ok(1)
        }
        None => Ok(0),
    }
}

fn cmd_convergence(ns: &[usize], function: Option<&str>, output: &Output) -> Result<()> {
    let f = function.map(TestFunction::from_name).transpose()?;
    let rows = convergence_table(ns, f.as_ref())?;
    let records = rows.iter().map(record).collect::<Result<Vec<_>>>()?;
    emit(&Document::table(records), output)
}

fn cmd_apply(n: usize, function: &str, output: &Output) -> Result<()> {
    let f = TestFunction::from_name(function)?;
    check_n(n)?;
    let rule = optimal_coefficients(n)?;
    let check = error_check(&rule, &f, norm_quadratic_form(&rule))?;
    let mut m = Map::new();
    m.insert("N".into(), json!(n));
    m.insert("function".into(), json!(f.name()));
    m.extend(record(&check)?);
    emit(&Document::single(m), output)
}

fn max_gap(a: &QuadratureRule, b: &QuadratureRule) -> f64 {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn cmd_audit(n: usize, output: &Output) -> Result<()> {
    check_system_n(n)?;
    let sol = solve_uniform(n)?;
    let dense_qf = norm_quadratic_form(sol.rule());
    let mut rows = Vec::new();
    for root in [Root::Decaying, Root::AsPrinted] {
        let rule = theorem1_coefficients(n, root)?;
        let qf = norm_quadratic_form(&rule);
        let thm2 = norm_theorem2(n, root)?;
        let mut m = Map::new();
        m.insert("N".into(), json!(n));
        m.insert("root".into(), json!(root.name()));
        m.insert("lambda1".into(), json!(constants(n, root)?.lambda1));
        m.insert(
            "max_gap_vs_system".into(),
            json!(max_gap(&rule, sol.rule())),
        );
        m.insert("norm_sq".into(), json!(qf));
        m.insert("norm_sq_system".into(), json!(dense_qf));
        m.insert("theorem2".into(), json!(thm2));
        m.insert("rel_diff_theorem2".into(), json!(rel_diff(qf, thm2)));
        rows.push(m);
    }
    emit(&Document::table(rows), output)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::NumericDomain(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
        Error::Singular { .. } | Error::OracleFailure { .. } | Error::InconsistentInput { .. } => 1,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Coeffs {
            n,
            method,
            root,
            output,
        } => cmd_coeffs(n, method, root.into(), &output).map(|_| 0),
        Command::Norm { n, methods, output } => cmd_norm(n, methods, &output).map(|_| 0),
        Command::Validate { max_n, tol, output } => cmd_validate(max_n, tol, &output),
        Command::Convergence {
            n_list,
            function,
            output,
        } => cmd_convergence(&n_list, function.as_deref(), &output).map(|_| 0),
        Command::Apply {
            n,
            function,
            output,
        } => cmd_apply(n, &function, &output).map(|_| 0),
        Command::Audit { n, output } => cmd_audit(n, &output).map(|_| 0),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn oracle_grid_shape() {
        assert_eq!(oracle_grid(3), vec![1, 2, 3]);
        let g = oracle_grid(10_000);
        assert_eq!(g.len(), 64 + 3);
        assert_eq!(*g.last().unwrap(), 512);
    }

    #[test]
    fn csv_cells() {
        assert_eq!(csv_cell(&json!(3)), "3");
        assert_eq!(csv_cell(&json!(0.5)), "5.0000000000000000e-1");
        assert_eq!(csv_cell(&Value::Null), "");
        assert_eq!(csv_cell(&json!(true)), "true");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["optquad", "coeffs", "--n", "0"]), 2);
        assert_eq!(run(["optquad", "bogus"]), 2);
        assert_eq!(run(["optquad", "validate", "--max-n", "0"]), 2);
    }
}
