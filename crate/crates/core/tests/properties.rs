use optquad::coefficients::{constraint_residuals, optimal_coefficients, QuadratureRule};
use optquad::kernel::{psi, KernelOrder};
use optquad::norm::{geometric_sums, norm_quadratic_form, rel_diff};
use optquad::quadrature::{apply, TestFunction};
use optquad::real::{Dd, Real};
use optquad::wiener_hopf::{build_system, solve_dense};
use proptest::prelude::*;

fn brute(lambda: f64, n: usize) -> (f64, f64) {
    let mut a = Dd::from(0.0);
    let mut b = Dd::from(0.0);
    let mut p = Dd::from(lambda);
    for g in 1..n {
        let gg = Dd::from(g as f64);
        a += p * gg;
        b += p * gg * gg;
        p *= Dd::from(lambda);
    }
    (a.to_f64(), b.to_f64())
}

fn sorted_nodes(raw: Vec<f64>) -> Vec<f64> {
    let mut xs = raw;
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    xs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi2_is_even_and_nonnegative(x in -5.0f64..5.0) {
        let a = psi(KernelOrder::TWO, x).unwrap();
        prop_assert_eq!(a.to_bits(), psi(KernelOrder::TWO, -x).unwrap().to_bits());
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn geometric_sums_match_brute_force(lambda in -0.9f64..0.9, n in 2usize..=50) {
        prop_assume!(lambda != 0.0);
        let (a, b) = geometric_sums(lambda, n).unwrap();
        let (ea, eb) = brute(lambda, n);
        prop_assert!(rel_diff(a, ea) <= 1e-12);
        prop_assert!(rel_diff(b, eb) <= 1e-12);
    }

    #[test]
    fn optimal_rules_satisfy_constraints(n in 1usize..400) {
        let (a, b) = constraint_residuals(&optimal_coefficients(n).unwrap());
        prop_assert!(a <= 1e-12 && b <= 1e-12);
    }

    #[test]
    fn exact_on_null_space(n in 1usize..=64, a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let rule = optimal_coefficients(n).unwrap();
        let f = TestFunction::NullSpace { a, b };
        let err = (apply(&rule, &f) - f.exact_integral()).abs();
        prop_assert!(err <= 1e-11 * (a.abs() + b.abs()) + 1e-300);
    }

    #[test]
    fn quadratic_form_positive_for_constrained_rules(n in 2usize..=12, seed in proptest::collection::vec(-1.0f64..1.0, 13)) {
        // perturb the optimal weights inside the constraint set
        let rule = optimal_coefficients(n).unwrap();
        let base = norm_quadratic_form(&rule);
        prop_assert!(base > 0.0);
        let mut c = rule.coefficients();
        let nodes = rule.nodes();
        let decay: Vec<f64> = nodes.iter().map(|x| (-x).exp()).collect();
        // remove components along 1 and e^{-x} by Gram-Schmidt
        let mut v: Vec<f64> = seed[..=n].to_vec();
        let ones = vec![1.0; n + 1];
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let u1: Vec<f64> = ones.iter().map(|x| x / dot(&ones, &ones).sqrt()).collect();
        let p = dot(&decay, &u1);
        let w: Vec<f64> = decay.iter().zip(&u1).map(|(d, u)| d - p * u).collect();
        let u2: Vec<f64> = w.iter().map(|x| x / dot(&w, &w).sqrt()).collect();
        for u in [&u1, &u2] {
            let k = dot(&v, u);
            v.iter_mut().zip(u.iter()).for_each(|(x, y)| *x -= k * y);
        }
        let len = dot(&v, &v).sqrt();
        prop_assume!(len > 1e-6);
        c.iter_mut().zip(&v).for_each(|(x, y)| *x += 1e-2 * y / len);
        let moved = norm_quadratic_form(&QuadratureRule::uniform(&c).unwrap());
        prop_assert!(moved > base);
    }

    #[test]
    fn arbitrary_nodes_meet_constraints(raw in proptest::collection::vec(0.0f64..=1.0, 2..12)) {
        let nodes = sorted_nodes(raw);
        prop_assume!(nodes.len() >= 2);
        let sol = solve_dense(&build_system(&nodes).unwrap()).unwrap();
        let sum: f64 = sol.coefficients.iter().sum();
        let exp_sum: f64 = sol.coefficients.iter().zip(&nodes).map(|(c, x)| c * (-x).exp()).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-11);
        prop_assert!((exp_sum - (1.0 - (-1f64).exp())).abs() <= 1e-11);
        prop_assert!(sol.residual_inf <= 1e-10);
    }
}
