//! Invariants over random parameters, and closed-form references computed
//! here independently of the library's own routines.

use pblab::families::{build_family_pair, DEFAULT_TAIL_TOLERANCE};
use pblab::fock::{exp_lowering, exp_raising, seeded_vectors, NormalOrdered};
use pblab::hermite::{gauss_hermite, hermite_function};
use pblab::metric::build_theta;
use pblab::report::format_float;
use pblab::{FockVector, OperatorMatrix, Params, C64};
use proptest::prelude::*;

fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| C64::new(re, im))
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `H_n(x) e^{-x²/2} / sqrt(2ⁿ n! √π)` with `H_n` from its explicit power sum.
fn hermite_explicit(n: usize, x: f64) -> f64 {
    let h: f64 = (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * (2.0 * x).powi((n - 2 * m) as i32) / (factorial(m) * factorial(n - 2 * m))
        })
        .sum::<f64>()
        * factorial(n);
    h * (-0.5 * x * x).exp() / (2f64.powi(n as i32) * factorial(n) * std::f64::consts::PI.sqrt()).sqrt()
}

fn identity_gap(m: &OperatorMatrix, block: usize) -> f64 {
    m.max_deviation_on_block(&OperatorMatrix::identity(m.dim()).unwrap(), block)
}

/// Rounding scale of `xy`: `M ε max(|x||y|)` with entrywise moduli.
fn product_rounding(x: &OperatorMatrix, y: &OperatorMatrix) -> f64 {
    let ax = x.entries().map(|z| z.norm());
    let ay = y.entries().map(|z| z.norm());
    x.dim() as f64 * f64::EPSILON * (ax * ay).max().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lowering_exponentials_invert_each_other(g in complex(1.5), dim in 4usize..48) {
        let (x, y) = (exp_lowering(g, dim).unwrap(), exp_lowering(-g, dim).unwrap());
        prop_assert!(identity_gap(&(&x * &y), dim) <= product_rounding(&x, &y));
    }

    #[test]
    fn normal_ordered_inverse_is_exact_at_every_truncation(z in complex(1.0), dim in 4usize..64) {
        let d = NormalOrdered::displacement(z);
        let (x, y) = (d.matrix(dim).unwrap(), d.inverse_matrix(dim).unwrap());
        // both sides are products of triangular factors that round on their own
        let r = exp_raising(d.raising, dim).unwrap().matrix;
        let l = exp_lowering(d.lowering, dim).unwrap();
        let l_inv = exp_lowering(-d.lowering, dim).unwrap();
        let r_inv = exp_raising(-d.raising, dim).unwrap().matrix;
        let moduli = |m: &OperatorMatrix| m.entries().map(|z| z.norm());
        let chain = moduli(&r) * moduli(&l) * moduli(&l_inv) * moduli(&r_inv);
        let bound = (dim * dim) as f64 * f64::EPSILON * chain.max().max(1.0);
        prop_assert!(identity_gap(&(&x * &y), dim) <= bound);
    }

    #[test]
    fn displacement_is_unitary_on_the_interior(z in complex(0.8)) {
        let dim = 64;
        let d = NormalOrdered::displacement(z).matrix(dim).unwrap();
        let prod = &d.adjoint() * &d;
        prop_assert!(identity_gap(&prod, dim / 2) < 1e-10);
    }

    #[test]
    fn biorthogonal_for_random_parameters(a in complex(0.5), b in complex(0.5)) {
        let p = Params::new(0.7, a, b).unwrap();
        let fam = build_family_pair(&p, 12, 96, DEFAULT_TAIL_TOLERANCE).unwrap();
        prop_assert!(fam.biorthogonality_defect(12) < 1e-9);
    }

    #[test]
    fn family_norms_match_binomial_sum(a in complex(0.5), b in complex(0.5)) {
        let p = Params::new(0.7, a, b).unwrap();
        let g = p.gap().norm_sqr();
        let fam = build_family_pair(&p, 20, 96, DEFAULT_TAIL_TOLERANCE).unwrap();
        for (n, phi) in fam.phi().iter().enumerate() {
            let exact: f64 = (0..=n)
                .map(|j| factorial(n) / (factorial(j) * factorial(n - j)) * g.powi(j as i32) / factorial(j))
                .sum();
            prop_assert!((phi.norm_squared() - exact).abs() <= 1e-12 * exact);
            prop_assert!(phi.norm_squared() >= (1.0 + g * n as f64) * (1.0 - 1e-14));
        }
    }

    #[test]
    fn metric_is_positive_with_closed_form_vacuum_entry(
        a in complex(0.5),
        b in complex(0.5),
        seed in any::<u64>(),
    ) {
        let p = Params::new(0.7, a, b).unwrap();
        let m = build_theta(&p, 96).unwrap();
        let d = a - b;
        let vacuum = (a.norm_sqr() - b.norm_sqr() + d.norm_sqr()).exp();
        let e0 = FockVector::basis(0, 96).unwrap();
        prop_assert!((m.expectation(&e0) - vacuum).norm() <= 1e-12 * vacuum);
        for f in seeded_vectors(seed, 5, 11, 96).unwrap() {
            prop_assert!(m.expectation(&f).re > 0.0);
        }
    }

    #[test]
    fn hermite_functions_match_explicit_polynomials(n in 0usize..12, x in -5.0f64..5.0) {
        let got = hermite_function(n, C64::from(x)).unwrap();
        prop_assert!((got.re - hermite_explicit(n, x)).abs() < 1e-12);
        prop_assert!(got.im == 0.0);
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = format_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        let (mantissa, exp) = s.split_once('e').unwrap();
        prop_assert_eq!(mantissa.trim_start_matches('-').len(), 18);
        prop_assert!(exp.starts_with('+') || exp.starts_with('-'));
        prop_assert!(exp.len() >= 3);
    }

    #[test]
    fn seeded_vectors_are_reproducible_unit_vectors(seed in any::<u64>(), count in 1usize..8) {
        let first = seeded_vectors(seed, count, 11, 32).unwrap();
        prop_assert_eq!(&first, &seeded_vectors(seed, count, 11, 32).unwrap());
        for v in &first {
            prop_assert!((v.norm() - 1.0).abs() < 1e-14);
            prop_assert!(v.support_end().unwrap() < 11);
        }
    }
}

#[test]
fn small_gauss_hermite_rules() {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let two = gauss_hermite(2).unwrap();
    let h = 0.5f64.sqrt();
    for (got, want) in two.nodes().iter().zip([-h, h]) {
        assert!((got - want).abs() < 1e-15);
    }
    for w in two.weights() {
        assert!((w - sqrt_pi / 2.0).abs() < 1e-15);
    }

    let three = gauss_hermite(3).unwrap();
    let r = 1.5f64.sqrt();
    for (got, want) in three.nodes().iter().zip([-r, 0.0, r]) {
        assert!((got - want).abs() < 1e-15);
    }
    for (got, want) in three.weights().iter().zip([sqrt_pi / 6.0, 2.0 * sqrt_pi / 3.0, sqrt_pi / 6.0]) {
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn large_rule_integrates_gaussian_moments() {
    // ∫ x^{2j} e^{-x²} dx = Γ(j + 1/2)
    let grid = gauss_hermite(64).unwrap();
    let mut gamma = std::f64::consts::PI.sqrt();
    for j in 0..20 {
        let got: f64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(x, w)| w * x.powi(2 * j))
            .sum();
        assert!((got - gamma).abs() <= 1e-12 * gamma, "moment {j}: {got} vs {gamma}");
        gamma *= j as f64 + 0.5;
    }
}
