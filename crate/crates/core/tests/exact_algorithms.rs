use permlab::corpus::{random_binary, random_real};
use permlab::estimator::stream_rng;
use permlab::exact::gray::{WalkMode, WalkPlan};
use permlab::exact::{
    per_gauge_z2_full, per_gauge_zp_full, per_glynn, per_naive, per_ryser, ExactResult,
};
use permlab::grassmann::{berezin_top_coefficient, zeon_exp_quadratic};
use permlab::{Matrix, Result, Scalar};

type Algorithm = (&'static str, Box<dyn Fn(&Matrix) -> Result<ExactResult>>);

fn algorithms() -> Vec<Algorithm> {
    vec![
        ("ryser", Box::new(per_ryser)),
        ("glynn", Box::new(per_glynn)),
        ("gauge-z2", Box::new(per_gauge_z2_full)),
        ("gauge-zp p=2", Box::new(|a| per_gauge_zp_full(a, 2))),
        ("gauge-zp p=3", Box::new(|a| per_gauge_zp_full(a, 3))),
        ("gauge-zp p=4", Box::new(|a| per_gauge_zp_full(a, 4))),
    ]
}

fn rel(got: Scalar, want: Scalar) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

#[test]
fn all_algorithms_agree_with_the_permutation_sum() {
    let algs = algorithms();
    let mut rng = stream_rng(2024, 0);
    for n in 2..=8 {
        for _ in 0..100 {
            let a = random_real(n, &mut rng);
            let want = per_naive(&a).unwrap().to_complex();
            for (name, f) in &algs {
                let got = f(&a).unwrap().to_complex();
                assert!(rel(got, want) <= 1e-9, "{name} n={n}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn row_column_permutations_and_transpose() {
    let algs = algorithms();
    let mut rng = stream_rng(7, 0);
    for n in 3..=6 {
        let a = random_real(n, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(1);
        perm.swap(0, n - 1);
        let variants = [a.permute_rows(&perm), a.permute_cols(&perm), a.transpose()];
        let base = per_naive(&a).unwrap();
        for v in &variants {
            // Same multiset of products, but summed in another order.
            let naive = per_naive(v).unwrap().to_complex();
            assert!(rel(naive, base.to_complex()) <= 1e-12);
            for (name, f) in &algs {
                let got = f(v).unwrap().to_complex();
                assert!(rel(got, base.to_complex()) <= 1e-10, "{name} n={n}");
            }
        }
    }
}

#[test]
fn permutation_invariance_is_exact_for_integer_matrices() {
    let mut rng = stream_rng(8, 0);
    for _ in 0..20 {
        let a = random_binary(6, 0.5, &mut rng);
        let perm = [3, 0, 5, 1, 4, 2];
        let base = per_naive(&a).unwrap().to_f64();
        assert_eq!(per_naive(&a.permute_rows(&perm)).unwrap().to_f64(), base);
        assert_eq!(per_naive(&a.permute_cols(&perm)).unwrap().to_f64(), base);
        assert_eq!(per_naive(&a.transpose()).unwrap().to_f64(), base);
    }
}

#[test]
fn scaling_a_row_scales_the_permanent() {
    let algs = algorithms();
    let mut rng = stream_rng(9, 0);
    for n in 2..=6 {
        let a = random_real(n, &mut rng);
        let c = 2.75;
        let mut b = a.clone();
        for j in 0..n {
            b[(1, j)] *= c;
        }
        let base = per_naive(&a).unwrap().to_complex();
        assert!(rel(per_naive(&b).unwrap().to_complex(), base * c) <= 1e-10);
        for (name, f) in &algs {
            let got = f(&b).unwrap().to_complex();
            assert!(rel(got, base * c) <= 1e-10, "{name} n={n}");
        }
    }
}

#[test]
fn zero_row_gives_zero() {
    let mut rng = stream_rng(10, 0);
    for n in 2..=8 {
        let mut a = random_real(n, &mut rng);
        for j in 0..n {
            a[(n / 2, j)] = Scalar::new(0.0, 0.0);
        }
        assert_eq!(per_naive(&a).unwrap().to_complex(), Scalar::new(0.0, 0.0));
        assert_eq!(per_ryser(&a).unwrap().to_complex(), Scalar::new(0.0, 0.0));
        let bound = 1e-10 * a.max_abs().powi(n as i32);
        assert!(per_glynn(&a).unwrap().to_complex().norm() < bound);
    }
}

#[test]
fn incremental_sums_match_fresh_sums() {
    let mut rng = stream_rng(11, 0);
    let a = random_real(16, &mut rng);
    for mode in [WalkMode::GlynnSigns, WalkMode::Subsets] {
        let plan = WalkPlan::<f64>::new(&a, mode);
        let mut w = plan.walker(0);
        let mut checked = 0;
        while w.index() + 1 < plan.len() {
            w.advance();
            if w.index() % 1000 == 0 {
                let fresh = plan.fresh_sums(w.code());
                for (x, y) in w.sums().iter().zip(&fresh) {
                    assert!((x - y).abs() <= 1e-9, "{mode:?} step {}", w.index());
                }
                checked += 1;
            }
        }
        assert!(checked >= 32);
    }
}

#[test]
fn complex_matrices_agree() {
    let mut rng = stream_rng(12, 0);
    for n in 2..=6 {
        let re = random_real(n, &mut rng);
        let im = random_real(n, &mut rng);
        let data = re
            .data()
            .iter()
            .zip(im.data())
            .map(|(x, y)| Scalar::new(x.re, y.re))
            .collect();
        let a = Matrix::from_vec(n, n, data).unwrap();
        let want = per_naive(&a).unwrap().to_complex();
        for (name, f) in &algorithms() {
            assert!(
                rel(f(&a).unwrap().to_complex(), want) <= 1e-9,
                "{name} n={n}"
            );
        }
    }
}

#[test]
fn berezin_expansion_reproduces_the_permanent() {
    let vals = [-1.0, 0.0, 1.0, 2.0];
    for k in 0..256usize {
        let e: Vec<f64> = (0..4).map(|b| vals[(k >> (2 * b)) & 3]).collect();
        let a = Matrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]);
        let got = berezin_top_coefficient(&zeon_exp_quadratic(&a).unwrap());
        let want = per_naive(&a).unwrap().to_complex();
        assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
    }
    let mut rng = stream_rng(13, 0);
    for n in [3, 4] {
        for _ in 0..50 {
            let a = random_real(n, &mut rng);
            let got = berezin_top_coefficient(&zeon_exp_quadratic(&a).unwrap());
            let want = per_naive(&a).unwrap().to_complex();
            assert!(rel(got, want) <= 1e-10, "n={n}: {got} vs {want}");
        }
    }
}
