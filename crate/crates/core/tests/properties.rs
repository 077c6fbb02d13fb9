use lmp_core::families::{CustomTable, PhiFamily};
use lmp_core::lambda::{
    determinant_form, lambda1v, lambda2v_convolution, lambda2v_series, lambda2v_umbral, lambda_matrix_2var, scalar_lambda,
    to_xpoly,
};
use lmp_core::matfun::{gamma_weight, inverse, CMatrix, EigenWeights, ExactWeights, GammaWeights, Mat};
use lmp_core::qlambda::{nwa_expand, q_binomial, QContext};
use lmp_core::scalar::{binomial, factorial, rational_to_f64};
use lmp_core::umbral::{umul, UmbralExpr};
use lmp_core::zeros::roots_rational;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=9).prop_map(|(p, d)| BigRational::new(p.into(), d.into()))
}

fn builtin() -> impl Strategy<Value = PhiFamily> {
    prop_oneof![
        (1u32..=4).prop_map(PhiFamily::GouldHopper),
        Just(PhiFamily::Hermite),
        Just(PhiFamily::Laguerre),
        (1u32..=4).prop_map(PhiFamily::GeneralizedLaguerre),
        Just(PhiFamily::TruncatedExp),
    ]
}

fn umbral_expr() -> impl Strategy<Value = UmbralExpr> {
    prop::collection::vec(((-5i64..=5), 0u32..3, 0u32..3, 0u32..3), 0..5).prop_map(|terms| {
        terms.into_iter().fold(UmbralExpr::zero(), |acc, (c, a, b, e)| {
            &acc + &UmbralExpr::monomial(BigRational::from_integer(c.into()), (a, b, e))
        })
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `P·diag(d)·P⁻¹` with `P = I + E`, `E` small, so `P` is well conditioned.
fn diagonalizable(dim: usize) -> impl Strategy<Value = CMatrix> {
    (
        prop::collection::vec((0.5f64..3.0, -1.0f64..1.0), dim),
        prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), dim * dim),
    )
        .prop_map(move |(d, e)| {
            let diag = CMatrix::diag(&d.iter().map(|&(re, im)| c(re, im)).collect::<Vec<_>>());
            let mut p = CMatrix::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let (re, im) = e[i * dim + j];
                    p.set(i, j, p.get(i, j) + c(re, im));
                }
            }
            let pinv = inverse(&p).expect("perturbed identity is invertible");
            &(&p * &diag) * &pinv
        })
}

fn rel_gap(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).frobenius_norm() / a.frobenius_norm().max(b.frobenius_norm()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn umbral_products_form_a_commutative_ring(a in umbral_expr(), b in umbral_expr(), e in umbral_expr()) {
        prop_assert_eq!(umul(&a, &b), umul(&b, &a));
        prop_assert_eq!(umul(&umul(&a, &b), &e), umul(&a, &umul(&b, &e)));
        prop_assert_eq!(umul(&a, &(&b + &e)), &umul(&a, &b) + &umul(&a, &e));
        prop_assert_eq!(umul(&a, &UmbralExpr::one()), a.clone());
        prop_assert!((&a - &a).is_empty());
    }

    #[test]
    fn four_constructions_agree_exactly(fam in builtin(), n in 0usize..=9, r in 1u64..=4, x in rat(), y in rat()) {
        let w = ExactWeights::new(r).unwrap();
        let series = lambda2v_series(n, &x, &y, &w, &fam).unwrap();
        prop_assert_eq!(&lambda2v_convolution(n, &x, &y, &w, &fam).unwrap(), &series);
        prop_assert_eq!(&lambda2v_umbral(n, &x, &y, &w, &fam).unwrap(), &series);
        prop_assert_eq!(&determinant_form(n, &x, &y, &w, &fam).unwrap(), &series);
        prop_assert_eq!(&to_xpoly(n, &y, &w, &fam).unwrap().eval(&x), &series);
    }

    #[test]
    fn gould_hopper_two_is_hermite(n in 0usize..=12, r in 1u64..=5, x in rat(), y in rat()) {
        let w = ExactWeights::new(r).unwrap();
        prop_assert_eq!(
            lambda2v_series(n, &x, &y, &w, &PhiFamily::GouldHopper(2)).unwrap(),
            lambda2v_series(n, &x, &y, &w, &PhiFamily::Hermite).unwrap()
        );
    }

    #[test]
    fn formal_zero_parameter_gives_scalar_polynomial(n in 0usize..=15, x in rat(), y in rat()) {
        let w = ExactWeights::formal_zero();
        let m = lambda_matrix_2var(n, &x, &y, &w).unwrap();
        prop_assert_eq!(m.as_scalar().unwrap(), &scalar_lambda(n, &x, &y));
    }

    #[test]
    fn trivial_family_reduces_to_one_variable(n in 0usize..=10, r in 1u64..=4, x in rat(), y in rat()) {
        let w = ExactWeights::new(r).unwrap();
        let one = BigRational::from_integer(1.into());
        let trivial = PhiFamily::Custom(CustomTable::new(
            std::iter::once((one.clone(), 0)).chain((1..=n).map(|_| (BigRational::from_integer(0.into()), 0))).collect(),
        ).unwrap());
        let lam = lambda1v(n, &x, &w).unwrap();
        prop_assert_eq!(&lambda2v_series(n, &x, &y, &w, &trivial).unwrap(), &lam);
        prop_assert_eq!(&lambda_matrix_2var(n, &one, &x, &w).unwrap(), &lam);
    }

    #[test]
    fn gaussian_binomial_pascal_and_symmetry(p in 1i64..=9, d in 1i64..=9, n in 1u64..=20) {
        prop_assume!(p <= d);
        let q = BigRational::new(p.into(), d.into());
        let ctx = QContext::<BigRational>::from_rational(&q).unwrap();
        for k in 0..=n {
            let v = q_binomial(n, k, &ctx).unwrap();
            prop_assert_eq!(&v, &q_binomial(n, n - k, &ctx).unwrap());
            if k >= 1 && k < n {
                let qk = (0..k).fold(BigRational::from_integer(1.into()), |acc, _| acc * q.clone());
                let rhs = q_binomial(n - 1, k - 1, &ctx).unwrap() + qk * q_binomial(n - 1, k, &ctx).unwrap();
                prop_assert_eq!(&v, &rhs);
            }
        }
    }

    #[test]
    fn q_addition_at_one_is_multinomial(n in 0u32..=12) {
        let ctx = QContext::<BigRational>::from_rational(&BigRational::from_integer(1.into())).unwrap();
        let e = nwa_expand(&["a", "b", "c"], n, &ctx).unwrap();
        let mut count = 0;
        for t in &e.terms {
            let (i, j, k) = (t.exponents[0] as u64, t.exponents[1] as u64, t.exponents[2] as u64);
            let multinomial = factorial(n as u64) / (factorial(i) * factorial(j) * factorial(k));
            prop_assert_eq!(&t.coeff, &BigRational::from_integer(multinomial));
            count += 1;
        }
        prop_assert_eq!(count, (n as usize + 1) * (n as usize + 2) / 2);
        let two = nwa_expand(&["a", "b"], n, &ctx).unwrap();
        for t in &two.terms {
            prop_assert_eq!(&t.coeff, &BigRational::from_integer(binomial(n as u64, t.exponents[0] as u64)));
        }
    }

    #[test]
    fn weights_commute_with_parameter(r in diagonalizable(3), j in 0usize..8) {
        let w = gamma_weight(&r, j).unwrap();
        let comm = r.commutator(&w);
        prop_assert!(comm.frobenius_norm() <= 1e-10 * r.frobenius_norm() * w.frobenius_norm());
    }

    #[test]
    fn weights_follow_similarity_by_permutation(r in diagonalizable(3), j in 0usize..6) {
        let perm = Mat::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ]).unwrap();
        let pt = inverse(&perm).unwrap();
        let permuted = &(&perm * &r) * &pt;
        let lhs = gamma_weight(&permuted, j).unwrap();
        let rhs = &(&perm * &gamma_weight(&r, j).unwrap()) * &pt;
        prop_assert!(rel_gap(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn scalar_parameter_embeds_into_matrix_path(r in 1u64..=15, j in 0usize..12) {
        let exact = ExactWeights::new(r).unwrap().rational(j);
        let float = EigenWeights::new(&CMatrix::scalar(c(r as f64, 0.0))).unwrap().weight(j).unwrap();
        let expected = rational_to_f64(&exact);
        prop_assert!((float.get(0, 0).re - expected).abs() <= 1e-12 * expected);
        prop_assert!(float.get(0, 0).im.abs() <= 1e-12 * expected);
    }

    #[test]
    fn matrix_parameter_series_matches_convolution(
        r in prop_oneof![diagonalizable(2), diagonalizable(3)],
        fam in builtin(),
        n in 0usize..=12,
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
    ) {
        let w = EigenWeights::new(&r).unwrap();
        let (x, y) = (c(x, 0.0), c(y, 0.0));
        let a = lambda2v_series(n, &x, &y, &w, &fam).unwrap();
        let b = lambda2v_convolution(n, &x, &y, &w, &fam).unwrap();
        prop_assert!(rel_gap(&a, &b) < 1e-10, "gap {}", rel_gap(&a, &b));
    }

    #[test]
    fn roots_recover_prescribed_zeros(zs in prop::collection::vec((-12i64..=12, 1i64..=4), 1..8)) {
        let targets: Vec<BigRational> = zs.iter().map(|&(p, d)| BigRational::new(p.into(), d.into())).collect();
        // Expand Π (x − t) into ascending coefficients.
        let mut coeffs = vec![BigRational::from_integer(1.into())];
        for t in &targets {
            let mut next = vec![BigRational::from_integer(0.into()); coeffs.len() + 1];
            for (k, ck) in coeffs.iter().enumerate() {
                next[k + 1] += ck.clone();
                next[k] -= ck.clone() * t.clone();
            }
            coeffs = next;
        }
        let set = roots_rational(&coeffs, 192).unwrap();
        prop_assert_eq!(set.roots.len(), targets.len());
        let mut expected: Vec<f64> = targets.iter().map(rational_to_f64).collect();
        expected.sort_by(f64::total_cmp);
        let found = set.roots_f64();
        // Multiple roots are only resolved to about eps^(1/m).
        for (z, t) in found.iter().zip(&expected) {
            prop_assert!((z - c(*t, 0.0)).norm() < 1e-6 * t.abs().max(1.0), "{} vs {}", z, t);
        }
        let sum: Complex64 = found.iter().sum();
        let n = coeffs.len() - 1;
        let vieta = -rational_to_f64(&(coeffs[n - 1].clone() / coeffs[n].clone()));
        prop_assert!((sum.re - vieta).abs() <= 1e-6 * vieta.abs().max(1.0));
    }
}
