use std::sync::Arc;

use lmp_core::families::PhiFamily;
use lmp_core::lambda::{
    cos_r, determinant_form, lambda1v, lambda2v_convolution, lambda2v_series, lambda2v_umbral, lambda_matrix_2var,
    scalar_lambda, to_xpoly, verify_difference, verify_egf, verify_integral, verify_ogf, Truncation,
};
use lmp_core::matfun::{ExactWeights, MpWeights};
use lmp_core::mp::{self, MpComplex};
use lmp_core::qlambda::{q_gamma, q_hermite_lambda, verify_q_limit, QContext, QExactWeights};
use lmp_core::scalar::Scalar;
use lmp_core::umbral::shift_power;
use num_rational::BigRational;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn scalar(m: lmp_core::matfun::Mat<BigRational>) -> BigRational {
    m.as_scalar().unwrap().clone()
}

#[test]
fn cube_of_shift_base_matches_golden_dump() {
    let golden = include_str!("golden/shift_base_cube.txt");
    assert_eq!(shift_power(3).unwrap().to_string(), golden);
}

#[test]
fn one_variable_and_two_variable_small_cases() {
    let w = ExactWeights::new(1).unwrap();
    let one = q(1, 1);
    assert_eq!(scalar(lambda1v(0, &one, &w).unwrap()), q(1, 2));
    assert_eq!(scalar(lambda1v(1, &one, &w).unwrap()), q(5, 12));
    assert_eq!(scalar(lambda_matrix_2var(1, &one, &one, &w).unwrap()), q(5, 12));
    let (x, y) = (q(3, 5), q(-7, 4));
    assert_eq!(scalar(lambda_matrix_2var(4, &q(0, 1), &y, &w).unwrap()), q(1, 2) * y.clone() * y.clone() * y.clone() * y.clone());
    let zero = ExactWeights::formal_zero();
    assert_eq!(scalar(lambda_matrix_2var(1, &x, &y, &zero).unwrap()), y.clone() - x.clone() / q(2, 1));
    assert_eq!(scalar_lambda(0, &x, &y), q(1, 1));
    assert_eq!(scalar_lambda(2, &x, &y), y.clone() * y.clone() - x.clone() * y.clone() + x.clone() * x.clone() / q(12, 1));
    assert_eq!(scalar(cos_r(&q(0, 1), &w, Truncation::Terms(4)).unwrap()), q(1, 2));
}

#[test]
fn truncated_exponential_first_degree() {
    let w = ExactWeights::new(1).unwrap();
    let one = q(1, 1);
    let fam = PhiFamily::TruncatedExp;
    for v in [
        lambda2v_series(1, &one, &one, &w, &fam).unwrap(),
        lambda2v_convolution(1, &one, &one, &w, &fam).unwrap(),
        lambda2v_umbral(1, &one, &one, &w, &fam).unwrap(),
        determinant_form(1, &one, &one, &w, &fam).unwrap(),
    ] {
        assert_eq!(scalar(v), q(11, 12));
    }
    assert_eq!(scalar(lambda2v_series(0, &one, &one, &w, &fam).unwrap()), q(1, 2));
    let c = to_xpoly(1, &one, &w, &fam).unwrap().scalar_coeffs().unwrap();
    assert_eq!(c, vec![q(5, 12), q(1, 2)]);
    // Determinant at n = 1 reduces to λ₁(x) + C₀·y.
    let (x, y) = (q(2, 7), q(-3, 2));
    let det = scalar(determinant_form(1, &x, &y, &w, &fam).unwrap());
    assert_eq!(det, scalar(lambda1v(1, &x, &w).unwrap()) + q(1, 2) * y);
}

#[test]
fn difference_bound_off_by_one_shows_at_degree_zero() {
    let w = ExactWeights::new(1).unwrap();
    let fam = PhiFamily::TruncatedExp;
    let (x, z, y) = (q(1, 3), q(2, 5), q(1, 1));
    let reports = verify_difference(0, &x, &z, &y, &w, &fam).unwrap();
    assert!(reports[0].pass && !reports[0].informational);
    assert!(!reports[1].pass && reports[1].informational && !reports[1].counts_as_failure());
    let integral = verify_integral(0, &x, &z, &y, &w, &fam).unwrap();
    assert!(integral[0].pass);
    assert!(!integral[1].pass);
    let at_zero = verify_difference(3, &x, &q(0, 1), &y, &w, &fam).unwrap();
    assert!(at_zero.iter().all(|r| r.pass));
}

#[test]
fn exponential_generating_function_truncation_order() {
    let bits = 256;
    mp::with_precision(bits, || {
        let w = MpWeights::new(q(1, 1), bits).unwrap();
        let one = MpComplex::from_rational(&q(1, 1));
        let ts = [MpComplex::from_rational(&q(1, 10)), MpComplex::from_rational(&q(1, 20))];
        for fam in [PhiFamily::TruncatedExp, PhiFamily::Hermite] {
            let gf = verify_egf(8, &one, &one, &w, &fam, &ts).unwrap();
            assert!(gf.report.pass, "{fam}: {:?}", gf.report.note);
            assert!(gf.orders.iter().all(|p| (p - 9.0).abs() <= 0.5));
        }
        let origin = verify_egf(8, &one, &one, &w, &PhiFamily::TruncatedExp, &[MpComplex::from_rational(&q(0, 1))]).unwrap();
        assert_eq!(origin.residuals[0].1, 0.0);
    });
}

#[test]
fn ordinary_generating_function_truncation_order() {
    let w = ExactWeights::new(1).unwrap();
    // λ₉(1,1) ≈ 0.004 is nearly a zero of the sequence, so the t¹⁰ term still
    // dominates the tail at t = 0.1; the order shows once t is small enough.
    let pre = verify_ogf(8, &q(1, 1), &q(1, 1), &w, &[q(1, 10), q(1, 20)]).unwrap();
    assert!(pre.orders[0] < 8.5);
    let gf = verify_ogf(8, &q(1, 1), &q(1, 1), &w, &[q(1, 100), q(1, 200)]).unwrap();
    assert!(gf.report.pass, "{:?}", gf.report.note);
    let other = verify_ogf(8, &q(1, 2), &q(1, 1), &w, &[q(1, 10), q(1, 20)]).unwrap();
    assert!(other.report.pass, "{:?}", other.report.note);
}

#[test]
fn q_factorials_match_closed_product() {
    for qq in [q(1, 2), q(2, 3), q(9, 10)] {
        let ctx = QContext::<BigRational>::from_rational(&qq).unwrap();
        let mut qk = q(1, 1);
        let mut closed = q(1, 1);
        for n in 1..=30u64 {
            qk *= qq.clone();
            closed *= (q(1, 1) - qk.clone()) / (q(1, 1) - qq.clone());
            assert_eq!(q_gamma(n + 1, &ctx).unwrap(), closed);
        }
    }
}

#[test]
fn q_hermite_lambda_hand_value() {
    let ctx = Arc::new(QContext::<BigRational>::from_rational(&q(1, 2)).unwrap());
    let w = QExactWeights::new(1, ctx.clone()).unwrap();
    // W₀ = 1/[2]_q, W₁ = 1/([3]_q·[4]_q) from the q-factorials directly.
    let b = |k: i64| (0..k).fold(q(0, 1), |acc, i| acc + (0..i).fold(q(1, 1), |p, _| p * q(1, 2)));
    let expected = q(1, 1) / b(2) - q(1, 1) / (b(3) * b(4));
    assert_eq!(expected, q(38, 105));
    let v = q_hermite_lambda(1, &q(1, 1), &q(5, 3), &w, &ctx).unwrap();
    assert_eq!(v.as_scalar().unwrap(), &expected);
}

#[test]
fn q_deformation_approaches_classical_values() {
    let qq = q(999_999, 1_000_000);
    for r in [1, 2] {
        let report = verify_q_limit(8, &q(1, 2), &q(3, 4), r, &qq, 1e-4).unwrap();
        assert!(report.pass, "R={r}: {} {:?}", report.max_rel, report.note);
    }
}

#[test]
fn q_deformation_gap_at_large_parameter_is_first_order() {
    // [k]_q/k = 1 − (k−1)h/2 + O(h²) with h = 1 − q, so the zeroth weight
    // [15]_q!/[30]_q! exceeds 15!/30! by a relative 165h to first order,
    // whatever x and y are.
    let h = 1e-6;
    let report = verify_q_limit(8, &q(1, 2), &q(3, 4), 15, &q(999_999, 1_000_000), 1e-4).unwrap();
    let predicted = 165.0 * h;
    let zeroth = verify_q_limit(0, &q(1, 2), &q(3, 4), 15, &q(999_999, 1_000_000), 1.0).unwrap();
    assert!((zeroth.max_rel - predicted).abs() < 1e-3 * predicted, "{}", zeroth.max_rel);
    assert!(report.max_rel > 1e-4 && report.max_rel < 2e-4);
    assert!(!report.pass);
    let coarser = verify_q_limit(8, &q(1, 2), &q(3, 4), 15, &q(99_999, 100_000), 1.0).unwrap();
    assert!(coarser.pass, "{:?}", coarser.note);
}
