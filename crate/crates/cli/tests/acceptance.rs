//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero when a criterion fails, unless that criterion is listed in
//! `KNOWN_UNATTAINABLE` with the reason; such failures are still printed as
//! FAIL.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use clap::Parser;
use lmp_cli::{run, Cli, RunConfig};
use lmp_core::families::{CustomTable, PhiFamily};
use lmp_core::lambda::{
    determinant_form, lambda1v, lambda2v_convolution, lambda2v_series, lambda2v_umbral, lambda_matrix_2var,
    scalar_lambda, verify_egf, verify_monomiality,
};
use lmp_core::matfun::{inverse, CMatrix, EigenWeights, ExactWeights, MpWeights};
use lmp_core::mp::{self, MpComplex};
use lmp_core::qlambda::{q_gamma, q_hermite, q_hermite_lambda, verify_q_limit, QContext, QExactWeights};
use lmp_core::scalar::Scalar;
use lmp_core::zeros::{zeros_of_lambda, zeros_of_q_lambda, ZeroSet, ZeroSource, RESIDUAL_BOUND};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Criteria that cannot be met as stated, with the reason. Their lines still
/// read FAIL; they only do not abort the run.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    7,
    "at R = 15 the q-deformed weight [15]_q!/[30]_q! differs from 15!/30! by a relative 165·(1-q) \
     to first order, i.e. 1.65e-4 at q = 1-1e-6, above the 1e-4 bound",
)];

const R_VALUES: [u64; 4] = [1, 2, 3, 15];

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn families() -> Vec<PhiFamily> {
    vec![
        PhiFamily::GouldHopper(3),
        PhiFamily::Hermite,
        PhiFamily::Laguerre,
        PhiFamily::GeneralizedLaguerre(2),
        PhiFamily::TruncatedExp,
    ]
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    q(rng.random_range(-30..=30), rng.random_range(1..=12))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn four_way_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c4d50);
    let points: Vec<(BigRational, BigRational)> = (0..50).map(|_| (random_rational(&mut rng), random_rational(&mut rng))).collect();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for r in R_VALUES {
        let w = ExactWeights::new(r).unwrap();
        for fam in families() {
            for (x, y) in &points {
                for n in 0..=12 {
                    let series = lambda2v_series(n, x, y, &w, &fam).unwrap();
                    let others = [
                        lambda2v_convolution(n, x, y, &w, &fam).unwrap(),
                        lambda2v_umbral(n, x, y, &w, &fam).unwrap(),
                        determinant_form(n, x, y, &w, &fam).unwrap(),
                    ];
                    cases += 1;
                    if others.iter().any(|o| *o != series) {
                        mismatches.push(format!("{fam} R={r} n={n}"));
                    }
                }
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{cases} cases, {} mismatches {:?}", mismatches.len(), mismatches.first()))
}

/// `P·diag(λ)·P⁻¹` with `Re λ > 0` and `P` a perturbed identity.
fn random_positive_stable(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let d: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.random_range(0.3..4.0), rng.random_range(-1.5..1.5))).collect();
    let mut p = CMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            let e = Complex64::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
            p.set(i, j, p.get(i, j) + e);
        }
    }
    let pinv = inverse(&p).expect("perturbed identity is invertible");
    &(&p * &CMatrix::diag(&d)) * &pinv
}

fn matrix_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5452);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for trial in 0..24 {
        let dim = if trial % 2 == 0 { 2 } else { 3 };
        let r = random_positive_stable(&mut rng, dim);
        let w = EigenWeights::new(&r).unwrap();
        let x = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
        let y = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
        for fam in families() {
            for n in 0..=12 {
                let a = lambda2v_series(n, &x, &y, &w, &fam).unwrap();
                let b = lambda2v_convolution(n, &x, &y, &w, &fam).unwrap();
                let scale = a.frobenius_norm().max(b.frobenius_norm()).max(f64::MIN_POSITIVE);
                worst = worst.max((&a - &b).frobenius_norm() / scale);
                cases += 1;
            }
        }
    }
    outcome(worst < 1e-10, format!("{cases} cases, worst relative gap {worst:.2e} (bound 1e-10)"))
}

fn cli_json(args: &[&str]) -> (Value, bool) {
    let cli = Cli::try_parse_from(std::iter::once("lmp").chain(args.iter().copied())).expect("valid arguments");
    let cfg = RunConfig::from_command(&cli.command).expect("valid configuration");
    let out = run(&cfg).expect("run succeeds");
    (serde_json::from_str(&out.output).expect("JSON output"), out.verification_failed)
}

fn identity_suite() -> Outcome {
    let suites = "series-eq,derivative,shift,double-shift,difference,integral,determinant,triangular,monomiality";
    let mut reports = 0;
    let mut failures = Vec::new();
    let mut stated_bound_fails_at_zero = true;
    for fam in ["gh:3", "hermite", "lag", "glag:2", "te"] {
        for r in ["1", "2", "15"] {
            let (json, failed) =
                cli_json(&["verify", "--suite", suites, "--family", fam, "--n-max", "10", "--R", r, "--mode", "exact", "--format", "json"]);
            let items = json.as_array().expect("array of reports");
            reports += items.len();
            if failed {
                for item in items.iter().filter(|i| i["pass"] == false && i["informational"] == false) {
                    failures.push(format!("{fam} R={r} {} {}", item["identity"], item["params"]["n"]));
                }
            }
            for item in items {
                let stated = item["identity"].as_str().is_some_and(|s| s.ends_with("-stated-bound"));
                if stated && item["params"]["n"] == "0" {
                    stated_bound_fails_at_zero &= item["pass"] == false && item["informational"] == true;
                }
            }
        }
    }
    outcome(
        failures.is_empty() && stated_bound_fails_at_zero,
        format!(
            "{reports} reports, {} failures {:?}; stated upper bound fails at n=0 as documented: {stated_bound_fails_at_zero}",
            failures.len(),
            failures.first()
        ),
    )
}

fn generating_function_order() -> Outcome {
    let bits = 256;
    mp::with_precision(bits, || {
        let w = MpWeights::new(q(1, 1), bits).unwrap();
        let one = MpComplex::from_rational(&q(1, 1));
        let ts = [MpComplex::from_rational(&q(1, 10)), MpComplex::from_rational(&q(1, 20))];
        let mut pass = true;
        let mut notes = Vec::new();
        for fam in [PhiFamily::TruncatedExp, PhiFamily::Hermite] {
            let gf = verify_egf(8, &one, &one, &w, &fam, &ts).unwrap();
            pass &= !gf.orders.is_empty() && gf.orders.iter().all(|p| (p - 9.0).abs() <= 0.5);
            notes.push(format!("{fam}: {:?}", gf.orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>()));
        }
        outcome(pass, format!("fitted orders {} (expected 9 +/- 0.5)", notes.join(", ")))
    })
}

fn degenerations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xde9);
    let zero = ExactWeights::formal_zero();
    let mut a = true;
    let mut b = true;
    let mut c = true;
    for _ in 0..20 {
        let (x, y) = (random_rational(&mut rng), random_rational(&mut rng));
        for n in 0..=15 {
            a &= lambda_matrix_2var(n, &x, &y, &zero).unwrap().as_scalar() == Some(&scalar_lambda(n, &x, &y));
        }
        for r in R_VALUES {
            let w = ExactWeights::new(r).unwrap();
            let one = q(1, 1);
            for n in 0..=10 {
                let trivial = PhiFamily::Custom(
                    CustomTable::new(std::iter::once((one.clone(), 0)).chain((1..=n).map(|_| (q(0, 1), 0))).collect()).unwrap(),
                );
                let lam = lambda1v(n, &x, &w).unwrap();
                b &= lambda_matrix_2var(n, &one, &x, &w).unwrap() == lam;
                b &= lambda2v_series(n, &x, &y, &w, &trivial).unwrap() == lam;
            }
            for n in 0..=12 {
                c &= lambda2v_series(n, &x, &y, &w, &PhiFamily::GouldHopper(2)).unwrap()
                    == lambda2v_series(n, &x, &y, &w, &PhiFamily::Hermite).unwrap();
            }
        }
    }
    outcome(a && b && c, format!("formal zero: {a}, one-variable reduction: {b}, gh:2 = hermite: {c}"))
}

fn monomiality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x303);
    let mut failures = Vec::new();
    let mut count = 0;
    for r in R_VALUES {
        let w = ExactWeights::new(r).unwrap();
        for fam in families() {
            let (x, y) = (random_rational(&mut rng), random_rational(&mut rng));
            let report = verify_monomiality(12, &x, &y, &w, &fam).unwrap();
            count += 1;
            if !report.pass {
                failures.push(format!("{fam} R={r}"));
            }
        }
    }
    outcome(failures.is_empty(), format!("{count} family/R pairs up to n=12, failures {failures:?}"))
}

fn q_suite() -> Outcome {
    // Γ_q(n+1) against the closed product Π (1 − q^k)/(1 − q).
    let mut gamma_ok = true;
    for qq in [q(1, 2), q(2, 3), q(7, 9), q(99, 100)] {
        let ctx = QContext::<BigRational>::from_rational(&qq).unwrap();
        let (mut qk, mut closed) = (q(1, 1), q(1, 1));
        for n in 1..=30u64 {
            qk *= qq.clone();
            closed *= (q(1, 1) - qk.clone()) / (q(1, 1) - qq.clone());
            gamma_ok &= q_gamma(n + 1, &ctx).unwrap() == closed;
        }
        gamma_ok &= q_gamma(1, &ctx).unwrap() == q(1, 1);
    }

    // H_{2,q}(x, y) = x² + (1 + q)y: both sides have degree ≤ 2 in each
    // variable, so agreement on a 3×3 grid is agreement as polynomials.
    let mut h2_ok = true;
    for qq in [q(1, 2), q(1, 3), q(5, 7)] {
        let ctx = QContext::<BigRational>::from_rational(&qq).unwrap();
        for xi in [-1, 0, 2] {
            for yi in [-3, 1, 4] {
                let (x, y) = (q(xi, 1), q(yi, 1));
                h2_ok &= q_hermite(2, &x, &y, &ctx) == x.clone() * x.clone() + (q(1, 1) + qq.clone()) * y;
            }
        }
    }

    let mut limit = Vec::new();
    let mut limit_ok = true;
    for r in [1, 2, 15] {
        let report = verify_q_limit(8, &q(1, 2), &q(3, 4), r, &q(999_999, 1_000_000), 1e-4).unwrap();
        limit_ok &= report.pass;
        limit.push(format!(
            "R={r}: {} rel {:.3e}, {}",
            if report.pass { "ok" } else { "FAIL" },
            report.max_rel,
            report.note.unwrap_or_default()
        ));
    }

    // 1/[2]_q − 1/([3]_q·[4]_q) at q = 1/2, from the brackets directly.
    let half = q(1, 2);
    let bracket = |k: i64| (0..k).fold(q(0, 1), |acc, i| acc + (0..i).fold(q(1, 1), |p, _| p * half.clone()));
    let oracle = q(1, 1) / bracket(2) - q(1, 1) / (bracket(3) * bracket(4));
    let ctx = Arc::new(QContext::<BigRational>::from_rational(&half).unwrap());
    let w = QExactWeights::new(1, ctx.clone()).unwrap();
    let hand = q_hermite_lambda(1, &q(1, 1), &q(7, 5), &w, &ctx).unwrap();
    let hand_ok = oracle == q(38, 105) && hand.as_scalar() == Some(&oracle);

    outcome(
        gamma_ok && h2_ok && limit_ok && hand_ok,
        format!(
            "q-factorials: {gamma_ok}, H_2,q: {h2_ok}, 38/105: {hand_ok}, limit at q=1-1e-6 [{}]",
            limit.join("; ")
        ),
    )
}

fn check_zero_set(label: &str, set: &ZeroSet, coeffs: &[MpComplex]) -> (bool, String) {
    let n = coeffs.len() - 1;
    let roots = set.roots_f64();
    let count_ok = roots.len() == n;
    let residual_ok = set.max_residual() < RESIDUAL_BOUND;
    let conj_ok = roots.iter().all(|z| roots.iter().any(|w| (w - z.conj()).norm() <= 1e-8 * z.norm().max(1.0)));
    // Σ roots = −c_{n−1}/c_n, summed at working precision.
    let expected = -(coeffs[n - 1].clone() / coeffs[n].clone());
    let sum = set.roots.iter().fold(MpComplex::from_rational_bits(&q(0, 1), set.bits), |a, b| a + b.clone());
    let vieta_rel = (sum - expected.clone()).to_complex64().norm() / expected.to_complex64().norm().max(1.0);
    let ok = count_ok && residual_ok && conj_ok && vieta_rel <= 1e-6;
    (
        ok,
        format!(
            "{label}: {} roots, max residual {:.1e}, conjugate-closed {conj_ok}, Vieta {vieta_rel:.1e}",
            roots.len(),
            set.max_residual()
        ),
    )
}

fn figure_pipelines() -> Outcome {
    let configs: Vec<(&str, ZeroSource, usize)> = vec![
        ("gh:4 n=45 R=20 y=6", ZeroSource::Classical { fam: PhiFamily::GouldHopper(4), r: q(20, 1), y: q(6, 1) }, 45),
        ("glag:8 n=30 R=25 y=1", ZeroSource::Classical { fam: PhiFamily::GeneralizedLaguerre(8), r: q(25, 1), y: q(1, 1) }, 30),
        ("te n=35 R=10 y=1", ZeroSource::Classical { fam: PhiFamily::TruncatedExp, r: q(10, 1), y: q(1, 1) }, 35),
        ("q=1/2 n=40 R=20 y=1", ZeroSource::QHermite { r: 20, y: q(1, 1), q: q(1, 2) }, 40),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (label, source, n) in configs {
        let start = Instant::now();
        let set = match &source {
            ZeroSource::Classical { fam, r, y } => zeros_of_lambda(fam, n, r, y, Some(256)),
            ZeroSource::QHermite { r, y, q } => zeros_of_q_lambda(n, *r, y, q, Some(256)),
        }
        .unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let coeffs = source.coefficients(n, set.bits).unwrap();
        let (ok, note) = check_zero_set(label, &set, &coeffs);
        pass &= ok && elapsed <= 120.0;
        notes.push(format!("{note}, {elapsed:.1} s"));
    }
    outcome(pass, notes.join("; "))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_lmp");
    let dir = tempfile::tempdir().expect("temporary directory");
    let runs: Vec<Vec<&str>> = vec![
        vec!["eval", "--family", "te", "--n-range", "0:8", "--R", "1", "--x", "1", "--y", "1", "--format", "json"],
        vec!["coeffs", "--family", "glag:3", "--n", "9", "--R", "2", "--y", "3/7", "--mode", "mp:160"],
        vec!["verify", "--suite", "all", "--family", "gh:2", "--n-max", "10", "--R", "2", "--mode", "exact"],
        vec!["verify", "--suite", "all", "--family", "lag", "--n-max", "6", "--R", "5/2", "--mode", "f64"],
        vec!["zeros", "--family", "gh:4", "--n", "45", "--R", "20", "--y", "6", "--mode", "mp:256"],
        vec!["stacks", "--family", "te", "--n-range", "1:12", "--R", "3", "--y", "1"],
        vec!["real-zeros", "--family", "hermite", "--n-range", "1:15", "--R", "2", "--y", "-1"],
        vec!["surface", "--family", "hermite", "--n", "4", "--R", "3/2", "--mode", "f64", "--resolution", "21"],
        vec!["qzeros", "--n", "12", "--R", "3", "--y", "1", "--q", "1/2"],
        vec!["qeval", "--n-range", "0:6", "--R", "2", "--x", "1/3", "--y", "5/3", "--q", "2/3"],
    ];
    let mut differing = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let path = dir.path().join(format!("run{i}_{k}.out"));
                let status = Command::new(bin).args(args).arg("--out").arg(&path).status().expect("spawn lmp");
                assert!(status.code().is_some_and(|c| c == 0 || c == 2), "{args:?} failed: {status}");
                std::fs::read(&path).expect("output written")
            })
            .collect();
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            differing.push(args[0]);
        }
    }
    outcome(differing.is_empty(), format!("{} configurations run twice, differing: {differing:?}", runs.len()))
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome, f64)> = vec![
        (1, "four-way construction agreement", four_way_agreement, 60.0),
        (2, "matrix-parameter series vs convolution", matrix_agreement, 30.0),
        (3, "identity suite, exact", identity_suite, 60.0),
        (4, "generating-function truncation order", generating_function_order, f64::INFINITY),
        (5, "degenerations", degenerations, f64::INFINITY),
        (6, "monomiality", monomiality, f64::INFINITY),
        (7, "q-suite", q_suite, f64::INFINITY),
        (8, "figure-pipeline self-consistency", figure_pipelines, f64::INFINITY),
        (9, "determinism", determinism, f64::INFINITY),
    ];
    let mut blocking = Vec::new();
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed().as_secs_f64();
        let within_budget = elapsed <= budget;
        let pass = out.pass && within_budget;
        let budget_note = if budget.is_finite() { format!(", budget {budget:.0} s") } else { String::new() };
        println!(
            "criterion {id} [{name}]: {} ({elapsed:.1} s{budget_note}) {}",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !pass {
            match KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id) {
                Some((_, why)) => println!("    known unattainable: {why}"),
                None => blocking.push(id),
            }
        }
    }
    if !blocking.is_empty() {
        eprintln!("failing criteria: {blocking:?}");
        std::process::exit(1);
    }
}
