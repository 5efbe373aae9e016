//! Runs the ten acceptance criteria, printing one PASS/FAIL line each, and
//! exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solk_core::dimgroup::{DGElement, DimensionGroup};
use solk_core::ktheory::{
    full_report, ruelle_stable_closed_form, ruelle_stable_from_unstable, ruelle_unstable_of_matrix,
    KGroups, ReportOptions,
};
use solk_core::linalg::{FGAbelianGroup, IntMatrix};
use solk_core::oracle::{oracle_positivity, oracle_snf, POSITIVITY_ITERATION_STEPS};
use solk_core::presentation::{adjacency_matrix, parse_presentation, GraphPresentation};
use solk_core::smale::{run_smale_checks, SmaleCheckOptions, SolenoidModel};
use solk_core::spectral::{char_poly, default_precision, perron_vectors, RationalInterval};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(name: &str) -> GraphPresentation {
    let text = std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file");
    parse_presentation(&text).expect("corpus parses")
}

fn corpus() -> Vec<(String, GraphPresentation)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sol"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name.clone(), load(&name))
        })
        .collect()
}

fn z() -> FGAbelianGroup {
    FGAbelianGroup::free(1)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow10(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(10).pow(k))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn criterion_1() -> Outcome {
    let mut worst = Duration::ZERO;
    let mut bad = Vec::new();
    for n in 2..=10u64 {
        let t = Instant::now();
        let r = full_report(&load(&format!("power{n}.sol")), &ReportOptions::default());
        worst = worst.max(t.elapsed());
        let want_ru = KGroups {
            k0: z().direct_sum(&FGAbelianGroup::cyclic(n - 1)),
            k1: z(),
        };
        let ok = r.ruelle_unstable.as_ref() == Some(&want_ru)
            && r.ruelle_stable
                .as_ref()
                .is_some_and(|rs| rs.iso_eq(&want_ru))
            && r.unstable
                .as_ref()
                .is_some_and(|u| u.k0.notation == format!("Z[1/{n}]") && u.k1 == z())
            && t.elapsed() < Duration::from_secs(1);
        if !ok {
            bad.push(n);
        }
    }
    outcome(
        bad.is_empty(),
        format!("n = 2..10, failing {bad:?}, slowest {}", secs(worst)),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let p = load("fib.sol");
    let r = full_report(&p, &ReportOptions::default());
    let elapsed = t.elapsed();
    let zz = KGroups { k0: z(), k1: z() };
    let ok = r.adjacency == IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])
        && r.ruelle_unstable.as_ref() == Some(&zz)
        && r.ruelle_stable.as_ref() == Some(&zz)
        && r.unstable
            .as_ref()
            .is_some_and(|u| u.k0.notation == "Z^2" && u.k0.finitely_generated && u.k1 == z())
        && elapsed < Duration::from_secs(1);
    outcome(
        ok,
        format!(
            "M = {}, Ru = Rs = (Z, Z), K0(U) = Z^2, {}",
            r.adjacency,
            secs(elapsed)
        ),
    )
}

fn random_irreducible(rng: &mut ChaCha8Rng) -> IntMatrix {
    loop {
        let n = rng.gen_range(1..=5);
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..=3)).collect())
            .collect();
        let m = IntMatrix::from_rows(&rows);
        if m.is_irreducible() && solk_core::spectral::is_expanding(&m) {
            return m;
        }
    }
}

fn residual_ok(
    m: &IntMatrix,
    lambda: &RationalInterval,
    v: &[RationalInterval],
    left: bool,
) -> bool {
    let n = m.rows();
    (0..n).all(|i| {
        let mut acc = RationalInterval::zero();
        for j in 0..n {
            let e = if left { &m[(j, i)] } else { &m[(i, j)] };
            acc = acc.add(&v[j].scale_int(e));
        }
        acc.sub(&lambda.mul(&v[i])).contains_zero()
    })
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let eps = BigRational::one() / pow10(12);
    let fib = adjacency_matrix(&load("fib.sol"));
    let d = perron_vectors(&fib, &eps).expect("fib is irreducible");
    // λ = (3+√5)/2 is the root of x² - 3x + 1 above 2
    let cp = char_poly(&fib).unwrap();
    let brackets_root = d.lambda.lo() > &q(2, 1)
        && cp.eval(d.lambda.lo()).signum() != cp.eval(d.lambda.hi()).signum()
        || d.lambda.is_point() && cp.eval(d.lambda.lo()).is_zero();
    let digits_ok = d.lambda.decimal(16).starts_with("2.618033988749894");
    let fib_ok = d.lambda.width() <= eps && brackets_root && digits_ok;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    for _ in 0..200 {
        let m = random_irreducible(&mut rng);
        let ch = char_poly(&m).unwrap().eval_matrix(&m).unwrap().is_zero();
        let ok = match perron_vectors(&m, &eps) {
            Ok(p) => {
                residual_ok(&m, &p.lambda, &p.v, false)
                    && residual_ok(&m, &p.lambda, &p.w, true)
                    && p.max_width() <= eps
            }
            Err(_) => false,
        };
        if !(ch && ok) {
            failures += 1;
        }
    }
    let elapsed = t.elapsed();
    outcome(
        fib_ok && failures == 0 && elapsed < Duration::from_secs(10),
        format!(
            "lambda {} width {:.2e}; 200 random matrices, {failures} failures; {}",
            d.lambda.decimal(20),
            solk_core::spectral::rational_to_f64(&d.lambda.width()),
            secs(elapsed)
        ),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let v = oracle_snf(500, 4, 9, 4);
    let elapsed = t.elapsed();
    outcome(
        v.agrees() && v.cases == 500 && elapsed < Duration::from_secs(30),
        format!(
            "{} cases, {} disagreements, {}; {}",
            v.cases,
            v.disagreements,
            v.details.last().cloned().unwrap_or_default(),
            secs(elapsed)
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    let files = corpus();
    for (name, p) in &files {
        let m = adjacency_matrix(p);
        let ru = ruelle_unstable_of_matrix(&m);
        let ru_t = ruelle_unstable_of_matrix(&m.transpose());
        let ok = ru.iso_eq(&ru_t)
            && ruelle_stable_from_unstable(&ru).iso_eq(&ruelle_stable_from_unstable(&ru_t));
        if !ok {
            bad.push(name.clone());
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} corpus presentations, failing {bad:?}", files.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let files = corpus();
    for (name, p) in &files {
        let m = adjacency_matrix(p);
        let ru = ruelle_unstable_of_matrix(&m);
        let rs = ruelle_stable_from_unstable(&ru);
        if !(rs.iso_eq(&ruelle_stable_closed_form(&m)) && rs.iso_eq(&ru)) {
            bad.push(name.clone());
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} corpus presentations, failing {bad:?}", files.len()),
    )
}

fn criterion_7() -> Outcome {
    let eps = default_precision();
    let slack = &eps * BigRational::from_integer(2.into());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = Vec::new();
    let mut skipped = Vec::new();
    let mut failures = 0usize;
    for (name, p) in corpus() {
        let m = adjacency_matrix(&p);
        let group = match DimensionGroup::new(&m, &eps) {
            Ok(g) => g,
            Err(e) => {
                skipped.push(format!("{name} ({e})"));
                continue;
            }
        };
        if !group
            .state(&group.unit())
            .unwrap()
            .contains(&BigRational::one())
        {
            failures += 1;
        }
        for _ in 0..1000 {
            let v: Vec<i64> = (0..m.rows()).map(|_| rng.gen_range(-50..=50)).collect();
            let a = DGElement::from_i64(&v, rng.gen_range(0..6));
            let s = group.state(&a).unwrap();
            let s1 = group.state(&group.connect(&a)).unwrap();
            if !s.overlaps_within(&s1, &slack) {
                failures += 1;
            }
        }
        checked.push(name);
    }
    let doubling = DimensionGroup::new(&adjacency_matrix(&load("power2.sol")), &eps).unwrap();
    for k in 0..20u32 {
        let s = doubling
            .state(&DGElement::from_i64(&[1], k as usize))
            .unwrap();
        if s.as_point() != Some(&BigRational::new(1.into(), BigInt::from(2).pow(k))) {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && !checked.is_empty(),
        format!(
            "{} matrices x 1000 elements, {failures} failures; skipped {}",
            checked.len(),
            skipped.join(", ")
        ),
    )
}

fn random_primitive_3x3(rng: &mut ChaCha8Rng) -> IntMatrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(0..=3)).collect())
            .collect();
        let m = IntMatrix::from_rows(&rows);
        if m.is_primitive() {
            return m;
        }
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let matrices = [
        IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]),
        random_primitive_3x3(&mut rng),
        random_primitive_3x3(&mut rng),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, m) in matrices.iter().enumerate() {
        let group = DimensionGroup::new(m, &default_precision()).unwrap();
        let (v, decided) = oracle_positivity(
            &group,
            1000,
            9,
            64,
            POSITIVITY_ITERATION_STEPS,
            80 + i as u64,
        );
        pass &= v.agrees() && decided >= 990;
        parts.push(format!(
            "{m}: {decided}/1000 decided, {} disagree",
            v.disagreements
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let model = SolenoidModel::new(&load("fib.sol"), &default_precision()).unwrap();
    let options = SmaleCheckOptions {
        depth: 30,
        samples: 1000,
        seed: 0,
        ..SmaleCheckOptions::default()
    };
    let r = run_smale_checks(&model, &options);
    let elapsed = t.elapsed();
    let violations: usize = r.identities.iter().map(|i| i.violations).sum();
    outcome(
        r.passes && r.tuples_accepted == 1000 && r.stable_pairs == 1000 && elapsed < Duration::from_secs(60),
        format!(
            "{} tuples ({} uncertified rejected), {violations} identity violations, max ratio {} (bound {}); {}",
            r.tuples_accepted,
            r.rejected_uncertified,
            r.max_contraction_ratio,
            r.contraction_bound,
            secs(elapsed)
        ),
    )
}

fn solk(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_solk"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn criterion_10() -> Outcome {
    let path = |n: &str| corpus_dir().join(n).to_string_lossy().into_owned();
    let (code_n, out_n) = solk(&["check", &path("nonorientable.sol")]);
    let (code_f, out_f) = solk(&["check", &path("folding.sol")]);
    let (code_i, out_i) = solk(&["check", &path("identity.sol"), "--json"]);
    let json: serde_json::Value = serde_json::from_str(&out_i).unwrap_or_default();
    let ok_n = code_n == 2 && out_n.contains("parity witness:");
    let ok_f = code_f == 2 && out_f.contains("cancellation witness:");
    let ok_i = code_i == 2 && json["axioms"]["expanding"] == serde_json::Value::Bool(false);
    outcome(
        ok_n && ok_f && ok_i,
        format!("non-orientable exit {code_n}, folding exit {code_f}, lambda=1 exit {code_i} expanding=false: {ok_i}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("circle coverings a -> a^n", criterion_1),
        ("two-circle example a -> aab, b -> ab", criterion_2),
        ("Perron certification", criterion_3),
        ("SNF oracle", criterion_4),
        ("transpose invariance", criterion_5),
        ("duality and closed form", criterion_6),
        ("dimension-group state", criterion_7),
        ("positivity oracle", criterion_8),
        ("Smale identities", criterion_9),
        ("axiom gate behaviors", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
