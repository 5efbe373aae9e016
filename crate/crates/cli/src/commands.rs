use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use solk_core::dimgroup::{DGElement, DimensionGroup, Positivity};
use solk_core::ktheory::{full_report, KTheoryReport, ReportOptions, DEFAULT_FILTRATION_DEPTH};
use solk_core::linalg::{FGAbelianGroup, IntMatrix};
use solk_core::oracle::{self, OracleVerdict};
use solk_core::presentation::{
    adjacency_matrix, check_axioms, AxiomReport, GraphPresentation, Nonfolding,
    OrientabilityVerdict,
};
use solk_core::smale::{
    run_smale_checks, SmaleCheckOptions, SmaleCheckReport, SmaleError, SolenoidModel,
};
use solk_core::spectral::{
    char_poly, format_rational, perron_vectors, RationalInterval, SpectralError,
};

use crate::config::{inputs, load_presentation, parse_matrix, parse_vector, Failure, RunConfig};

/// Text or JSON for stdout, lines for stderr, and the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: Vec<String>,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            ..Self::default()
        }
    }
}

const DECIMAL_DIGITS: usize = 32;

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn spectral_failure(e: SpectralError) -> Failure {
    match e {
        SpectralError::Resource { .. } => Failure::Resource(e.to_string()),
        SpectralError::NonPositivePrecision | SpectralError::NotSquare { .. } => {
            Failure::Usage(e.to_string())
        }
        SpectralError::Reducible | SpectralError::NotExpanding | SpectralError::Negative => {
            Failure::Axiom(e.to_string())
        }
    }
}

fn interval_text(x: &RationalInterval) -> String {
    match x.as_point() {
        Some(p) => format!(
            "{} (exact {})",
            x.decimal(DECIMAL_DIGITS),
            format_rational(p)
        ),
        None => format!(
            "{} in [{}, {}], width {}",
            x.decimal(DECIMAL_DIGITS),
            format_rational(x.lo()),
            format_rational(x.hi()),
            solk_core::spectral::rational_to_decimal(&x.width(), 3)
        ),
    }
}

fn witness_lines(p: &GraphPresentation, axioms: &AxiomReport) -> Vec<String> {
    let mut out = Vec::new();
    if let OrientabilityVerdict::No { witness } = &axioms.orientable {
        out.push(format!("parity witness: {}", witness.describe(p)));
    }
    if let Nonfolding::Fails { witness } = &axioms.nonfolding {
        out.push(format!(
            "cancellation witness: f^{}({}) has cancelling letters starting at positions {:?}",
            witness.iteration,
            p.edge_name(witness.edge),
            witness.positions
        ));
    }
    out
}

/// Runs `per_file` on each input and joins the outputs; the exit code is the largest one.
fn over_inputs(
    path: &Path,
    config: &RunConfig,
    per_file: impl Fn(
        &GraphPresentation,
    ) -> Result<(serde_json::Value, String, Vec<String>, u8), Failure>,
) -> Result<Outcome, Failure> {
    let files = inputs(path)?;
    let single = files.len() == 1 && !path.is_dir();
    let mut out = Outcome::default();
    let mut json_items = Vec::new();
    for f in &files {
        let p = load_presentation(f)?;
        let (value, text, stderr, code) = per_file(&p)?;
        out.code = out.code.max(code);
        out.stderr.extend(stderr.into_iter().map(|l| {
            if single {
                l
            } else {
                format!("{}: {l}", f.display())
            }
        }));
        if single {
            out.stdout = if config.json() { to_json(&value) } else { text };
        } else if config.json() {
            json_items.push(json!({ "file": f.display().to_string(), "report": value }));
        } else {
            let _ = writeln!(out.stdout, "== {}", f.display());
            out.stdout.push_str(&text);
        }
    }
    if !single && config.json() {
        out.stdout = to_json(&json_items);
    }
    Ok(out)
}

pub fn cmd_check(path: &Path, config: &RunConfig) -> Result<Outcome, Failure> {
    over_inputs(path, config, |p| {
        let axioms = check_axioms(p, config.nonfolding_bound);
        let mut text = format!("{axioms}\n");
        let mut stderr = Vec::new();
        let witnesses = witness_lines(p, &axioms);
        for w in &witnesses {
            let _ = writeln!(text, "{w}");
        }
        let code = if axioms.passes() {
            0
        } else {
            stderr.extend(axioms.failures());
            2
        };
        let value = json!({
            "presentation": p,
            "axioms": axioms,
            "passes": axioms.passes(),
            "witnesses": witnesses,
        });
        Ok((value, text, stderr, code))
    })
}

pub fn render_ktheory(r: &KTheoryReport) -> String {
    let mut s = String::new();
    let p = &r.presentation;
    let _ = writeln!(s, "presentation: {p}");
    let _ = writeln!(s, "adjacency:    {}", r.adjacency);
    let _ = writeln!(s, "char poly:    {}", r.char_poly);
    if let Some(d) = &r.perron {
        let _ = writeln!(s, "lambda:       {}", interval_text(&d.lambda));
    }
    let _ = writeln!(s, "{}", r.axioms);
    for w in witness_lines(p, &r.axioms) {
        let _ = writeln!(s, "{w}");
    }
    if let Some(u) = &r.unstable {
        let _ = writeln!(
            s,
            "K0(U)  = {}  (n = {}, eventual rank {}, finitely generated: {})",
            u.k0.notation, u.k0.n, u.k0.eventual_rank, u.k0.finitely_generated
        );
        let _ = writeln!(s, "K1(U)  = {}", u.k1);
    }
    let groups = [
        ("Ru", &r.ruelle_unstable),
        ("Rs", &r.ruelle_stable),
        ("Rs closed form", &r.ruelle_stable_closed),
    ];
    for (name, g) in groups {
        if let Some(g) = g {
            let _ = writeln!(s, "K0({name}) = {}", g.k0);
            let _ = writeln!(s, "K1({name}) = {}", g.k1);
        }
    }
    let flag = |b: Option<bool>| match b {
        Some(true) => "yes",
        Some(false) => "NO",
        None => "skipped",
    };
    let _ = writeln!(
        s,
        "checks: duality {}, closed form {}, transpose {}",
        flag(r.duality_check),
        flag(r.closed_form_check),
        flag(r.transpose_check)
    );
    if let Some(f) = &r.stable_filtration {
        let _ = writeln!(s, "stable filtration: {}", f.join(", "));
    }
    for d in &r.diagnostics {
        let _ = writeln!(s, "diagnostic: {d}");
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

pub fn report_options(config: &RunConfig, depth: Option<usize>) -> ReportOptions {
    ReportOptions {
        precision: config.precision.clone(),
        nonfolding_bound: config.nonfolding_bound,
        filtration_depth: depth.unwrap_or(DEFAULT_FILTRATION_DEPTH),
    }
}

pub fn cmd_ktheory(
    path: &Path,
    config: &RunConfig,
    depth: Option<usize>,
) -> Result<Outcome, Failure> {
    let options = report_options(config, depth);
    over_inputs(path, config, |p| {
        let r = full_report(p, &options);
        let mut code = if r.gate_passed() { 0 } else { 2 };
        let disagreements =
            [r.duality_check, r.closed_form_check, r.transpose_check].contains(&Some(false));
        if disagreements {
            code = 4;
        }
        let stderr = r.diagnostics.clone();
        let value = serde_json::to_value(&r).expect("report serializes");
        Ok((value, render_ktheory(&r), stderr, code))
    })
}

pub fn cmd_perron(path: &Path, config: &RunConfig) -> Result<Outcome, Failure> {
    let p = load_presentation(path)?;
    let m = adjacency_matrix(&p);
    let cp = char_poly(&m).map_err(|e| Failure::Usage(e.to_string()))?;
    let data = perron_vectors(&m, &config.precision).map_err(spectral_failure)?;
    if config.json() {
        return Ok(Outcome::ok(to_json(&json!({
            "adjacency": m,
            "char_poly": cp,
            "precision": format_rational(&config.precision),
            "perron": data,
        }))));
    }
    let mut s = String::new();
    let _ = writeln!(s, "adjacency: {m}");
    let _ = writeln!(s, "char poly: {cp}");
    let _ = writeln!(s, "lambda:    {}", interval_text(&data.lambda));
    for (name, vec) in [("v", &data.v), ("w", &data.w)] {
        for (i, x) in vec.iter().enumerate() {
            let _ = writeln!(s, "{name}[{}] = {}", p.edge_name(i), interval_text(x));
        }
    }
    Ok(Outcome::ok(s))
}

pub fn cmd_state(
    path: &Path,
    element: &str,
    stage: usize,
    config: &RunConfig,
) -> Result<Outcome, Failure> {
    let p = load_presentation(path)?;
    let m = adjacency_matrix(&p);
    let vector = parse_vector(element)?;
    if vector.len() != m.rows() {
        return Err(Failure::Usage(format!(
            "element has {} entries, presentation has {} edges",
            vector.len(),
            m.rows()
        )));
    }
    let group = DimensionGroup::new(&m, &config.precision).map_err(spectral_failure)?;
    let g = DGElement::new(vector, stage);
    let state = group.state(&g).map_err(spectral_failure)?;
    let positivity = group.positive(&g, config.positivity_bound);
    let exact = state.as_point().map(format_rational);
    if config.json() {
        return Ok(Outcome::ok(to_json(&json!({
            "element": g,
            "state": state,
            "exact": exact,
            "positivity": positivity,
        }))));
    }
    let mut s = String::new();
    let _ = writeln!(s, "state:      {}", interval_text(&state));
    let _ = writeln!(
        s,
        "positivity: {}",
        match positivity {
            Positivity::Positive => "positive".to_string(),
            Positivity::Negative => "negative".to_string(),
            Positivity::Zero => "zero".to_string(),
            Positivity::Undecided { bound } => format!("undecided up to M^{bound}"),
        }
    );
    Ok(Outcome::ok(s))
}

fn smale_model(p: &GraphPresentation, config: &RunConfig) -> Result<SolenoidModel, Failure> {
    let axioms = check_axioms(p, config.nonfolding_bound);
    if !axioms.passes() {
        return Err(Failure::Axiom(axioms.failures().join("; ")));
    }
    SolenoidModel::new(p, &config.precision).map_err(|e| match e {
        SmaleError::Spectral(s) => spectral_failure(s),
        other => Failure::Axiom(other.to_string()),
    })
}

pub fn render_smale(r: &SmaleCheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "lambda {}  depth {}  seed {}  tolerance {}",
        r.lambda, r.depth, r.seed, r.tolerance
    );
    let _ = writeln!(
        s,
        "tuples: {} accepted of {} requested ({} attempts; rejected {} too far, {} uncertified)",
        r.tuples_accepted,
        r.tuples_requested,
        r.tuple_attempts,
        r.rejected_precondition,
        r.rejected_uncertified
    );
    for id in &r.identities {
        let _ = writeln!(
            s,
            "{:<24} checked {:>5}  violations {:>3}  max distance {}",
            id.name, id.checked, id.violations, id.max_distance
        );
    }
    let _ = writeln!(
        s,
        "stable contraction: {} pairs, max ratio {} (bound {}), {} violations, {} coincident",
        r.stable_pairs,
        r.max_contraction_ratio,
        r.contraction_bound,
        r.contraction_violations,
        r.coincident_ratios
    );
    let _ = writeln!(s, "max consistency gap: {}", r.max_consistency_gap);
    let _ = writeln!(s, "result: {}", if r.passes { "pass" } else { "FAIL" });
    s
}

pub fn cmd_smale(path: &Path, config: &RunConfig, samples: usize) -> Result<Outcome, Failure> {
    let p = load_presentation(path)?;
    let model = smale_model(&p, config)?;
    let options = SmaleCheckOptions {
        depth: config.smale_depth,
        samples,
        seed: config.seed,
        ..SmaleCheckOptions::default()
    };
    let report = run_smale_checks(&model, &options);
    let mut out = Outcome::ok(if config.json() {
        to_json(&report)
    } else {
        render_smale(&report)
    });
    if !report.passes {
        out.code = 4;
        out.stderr.push("smale checks failed".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleSubject {
    Snf,
    Cokernel,
    Positivity,
    Bracket,
    Orientability,
}

#[derive(Debug, Clone, Default)]
pub struct OracleParams {
    pub target: Option<String>,
    pub count: Option<usize>,
    pub size: usize,
    pub entries: i64,
    pub depth: Option<usize>,
}

/// `[[..]]` or `a;b` is an inline matrix, anything else a presentation file.
fn oracle_matrix(target: &str) -> Result<IntMatrix, Failure> {
    if target.trim_start().starts_with('[') || target.contains(';') || !Path::new(target).exists() {
        parse_matrix(target)
    } else {
        Ok(adjacency_matrix(&load_presentation(Path::new(target))?))
    }
}

fn require_target(params: &OracleParams) -> Result<&str, Failure> {
    params
        .target
        .as_deref()
        .ok_or_else(|| Failure::Usage("this oracle subject needs a file or matrix argument".into()))
}

pub fn cmd_oracle(
    subject: OracleSubject,
    params: &OracleParams,
    config: &RunConfig,
) -> Result<Outcome, Failure> {
    let mut extra: Vec<String> = Vec::new();
    let verdict: OracleVerdict = match subject {
        OracleSubject::Snf => oracle::oracle_snf(
            params.count.unwrap_or(100),
            params.size,
            params.entries,
            config.seed,
        ),
        OracleSubject::Cokernel => {
            let m = oracle_matrix(require_target(params)?)?;
            let a = m
                .identity_minus()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            extra.push(format!(
                "I - M = {a}, main path cokernel {}",
                FGAbelianGroup::cokernel_of(&a)
            ));
            oracle::oracle_cokernel(&a)
        }
        OracleSubject::Positivity => {
            let m = oracle_matrix(require_target(params)?)?;
            let group = DimensionGroup::new(&m, &config.precision).map_err(spectral_failure)?;
            let samples = params.count.unwrap_or(1000);
            let (v, decided) = oracle::oracle_positivity(
                &group,
                samples,
                params.entries,
                config.positivity_bound,
                oracle::POSITIVITY_ITERATION_STEPS,
                config.seed,
            );
            extra.push(format!("main path decided {decided} of {samples}"));
            v
        }
        OracleSubject::Bracket => {
            let p = load_presentation(Path::new(require_target(params)?))?;
            let model = smale_model(&p, config)?;
            oracle::oracle_bracket(
                &model,
                params.count.unwrap_or(50),
                params.depth.unwrap_or(8),
                config.seed,
            )
        }
        OracleSubject::Orientability => {
            let p = load_presentation(Path::new(require_target(params)?))?;
            oracle::oracle_orientability(&p)
        }
    };
    let status = if !verdict.agrees() {
        "disagree"
    } else if verdict.agreements == 0 && verdict.exhausted > 0 {
        "oracle exhausted"
    } else {
        "agree"
    };
    let mut out = if config.json() {
        Outcome::ok(to_json(
            &json!({ "status": status, "verdict": verdict, "notes": extra }),
        ))
    } else {
        let mut s = format!(
            "{}: {status} ({} cases, {} agree, {} disagree, {} exhausted)\n",
            verdict.subject,
            verdict.cases,
            verdict.agreements,
            verdict.disagreements,
            verdict.exhausted
        );
        for line in extra.iter().chain(&verdict.details) {
            let _ = writeln!(s, "  {line}");
        }
        Outcome::ok(s)
    };
    if !verdict.agrees() {
        out.code = 4;
        out.stderr.push(format!(
            "{} oracle disagrees with the main path",
            verdict.subject
        ));
    }
    Ok(out)
}
