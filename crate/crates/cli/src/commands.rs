use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use maj3_core::algorithms::{exact_expected_queries, exact_hard_average, monte_carlo};
use maj3_core::alphadp::{Choice, Progress, StableClasses};
use maj3_core::formula::sample_hard;
use maj3_core::oracles::{build_c_prime, encoding_census, enumerate_trees_k1, rho_exhaustive, verify_encoding_ratio};
use maj3_core::rational::{self, int, ratio, Rational};
use maj3_core::recurrence::{lower_bound, solve, verify_ansatz};
use maj3_core::{AlgorithmId, AlphaDp, Ansatz, Distribution, Entry, Input, MonteCarloResult, TreeAddr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::{CliError, Outcome, Suite, EXIT_VERIFY};

type Res = Result<Outcome, CliError>;

fn json_line<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn parse_rational(what: &str, s: &str) -> Result<Rational, CliError> {
    rational::parse(s).map_err(|_| CliError::Usage(format!("{what}: not a rational number: {s:?}")))
}

fn reporter(enabled: bool) -> impl Fn(Progress) + Sync {
    move |p| {
        if !enabled {
            return;
        }
        match p {
            Progress::Classes { height, count } => eprintln!("classes at height {height}: {count}"),
            Progress::Transitions { done, total } => eprintln!("transitions: {done}/{total} classes"),
            Progress::Iteration { index, alpha } => eprintln!("iteration {index}: alpha = {alpha}"),
        }
    }
}

pub fn sample(h: u32, count: u64, root: Option<bool>, seed: u64) -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..count {
        out.push_str(&sample_hard(h, root, &mut rng)?.to_fixture());
    }
    Ok(Outcome::ok(out.into_bytes()))
}

#[derive(Serialize)]
struct Growth {
    h: u32,
    ratio: f64,
}

pub fn estimate(
    alg: AlgorithmId,
    h: u32,
    h_max: Option<u32>,
    trials: u64,
    distribution: &str,
    seed: u64,
    threads: Option<usize>,
) -> Res {
    let dist = Distribution::from_str(distribution)?;
    let Some(h_max) = h_max else {
        return Ok(Outcome::ok(json_line(&monte_carlo(alg, h, &dist, trials, seed, threads)?)));
    };
    if h_max < h {
        return Err(CliError::Usage(format!("--h-max {h_max} is below --h {h}")));
    }
    if matches!(dist, Distribution::Fixed(_)) {
        return Err(CliError::Usage("a height range needs a uniform-hard distribution".into()));
    }
    let results: Vec<MonteCarloResult> =
        (h..=h_max).map(|j| monte_carlo(alg, j, &dist, trials, seed, threads)).collect::<Result<_, _>>()?;
    let growth: Vec<Growth> =
        results.windows(2).map(|w| Growth { h: w[1].h, ratio: w[1].mean / w[0].mean }).collect();
    Ok(Outcome::ok(json_line(&json!({ "results": results, "growth": growth }))))
}

fn parse_entry(s: &str) -> Result<Entry, CliError> {
    if s == "root" {
        return Ok(Entry::Root);
    }
    let bad = || CliError::Usage(format!("entry must be `root` or `complete:<node>:<child>`, got {s:?}"));
    let rest = s.strip_prefix("complete:").ok_or_else(bad)?;
    let (node, child) = rest.split_once(':').ok_or_else(bad)?;
    Ok(Entry::Complete { node: TreeAddr::from_str(node)?, known_child: TreeAddr::from_str(child)? })
}

pub fn expect(alg: AlgorithmId, input: Option<&str>, hard: Option<u32>, entry: &str) -> Res {
    let entry = parse_entry(entry)?;
    let value = match (input, hard) {
        (Some(bits), _) => {
            let x = Input::from_line(bits)?;
            let e = exact_expected_queries(alg, &x, &entry)?;
            json!({ "alg": alg, "input": x.to_line(), "entry": entry_text(&entry), "expected": rational::format(&e) })
        }
        (None, Some(h)) => {
            if entry != Entry::Root {
                return Err(CliError::Usage("--hard averages whole-formula runs only".into()));
            }
            let e = exact_hard_average(alg, h)?;
            json!({ "alg": alg, "h": h, "distribution": "uniform-hard", "expected": rational::format(&e) })
        }
        (None, None) => return Err(CliError::Usage("give --input or --hard".into())),
    };
    Ok(Outcome::ok(json_line(&value)))
}

fn entry_text(e: &Entry) -> String {
    match e {
        Entry::Root => "root".into(),
        Entry::Complete { node, known_child } => format!("complete:{node}:{known_child}"),
    }
}

pub fn recurrences(max_h: u32, precision: u32) -> Res {
    let table = solve(max_h)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let width = format!("1e-{precision}");
    w.write_record(["h", "T", "S_major", "S_minor", "T_lo", "T_hi", "width"]).map_err(io)?;
    for r in table.rows() {
        let opt = |q: &Option<Rational>| q.as_ref().map(rational::format).unwrap_or_default();
        w.write_record([
            r.h.to_string(),
            rational::format(&r.t),
            opt(&r.s_major),
            opt(&r.s_minor),
            rational::floor_decimal(&r.t, precision),
            rational::ceil_decimal(&r.t, precision),
            width.clone(),
        ])
        .map_err(io)?;
    }
    let data = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let violations = table.violations();
    for v in &violations {
        eprintln!("violation: {v}");
    }
    Ok(Outcome { data, code: if violations.is_empty() { 0 } else { EXIT_VERIFY } })
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Serialize)]
struct AlphaRecord {
    alpha: String,
    n_k: u64,
    k: u32,
    iterations: Vec<String>,
    flagged: bool,
}

fn compute_alpha(k: u32, progress: bool) -> Result<AlphaRecord, CliError> {
    let report = reporter(progress);
    let dp = AlphaDp::build_with_progress(k, &report)?;
    let r = dp.alpha_with_progress(&report)?;
    Ok(AlphaRecord {
        alpha: rational::format(&r.alpha),
        n_k: r.n_k,
        k,
        iterations: r.iterations.iter().map(rational::format).collect(),
        flagged: r.flagged,
    })
}

pub fn alpha(k: u32, progress: bool) -> Res {
    Ok(Outcome::ok(json_line(&compute_alpha(k, progress)?)))
}

pub fn bounds(k: u32, alpha: Option<&str>, delta: &str, h: u32, precision: u32, progress: bool) -> Res {
    let alpha_k = match alpha {
        Some(a) => parse_rational("--alpha", a)?,
        None => rational::parse(&compute_alpha(k, progress)?.alpha).expect("formatted rational"),
    };
    let delta = parse_rational("--delta", delta)?;
    let b = lower_bound(k, &alpha_k, &delta, h, precision)?;
    let interval = |i: &maj3_core::DecimalInterval| {
        json!({ "lo": i.lo_decimal(), "hi": i.hi_decimal(), "width": rational::format(&i.width()) })
    };
    let value = json!({
        "k": k,
        "alpha": rational::format(&alpha_k),
        "delta": rational::format(&delta),
        "h": h,
        "precision": precision,
        "base": interval(&b.base),
        "exact_base": b.exact_base.as_ref().map(rational::format),
        "value": interval(&b.value),
    });
    Ok(Outcome::ok(json_line(&value)))
}

#[derive(Serialize)]
struct CheckRow {
    name: String,
    expected: String,
    got: String,
    pass: bool,
}

/// Built-in expected values of every check.
fn default_expectations() -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: &str| m.insert(k.to_string(), v.to_string());
    put("trees_k1", "244");
    put("encoding_ratio_max", "2");
    put("encoding_ratio_holds", "true");
    put("c_prime_rho_at_0", "16/27");
    put("c_prime_rho_at_24/7", "0");
    put("k1_dp_matches_trees", "true");
    put("ansatz_inequalities", "7/7");
    put("encoding_census_k1", "true");
    put("encoding_census_k2", "true");
    for (k, a, n) in [(1, "2", "2"), (2, "24/7", "7"), (3, "12231/2203", "112"), (4, "2027349/216164", "246792")] {
        put(&format!("alpha_{k}"), a);
        put(&format!("n_{k}"), n);
    }
    m
}

fn load_expected(path: Option<&Path>) -> Result<BTreeMap<String, String>, CliError> {
    let mut m = default_expectations();
    let Some(path) = path else { return Ok(m) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let obj = value.as_object().ok_or_else(|| CliError::Usage("expected values must be a JSON object".into()))?;
    for (k, v) in obj {
        if !m.contains_key(k) {
            return Err(CliError::Usage(format!("unknown check {k:?} in {}", path.display())));
        }
        let v = match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        m.insert(k.clone(), v);
    }
    Ok(m)
}

fn oracle_checks(out: &mut Vec<(String, String)>) -> Result<(), CliError> {
    let trees = enumerate_trees_k1();
    out.push(("trees_k1".into(), trees.len().to_string()));
    let report = verify_encoding_ratio();
    out.push(("encoding_ratio_max".into(), rational::format(&report.max_ratio)));
    out.push(("encoding_ratio_holds".into(), report.all_hold.to_string()));
    let c = build_c_prime();
    out.push(("c_prime_rho_at_0".into(), rational::format(&rho_exhaustive(&c, 2, &int(0))?.rho)));
    out.push(("c_prime_rho_at_24/7".into(), rational::format(&rho_exhaustive(&c, 2, &ratio(24, 7))?.rho)));
    let dp = AlphaDp::build(1)?;
    let mut agree = true;
    for a in [int(0), int(1), ratio(3, 2), int(2), int(3)] {
        let mut best: Option<Rational> = None;
        for t in trees.iter().filter(|t| !t.is_stop()) {
            let r = rho_exhaustive(t, 1, &a)?.rho;
            if best.as_ref().is_none_or(|b| &r > b) {
                best = Some(r);
            }
        }
        agree &= best == Some(dp.dp_optimize(&a)?.max_rho());
    }
    out.push(("k1_dp_matches_trees".into(), agree.to_string()));
    Ok(())
}

pub fn verify(suite: Suite, expected: Option<&Path>, k_max: u32, progress: bool) -> Res {
    let expected = load_expected(expected)?;
    if !(1..=4).contains(&k_max) {
        return Err(CliError::Usage(format!("--k-max must be in 1..=4, got {k_max}")));
    }
    let wants = |s: Suite| suite == s || suite == Suite::All;
    let mut got: Vec<(String, String)> = Vec::new();
    if wants(Suite::Oracles) {
        oracle_checks(&mut got)?;
    }
    if wants(Suite::Ansatz) {
        let r = verify_ansatz(&Ansatz::standard());
        let held = r.checks.len() - r.violations().len();
        got.push(("ansatz_inequalities".into(), format!("{held}/{}", r.checks.len())));
    }
    if wants(Suite::Encodings) {
        for k in 1..=2 {
            got.push((format!("encoding_census_k{k}"), encoding_census(k)?.holds().to_string()));
        }
    }
    if wants(Suite::Alpha) {
        for k in 1..=k_max {
            if progress {
                eprintln!("alpha_{k}");
            }
            let r = compute_alpha(k, progress && k == 4)?;
            got.push((format!("alpha_{k}"), r.alpha));
            got.push((format!("n_{k}"), r.n_k.to_string()));
        }
    }
    let rows: Vec<CheckRow> = got
        .into_iter()
        .map(|(name, got)| {
            let expected = expected[&name].clone();
            CheckRow { pass: expected == got, name, expected, got }
        })
        .collect();
    let diff: Vec<String> =
        rows.iter().filter(|r| !r.pass).map(|r| format!("{}: expected {}, got {}", r.name, r.expected, r.got)).collect();
    for d in &diff {
        eprintln!("mismatch: {d}");
    }
    let passed = diff.is_empty();
    let suite_name = format!("{suite:?}").to_lowercase();
    let data = json_line(&json!({ "suite": suite_name, "passed": passed, "checks": rows, "diff": diff }));
    Ok(Outcome { data, code: if passed { 0 } else { EXIT_VERIFY } })
}

pub fn dump_classes(k: u32, alpha: Option<&str>, progress: bool) -> Res {
    let mut out = Vec::new();
    let mut line = |v: serde_json::Value| {
        out.extend(serde_json::to_vec(&v).expect("serializable"));
        out.push(b'\n');
    };
    match alpha {
        None => {
            let classes = StableClasses::enumerate(k)?;
            for c in classes.classes(k) {
                line(class_json(&c, classes.representative(c.index).to_string()));
            }
        }
        Some(a) => {
            let a = parse_rational("--alpha", a)?;
            let dp = AlphaDp::build_with_progress(k, &reporter(progress))?;
            let sol = dp.dp_optimize(&a)?;
            for c in dp.classes().classes(k) {
                let e = sol.entry(c.index);
                let mut v = class_json(&c, dp.classes().representative(c.index).to_string());
                let choice = match e.choice {
                    Choice::Stop => "stop".to_string(),
                    Choice::Query(l) => l.to_string(),
                };
                v["rho"] = json!(rational::format(&e.rho));
                v["p_q"] = json!(rational::format(&e.p_q));
                v["p_m"] = json!(rational::format(&e.p_m));
                v["choice"] = json!(choice);
                line(v);
            }
        }
    }
    Ok(Outcome::ok(out))
}

fn class_json(c: &maj3_core::CanonicalClass, representative: String) -> serde_json::Value {
    json!({
        "index": c.index,
        "key": c.key,
        "representative": representative,
        "members": c.members.to_string(),
        "completions": c.completions.to_string(),
        "unqueried": c.unqueried,
    })
}
