//! Acceptance criteria, one line of output each. Runs without the libtest
//! harness so the report reads top to bottom.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use evrforge::analytics::{classify_risk_path, rank_values, tally_values, UNIT_WEIGHTS};
use evrforge::dsl::{parse_register, serialize_canonical};
use evrforge::model::*;
use evrforge::rules::{check_rule, rule_catalog, RuleMode};
use evrforge::trace::{build_graph, maturity_score, trace_chain};
use evrforge::Severity;
use evrforge_testkit::repairs::repair_cases;
use evrforge_testkit::{
    add_random_control, add_random_disposition, add_random_evr, fixture_doc, fixture_path,
    fixture_text, fuzz_input, random_register, rng,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, format!("took {spent:?}, limit {limit:?}"))
}

fn fixture_fidelity() -> Outcome {
    let start = Instant::now();
    let doc = fixture_doc("tm_clean.evr");
    let cv = &doc.core_values[0];
    ensure(
        doc.core_values.len() == 1 && cv.id == 1 && cv.name == "equality",
        "core value 1 is not equality",
    )?;
    let evrs: Vec<String> = doc.evrs.iter().map(|e| e.id.to_string()).collect();
    ensure(
        evrs == ["1.1.1", "1.1.2", "1.1.3", "1.1.4", "1.1.5"],
        format!("EVRs {evrs:?}"),
    )?;
    let chain = trace_chain(&build_graph(&doc), "1.1.3").map_err(|e| e.to_string())?;
    let ids: Vec<&str> = chain.iter().map(|n| n.id.as_str()).collect();
    ensure(ids == ["1", "1.1", "1.1.3"], format!("chain {ids:?}"))?;
    within(start, Duration::from_secs(1))?;
    Ok("5 EVRs under equality, 3-node chain".into())
}

fn elicitation_counts() -> Outcome {
    let start = Instant::now();
    let doc = fixture_doc("tm_full.evr");
    let tally = tally_values(&doc);
    let (neg, pos) = (tally.negative(), tally.positive());
    ensure(
        (neg, pos) == (214, 253),
        format!("{neg} negative, {pos} positive"),
    )?;
    ensure(
        doc.core_values.len() == 14,
        format!("{} core values", doc.core_values.len()),
    )?;
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "{neg} negative + {pos} positive = {}, 14 core values",
        neg + pos
    ))
}

fn catalog_shape() -> Outcome {
    let catalog = rule_catalog();
    let errors = catalog
        .iter()
        .filter(|r| r.severity == Severity::Error)
        .count();
    let warnings = catalog
        .iter()
        .filter(|r| r.severity == Severity::Warning)
        .count();
    ensure(
        (errors, warnings) == (14, 20),
        format!("{errors} errors, {warnings} warnings"),
    )?;
    ensure(
        catalog.iter().all(|r| !r.anchor.trim().is_empty()),
        "a rule has an empty anchor",
    )?;
    Ok("14 errors, 20 warnings, all anchored".into())
}

fn risk_path_table() -> Outcome {
    // Independent oracle: the high rows listed by (life, health, breach,
    // likely) bit pattern, everything else low.
    const HIGH_ROWS: [u8; 11] = [
        0b0010, 0b0011, 0b0101, 0b0110, 0b0111, 0b1001, 0b1010, 0b1011, 0b1101, 0b1110, 0b1111,
    ];
    let mut checked = 0;
    for bits in 0u8..16 {
        let evr = Evr {
            id: "1.1.1".parse().unwrap(),
            quality: "1.1".parse().unwrap(),
            text: "e".into(),
            kind: EvrKind::Technical,
            threshold: None,
            risk_path: RiskPath::Unclassified,
            legal_instruments: Vec::new(),
            harm_flags: HarmFlags {
                life: bits & 0b1000 != 0,
                health: bits & 0b0100 != 0,
                legal_breach: bits & 0b0010 != 0,
            },
            harm_likelihood: if bits & 0b0001 != 0 {
                Likelihood::ReasonablyLikely
            } else {
                Likelihood::Unlikely
            },
            protection_demand: None,
        };
        let expected = if HIGH_ROWS.contains(&bits) {
            RiskPath::High
        } else {
            RiskPath::Low
        };
        ensure(
            classify_risk_path(&evr) == expected,
            format!("row {bits:04b}"),
        )?;
        let mut legal = evr.clone();
        legal.legal_instruments.push("GDPR".into());
        ensure(
            classify_risk_path(&legal) == RiskPath::High,
            format!("row {bits:04b} with instrument"),
        )?;
        checked += 1;
    }
    Ok(format!("{checked} combinations agree"))
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1000);
    let n = 1000;
    for i in 0..n {
        let doc = random_register(&mut r);
        let text = serialize_canonical(&doc);
        let parsed = parse_register(&text, "gen.evr");
        ensure(
            parsed.document.as_ref() == Some(&doc),
            format!("register {i} does not round-trip"),
        )?;
        ensure(
            serialize_canonical(&parsed.document.unwrap()) == text,
            format!("register {i} not idempotent"),
        )?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{n} registers"))
}

fn monotone_repair() -> Outcome {
    let clean = fixture_text("tm_clean.evr");
    let cases = repair_cases();
    for rule in rule_catalog()
        .iter()
        .filter(|r| r.mode == RuleMode::Structural)
    {
        ensure(
            cases.iter().any(|c| c.rule == rule.id),
            format!("no case for {}", rule.id),
        )?;
    }
    let subjects = |text: &str, rule: &str| -> Result<Vec<String>, String> {
        let doc = parse_register(text, "t.evr")
            .document
            .ok_or_else(|| format!("{rule}: edited register does not parse"))?;
        Ok(check_rule(&doc, rule)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|d| d.subject)
            .collect())
    };
    for case in &cases {
        let broken = (case.violate)(&clean);
        let found = subjects(&broken, case.rule)?;
        ensure(
            found == case.expected,
            format!("{}: got {found:?}", case.rule),
        )?;
        let fixed = subjects(&(case.repair)(&broken), case.rule)?;
        ensure(
            fixed.is_empty(),
            format!("{}: repair left {fixed:?}", case.rule),
        )?;
    }
    Ok(format!("{} structural rules", cases.len()))
}

fn maturity_monotonic() -> Outcome {
    let mut r = rng(700);
    let n = 500;
    for i in 0..n {
        let mut doc = random_register(&mut r);
        let mut last = maturity_score(&doc).addressed;
        for _ in 0..r.gen_range(1..=12) {
            match r.gen_range(0..3) {
                0 => add_random_evr(&mut doc, &mut r),
                1 => add_random_control(&mut doc, &mut r),
                _ => add_random_disposition(&mut doc, &mut r),
            };
            let now = maturity_score(&doc).addressed;
            ensure(now >= last, format!("sequence {i}: {last} -> {now}"))?;
            last = now;
        }
    }
    Ok(format!("{n} sequences"))
}

fn ranking_invariance() -> Outcome {
    let mut r = rng(800);
    let n = 200;
    for i in 0..n {
        let count = r.gen_range(1..=14);
        let values: Vec<CoreValue> = (1..=count)
            .map(|id| CoreValue {
                id,
                name: format!("v{id}"),
                aliases: Vec::new(),
                priority_rank: count + 1 - id,
                intrinsic: false,
                hierarchy_scores: Some(HierarchyScores::from_array(
                    [(); 5].map(|_| r.gen_range(1..=5)),
                )),
                supporting_statements: Vec::new(),
            })
            .collect();
        let weights: [f64; 5] = [(); 5].map(|_| r.gen_range(0.0..5.0));
        let factor = 10f64.powf(r.gen_range(-3.0..3.0));
        let base = rank_values(&values, weights).map_err(|e| e.to_string())?;
        let scaled =
            rank_values(&values, weights.map(|w| w * factor)).map_err(|e| e.to_string())?;
        ensure(
            base.order == scaled.order,
            format!("matrix {i} changes order under x{factor}"),
        )?;
    }
    let pair = [
        ("efficiency", [2, 2, 3, 2, 1]),
        ("respect", [5, 5, 5, 4, 5]),
    ];
    let values: Vec<CoreValue> = pair
        .iter()
        .enumerate()
        .map(|(i, (name, s))| CoreValue {
            id: i as u32 + 1,
            name: name.to_string(),
            aliases: Vec::new(),
            priority_rank: i as u32 + 1,
            intrinsic: false,
            hierarchy_scores: Some(HierarchyScores::from_array(*s)),
            supporting_statements: Vec::new(),
        })
        .collect();
    let ranking = rank_values(&values, UNIT_WEIGHTS).map_err(|e| e.to_string())?;
    ensure(ranking.order == [2, 1], "efficiency ranked above respect")?;
    Ok(format!("{n} matrices, respect first"))
}

fn parser_robustness() -> Outcome {
    let mut r = rng(900);
    let n = 100_000;
    for i in 0..n {
        let input = fuzz_input(&mut r);
        let result = panic::catch_unwind(|| parse_register(&input, "fuzz.evr"))
            .map_err(|_| format!("input {i} panicked: {input:?}"))?;
        for d in &result.diagnostics {
            ensure(
                d.span.within(&input),
                format!("input {i}: {d} out of bounds"),
            )?;
        }
    }
    Ok(format!("{n} inputs"))
}

fn cli_contract() -> Outcome {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_evrforge"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())
    };
    let path = |name: &str| fixture_path(name).display().to_string();
    for (file, code) in [
        ("tm_clean.evr", 0),
        ("tm_no_mission.evr", 1),
        ("tm_no_indirect.evr", 2),
    ] {
        let out = run(&["check", &path(file)])?;
        ensure(
            out.status.code() == Some(code),
            format!("{file}: exit {:?}", out.status.code()),
        )?;
    }
    let missing = run(&["check", "no/such/register.evr"])?;
    ensure(
        missing.status.code() == Some(3),
        "unreadable path did not exit 3",
    )?;
    let golden = std::fs::read(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/golden/tm_clean_audit.txt"
    ))
    .map_err(|e| e.to_string())?;
    let audit = run(&["report", "--kind=audit", &path("tm_clean.evr")])?;
    ensure(
        audit.stdout == golden,
        "audit report differs from golden file",
    )?;
    Ok("exit codes 0/1/2/3, golden audit".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("fixture fidelity", fixture_fidelity),
        ("elicitation counts", elicitation_counts),
        ("rule catalog shape", catalog_shape),
        ("risk-path decision table", risk_path_table),
        ("round-trip property", round_trip),
        ("monotone repair", monotone_repair),
        ("maturity monotonicity", maturity_monotonic),
        ("ranking order invariance", ranking_invariance),
        ("parser robustness", parser_robustness),
        ("CLI contract", cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(criterion))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} ({secs:.2}s)", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {reason} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
