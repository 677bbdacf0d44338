//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p plref-cli --test acceptance -- --nocapture`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, Stdio};
use std::time::Instant;

const PIPELINE_MAX_SECS: f64 = 5.0;
const ORACLE_MIN_FIXTURES: usize = 20;
const ORACLE_MIN_QUERIES: usize = 10;
const ORACLE_MAX_CLAUSES: usize = 60;
const ORACLE_MAX_SECS: f64 = 60.0;
const FAR_MIN_FIXTURES: usize = 10;
const DEAD_SEEDS: u64 = 30;
const FAULTS: usize = 10;

type Outcome = Result<String, String>;

fn pipeline() -> Outcome {
    let t = Instant::now();
    common::reader_pipeline()?;
    let secs = t.elapsed().as_secs_f64();
    if secs >= PIPELINE_MAX_SECS {
        return Err(format!("took {secs:.2} s, limit {PIPELINE_MAX_SECS} s"));
    }
    Ok(format!("final listing matched in {secs:.3} s (< {PIPELINE_MAX_SECS} s)"))
}

fn cut_to_ite() -> Outcome {
    common::cut2ite_golden()?;
    Ok("reader_code/3 equals the listing".into())
}

fn oracle_preservation() -> Outcome {
    let t = Instant::now();
    let corpus = common::corpus();
    if corpus.len() < ORACLE_MIN_FIXTURES {
        return Err(format!("{} fixtures, need {ORACLE_MIN_FIXTURES}", corpus.len()));
    }
    let (mut edits, mut queries) = (0, 0);
    let mut failures = Vec::new();
    for fx in &corpus {
        let clauses: usize = fx.program.files.iter().map(|f| f.parsed.clauses().count()).sum();
        if clauses > ORACLE_MAX_CLAUSES {
            return Err(format!("{} has {clauses} clauses", fx.name));
        }
        if fx.queries.len() < ORACLE_MIN_QUERIES {
            return Err(format!("{} has {} queries", fx.name, fx.queries.len()));
        }
        let r = common::preservation(fx);
        if r.preserving == 0 {
            return Err(format!("{}: no preserving transform applied", fx.name));
        }
        edits += r.preserving;
        queries += r.queries;
        failures.extend(r.failures);
    }
    let secs = t.elapsed().as_secs_f64();
    if !failures.is_empty() {
        return Err(format!("{} of {edits} edits differ; first: {}", failures.len(), failures[0]));
    }
    if secs >= ORACLE_MAX_SECS {
        return Err(format!("took {secs:.1} s, limit {ORACLE_MAX_SECS} s"));
    }
    Ok(format!(
        "{} fixtures, {edits} preserving edits, {queries} query comparisons, 100% equal in {secs:.1} s",
        corpus.len()
    ))
}

fn far_soundness() -> Outcome {
    let fixtures = common::far_fixtures();
    if fixtures.len() < FAR_MIN_FIXTURES {
        return Err(format!("{} fixtures, need {FAR_MIN_FIXTURES}", fixtures.len()));
    }
    let mut removed = 0;
    let mut planted = 0;
    for fx in &fixtures {
        planted += fx.planted.len();
        removed += common::far_check(fx)?;
    }
    Ok(format!(
        "{} fixtures, {planted} planted positions marked, {removed} removed with equal outcomes",
        fixtures.len()
    ))
}

fn dead_code() -> Outcome {
    let mut ok = 0;
    for seed in 0..DEAD_SEEDS {
        common::dead_code_seed(seed)?;
        ok += 1;
    }
    Ok(format!("{ok}/{DEAD_SEEDS} seeds match naive reachability"))
}

fn duplicates() -> Outcome {
    let groups = common::dup_corpus_groups();
    let want = common::dup_expected();
    if groups != vec![want.clone()] {
        return Err(format!("got {groups:?}"));
    }
    Ok(format!("one group: {}", want.into_iter().collect::<Vec<_>>().join(", ")))
}

fn roundtrip() -> Outcome {
    let files = common::corpus_files();
    for (path, text) in &files {
        common::roundtrip(path, text)?;
    }
    Ok(format!("{}/{} files", files.len(), files.len()))
}

fn atomicity() -> Outcome {
    let intact = common::fault_injection(FAULTS)?;
    if intact != FAULTS {
        return Err(format!("{intact}/{FAULTS} left the tree intact"));
    }
    Ok(format!("{intact}/{FAULTS} injected failures left the tree byte-identical"))
}

fn guardrail() -> Outcome {
    common::guardrail_oracle()?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("guard.pl"), common::GUARD_SRC).map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("project.plm"), "[files]\nguard.pl\n[roots]\nanswer/2\n")
        .map_err(|e| e.to_string())?;
    let start = common::GUARD_SRC.find(common::GUARD_NEEDLE).unwrap();
    let at = format!("guard.pl:{start}..{}", start + common::GUARD_NEEDLE.len());
    let before = common::tree_hash(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_plref"))
        .args(["unif2test", &at, "--yes"])
        .current_dir(dir.path())
        .env_remove("PLREF_MANIFEST")
        .stdin(Stdio::null())
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.code() != Some(1) {
        return Err(format!("CLI exited with {:?}", o.status.code()));
    }
    if common::tree_hash(dir.path()) != before {
        return Err("CLI wrote files".into());
    }
    Ok("oracle reports non-equivalence; CLI refuses (exit 1, no writes)".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("pipeline-golden", pipeline),
        ("cut-to-ite-golden", cut_to_ite),
        ("oracle-preservation", oracle_preservation),
        ("far-soundness", far_soundness),
        ("dead-code-exactness", dead_code),
        ("duplicate-detection", duplicates),
        ("parser-roundtrip", roundtrip),
        ("edit-atomicity", atomicity),
        ("semantics-guardrail", guardrail),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let r = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match r {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {}", why.replace('\n', " "));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {}", failed.join(", "));
}
