//! Release gate: one test per acceptance criterion, each printing a single
//! `acceptance criterion N: PASS/FAIL (...)` line. Covers the golden
//! structure tables, the two textbook verdicts, a large seeded soundness
//! sweep, counterexample archiving, model extraction on every SAT claim,
//! schedule confluence, oracle equivalence, the pass bound with a scaling
//! fit, and byte-identical reports.
//!
//! The sweep (criteria 3, 4, 5, 8 share one run) defaults to structure
//! guards plus a wall-clock deadline so the suite terminates on a small
//! host; skipped instances are counted and fail criterion 3 openly rather
//! than being dropped. PAIRCLEAN_ACCEPT_FULL=1 lifts guards and deadline,
//! PAIRCLEAN_ACCEPT_BUDGET_SECS overrides the deadline.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use pairclean::audit::{run_audit, AuditOptions, AuditOutcome};
use pairclean::gen::GenSpec;
use pairclean::{report, scaling};
use pairclean_core::clearing::{
    clear_pair, is_unclearable, run_pair_cleaning, Schedule,
};
use pairclean_core::formula::{Formula, VarId};
use pairclean_core::groups::GroupIndex;
use pairclean_core::oracle;
use pairclean_core::solver::{
    decide, enumerate_models, extract, Claim, Extraction, SolveOptions,
};
use pairclean_core::structure::{
    build_structure, induced_value_set, BuildOptions, Built, CombinationValueSet,
    StructureValues,
};

/// Serializes the criteria so their verdict lines and timings don't
/// interleave.
static GATE: Mutex<()> = Mutex::new(());

fn gate() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(criterion: u32, pass: bool, detail: &str) {
    use std::io::Write;
    let word = if pass { "PASS" } else { "FAIL" };
    // written straight to the process stdout, past the harness capture, so
    // the gate stays scannable in a plain `cargo test --workspace` log
    let line = format!("\nacceptance criterion {criterion}: {word} ({detail})\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

macro_rules! expect {
    ($problems:expr, $cond:expr, $($msg:tt)*) => {
        if !$cond {
            $problems.push(format!($($msg)*));
        }
    };
}

fn parse(text: &str) -> Formula {
    Formula::parse_dimacs(text).unwrap()
}

fn built(text: &str) -> Built {
    build_structure(&parse(text), &BuildOptions::default()).unwrap()
}

fn vars(ids: &[u32]) -> Vec<VarId> {
    ids.iter().map(|&i| VarId(i)).collect()
}

fn rows(s: &CombinationValueSet) -> Vec<u32> {
    s.rows().collect()
}

fn clauses_for(m: u32, ratio: f64) -> u32 {
    (m as f64 * ratio).round() as u32
}

const RATIOS: [f64; 3] = [3.0, 4.2, 5.5];
const SWEEP_RANDOM: u64 = 10_000;
const SWEEP_PLANTED: u64 = 1_000;
const SWEEP_SEED: u64 = 0x5EED_0001;

struct Sweep {
    outcome: AuditOutcome,
    wall: Duration,
    budget: Duration,
    guarded: bool,
}

static SWEEP: OnceLock<Sweep> = OnceLock::new();

/// 10,000 random instances cycling 8..=16 variables against all three
/// ratios, interleaved with 1,000 planted ones at the crossover ratio.
fn sweep_specs() -> Vec<GenSpec> {
    let total = SWEEP_RANDOM + SWEEP_PLANTED;
    let mut specs = Vec::with_capacity(total as usize);
    let mut random_slot = 0u64;
    let mut planted_slot = 0u64;
    for i in 0..total {
        let spec = if i % 11 == 10 {
            let m = 8 + (planted_slot % 9) as u32;
            planted_slot += 1;
            GenSpec::planted(m, clauses_for(m, 4.2), 3, SWEEP_SEED + i)
        } else {
            let m = 8 + (random_slot % 9) as u32;
            let ratio = RATIOS[(random_slot / 9) as usize % RATIOS.len()];
            random_slot += 1;
            GenSpec::random(m, clauses_for(m, ratio), 3, SWEEP_SEED + i)
        };
        specs.push(spec);
    }
    specs
}

fn sweep() -> &'static Sweep {
    SWEEP.get_or_init(|| {
        let full = std::env::var("PAIRCLEAN_ACCEPT_FULL").is_ok_and(|v| v == "1");
        let budget = Duration::from_secs(
            std::env::var("PAIRCLEAN_ACCEPT_BUDGET_SECS")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(600),
        );
        let build = if full {
            BuildOptions::default()
        } else {
            // calibrated for a single-core host: admits instances whose
            // fixpoint costs up to a couple of seconds, skips the rest
            BuildOptions {
                max_combinations: 400_000,
                max_classes: 1_000,
                ..BuildOptions::default()
            }
        };
        let opts = AuditOptions {
            solve: SolveOptions {
                build,
                ..SolveOptions::default()
            },
            deadline: (!full).then(|| Instant::now() + budget),
            ..AuditOptions::default()
        };
        let start = Instant::now();
        let outcome = run_audit(&sweep_specs(), &opts);
        Sweep {
            outcome,
            wall: start.elapsed(),
            budget,
            guarded: !full,
        }
    })
}

#[test]
fn criterion_1_golden_tables() {
    let _g = gate();
    let start = Instant::now();
    let mut bad: Vec<String> = Vec::new();

    // two clauses on one tuple keep all rows except their two sign rows
    let f = parse("p cnf 3 2\n1 2 3 0\n-1 2 -3 0\n");
    let gi = GroupIndex::build(&f);
    expect!(bad, gi.n_t() == 1, "expected a single group");
    let got: Vec<u32> = gi.group(0).values().rows().collect();
    expect!(bad, got == [1, 2, 3, 4, 6, 7], "group rows {got:?}");

    // four 2-variable groups give all C(4,3) combinations in two classes
    let b = built("p cnf 4 6\n1 2 0\n1 -2 0\n2 3 0\n1 -3 0\n1 4 0\n-1 4 0\n");
    let rs = &b.structure;
    expect!(bad, rs.combination_count() == 4, "combination count {}", rs.combination_count());
    let want_ids: [[u32; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    for (i, want) in want_ids.iter().enumerate() {
        let got = rs.group_ids(i);
        expect!(bad, got == *want, "combination {i} groups {got:?}");
    }

    // induced value sets of those combinations, hand checked
    let tables: [(&[u32], &[u32]); 4] = [
        (&[0, 1, 3], &[0b101, 0b110, 0b111]),
        (&[0, 2, 3], &[0b1011, 0b1101, 0b1111]),
        (&[0, 1, 2], &[0b1001, 0b1011, 0b1101, 0b1111]),
        (&[1, 2, 3], &[0b0101, 0b1011, 0b1101, 0b1111]),
    ];
    for (ids, want) in tables {
        let got = rows(&induced_value_set(&b.groups, ids));
        expect!(bad, got == want, "induced set of groups {ids:?} gave {got:?}");
    }

    // one clearing drops exactly the unsupported rows on both sides
    let mut v1 = CombinationValueSet::from_rows(vars(&[0, 1, 2]), &[0b101, 0b110, 0b111]);
    let mut v2 = CombinationValueSet::from_rows(
        vars(&[0, 1, 2, 3]),
        &[0b0100, 0b0101, 0b1011, 0b1101],
    );
    clear_pair(&mut v1, &mut v2);
    expect!(bad, rows(&v1) == [0b101, 0b110], "cleared first side {:?}", rows(&v1));
    expect!(bad, rows(&v2) == [0b1011, 0b1101], "cleared second side {:?}", rows(&v2));

    let elapsed = start.elapsed();
    expect!(bad, elapsed < Duration::from_secs(1), "took {elapsed:?}");
    let pass = bad.is_empty();
    let detail = if pass {
        format!("group, combination, induced, and clearing tables bit-exact in {elapsed:?}")
    } else {
        bad.join("; ")
    };
    verdict(1, pass, &detail);
    assert!(pass, "{bad:?}");
}

#[test]
fn criterion_2_textbook_verdicts() {
    let _g = gate();
    let start = Instant::now();
    let mut bad: Vec<String> = Vec::new();

    let sat = parse("p cnf 4 2\n1 2 3 0\n-1 3 -4 0\n");
    match decide(&sat) {
        Ok(v) => expect!(bad, v.claim == Claim::Sat, "claim {:?} on the satisfiable formula", v.claim),
        Err(e) => bad.push(format!("decide failed: {e}")),
    }
    match extract(&sat) {
        Ok(r) => match r.outcome {
            Extraction::Model(a) => expect!(bad, sat.evaluate(&a), "extracted model fails the formula"),
            other => bad.push(format!("extraction gave {other:?}")),
        },
        Err(e) => bad.push(format!("extract failed: {e}")),
    }

    let unsat = parse("p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n");
    match decide(&unsat) {
        Ok(v) => expect!(bad, v.claim == Claim::Unsat, "claim {:?} on the contradiction", v.claim),
        Err(e) => bad.push(format!("decide failed: {e}")),
    }

    let elapsed = start.elapsed();
    expect!(bad, elapsed < Duration::from_secs(1), "took {elapsed:?}");
    let pass = bad.is_empty();
    let detail = if pass {
        format!("SAT with a verified model and UNSAT verdicts in {elapsed:?}")
    } else {
        bad.join("; ")
    };
    verdict(2, pass, &detail);
    assert!(pass, "{bad:?}");
}

#[test]
fn criterion_3_soundness_sweep() {
    let _g = gate();
    let s = sweep();
    let sum = &s.outcome.summary;
    let completed = sum.total - sum.skipped;
    let guard_skips = s
        .outcome
        .records
        .iter()
        .filter(|r| r.skip_reason.as_deref().is_some_and(|t| t.contains("limit")))
        .count();
    let deadline_skips = sum.skipped as usize - guard_skips;

    let pass = sum.false_unsat == 0 && sum.skipped == 0 && s.wall <= s.budget;
    let detail = if sum.false_unsat > 0 {
        format!("{} false-unsat classifications among {completed} audited instances", sum.false_unsat)
    } else if pass {
        let mode = if s.guarded { "guarded" } else { "unbounded" };
        format!(
            "{} random + {} planted instances, zero false-unsat, {:.1?} wall ({mode} run)",
            SWEEP_RANDOM, SWEEP_PLANTED, s.wall
        )
    } else {
        format!(
            "zero false-unsat on the {completed} instances this host audited within {:?}, \
             but {} of {} were skipped ({guard_skips} by structure guards, {deadline_skips} \
             by the deadline); rerun with PAIRCLEAN_ACCEPT_FULL=1 for the unbounded sweep",
            s.budget, sum.skipped, sum.total
        )
    };
    verdict(3, pass, &detail);
    assert_eq!(sum.false_unsat, 0, "soundness violated: {detail}");
    assert!(pass, "{detail}");
}

#[test]
fn criterion_4_counterexample_archive() {
    let _g = gate();
    let s = sweep();
    let mut bad: Vec<String> = Vec::new();

    let dir = tempfile::tempdir().unwrap();
    let solve = SolveOptions::default();
    let artifacts = report::archive_counterexamples(dir.path(), &s.outcome, &solve).unwrap();
    expect!(
        bad,
        artifacts.len() as u64 == s.outcome.summary.false_sat,
        "{} false-sat records but {} archives",
        s.outcome.summary.false_sat,
        artifacts.len()
    );
    for a in &artifacts {
        for path in [&a.original, &a.minimized] {
            match reverify(path) {
                Ok(()) => {}
                Err(e) => bad.push(format!("seed {}: {e}", a.seed)),
            }
        }
    }

    let pass = bad.is_empty();
    let detail = if !pass {
        bad.join("; ")
    } else if artifacts.is_empty() {
        format!(
            "zero false-sat claims among {} audited instances, nothing to archive",
            s.outcome.summary.total - s.outcome.summary.skipped
        )
    } else {
        format!("{} counterexamples archived, every one re-verifies", artifacts.len())
    };
    verdict(4, pass, &detail);
    assert!(pass, "{bad:?}");
}

/// The archived file must parse, be claimed SAT, and be refuted by the
/// oracle.
fn reverify(path: &Path) -> Result<(), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))?;
    let f = Formula::parse_dimacs(&text).map_err(|e| format!("parse {path:?}: {e}"))?;
    let v = decide(&f).map_err(|e| format!("decide {path:?}: {e}"))?;
    if v.claim != Claim::Sat {
        return Err(format!("{path:?} no longer claimed satisfiable"));
    }
    let truth = oracle::brute_force(&f, false)
        .map_err(|e| format!("oracle {path:?}: {e}"))?
        .satisfiable;
    if truth {
        return Err(format!("{path:?} is actually satisfiable"));
    }
    Ok(())
}

#[test]
fn criterion_5_extraction_on_sat_claims() {
    let _g = gate();
    let s = sweep();
    let mut bad: Vec<String> = Vec::new();

    let mut sat_claims = 0u64;
    let mut unverified = 0u64;
    let mut max_backtracks = 0u64;
    for r in &s.outcome.records {
        if r.claim != Some(Claim::Sat) {
            continue;
        }
        sat_claims += 1;
        max_backtracks = max_backtracks.max(r.backtracks);
        if let Some(note) = &r.anomaly {
            unverified += 1;
            if bad.len() < 5 {
                bad.push(format!("seed {}: {note}", r.spec.seed));
            }
        }
    }
    expect!(bad, sat_claims > 0, "sweep produced no SAT claims");
    let pass = bad.is_empty() && unverified == 0;
    let detail = if pass {
        format!(
            "all {sat_claims} SAT claims backed by verified models, max backtracks \
             {max_backtracks} (prediction: 0)"
        )
    } else {
        format!("{unverified} of {sat_claims} SAT claims unbacked: {}", bad.join("; "))
    };
    verdict(5, pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_6_schedule_confluence() {
    let _g = gate();
    let start = Instant::now();
    let mut bad: Vec<String> = Vec::new();

    let schedules = [
        Schedule::NaiveRoundRobin,
        Schedule::Worklist,
        Schedule::Randomized { seed: 11 },
        Schedule::Randomized { seed: 22 },
        Schedule::Randomized { seed: 33 },
    ];
    let mut checked = 0u32;
    for i in 0..120u64 {
        let m = 4 + (i % 6) as u32;
        let k = if i % 3 == 0 { 2 } else { 3 };
        let n = 5 + (i % 9) as u32;
        let f = GenSpec::random(m, n, k, 0xC0F + i).generate();
        let b = build_structure(&f, &BuildOptions::default()).unwrap();

        let fixpoints: Vec<StructureValues> = schedules
            .iter()
            .map(|&s| {
                let mut v = b.values.clone();
                run_pair_cleaning(&b.structure, &mut v, s);
                v
            })
            .collect();
        for (si, v) in fixpoints.iter().enumerate().skip(1) {
            expect!(bad, v == &fixpoints[0], "instance {i}: schedule {si} diverged");
        }
        expect!(bad, is_unclearable(&b.structure, &fixpoints[0]), "instance {i}: not a fixpoint");

        let mut again = fixpoints[0].clone();
        let stats = run_pair_cleaning(&b.structure, &mut again, Schedule::Worklist);
        expect!(
            bad,
            stats.rows_removed == 0 && again == fixpoints[0],
            "instance {i}: re-clearing removed {} rows",
            stats.rows_removed
        );
        checked += 1;
    }

    expect!(bad, checked >= 100, "only {checked} instances checked");
    let pass = bad.is_empty();
    let detail = if pass {
        format!(
            "{checked} instances reach one fixpoint under 5 schedules and re-clearing \
             removes 0 rows ({:.1?})",
            start.elapsed()
        )
    } else {
        bad.join("; ")
    };
    verdict(6, pass, &detail);
    assert!(pass, "{bad:?}");
}

#[test]
fn criterion_7_oracle_equivalence() {
    let _g = gate();
    let start = Instant::now();
    let mut bad: Vec<String> = Vec::new();

    let mut checked = 0u32;
    for i in 0..510u64 {
        // mostly small, with a tail up to the 12-variable brute-force cap
        let (m, ratio) = if i < 480 {
            (4 + (i % 6) as u32, RATIOS[(i / 6) as usize % 3])
        } else {
            (10 + ((i / 3) % 3) as u32, RATIOS[i as usize % 3])
        };
        let f = GenSpec::random(m, clauses_for(m, ratio), 3, 0xE0 + i).generate();
        let walked = match enumerate_models(&f, usize::MAX) {
            Ok(ms) => ms,
            Err(e) => {
                bad.push(format!("instance {i}: enumeration failed: {e}"));
                continue;
            }
        };
        let brute = oracle::brute_force(&f, true).unwrap().models.unwrap();
        expect!(
            bad,
            walked == brute,
            "instance {i} (m={m}): {} enumerated vs {} brute-force models",
            walked.len(),
            brute.len()
        );
        checked += 1;
    }

    expect!(bad, checked >= 500, "only {checked} instances checked");
    let pass = bad.is_empty();
    let detail = if pass {
        format!(
            "model sets identical on {checked} instances up to 12 variables ({:.1?})",
            start.elapsed()
        )
    } else {
        bad.join("; ")
    };
    verdict(7, pass, &detail);
    assert!(pass, "{bad:?}");
}

#[test]
fn criterion_8_pass_bound_and_scaling() {
    let _g = gate();
    let s = sweep();
    let mut bad: Vec<String> = Vec::new();

    let audited = s.outcome.summary.total - s.outcome.summary.skipped;
    let violations = s
        .outcome
        .records
        .iter()
        .filter(|r| r.claim.is_some() && !r.bound_ok)
        .count();
    expect!(bad, violations == 0, "{violations} instances exceeded the pass bound");

    let study = scaling::run_scaling(&[5, 10, 15, 20, 25, 30, 35, 40], 3, 0xF17);
    expect!(
        bad,
        study.points.iter().all(|p| p.bound_ok),
        "scaling instance exceeded the pass bound"
    );
    expect!(
        bad,
        study.time_exponent.is_finite() && study.check_exponent.is_finite(),
        "degenerate scaling fit"
    );

    let pass = bad.is_empty();
    let detail = if pass {
        format!(
            "pass bound held on all {audited} audited instances; fitted growth exponent \
             {:.2} in wall time ({:.2} in support checks) against the {:.0} worst-case \
             ceiling, reported without a threshold",
            study.time_exponent,
            study.check_exponent,
            scaling::CEILING_EXPONENT
        )
    } else {
        bad.join("; ")
    };
    verdict(8, pass, &detail);
    assert!(pass, "{bad:?}");
}

#[test]
fn criterion_9_report_determinism() {
    let _g = gate();
    let mut bad: Vec<String> = Vec::new();

    let bin = env!("CARGO_BIN_EXE_pairclean");
    let run = |dir: &Path| -> Result<Vec<u8>, String> {
        let out = Command::new(bin)
            .args(["audit", "--m", "8", "--count", "40", "--seed", "123"])
            .arg("--out")
            .arg(dir)
            .output()
            .map_err(|e| format!("spawn: {e}"))?;
        if !out.status.success() {
            return Err(format!(
                "audit exited with {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        fs::read(dir.join("report.csv")).map_err(|e| format!("read csv: {e}"))
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mut identical = false;
    match (run(dir_a.path()), run(dir_b.path())) {
        (Ok(a), Ok(b)) => {
            identical = a == b;
            expect!(bad, identical, "reports differ between runs");
            expect!(bad, !a.is_empty(), "empty report");
        }
        (r1, r2) => {
            for r in [r1, r2] {
                if let Err(e) = r {
                    bad.push(e);
                }
            }
        }
    }

    let pass = bad.is_empty() && identical;
    let detail = if pass {
        "two identically flagged audit runs wrote byte-identical CSV reports".to_string()
    } else {
        bad.join("; ")
    };
    verdict(9, pass, &detail);
    assert!(pass, "{bad:?}");
}
