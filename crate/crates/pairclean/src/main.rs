//! Command-line front end: solve and inspect single instances, ground-truth
//! them, run differential audits, and shrink disagreements.
//!
//! Exit codes: 10 satisfiable, 20 unsatisfiable, 0 other success, 30
//! anomaly (claim disagrees with evidence), 1 usage or runtime error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pairclean::audit::{run_audit, AuditOptions};
use pairclean::gen::GenSpec;
use pairclean::minimize::minimize;
use pairclean::report;
use pairclean::scaling::{run_scaling, CEILING_EXPONENT};
use pairclean_core::clearing::{run_pair_cleaning_traced, Schedule};
use pairclean_core::formula::Formula;
use pairclean_core::groups::GroupIndex;
use pairclean_core::oracle;
use pairclean_core::solver::{
    decide_with, enumerate_models_with, extract_with, verdict_of, Claim, Extraction,
    SolveOptions,
};
use pairclean_core::structure::{build_structure, BuildOptions};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_ANOMALY: u8 = 30;

#[derive(Parser)]
#[command(
    name = "pairclean",
    version,
    about = "k-SAT via pair cleaning of clause-combination value sets, with oracles and a differential audit harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Naive,
    Worklist,
    Randomized,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a DIMACS instance with the cleaning procedure.
    Solve {
        path: PathBuf,
        /// Back a SAT claim with a verified assignment.
        #[arg(long)]
        extract: bool,
        /// List up to N verified models (exhaustive when N exceeds the
        /// model count).
        #[arg(long, value_name = "N")]
        enumerate: Option<usize>,
        #[arg(long, value_enum, default_value = "worklist")]
        engine: Engine,
        /// Seed for the randomized engine.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print run counters as a JSON comment line.
        #[arg(long)]
        stats: bool,
        /// Print one comment line per pair clearing.
        #[arg(long)]
        trace: bool,
        /// Run all schedules and verify they reach the same fixpoint.
        #[arg(long)]
        check_confluence: bool,
        /// Print the clause groups as comment lines.
        #[arg(long)]
        dump_groups: bool,
    },
    /// Ground-truth a DIMACS instance by exhaustive search.
    Oracle {
        path: PathBuf,
        /// List every model.
        #[arg(long)]
        enumerate: bool,
    },
    /// Differential audit of the claim over generated instances.
    Audit {
        /// Variables per instance.
        #[arg(long)]
        m: u32,
        /// Clauses per instance; defaults to round(ratio * m).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 3)]
        k: u32,
        /// Instances to generate.
        #[arg(long)]
        count: u32,
        /// Seed of the first instance; instance i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Clause-to-variable ratio used when --n is absent.
        #[arg(long, default_value_t = 4.2)]
        ratio: f64,
        /// Generate planted (guaranteed satisfiable) instances.
        #[arg(long)]
        planted: bool,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
        /// Measure wall time per instance; off by default so reports are
        /// byte-reproducible.
        #[arg(long)]
        wall_time: bool,
        /// Audit one instance at a time instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Shrink an instance whose claim disputes the oracle to a 1-minimal
    /// disagreement.
    Minimize {
        path: PathBuf,
        /// Output path; defaults to the input with a .min.cnf suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure how cleaning cost grows with the clause-group count.
    Scaling {
        /// Group-count targets, ascending.
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25,30,35,40")]
        targets: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with status 0
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_ERROR };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Solve {
            path,
            extract,
            enumerate,
            engine,
            seed,
            stats,
            trace,
            check_confluence,
            dump_groups,
        } => cmd_solve(
            &path,
            extract,
            enumerate,
            engine,
            seed,
            stats,
            trace,
            check_confluence,
            dump_groups,
        ),
        Cmd::Oracle { path, enumerate } => cmd_oracle(&path, enumerate),
        Cmd::Audit {
            m,
            n,
            k,
            count,
            seed,
            ratio,
            planted,
            out,
            wall_time,
            serial,
        } => cmd_audit(m, n, k, count, seed, ratio, planted, &out, wall_time, serial),
        Cmd::Minimize { path, out } => cmd_minimize(&path, out),
        Cmd::Scaling { targets, reps, seed } => cmd_scaling(&targets, reps, seed),
    }
}

/// Build options with the PAIRCLEAN_MAX_WIDTH override applied.
fn build_options() -> Result<BuildOptions> {
    let mut opts = BuildOptions::default();
    if let Ok(raw) = std::env::var("PAIRCLEAN_MAX_WIDTH") {
        opts.max_width = raw
            .parse()
            .map_err(|_| anyhow!("PAIRCLEAN_MAX_WIDTH must be an integer, got {raw:?}"))?;
    }
    Ok(opts)
}

fn solve_options(engine: Engine, seed: u64) -> Result<SolveOptions> {
    Ok(SolveOptions {
        build: build_options()?,
        schedule: match engine {
            Engine::Naive => Schedule::NaiveRoundRobin,
            Engine::Worklist => Schedule::Worklist,
            Engine::Randomized => Schedule::Randomized { seed },
        },
    })
}

fn read_formula(path: &std::path::Path) -> Result<Formula> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Formula::parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

fn model_line(a: &pairclean_core::formula::Assignment) -> String {
    let lits: Vec<String> = a.external_literals().iter().map(|l| l.to_string()).collect();
    format!("v {} 0", lits.join(" "))
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    path: &std::path::Path,
    extract: bool,
    enumerate: Option<usize>,
    engine: Engine,
    seed: u64,
    stats: bool,
    trace: bool,
    check_confluence: bool,
    dump_groups: bool,
) -> Result<u8> {
    let f = read_formula(path)?;
    let opts = solve_options(engine, seed)?;

    if dump_groups {
        for line in GroupIndex::build(&f).dump().lines() {
            println!("c {line}");
        }
    }

    if check_confluence {
        let schedules = [
            Schedule::NaiveRoundRobin,
            Schedule::Worklist,
            Schedule::Randomized { seed: 1 },
            Schedule::Randomized { seed: 2 },
            Schedule::Randomized { seed: 3 },
        ];
        let mut fixpoints = Vec::new();
        for s in schedules {
            let mut built = build_structure(&f, &opts.build)?;
            run_pair_cleaning_traced(&built.structure, &mut built.values, s, &mut |_| {});
            fixpoints.push(built.values);
        }
        if fixpoints.iter().any(|v| v != &fixpoints[0]) {
            println!("c confluence MISMATCH across schedules");
            println!("s UNKNOWN");
            return Ok(EXIT_ANOMALY);
        }
        println!("c confluence ok across {} schedules", schedules.len());
    }

    if let Some(limit) = enumerate {
        let models = enumerate_models_with(&f, limit, &opts)?;
        if stats {
            let v = decide_with(&f, &opts)?;
            println!("c stats {}", report::verdict_json(&v));
        }
        println!(
            "s {}",
            if models.is_empty() { "UNSATISFIABLE" } else { "SATISFIABLE" }
        );
        println!("c models {}", models.len());
        for a in &models {
            println!("{}", model_line(a));
        }
        return Ok(if models.is_empty() { EXIT_UNSAT } else { EXIT_SAT });
    }

    if extract {
        let r = extract_with(&f, &opts)?;
        if stats {
            println!("c stats {}", report::verdict_json(&r.verdict));
        }
        println!("c backtracks {}", r.backtracks);
        return Ok(match r.outcome {
            Extraction::Model(a) => {
                println!("s SATISFIABLE");
                println!("{}", model_line(&a));
                EXIT_SAT
            }
            Extraction::Unsat => {
                println!("s UNSATISFIABLE");
                EXIT_UNSAT
            }
            Extraction::Anomaly(t) => {
                println!("s UNKNOWN");
                println!(
                    "c anomaly: {} ({} dead ends)",
                    t.note, t.dead_ends_total
                );
                EXIT_ANOMALY
            }
        });
    }

    let verdict = if trace {
        let mut built = build_structure(&f, &opts.build)?;
        let st = run_pair_cleaning_traced(
            &built.structure,
            &mut built.values,
            opts.schedule,
            &mut |e| {
                println!(
                    "c clear {} {} removed {} {}",
                    e.first, e.second, e.removed_first, e.removed_second
                );
            },
        );
        verdict_of(&built, st)
    } else {
        decide_with(&f, &opts)?
    };
    if stats {
        println!("c stats {}", report::verdict_json(&verdict));
    }
    Ok(match verdict.claim {
        Claim::Sat => {
            println!("s SATISFIABLE");
            EXIT_SAT
        }
        Claim::Unsat => {
            println!("s UNSATISFIABLE");
            EXIT_UNSAT
        }
    })
}

fn cmd_oracle(path: &std::path::Path, enumerate: bool) -> Result<u8> {
    let f = read_formula(path)?;
    let r = oracle::brute_force(&f, enumerate)?;
    println!(
        "s {}",
        if r.satisfiable { "SATISFIABLE" } else { "UNSATISFIABLE" }
    );
    println!("c assignments_checked {}", r.assignments_checked);
    if let Some(models) = &r.models {
        println!("c models {}", models.len());
        for a in models {
            println!("{}", model_line(a));
        }
    }
    Ok(if r.satisfiable { EXIT_SAT } else { EXIT_UNSAT })
}

#[allow(clippy::too_many_arguments)]
fn cmd_audit(
    m: u32,
    n: Option<u32>,
    k: u32,
    count: u32,
    seed: u64,
    ratio: f64,
    planted: bool,
    out: &std::path::Path,
    wall_time: bool,
    serial: bool,
) -> Result<u8> {
    if !(ratio.is_finite() && ratio > 0.0) {
        bail!("--ratio must be positive, got {ratio}");
    }
    let n = n.unwrap_or_else(|| (ratio * m as f64).round().max(1.0) as u32);
    let specs: Vec<GenSpec> = (0..count)
        .map(|i| GenSpec {
            m,
            n,
            k,
            seed: seed + i as u64,
            planted,
        })
        .collect();
    let opts = AuditOptions {
        solve: SolveOptions {
            build: build_options()?,
            ..SolveOptions::default()
        },
        serial,
        measure_time: wall_time,
        ..AuditOptions::default()
    };
    let outcome = run_audit(&specs, &opts);

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let csv_path = out.join("report.csv");
    let json_path = out.join("report.json");
    report::write_csv(&csv_path, &outcome.records)?;
    report::write_json(&json_path, &outcome)?;
    let artifacts = report::archive_counterexamples(out, &outcome, &opts.solve)?;

    let s = &outcome.summary;
    let audited = s.total - s.skipped;
    println!(
        "audit: {} instances, {} agree, {} false-sat, {} false-unsat, {} skipped",
        s.total, s.agree, s.false_sat, s.false_unsat, s.skipped
    );
    if audited > 0 {
        println!(
            "agreement rate: {:.4} over {} audited",
            s.agree as f64 / audited as f64,
            audited
        );
    }
    let max_passes = outcome.records.iter().map(|r| r.stats.passes).max().unwrap_or(0);
    println!(
        "bounds: max passes {max_passes}, all within bound: {}",
        s.bounds_ok
    );
    println!("max extraction backtracks: {}", s.max_backtracks);
    println!("report: {}", csv_path.display());
    println!("report: {}", json_path.display());
    for a in &artifacts {
        println!("counterexample: {}", a.original.display());
        println!("counterexample: {}", a.minimized.display());
    }

    Ok(if s.false_unsat > 0 {
        eprintln!("error: false-unsat records found; this is an implementation bug");
        EXIT_ERROR
    } else if s.false_sat > 0 {
        EXIT_ANOMALY
    } else {
        EXIT_OK
    })
}

fn cmd_minimize(path: &std::path::Path, out: Option<PathBuf>) -> Result<u8> {
    let f = read_formula(path)?;
    let solve = SolveOptions {
        build: build_options()?,
        ..SolveOptions::default()
    };
    if !report::disagrees(&f, &solve) {
        eprintln!("no disagreement between the claim and the oracle on this instance");
        return Ok(EXIT_ERROR);
    }
    let result = minimize(&f, |g| report::disagrees(g, &solve))
        .expect("disagreement checked above");
    let out = out.unwrap_or_else(|| path.with_extension("min.cnf"));
    fs::write(&out, result.formula.to_dimacs())
        .with_context(|| format!("writing {}", out.display()))?;
    println!(
        "minimized: {} clauses / {} vars -> {} clauses / {} vars in {} steps",
        f.n(),
        f.m(),
        result.formula.n(),
        result.formula.m(),
        result.steps
    );
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn cmd_scaling(targets: &[u32], reps: u32, seed: u64) -> Result<u8> {
    if targets.len() < 2 {
        bail!("need at least two --targets points to fit a slope");
    }
    let report = run_scaling(targets, reps.max(1), seed);
    println!("n_t,m,seconds,passes,pair_clearings,support_checks,bound_ok");
    for p in &report.points {
        println!(
            "{},{},{:.6},{},{},{},{}",
            p.n_t, p.m, p.seconds, p.passes, p.pair_clearings, p.support_checks, p.bound_ok
        );
    }
    println!(
        "time exponent {:.2}, support-check exponent {:.2}, worst-case ceiling {CEILING_EXPONENT:.0}",
        report.time_exponent, report.check_exponent
    );
    Ok(EXIT_OK)
}
