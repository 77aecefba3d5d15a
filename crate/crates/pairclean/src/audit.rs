//! Differential audit: run the cleaning claim against a ground-truth
//! solver over seeded instance batches.
//!
//! Each record carries the claim, the truth, operation counters, and the
//! bound check. A false-unsat record (claim UNSAT, truth SAT) is an
//! implementation bug and callers treat it as fatal; a false-sat record
//! (claim SAT, truth UNSAT) is a genuine counterexample to the nonempty
//! fixpoint claim and gets archived rather than hidden. Records are pure
//! functions of their spec, so reports are reproducible; the optional
//! deadline and the structure-size guards produce explicit skips, never
//! silent drops.

use std::time::Instant;

use pairclean_core::clearing::ClearStats;
use pairclean_core::formula::Formula;
use pairclean_core::oracle;
use pairclean_core::solver::{extract_with, Claim, Extraction, SolveOptions, Verdict};
use pairclean_core::structure::BuildError;
use rayon::prelude::*;

use crate::gen::{generate, GenSpec};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Classification {
    Agree,
    /// Claim SAT, truth UNSAT: counterexample to the nonempty-fixpoint
    /// claim.
    FalseSat,
    /// Claim UNSAT, truth SAT: must never occur.
    FalseUnsat,
    Skipped,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Agree => "agree",
            Classification::FalseSat => "false-sat",
            Classification::FalseUnsat => "false-unsat",
            Classification::Skipped => "skipped",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Audit outcome for one spec. `claim` and `truth` are absent on skips.
#[derive(Clone, Debug)]
pub struct AuditRecord {
    pub spec: GenSpec,
    pub n_t: u32,
    pub claim: Option<Claim>,
    pub truth: Option<bool>,
    pub classification: Classification,
    pub stats: ClearStats,
    /// Failed row restrictions while extracting; the extraction claim
    /// predicts 0.
    pub backtracks: u64,
    /// Note from an extraction that could not back a SAT claim.
    pub anomaly: Option<String>,
    pub bound_ok: bool,
    pub wall_time_ms: u64,
    pub skip_reason: Option<String>,
}

pub type ClaimFn = dyn Fn(&Formula) -> Result<Verdict, BuildError> + Sync;

#[derive(Default)]
pub struct AuditOptions<'a> {
    pub solve: SolveOptions,
    pub serial: bool,
    /// Specs not started by this instant are skipped.
    pub deadline: Option<Instant>,
    /// Fill `wall_time_ms` from a clock. Off by default so reports are
    /// byte-reproducible.
    pub measure_time: bool,
    /// Replaces the real decision procedure; harness self-tests inject
    /// stubs here to exercise the disagreement paths.
    pub claim_fn: Option<&'a ClaimFn>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct AuditSummary {
    pub total: u64,
    pub agree: u64,
    pub false_sat: u64,
    pub false_unsat: u64,
    pub skipped: u64,
    pub anomalies: u64,
    pub max_backtracks: u64,
    pub bounds_ok: bool,
}

impl AuditSummary {
    /// True when no spec was skipped.
    pub fn completed(&self) -> bool {
        self.skipped == 0
    }
}

#[derive(Clone, Debug)]
pub struct AuditOutcome {
    /// One record per spec, in spec order.
    pub records: Vec<AuditRecord>,
    pub summary: AuditSummary,
}

pub fn run_audit(specs: &[GenSpec], opts: &AuditOptions) -> AuditOutcome {
    let records: Vec<AuditRecord> = if opts.serial {
        specs.iter().map(|s| audit_one(s, opts)).collect()
    } else {
        specs.par_iter().map(|s| audit_one(s, opts)).collect()
    };
    let summary = summarize(&records);
    AuditOutcome { records, summary }
}

pub fn audit_one(spec: &GenSpec, opts: &AuditOptions) -> AuditRecord {
    if opts.deadline.is_some_and(|d| Instant::now() >= d) {
        return skipped(spec, "deadline reached before start".into());
    }
    let f = generate(spec);
    let start = Instant::now();
    let (verdict, backtracks, anomaly) = match opts.claim_fn {
        Some(claim) => match claim(&f) {
            Ok(v) => (v, 0, None),
            Err(e) => return skipped(spec, e.to_string()),
        },
        None => match extract_with(&f, &opts.solve) {
            Ok(r) => {
                let anomaly = match r.outcome {
                    Extraction::Anomaly(t) => Some(t.note),
                    _ => None,
                };
                (r.verdict, r.backtracks, anomaly)
            }
            Err(e) => return skipped(spec, e.to_string()),
        },
    };
    let wall_time_ms = if opts.measure_time {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let truth = oracle::dpll(&f);
    let classification = match (verdict.claim, truth) {
        (Claim::Sat, false) => Classification::FalseSat,
        (Claim::Unsat, true) => Classification::FalseUnsat,
        _ => Classification::Agree,
    };
    AuditRecord {
        spec: *spec,
        n_t: verdict.n_t,
        claim: Some(verdict.claim),
        truth: Some(truth),
        classification,
        bound_ok: verdict.stats.within_pass_bound(f.k(), verdict.n_t),
        stats: verdict.stats,
        backtracks,
        anomaly,
        wall_time_ms,
        skip_reason: None,
    }
}

fn skipped(spec: &GenSpec, reason: String) -> AuditRecord {
    AuditRecord {
        spec: *spec,
        n_t: 0,
        claim: None,
        truth: None,
        classification: Classification::Skipped,
        stats: ClearStats::default(),
        backtracks: 0,
        anomaly: None,
        bound_ok: true,
        wall_time_ms: 0,
        skip_reason: Some(reason),
    }
}

fn summarize(records: &[AuditRecord]) -> AuditSummary {
    let mut s = AuditSummary {
        total: records.len() as u64,
        bounds_ok: true,
        ..AuditSummary::default()
    };
    for r in records {
        match r.classification {
            Classification::Agree => s.agree += 1,
            Classification::FalseSat => s.false_sat += 1,
            Classification::FalseUnsat => s.false_unsat += 1,
            Classification::Skipped => s.skipped += 1,
        }
        if r.anomaly.is_some() {
            s.anomalies += 1;
        }
        s.max_backtracks = s.max_backtracks.max(r.backtracks);
        s.bounds_ok &= r.bound_ok;
    }
    s
}
