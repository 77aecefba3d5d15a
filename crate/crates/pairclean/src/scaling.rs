//! Empirical growth of cleaning cost with the clause-group count.
//!
//! Generates width-3 instances whose group count is controlled exactly,
//! times the decision procedure, and fits log-log slopes. The slopes are
//! reported next to the documented worst-case ceiling; they are
//! measurements of typical behavior, not a pass/fail check, since the
//! bound is only an upper bound.

use std::time::Instant;

use pairclean_core::solver::{decide_with, SolveOptions};

use crate::gen::generate_distinct_groups;

/// Exponent of the k=3 worst-case bound O(n_t^12) that the measured
/// slopes are reported against.
pub const CEILING_EXPONENT: f64 = 12.0;

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ScalingPoint {
    pub n_t: u32,
    pub m: u32,
    /// Median wall time over the repetitions.
    pub seconds: f64,
    pub passes: u64,
    pub pair_clearings: u64,
    pub support_checks: u64,
    pub bound_ok: bool,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Log-log slope of wall time against n_t.
    pub time_exponent: f64,
    /// Log-log slope of support checks against n_t; deterministic, so the
    /// more reproducible of the two.
    pub check_exponent: f64,
}

/// One instance per target per repetition, k = 3, clause tuples distinct
/// so the group count hits the target exactly; m tracks the usual density
/// so instances stay in the interesting regime.
pub fn run_scaling(targets: &[u32], reps: u32, seed: u64) -> ScalingReport {
    assert!(reps >= 1 && targets.len() >= 2);
    let opts = SolveOptions::default();
    let mut points = Vec::with_capacity(targets.len());
    for (ti, &n_t) in targets.iter().enumerate() {
        let m = ((n_t as f64 / 4.2).ceil() as u32).max(7);
        let mut times = Vec::with_capacity(reps as usize);
        let mut stats = None;
        for rep in 0..reps {
            let f = generate_distinct_groups(m, n_t, 3, seed ^ ((ti as u64) << 32 | rep as u64));
            let start = Instant::now();
            let v = decide_with(&f, &opts).expect("scaling instances are within guards");
            times.push(start.elapsed().as_secs_f64());
            // counters are deterministic per instance; keep the first rep
            stats.get_or_insert((v.stats, v.stats.within_pass_bound(3, v.n_t)));
        }
        times.sort_by(|a, b| a.partial_cmp(b).expect("elapsed times are finite"));
        let (st, bound_ok) = stats.expect("at least one rep ran");
        points.push(ScalingPoint {
            n_t,
            m,
            seconds: times[times.len() / 2],
            passes: st.passes,
            pair_clearings: st.pair_clearings,
            support_checks: st.support_checks,
            bound_ok,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n_t as f64).ln()).collect();
    let times: Vec<f64> = points.iter().map(|p| p.seconds.max(1e-9).ln()).collect();
    let checks: Vec<f64> = points
        .iter()
        .map(|p| (p.support_checks.max(1) as f64).ln())
        .collect();
    ScalingReport {
        time_exponent: fit_slope(&xs, &times),
        check_exponent: fit_slope(&xs, &checks),
        points,
    }
}

/// Least-squares slope of y over x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
