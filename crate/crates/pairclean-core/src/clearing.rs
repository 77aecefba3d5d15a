//! Pairwise clearing of combination value sets down to the greatest
//! fixpoint at which every row of every set has a matching row in every
//! other set.
//!
//! `clear_pair` is the primitive: project the second set onto the shared
//! variables, drop unsupported rows from the first, then re-project the
//! reduced first set and drop unsupported rows from the second. With no
//! shared variables the projection is the single empty tuple, so a row
//! survives iff the other set is nonempty, which makes emptiness global:
//! once any set is empty the fixpoint is all sets empty.
//!
//! Three schedules reach the same fixpoint (pair clearing is monotone and
//! confluent; `tests` and the integration suite check this):
//! - `NaiveRoundRobin`: literal sweeps over all combination pairs in index
//!   order until a sweep removes nothing. Expands every combination's set;
//!   meant as the reference for differential testing, not for large runs.
//! - `Worklist`: operates on one set per distinct union tuple and only
//!   revisits pairs touching a set that shrank in the previous generation.
//!   The default.
//! - `Randomized`: the literal sweeps with the pair order reshuffled each
//!   pass from a seed.
//!
//! Reported stats are schedule-specific operation counts: `passes` counts
//! sweeps or generations including the final one that removes nothing,
//! structures with fewer than two combinations report zero passes, and
//! `rows_removed` counts in combination units (a class removal counts once
//! per member combination).

use alloc::vec;
use alloc::vec::Vec;

use crate::structure::{
    binomial, shared_positions, CombinationValueSet, RelationshipStructure, StructureValues,
};

/// Result of one `clear_pair` call. `support_checks` counts row-vs-set
/// membership tests.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct ClearOutcome {
    pub removed_first: u64,
    pub removed_second: u64,
    pub support_checks: u64,
}

/// Operation counts of a full cleaning run.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct ClearStats {
    pub passes: u64,
    pub pair_clearings: u64,
    pub rows_removed: u64,
    pub support_checks: u64,
}

impl ClearStats {
    /// Whether `passes` respects the worst-case pass bound for the given
    /// width and degree.
    pub fn within_pass_bound(&self, k: u32, n_t: u32) -> bool {
        self.passes as u128 <= pass_bound(k, n_t)
    }
}

/// 2^(k(k+1)) * C(n_t, k+1), saturating: every pass but the last removes a
/// row from some combination set, each holding at most 2^(k(k+1)) rows.
pub fn pass_bound(k: u32, n_t: u32) -> u128 {
    let e = k * (k + 1);
    let pow = if e >= 128 { u128::MAX } else { 1u128 << e };
    pow.saturating_mul(binomial(n_t as u64, k as u64 + 1))
}

/// 2^(2k(k+1)) * C(n_t, k+1)^2, saturating: row-pair comparisons within one
/// pass over all combination pairs.
pub fn per_pass_check_bound(k: u32, n_t: u32) -> u128 {
    let e = 2 * k * (k + 1);
    let pow = if e >= 128 { u128::MAX } else { 1u128 << e };
    let cmb = binomial(n_t as u64, k as u64 + 1);
    pow.saturating_mul(cmb).saturating_mul(cmb)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Schedule {
    NaiveRoundRobin,
    Worklist,
    Randomized { seed: u64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Worklist
    }
}

/// One `clear_pair` call, for tracing. For the worklist schedule the ids
/// are the first member combinations of the two classes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ClearEvent {
    pub first: u32,
    pub second: u32,
    pub removed_first: u64,
    pub removed_second: u64,
}

/// Clears `first` against `second`, then `second` against the reduced
/// `first`.
pub fn clear_pair(
    first: &mut CombinationValueSet,
    second: &mut CombinationValueSet,
) -> ClearOutcome {
    clear_pair_with(first, second, &mut Scratch::new())
}

fn clear_pair_with(
    first: &mut CombinationValueSet,
    second: &mut CombinationValueSet,
    scratch: &mut Scratch,
) -> ClearOutcome {
    let (pa, pb) = shared_positions(first.vars(), second.vars());
    let s = pa.len();
    let wa = first.width();
    let wb = second.width();
    let mut checks = 0u64;

    let ws = scratch.zeroed(1usize << s);
    for row in second.rows() {
        mark(ws, project(row, wb, &pb));
    }
    checks += first.len() as u64;
    let removed_first = first.retain_rows(|row| marked(ws, project(row, wa, &pa)));

    let ws = scratch.zeroed(1usize << s);
    for row in first.rows() {
        mark(ws, project(row, wa, &pa));
    }
    checks += second.len() as u64;
    let removed_second = second.retain_rows(|row| marked(ws, project(row, wb, &pb)));

    ClearOutcome {
        removed_first,
        removed_second,
        support_checks: checks,
    }
}

/// Row code of the shared positions, kept in shared-tuple order.
#[inline]
fn project(row: u32, width: u32, positions: &[u32]) -> u32 {
    let s = positions.len() as u32;
    let mut code = 0u32;
    for (j, &p) in positions.iter().enumerate() {
        code |= (row >> (width - 1 - p) & 1) << (s - 1 - j as u32);
    }
    code
}

struct Scratch {
    words: Vec<u64>,
}

impl Scratch {
    fn new() -> Self {
        Scratch { words: Vec::new() }
    }

    fn zeroed(&mut self, nbits: usize) -> &mut [u64] {
        let need = nbits.div_ceil(64);
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        let ws = &mut self.words[..need];
        ws.fill(0);
        ws
    }
}

#[inline]
fn mark(ws: &mut [u64], i: u32) {
    ws[(i / 64) as usize] |= 1u64 << (i % 64);
}

#[inline]
fn marked(ws: &[u64], i: u32) -> bool {
    ws[(i / 64) as usize] >> (i % 64) & 1 == 1
}

pub fn run_pair_cleaning(
    rs: &RelationshipStructure,
    values: &mut StructureValues,
    schedule: Schedule,
) -> ClearStats {
    run_pair_cleaning_traced(rs, values, schedule, &mut |_| {})
}

pub fn run_pair_cleaning_traced(
    rs: &RelationshipStructure,
    values: &mut StructureValues,
    schedule: Schedule,
    sink: &mut dyn FnMut(ClearEvent),
) -> ClearStats {
    match schedule {
        Schedule::Worklist => run_worklist(rs, values, sink),
        Schedule::NaiveRoundRobin => run_per_combination(rs, values, None, sink),
        Schedule::Randomized { seed } => run_per_combination(rs, values, Some(seed), sink),
    }
}

/// True iff the structure has combinations and every set is empty. At a
/// fixpoint one empty set forces this.
pub fn is_empty(values: &StructureValues) -> bool {
    let sets = values.class_sets();
    !sets.is_empty() && sets.iter().all(|s| s.is_empty())
}

/// True iff no `clear_pair` application would remove a row. Pairs within
/// one class are always stable (equal sets sharing every variable), so only
/// class pairs are checked.
pub fn is_unclearable(rs: &RelationshipStructure, values: &StructureValues) -> bool {
    let nc = rs.class_count();
    let mut scratch = Scratch::new();
    for a in 0..nc {
        for b in a + 1..nc {
            let sa = values.class_set(a);
            let sb = values.class_set(b);
            let (pa, pb) = shared_positions(sa.vars(), sb.vars());
            let s = pa.len();
            let ws = scratch.zeroed(1usize << s);
            for row in sb.rows() {
                mark(ws, project(row, sb.width(), &pb));
            }
            if sa.rows().any(|row| !marked(ws, project(row, sa.width(), &pa))) {
                return false;
            }
            let ws = scratch.zeroed(1usize << s);
            for row in sa.rows() {
                mark(ws, project(row, sa.width(), &pa));
            }
            if sb.rows().any(|row| !marked(ws, project(row, sb.width(), &pb))) {
                return false;
            }
        }
    }
    true
}

fn run_worklist(
    rs: &RelationshipStructure,
    values: &mut StructureValues,
    sink: &mut dyn FnMut(ClearEvent),
) -> ClearStats {
    let mut stats = ClearStats::default();
    if rs.combination_count() < 2 {
        return stats;
    }
    let nc = rs.class_count();
    let members: Vec<u64> = rs.classes().iter().map(|c| c.members() as u64).collect();
    let reps: Vec<u32> = rs.classes().iter().map(|c| c.first_combination()).collect();
    let mut scratch = Scratch::new();
    let mut dirty = vec![true; nc];
    loop {
        stats.passes += 1;
        let mut new_dirty = vec![false; nc];
        let mut any_removed = false;
        for a in 0..nc {
            for b in a + 1..nc {
                if !dirty[a] && !dirty[b] {
                    continue;
                }
                let (lo, hi) = values.class_sets_mut().split_at_mut(b);
                let out = clear_pair_with(&mut lo[a], &mut hi[0], &mut scratch);
                stats.pair_clearings += 1;
                stats.support_checks += out.support_checks;
                stats.rows_removed +=
                    out.removed_first * members[a] + out.removed_second * members[b];
                sink(ClearEvent {
                    first: reps[a],
                    second: reps[b],
                    removed_first: out.removed_first,
                    removed_second: out.removed_second,
                });
                if out.removed_first > 0 {
                    any_removed = true;
                    new_dirty[a] = true;
                }
                if out.removed_second > 0 {
                    any_removed = true;
                    new_dirty[b] = true;
                }
                if values.class_set(a).is_empty() || values.class_set(b).is_empty() {
                    // emptiness is global; finish with one wipe
                    for ci in 0..nc {
                        let set = &mut values.class_sets_mut()[ci];
                        stats.rows_removed += set.len() as u64 * members[ci];
                        set.clear();
                    }
                    return stats;
                }
            }
        }
        if !any_removed {
            break;
        }
        dirty = new_dirty;
    }
    stats
}

fn run_per_combination(
    rs: &RelationshipStructure,
    values: &mut StructureValues,
    seed: Option<u64>,
    sink: &mut dyn FnMut(ClearEvent),
) -> ClearStats {
    let mut stats = ClearStats::default();
    let d = rs.combination_count();
    if d < 2 {
        return stats;
    }
    let mut sets: Vec<CombinationValueSet> =
        (0..d).map(|i| values.for_combination(rs, i).clone()).collect();
    let mut scratch = Scratch::new();
    let mut rng = seed.map(SplitMix64::new);
    let mut pairs: Vec<(u32, u32)> = if rng.is_some() {
        let mut v = Vec::with_capacity(d * (d - 1) / 2);
        for i in 0..d as u32 {
            for j in i + 1..d as u32 {
                v.push((i, j));
            }
        }
        v
    } else {
        Vec::new()
    };

    loop {
        stats.passes += 1;
        let mut removed_this_pass = 0u64;
        let mut do_pair = |i: usize, j: usize, sets: &mut [CombinationValueSet]| {
            let (lo, hi) = sets.split_at_mut(j);
            let out = clear_pair_with(&mut lo[i], &mut hi[0], &mut scratch);
            stats.pair_clearings += 1;
            stats.support_checks += out.support_checks;
            stats.rows_removed += out.removed_first + out.removed_second;
            sink(ClearEvent {
                first: i as u32,
                second: j as u32,
                removed_first: out.removed_first,
                removed_second: out.removed_second,
            });
            out.removed_first + out.removed_second
        };
        if let Some(rng) = &mut rng {
            shuffle(&mut pairs, rng);
            for &(i, j) in &pairs {
                removed_this_pass += do_pair(i as usize, j as usize, &mut sets);
            }
        } else {
            for i in 0..d - 1 {
                for j in i + 1..d {
                    removed_this_pass += do_pair(i, j, &mut sets);
                }
            }
        }
        if removed_this_pass == 0 {
            break;
        }
    }

    // fold back onto classes; combinations over one union tuple must agree
    for i in 0..d {
        let rep = rs.class(rs.class_of(i)).first_combination() as usize;
        assert!(
            sets[i] == sets[rep],
            "combinations over one union tuple diverged at the fixpoint"
        );
    }
    for ci in 0..rs.class_count() {
        values.class_sets_mut()[ci] = sets[rs.class(ci).first_combination() as usize].clone();
    }
    stats
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

fn shuffle<T>(v: &mut [T], rng: &mut SplitMix64) {
    for i in (1..v.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Formula, VarId};
    use crate::structure::{build_structure, BuildOptions, Built};

    fn built(text: &str) -> Built {
        let f = Formula::parse_dimacs(text).unwrap();
        build_structure(&f, &BuildOptions::default()).unwrap()
    }

    fn vars(ids: &[u32]) -> Vec<VarId> {
        ids.iter().map(|&i| VarId(i)).collect()
    }

    fn rows_of(s: &CombinationValueSet) -> Vec<u32> {
        s.rows().collect()
    }

    #[test]
    fn clear_pair_drops_unsupported_rows_both_ways() {
        let mut v1 = CombinationValueSet::from_rows(vars(&[0, 1, 2]), &[0b101, 0b110, 0b111]);
        let mut v2 = CombinationValueSet::from_rows(
            vars(&[0, 1, 2, 3]),
            &[0b0100, 0b0101, 0b1011, 0b1101],
        );
        let out = clear_pair(&mut v1, &mut v2);
        assert_eq!(rows_of(&v1), [0b101, 0b110]);
        assert_eq!(rows_of(&v2), [0b1011, 0b1101]);
        assert_eq!(out.removed_first, 1);
        assert_eq!(out.removed_second, 2);
        assert_eq!(out.support_checks, 3 + 4);
    }

    #[test]
    fn clear_pair_without_shared_vars_only_propagates_emptiness() {
        let mut a = CombinationValueSet::from_rows(vars(&[0, 1]), &[0b00, 0b11]);
        let mut b = CombinationValueSet::from_rows(vars(&[2, 3]), &[0b01]);
        let out = clear_pair(&mut a, &mut b);
        assert_eq!(out, ClearOutcome { removed_first: 0, removed_second: 0, support_checks: 3 });
        assert_eq!(a.len(), 2);

        let mut empty = CombinationValueSet::from_rows(vars(&[2, 3]), &[]);
        let out = clear_pair(&mut a, &mut empty);
        assert_eq!(out.removed_first, 2);
        assert!(a.is_empty());
    }

    #[test]
    fn clear_pair_is_idempotent() {
        let mut v1 = CombinationValueSet::from_rows(vars(&[0, 1, 2]), &[0b101, 0b110, 0b111]);
        let mut v2 = CombinationValueSet::from_rows(
            vars(&[0, 1, 2, 3]),
            &[0b0100, 0b0101, 0b1011, 0b1101],
        );
        clear_pair(&mut v1, &mut v2);
        let (s1, s2) = (v1.clone(), v2.clone());
        let out = clear_pair(&mut v1, &mut v2);
        assert_eq!((out.removed_first, out.removed_second), (0, 0));
        assert_eq!(v1, s1);
        assert_eq!(v2, s2);
    }

    fn fixpoint_fixture() -> (Built, StructureValues) {
        let b = built("p cnf 4 6\n1 2 0\n1 -2 0\n2 3 0\n1 -3 0\n1 4 0\n-1 4 0\n");
        let values = b.values.clone();
        (b, values)
    }

    #[test]
    fn worklist_reaches_known_fixpoint() {
        let (b, mut values) = fixpoint_fixture();
        let stats = run_pair_cleaning(&b.structure, &mut values, Schedule::Worklist);
        // class 0 = {1,2,3,4}, class 1 = {1,2,3}
        assert_eq!(rows_of(values.class_set(0)), [0b1011, 0b1101, 0b1111]);
        assert_eq!(rows_of(values.class_set(1)), [0b101, 0b110, 0b111]);
        // class sets start at the member intersections, already stable here
        assert_eq!(stats.passes, 1);
        assert_eq!(stats.pair_clearings, 1);
        assert_eq!(stats.rows_removed, 0);
        assert!(!is_empty(&values));
        assert!(is_unclearable(&b.structure, &values));
        assert!(stats.within_pass_bound(2, 4));
    }

    #[test]
    fn naive_reaches_same_fixpoint_with_literal_sweeps() {
        let (b, mut values) = fixpoint_fixture();
        let stats = run_pair_cleaning(&b.structure, &mut values, Schedule::NaiveRoundRobin);
        assert_eq!(rows_of(values.class_set(0)), [0b1011, 0b1101, 0b1111]);
        assert_eq!(rows_of(values.class_set(1)), [0b101, 0b110, 0b111]);
        // 4 combinations expanded from the class sets, already stable, so a
        // single sweep over the 6 pairs confirms the fixpoint
        assert_eq!(stats.passes, 1);
        assert_eq!(stats.pair_clearings, 6);
        assert_eq!(stats.rows_removed, 0);
    }

    #[test]
    fn randomized_matches_worklist_fixpoint() {
        let (b, mut v1) = fixpoint_fixture();
        run_pair_cleaning(&b.structure, &mut v1, Schedule::Worklist);
        for seed in 0..8 {
            let mut v2 = b.values.clone();
            run_pair_cleaning(&b.structure, &mut v2, Schedule::Randomized { seed });
            assert_eq!(v1, v2);
        }
    }

    #[test]
    fn empty_set_empties_everything() {
        // two implication cycles force x1 both ways; the groups span 7
        // variables, so no class can hold every group and emptiness only
        // emerges while clearing
        let b = built(
            "p cnf 7 8\n-1 2 0\n-2 3 0\n-3 6 0\n-6 -1 0\n1 4 0\n-4 5 0\n-5 7 0\n1 -7 0\n",
        );
        assert!(!b.values.any_empty());
        let mut values = b.values.clone();
        let stats = run_pair_cleaning(&b.structure, &mut values, Schedule::Worklist);
        assert!(is_empty(&values));
        assert!(values.class_sets().iter().all(|s| s.is_empty()));
        assert!(stats.rows_removed > 0);

        let mut values = b.values.clone();
        run_pair_cleaning(&b.structure, &mut values, Schedule::NaiveRoundRobin);
        assert!(is_empty(&values));
    }

    #[test]
    fn single_combination_structure_needs_no_cleaning() {
        let b = built("p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n");
        let mut values = b.values.clone();
        let stats = run_pair_cleaning(&b.structure, &mut values, Schedule::Worklist);
        assert_eq!(stats, ClearStats::default());
        assert!(is_empty(&values));
        assert!(is_unclearable(&b.structure, &values));
    }

    #[test]
    fn pass_bounds() {
        assert_eq!(pass_bound(2, 4), (1u128 << 6) * 4);
        assert_eq!(pass_bound(3, 10), (1u128 << 12) * 210);
        assert_eq!(per_pass_check_bound(2, 4), (1u128 << 12) * 16);
        assert_eq!(pass_bound(8, 10), 10u128 << 72);
        // k = 8 saturates the squared power of two
        assert_eq!(per_pass_check_bound(8, 10), u128::MAX);
        assert_eq!(pass_bound(2, 2), 0);
    }

    #[test]
    fn shuffle_is_deterministic_per_seed() {
        let mut a: Vec<u32> = (0..32).collect();
        let mut b: Vec<u32> = (0..32).collect();
        shuffle(&mut a, &mut SplitMix64::new(7));
        shuffle(&mut b, &mut SplitMix64::new(7));
        assert_eq!(a, b);
        let mut c: Vec<u32> = (0..32).collect();
        shuffle(&mut c, &mut SplitMix64::new(8));
        assert_ne!(a, c);
    }
}
