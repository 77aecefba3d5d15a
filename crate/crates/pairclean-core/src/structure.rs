//! Combinations of clause groups and their value sets.
//!
//! A combination is a set of c = min(k+1, n_t) groups; the structure holds
//! all C(n_t, c) of them in lexicographic group-id order. Each combination
//! carries the set of assignments of its union variable tuple that satisfy
//! every clause of every member group.
//!
//! Combinations whose union tuples coincide always hold identical value
//! sets once clearing reaches a fixpoint (full-overlap clearing forces them
//! to their common intersection, and equal sets stay equal under any later
//! clearing), so sets are stored once per distinct union tuple. Such a
//! bucket is called a class below; per-combination views are provided on
//! top and `clearing::tests` checks the bucketed engine against the literal
//! per-combination one.
//!
//! Row codes: a value set over an r-variable tuple indexes rows by r-bit
//! codes, smallest variable in the most significant bit, so ascending codes
//! enumerate tuples lexicographically.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bits::BitSet;
use crate::formula::{Formula, VarId};
use crate::groups::GroupIndex;

pub const DEFAULT_MAX_WIDTH: u32 = 24;
pub const DEFAULT_MAX_COMBINATIONS: u64 = 5_000_000;

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Widest union tuple whose 2^r value set may be materialized.
    pub max_width: u32,
    /// Upper bound on C(n_t, c) before the build refuses.
    pub max_combinations: u64,
    /// Upper bound on distinct union tuples; clearing cost is quadratic in
    /// this count, so batch runs cap it to keep instances skippable.
    pub max_classes: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_width: DEFAULT_MAX_WIDTH,
            max_combinations: DEFAULT_MAX_COMBINATIONS,
            max_classes: u32::MAX,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BuildError {
    /// Some union tuple is wider than the configured limit, so its value
    /// set (2^width rows) will not be materialized.
    TooWide { width: u32, max: u32 },
    TooManyCombinations { count: u128, max: u64 },
    TooManyClasses { count: u32, max: u32 },
}

impl core::fmt::Display for BuildError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BuildError::TooWide { width, max } => write!(
                f,
                "instance too wide: union tuple of {width} variables exceeds the limit of {max}"
            ),
            BuildError::TooManyCombinations { count, max } => {
                write!(f, "structure needs {count} combinations, limit is {max}")
            }
            BuildError::TooManyClasses { count, max } => {
                write!(f, "structure needs at least {count} value sets, limit is {max}")
            }
        }
    }
}

impl core::error::Error for BuildError {}

/// Saturating C(n, k).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Owned snapshot of one combination.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Combination {
    pub group_ids: Vec<u32>,
    pub union_vars: Vec<VarId>,
}

/// Combinations sharing one union variable tuple.
#[derive(Clone, Debug)]
pub struct ClassInfo {
    vars: Vec<VarId>,
    /// Distinct groups appearing in any member combination, ascending.
    groups: Vec<u32>,
    members: u32,
    first_combination: u32,
}

impl ClassInfo {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn groups(&self) -> &[u32] {
        &self.groups
    }

    pub fn members(&self) -> u32 {
        self.members
    }

    pub fn first_combination(&self) -> u32 {
        self.first_combination
    }
}

/// All combinations of a group index, with the class bucketing.
#[derive(Clone, Debug)]
pub struct RelationshipStructure {
    k: u32,
    c: u32,
    n_t: u32,
    combo_groups: Vec<u32>,
    class_of: Vec<u32>,
    classes: Vec<ClassInfo>,
}

impl RelationshipStructure {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Groups per combination, min(k+1, n_t).
    pub fn combination_size(&self) -> u32 {
        self.c
    }

    pub fn n_t(&self) -> u32 {
        self.n_t
    }

    pub fn combination_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn group_ids(&self, i: usize) -> &[u32] {
        let c = self.c as usize;
        &self.combo_groups[i * c..(i + 1) * c]
    }

    pub fn union_vars(&self, i: usize) -> &[VarId] {
        &self.classes[self.class_of[i] as usize].vars
    }

    pub fn combination(&self, i: usize) -> Combination {
        Combination {
            group_ids: self.group_ids(i).to_vec(),
            union_vars: self.union_vars(i).to_vec(),
        }
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i] as usize
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, ci: usize) -> &ClassInfo {
        &self.classes[ci]
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    /// Positions of the common variables of combinations i and j within
    /// each side's union tuple, aligned pairwise. Symmetric in i and j.
    pub fn shared_positions(&self, i: usize, j: usize) -> (Vec<u32>, Vec<u32>) {
        shared_positions(self.union_vars(i), self.union_vars(j))
    }
}

pub(crate) fn shared_positions(a: &[VarId], b: &[VarId]) -> (Vec<u32>, Vec<u32>) {
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                pa.push(i as u32);
                pb.push(j as u32);
                i += 1;
                j += 1;
            }
        }
    }
    (pa, pb)
}

/// Value set over a variable tuple: which assignments of the tuple remain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CombinationValueSet {
    vars: Vec<VarId>,
    bits: BitSet,
}

impl CombinationValueSet {
    pub fn full(vars: Vec<VarId>) -> Self {
        let n = 1usize << vars.len();
        CombinationValueSet {
            vars,
            bits: BitSet::full(n),
        }
    }

    pub fn from_rows(vars: Vec<VarId>, rows: &[u32]) -> Self {
        let mut bits = BitSet::empty(1usize << vars.len());
        for &r in rows {
            bits.insert(r as usize);
        }
        CombinationValueSet { vars, bits }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn width(&self) -> u32 {
        self.vars.len() as u32
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, row: u32) -> bool {
        self.bits.test(row as usize)
    }

    pub fn rows(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones().map(|i| i as u32)
    }

    pub fn first_row(&self) -> Option<u32> {
        self.bits.first().map(|i| i as u32)
    }

    pub fn remove(&mut self, row: u32) {
        self.bits.remove(row as usize);
    }

    pub fn retain_only(&mut self, row: u32) {
        debug_assert!(self.contains(row));
        self.bits.clear();
        self.bits.insert(row as usize);
    }

    pub fn clear(&mut self) {
        self.bits.clear();
    }

    /// Drops rows failing the predicate; returns how many were dropped.
    pub fn retain_rows<F: FnMut(u32) -> bool>(&mut self, mut f: F) -> u64 {
        self.bits.retain(|i| f(i as u32)) as u64
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    /// Value of `var` in `row`, if the variable is part of the tuple.
    pub fn value_in_row(&self, row: u32, var: VarId) -> Option<bool> {
        let pos = self.vars.binary_search(&var).ok()?;
        let r = self.vars.len();
        Some(row >> (r - 1 - pos) & 1 == 1)
    }
}

/// Value sets for a whole structure, one per class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StructureValues {
    class_sets: Vec<CombinationValueSet>,
}

impl StructureValues {
    pub fn new(class_sets: Vec<CombinationValueSet>) -> Self {
        StructureValues { class_sets }
    }

    pub fn class_sets(&self) -> &[CombinationValueSet] {
        &self.class_sets
    }

    pub fn class_sets_mut(&mut self) -> &mut [CombinationValueSet] {
        &mut self.class_sets
    }

    pub fn class_set(&self, ci: usize) -> &CombinationValueSet {
        &self.class_sets[ci]
    }

    pub fn for_combination<'a>(
        &'a self,
        rs: &RelationshipStructure,
        i: usize,
    ) -> &'a CombinationValueSet {
        &self.class_sets[rs.class_of(i)]
    }

    pub fn any_empty(&self) -> bool {
        self.class_sets.iter().any(|s| s.is_empty())
    }

    /// Total rows counted per combination (a class counts once per member).
    pub fn total_rows(&self, rs: &RelationshipStructure) -> u64 {
        self.class_sets
            .iter()
            .zip(rs.classes.iter())
            .map(|(s, cl)| s.len() as u64 * cl.members as u64)
            .sum()
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum ClassKey {
    Mask(u64),
    Tuple(Vec<VarId>),
}

/// Enumerates all combinations and buckets them into classes. Exponential
/// output: C(n_t, c) combinations. `build_structure` applies the limits.
pub fn enumerate_combinations(gi: &GroupIndex) -> RelationshipStructure {
    enumerate_bounded(gi, u32::MAX).expect("no class limit")
}

/// `enumerate_combinations` with the class cap checked as classes appear, so
/// refusing an oversized instance costs a fraction of a full enumeration.
fn enumerate_bounded(
    gi: &GroupIndex,
    max_classes: u32,
) -> Result<RelationshipStructure, BuildError> {
    let n_t = gi.n_t();
    let k = gi.k();
    let c = (k + 1).min(n_t);
    let m_small = gi
        .groups()
        .iter()
        .flat_map(|g| g.vars())
        .map(|v| v.0)
        .max()
        .is_none_or(|max| max < 64);
    let group_masks: Vec<u64> = if m_small {
        gi.groups()
            .iter()
            .map(|g| g.vars().iter().fold(0u64, |acc, v| acc | 1 << v.0))
            .collect()
    } else {
        Vec::new()
    };

    let mut combo_groups: Vec<u32> = Vec::new();
    let mut class_of: Vec<u32> = Vec::new();
    let mut classes: Vec<ClassInfo> = Vec::new();
    let mut class_ids: BTreeMap<ClassKey, u32> = BTreeMap::new();
    let mut class_groups: Vec<Vec<u32>> = Vec::new();

    if n_t > 0 {
        let mut combo: Vec<u32> = (0..c).collect();
        loop {
            let key = if m_small {
                ClassKey::Mask(
                    combo
                        .iter()
                        .fold(0u64, |acc, &g| acc | group_masks[g as usize]),
                )
            } else {
                ClassKey::Tuple(union_vars_of(gi, &combo))
            };
            let next_id = classes.len() as u32;
            let id = *class_ids.entry(key).or_insert(next_id);
            if id == next_id {
                if next_id >= max_classes {
                    return Err(BuildError::TooManyClasses {
                        count: max_classes.saturating_add(1),
                        max: max_classes,
                    });
                }
                classes.push(ClassInfo {
                    vars: union_vars_of(gi, &combo),
                    groups: Vec::new(),
                    members: 0,
                    first_combination: class_of.len() as u32,
                });
                class_groups.push(Vec::new());
            }
            classes[id as usize].members += 1;
            class_groups[id as usize].extend_from_slice(&combo);
            combo_groups.extend_from_slice(&combo);
            class_of.push(id);

            if !next_subset(&mut combo, n_t) {
                break;
            }
        }
    }

    for (cl, mut gs) in classes.iter_mut().zip(class_groups.into_iter()) {
        gs.sort_unstable();
        gs.dedup();
        cl.groups = gs;
    }

    Ok(RelationshipStructure {
        k,
        c,
        n_t,
        combo_groups,
        class_of,
        classes,
    })
}

/// Advances to the next lexicographic c-subset of 0..n; false when `combo`
/// is the last one.
fn next_subset(combo: &mut [u32], n: u32) -> bool {
    let c = combo.len();
    let mut i = c;
    while i > 0 {
        i -= 1;
        if combo[i] != n - (c - i) as u32 {
            combo[i] += 1;
            for j in i + 1..c {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn union_vars_of(gi: &GroupIndex, group_ids: &[u32]) -> Vec<VarId> {
    let mut vars: Vec<VarId> = group_ids
        .iter()
        .flat_map(|&g| gi.group(g).vars().iter().copied())
        .collect();
    vars.sort_unstable();
    vars.dedup();
    vars
}

/// Assignments of the union tuple of `group_ids` satisfying all member
/// clauses. Enumerates 2^width rows.
pub fn induced_value_set(gi: &GroupIndex, group_ids: &[u32]) -> CombinationValueSet {
    let vars = union_vars_of(gi, group_ids);
    filtered_value_set(gi, vars, group_ids)
}

fn filtered_value_set(gi: &GroupIndex, vars: Vec<VarId>, group_ids: &[u32]) -> CombinationValueSet {
    let r = vars.len();
    assert!(r <= 31, "union tuple too wide to enumerate");
    // per group, the union positions of its k variables in clause order
    let positions: Vec<Vec<u32>> = group_ids
        .iter()
        .map(|&g| {
            gi.group(g)
                .vars()
                .iter()
                .map(|v| vars.binary_search(v).expect("group var in union") as u32)
                .collect()
        })
        .collect();
    let k = gi.k() as usize;
    let mut bits = BitSet::empty(1usize << r);
    'rows: for row in 0..(1u32 << r) {
        for (idx, &g) in group_ids.iter().enumerate() {
            let mut pattern = 0u32;
            for (j, &p) in positions[idx].iter().enumerate() {
                pattern |= (row >> (r - 1 - p as usize) & 1) << (k - 1 - j);
            }
            if !gi.group(g).values().contains(pattern) {
                continue 'rows;
            }
        }
        bits.insert(row as usize);
    }
    CombinationValueSet { vars, bits }
}

/// Group index, combination structure, and initial value sets of a formula.
#[derive(Clone, Debug)]
pub struct Built {
    pub groups: GroupIndex,
    pub structure: RelationshipStructure,
    pub values: StructureValues,
}

pub fn build_structure(f: &Formula, opts: &BuildOptions) -> Result<Built, BuildError> {
    let groups = GroupIndex::build(f);
    let n_t = groups.n_t() as u64;
    let c = (groups.k() as u64 + 1).min(n_t);
    let count = if n_t == 0 { 0 } else { binomial(n_t, c) };
    if count > opts.max_combinations as u128 {
        return Err(BuildError::TooManyCombinations {
            count,
            max: opts.max_combinations,
        });
    }
    let structure = enumerate_bounded(&groups, opts.max_classes)?;
    for cl in structure.classes() {
        let width = cl.vars.len() as u32;
        if width > opts.max_width {
            return Err(BuildError::TooWide {
                width,
                max: opts.max_width,
            });
        }
    }
    let class_sets: Vec<CombinationValueSet> = structure
        .classes()
        .iter()
        .map(|cl| filtered_value_set(&groups, cl.vars.clone(), &cl.groups))
        .collect();
    Ok(Built {
        groups,
        structure,
        values: StructureValues::new(class_sets),
    })
}
