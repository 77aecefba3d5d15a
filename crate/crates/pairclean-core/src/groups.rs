//! Clause groups: clauses bucketed by their variable tuple.
//!
//! All clauses over one tuple jointly permit 2^k minus (distinct clause
//! count) local assignments, since each clause excludes exactly its sign
//! pattern. A group's value set stores the permitted rows as a 2^k-bit mask
//! indexed by row code (first variable = most significant bit).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::BitSet;
use crate::formula::{Formula, VarId};

/// Permitted local assignments of one group, universe 2^k row codes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupValueSet {
    k: u32,
    bits: BitSet,
}

impl GroupValueSet {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn contains(&self, row: u32) -> bool {
        self.bits.test(row as usize)
    }

    pub fn rows(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones().map(|i| i as u32)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }
}

/// One clause group: a variable tuple, the sign patterns excluded by its
/// clauses, and the remaining permitted rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClauseGroup {
    vars: Vec<VarId>,
    excluded: Vec<u32>,
    values: GroupValueSet,
}

impl ClauseGroup {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    /// Excluded row codes, ascending, one per distinct clause.
    pub fn excluded(&self) -> &[u32] {
        &self.excluded
    }

    pub fn values(&self) -> &GroupValueSet {
        &self.values
    }

    /// `T_1,2,3: allowed=0xde excluded={(0,0,0),(1,0,1)}`
    pub fn dump_line(&self) -> String {
        let k = self.values.k as usize;
        let vars: Vec<String> = self.vars.iter().map(|v| format!("{v}")).collect();
        let tuples: Vec<String> = self
            .excluded
            .iter()
            .map(|&code| {
                let bits: Vec<String> = (0..k)
                    .map(|j| format!("{}", code >> (k - 1 - j) & 1))
                    .collect();
                format!("({})", bits.join(","))
            })
            .collect();
        format!(
            "T_{}: allowed={} excluded={{{}}}",
            vars.join(","),
            mask_hex(&self.values.bits),
            tuples.join(",")
        )
    }
}

fn mask_hex(bits: &BitSet) -> String {
    let mut words: Vec<u64> = Vec::new();
    let mut current = 0u64;
    let mut filled = 0usize;
    for i in 0..bits.nbits() {
        if bits.test(i) {
            current |= 1u64 << (i % 64);
        }
        filled += 1;
        if filled % 64 == 0 {
            words.push(current);
            current = 0;
        }
    }
    if bits.nbits() % 64 != 0 {
        words.push(current);
    }
    while words.len() > 1 && *words.last().unwrap() == 0 {
        words.pop();
    }
    let mut out = format!("0x{:x}", words.last().unwrap());
    for w in words.iter().rev().skip(1) {
        out.push_str(&format!("{w:016x}"));
    }
    out
}

/// All clause groups of a formula, ordered by variable tuple.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupIndex {
    k: u32,
    groups: Vec<ClauseGroup>,
}

impl GroupIndex {
    pub fn build(f: &Formula) -> GroupIndex {
        let mut buckets: alloc::collections::BTreeMap<Vec<VarId>, alloc::collections::BTreeSet<u32>> =
            alloc::collections::BTreeMap::new();
        for clause in f.clauses() {
            buckets
                .entry(clause.vars().collect())
                .or_default()
                .insert(clause.falsifying_pattern());
        }
        let k = f.k();
        let groups = buckets
            .into_iter()
            .map(|(vars, excluded)| {
                let mut bits = BitSet::full(1usize << k);
                for &code in &excluded {
                    bits.remove(code as usize);
                }
                ClauseGroup {
                    vars,
                    excluded: excluded.into_iter().collect(),
                    values: GroupValueSet { k, bits },
                }
            })
            .collect();
        GroupIndex { k, groups }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Group count, the formula's degree.
    pub fn n_t(&self) -> u32 {
        self.groups.len() as u32
    }

    pub fn groups(&self) -> &[ClauseGroup] {
        &self.groups
    }

    pub fn group(&self, id: u32) -> &ClauseGroup {
        &self.groups[id as usize]
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            out.push_str(&g.dump_line());
            out.push('\n');
        }
        out
    }
}
