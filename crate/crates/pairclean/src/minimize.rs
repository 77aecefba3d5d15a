//! Delta debugging for formulas: shrink a clause list while a failure
//! predicate keeps holding, then compact the variable numbering.

use pairclean_core::formula::{Clause, Formula, Literal, VarId};

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub formula: Formula,
    /// Predicate evaluations spent.
    pub steps: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MinimizeError {
    /// The predicate does not hold on the input, so there is nothing to
    /// preserve while shrinking.
    PredicateFalse,
}

impl std::fmt::Display for MinimizeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinimizeError::PredicateFalse => write!(f, "predicate does not hold on the input"),
        }
    }
}

impl std::error::Error for MinimizeError {}

/// Classic ddmin over the clause list, then single-clause removal to
/// 1-minimality, then variable renumbering. Every kept candidate satisfies
/// the predicate; the result does too.
pub fn minimize(
    f: &Formula,
    mut predicate: impl FnMut(&Formula) -> bool,
) -> Result<MinimizeOutcome, MinimizeError> {
    let mut steps = 0u64;
    let m = f.m();
    let mut check = |clauses: &[Clause]| {
        steps += 1;
        predicate(&Formula::new(m, clauses.to_vec()).expect("clauses came from a valid formula"))
    };
    let mut clauses = f.clauses().to_vec();
    if !check(&clauses) {
        return Err(MinimizeError::PredicateFalse);
    }

    let mut chunks = 2usize;
    while clauses.len() >= 2 {
        let size = clauses.len().div_ceil(chunks);
        let mut reduced = false;
        let mut start = 0;
        while start < clauses.len() {
            let end = (start + size).min(clauses.len());
            let complement: Vec<Clause> = clauses[..start]
                .iter()
                .chain(&clauses[end..])
                .cloned()
                .collect();
            if check(&complement) {
                clauses = complement;
                chunks = (chunks - 1).max(2);
                reduced = true;
                break;
            }
            start = end;
        }
        if !reduced {
            if chunks >= clauses.len() {
                break;
            }
            chunks = (chunks * 2).min(clauses.len());
        }
    }

    // chunk size 1 is covered above, but re-sweep singles until stable so
    // the result is 1-minimal regardless of removal order
    loop {
        let mut removed = false;
        let mut i = 0;
        while i < clauses.len() {
            let mut candidate = clauses.clone();
            candidate.remove(i);
            if check(&candidate) {
                clauses = candidate;
                removed = true;
            } else {
                i += 1;
            }
        }
        if !removed {
            break;
        }
    }

    let shrunk = Formula::new(m, clauses).expect("clauses came from a valid formula");
    let compacted = compact_vars(&shrunk);
    let formula = if compacted.m() < shrunk.m() {
        steps += 1;
        if predicate(&compacted) {
            compacted
        } else {
            shrunk
        }
    } else {
        shrunk
    };
    Ok(MinimizeOutcome { formula, steps })
}

/// Renumbers the variables actually used to 1..=count, preserving order.
fn compact_vars(f: &Formula) -> Formula {
    let mut used: Vec<u32> = f.clauses().iter().flat_map(|c| c.vars()).map(|v| v.0).collect();
    used.sort_unstable();
    used.dedup();
    let clauses = f
        .clauses()
        .iter()
        .map(|c| {
            Clause::new(
                c.literals()
                    .iter()
                    .map(|l| Literal {
                        var: VarId(used.binary_search(&l.var.0).unwrap() as u32),
                        negated: l.negated,
                    })
                    .collect(),
            )
            .expect("renumbering keeps variables distinct")
        })
        .collect();
    Formula::new(used.len() as u32, clauses).expect("renumbering keeps clauses valid")
}
