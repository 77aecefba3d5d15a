//! Exact reference solvers used to audit the pair-cleaning claims.
//!
//! `brute_force` checks all 2^m assignments and is the ground truth for
//! small m; `dpll` is a plain unit-propagating backtracker without learning
//! for anything bigger. They share no code with the pair-cleaning pipeline
//! on purpose.

use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{Assignment, Formula};

/// Variable ceiling for `brute_force`.
pub const ORACLE_MAX_VARS: u32 = 26;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub satisfiable: bool,
    /// All models in ascending assignment order; present iff enumeration
    /// was requested.
    pub models: Option<Vec<Assignment>>,
    pub assignments_checked: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleError {
    TooManyVariables { m: u32, max: u32 },
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::TooManyVariables { m, max } => {
                write!(f, "brute force supports at most {max} variables, got {m}")
            }
        }
    }
}

impl core::error::Error for OracleError {}

/// Tries every assignment; stops at the first model unless enumerating.
pub fn brute_force(f: &Formula, enumerate: bool) -> Result<OracleResult, OracleError> {
    let m = f.m();
    if m > ORACLE_MAX_VARS {
        return Err(OracleError::TooManyVariables {
            m,
            max: ORACLE_MAX_VARS,
        });
    }
    // a clause is falsified iff the masked word equals its sign pattern
    let tests: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            let mut mask = 0u32;
            let mut pattern = 0u32;
            for lit in c.literals() {
                let bit = 1u32 << (m - 1 - lit.var.0);
                mask |= bit;
                if lit.negated {
                    pattern |= bit;
                }
            }
            (mask, pattern)
        })
        .collect();

    let mut models = if enumerate { Some(Vec::new()) } else { None };
    let mut satisfiable = false;
    let mut checked = 0u64;
    for w in 0..1u64 << m {
        checked += 1;
        if tests.iter().all(|&(mask, pattern)| w as u32 & mask != pattern) {
            satisfiable = true;
            match &mut models {
                Some(ms) => ms.push(Assignment::from_word(w, m)),
                None => break,
            }
        }
    }
    Ok(OracleResult {
        satisfiable,
        models,
        assignments_checked: checked,
    })
}

/// Unit-propagating chronological backtracker.
pub fn dpll(f: &Formula) -> bool {
    let clauses: Vec<Vec<(usize, bool)>> = f
        .clauses()
        .iter()
        .map(|c| c.literals().iter().map(|l| (l.var.index(), l.negated)).collect())
        .collect();
    let assign: Vec<Option<bool>> = vec![None; f.m() as usize];
    dpll_rec(&clauses, assign)
}

fn dpll_rec(clauses: &[Vec<(usize, bool)>], mut assign: Vec<Option<bool>>) -> bool {
    loop {
        let mut unit: Option<(usize, bool)> = None;
        let mut all_satisfied = true;
        for clause in clauses {
            let mut satisfied = false;
            let mut unassigned = 0;
            let mut last_free: Option<(usize, bool)> = None;
            for &(v, neg) in clause {
                match assign[v] {
                    Some(val) => {
                        if val != neg {
                            satisfied = true;
                            break;
                        }
                    }
                    None => {
                        unassigned += 1;
                        last_free = Some((v, !neg));
                    }
                }
            }
            if satisfied {
                continue;
            }
            all_satisfied = false;
            match unassigned {
                0 => return false,
                1 => {
                    unit = last_free;
                    break;
                }
                _ => {}
            }
        }
        if all_satisfied {
            return true;
        }
        match unit {
            Some((v, val)) => assign[v] = Some(val),
            None => break,
        }
    }
    // branch on the first variable free in some unsatisfied clause
    let v = clauses
        .iter()
        .flat_map(|c| c.iter())
        .map(|&(v, _)| v)
        .find(|&v| assign[v].is_none())
        .expect("an unsatisfied clause has a free variable");
    for val in [false, true] {
        let mut next = assign.clone();
        next[v] = Some(val);
        if dpll_rec(clauses, next) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Formula {
        Formula::parse_dimacs(text).unwrap()
    }

    #[test]
    fn finds_models_in_ascending_order() {
        let f = parse("p cnf 3 4\n1 2 0\n-1 2 0\n2 3 0\n-2 -3 0\n");
        let r = brute_force(&f, true).unwrap();
        assert!(r.satisfiable);
        assert_eq!(r.assignments_checked, 8);
        let bits: Vec<Vec<bool>> = r.models.unwrap().iter().map(|a| a.bits().to_vec()).collect();
        assert_eq!(bits, [[false, true, false], [true, true, false]]);
        assert!(dpll(&f));
    }

    #[test]
    fn stops_early_without_enumeration() {
        let f = parse("p cnf 4 2\n1 2 3 0\n-1 3 -4 0\n");
        let r = brute_force(&f, false).unwrap();
        assert!(r.satisfiable);
        assert!(r.models.is_none());
        // (0,0,0,*) falsifies the first clause; (0,0,1,0) is the first model
        assert_eq!(r.assignments_checked, 3);
    }

    #[test]
    fn recognizes_unsatisfiable_inputs() {
        let f = parse("p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n");
        let r = brute_force(&f, true).unwrap();
        assert!(!r.satisfiable);
        assert_eq!(r.models.unwrap().len(), 0);
        assert_eq!(r.assignments_checked, 4);
        assert!(!dpll(&f));

        let cycles = parse("p cnf 5 6\n-1 2 0\n-2 3 0\n-1 -3 0\n1 4 0\n-4 5 0\n1 -5 0\n");
        assert!(!brute_force(&cycles, false).unwrap().satisfiable);
        assert!(!dpll(&cycles));
    }

    #[test]
    fn empty_formula_is_satisfiable() {
        let f = parse("p cnf 3 0\n");
        let r = brute_force(&f, true).unwrap();
        assert!(r.satisfiable);
        assert_eq!(r.models.unwrap().len(), 8);
        assert!(dpll(&f));
    }

    #[test]
    fn variable_cap() {
        let f = parse("p cnf 27 1\n1 2 3 0\n");
        assert_eq!(
            brute_force(&f, false).unwrap_err(),
            OracleError::TooManyVariables { m: 27, max: 26 }
        );
        assert!(dpll(&f));
    }
}
