//! Uniform-width CNF formulas over boolean variables.
//!
//! Variables are 0-indexed internally and 1-indexed in all external formats
//! (DIMACS, dump lines, printed models). Every clause must mention exactly
//! `k` distinct variables for a single formula-wide width `k`, with
//! 2 <= k <= 8. Each clause is falsified by exactly one local assignment of
//! its variable tuple: the one matching its sign pattern.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub const MIN_WIDTH: u32 = 2;
pub const MAX_WIDTH: u32 = 8;

/// 0-based variable index. `external()` gives the 1-based DIMACS number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn external(self) -> u32 {
        self.0 + 1
    }
}

impl core::fmt::Display for VarId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.external())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    pub var: VarId,
    pub negated: bool,
}

impl Literal {
    pub fn positive(var: VarId) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn negative(var: VarId) -> Self {
        Literal { var, negated: true }
    }

    /// Signed 1-based DIMACS form.
    pub fn external(self) -> i64 {
        let v = self.var.external() as i64;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

/// A clause over distinct variables, kept sorted by variable index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Sorts literals by variable; the variables must be pairwise distinct.
    pub fn new(mut literals: Vec<Literal>) -> Result<Self, FormulaError> {
        if literals.is_empty() {
            return Err(FormulaError::EmptyClause { clause: 0 });
        }
        literals.sort();
        for w in literals.windows(2) {
            if w[0].var == w[1].var {
                return Err(FormulaError::RepeatedVariable {
                    clause: 0,
                    var: w[0].var.external(),
                });
            }
        }
        Ok(Clause { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> u32 {
        self.literals.len() as u32
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.literals.iter().map(|l| l.var)
    }

    /// Sign pattern as a width-bit code, first (smallest) variable in the
    /// most significant bit, negated literals contributing a 1 bit. The
    /// clause is falsified by exactly the local assignment equal to this
    /// code.
    pub fn falsifying_pattern(&self) -> u32 {
        let k = self.literals.len();
        let mut code = 0u32;
        for (j, lit) in self.literals.iter().enumerate() {
            if lit.negated {
                code |= 1 << (k - 1 - j);
            }
        }
        code
    }

    pub fn evaluate(&self, a: &Assignment) -> bool {
        self.literals.iter().any(|l| a.get(l.var) != l.negated)
    }
}

/// CNF with `m` variables and a uniform clause width `k` (0 when there are
/// no clauses).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Formula {
    m: u32,
    k: u32,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(m: u32, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        let mut k = 0;
        for (idx, clause) in clauses.iter().enumerate() {
            let clause_no = idx + 1;
            let w = clause.width();
            if idx == 0 {
                if w < MIN_WIDTH {
                    return Err(FormulaError::WidthOutOfRange {
                        clause: clause_no,
                        width: w,
                    });
                }
                if w > MAX_WIDTH {
                    return Err(FormulaError::WidthOutOfRange {
                        clause: clause_no,
                        width: w,
                    });
                }
                k = w;
            } else if w != k {
                return Err(FormulaError::MixedWidth {
                    clause: clause_no,
                    width: w,
                    expected: k,
                });
            }
            for lit in clause.literals() {
                if lit.var.0 >= m {
                    return Err(FormulaError::VariableOutOfRange {
                        clause: clause_no,
                        var: lit.var.external(),
                        m,
                    });
                }
            }
        }
        Ok(Formula { m, k, clauses })
    }

    /// Variable count.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Clause width, 0 for an empty clause list.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Clause count.
    pub fn n(&self) -> u32 {
        self.clauses.len() as u32
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn evaluate(&self, a: &Assignment) -> bool {
        assert_eq!(a.len(), self.m as usize, "assignment length must equal m");
        self.clauses.iter().all(|c| c.evaluate(a))
    }

    /// Parses DIMACS CNF. Comment lines start with `c`; a `%` token ends the
    /// clause stream. The clause count must match the header, every clause
    /// must have the same width in [2, 8], and no clause may repeat a
    /// variable.
    pub fn parse_dimacs(text: &str) -> Result<Self, FormulaError> {
        let mut header: Option<(u32, u32)> = None;
        let mut tokens: Vec<i64> = Vec::new();
        'lines: for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(FormulaError::Header("duplicate p line".into()));
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                    return Err(FormulaError::Header(format!("bad p line: {line:?}")));
                }
                let m = fields[2]
                    .parse::<u32>()
                    .map_err(|_| FormulaError::Header(format!("bad variable count: {}", fields[2])))?;
                let n = fields[3]
                    .parse::<u32>()
                    .map_err(|_| FormulaError::Header(format!("bad clause count: {}", fields[3])))?;
                header = Some((m, n));
                continue;
            }
            if header.is_none() {
                return Err(FormulaError::Header(format!(
                    "clause data before p line: {line:?}"
                )));
            }
            for tok in line.split_whitespace() {
                if tok == "%" {
                    break 'lines;
                }
                let v = tok
                    .parse::<i64>()
                    .map_err(|_| FormulaError::Header(format!("bad token: {tok:?}")))?;
                tokens.push(v);
            }
        }
        let (m, declared_n) = header.ok_or(FormulaError::Header("missing p line".into()))?;

        let mut clauses: Vec<Clause> = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        for &t in &tokens {
            let clause_no = clauses.len() + 1;
            if t == 0 {
                if current.is_empty() {
                    return Err(FormulaError::EmptyClause { clause: clause_no });
                }
                let clause = Clause::new(core::mem::take(&mut current))
                    .map_err(|e| e.with_clause(clause_no))?;
                clauses.push(clause);
            } else {
                let mag = t.unsigned_abs();
                if mag > m as u64 {
                    return Err(FormulaError::VariableOutOfRange {
                        clause: clause_no,
                        var: mag.min(u32::MAX as u64) as u32,
                        m,
                    });
                }
                let var = VarId(mag as u32 - 1);
                current.push(if t < 0 {
                    Literal::negative(var)
                } else {
                    Literal::positive(var)
                });
            }
        }
        if !current.is_empty() {
            return Err(FormulaError::Header("unterminated final clause".into()));
        }
        if clauses.len() as u32 != declared_n {
            return Err(FormulaError::ClauseCountMismatch {
                declared: declared_n,
                found: clauses.len() as u32,
            });
        }
        Formula::new(m, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.m, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause.literals() {
                out.push_str(&format!("{} ", lit.external()));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Total assignment, indexed by variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    /// Decodes the low `m` bits of `word`, variable 0 in the most
    /// significant of those bits, so ascending words give ascending
    /// assignments in the tuple order (x1, ..., xm).
    pub fn from_word(word: u64, m: u32) -> Self {
        Assignment((0..m).map(|i| word >> (m - 1 - i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, var: VarId) -> bool {
        self.0[var.index()]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Signed 1-based literals, e.g. `[-1, 2, -3]` for (0, 1, 0).
    pub fn external_literals(&self) -> Vec<i64> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { i as i64 + 1 } else { -(i as i64 + 1) })
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FormulaError {
    Header(String),
    ClauseCountMismatch { declared: u32, found: u32 },
    EmptyClause { clause: usize },
    RepeatedVariable { clause: usize, var: u32 },
    VariableOutOfRange { clause: usize, var: u32, m: u32 },
    WidthOutOfRange { clause: usize, width: u32 },
    MixedWidth { clause: usize, width: u32, expected: u32 },
}

impl FormulaError {
    fn with_clause(self, clause: usize) -> Self {
        match self {
            FormulaError::EmptyClause { .. } => FormulaError::EmptyClause { clause },
            FormulaError::RepeatedVariable { var, .. } => {
                FormulaError::RepeatedVariable { clause, var }
            }
            other => other,
        }
    }
}

impl core::fmt::Display for FormulaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FormulaError::Header(msg) => write!(f, "header: {msg}"),
            FormulaError::ClauseCountMismatch { declared, found } => {
                write!(f, "header declares {declared} clauses, found {found}")
            }
            FormulaError::EmptyClause { clause } => write!(f, "clause {clause} is empty"),
            FormulaError::RepeatedVariable { clause, var } => {
                write!(f, "clause {clause} repeats variable {var}")
            }
            FormulaError::VariableOutOfRange { clause, var, m } => {
                write!(f, "clause {clause} uses variable {var}, but m = {m}")
            }
            FormulaError::WidthOutOfRange { clause, width } => write!(
                f,
                "clause {clause} has width {width}, supported range is {MIN_WIDTH}..={MAX_WIDTH}"
            ),
            FormulaError::MixedWidth {
                clause,
                width,
                expected,
            } => write!(
                f,
                "clause {clause} has width {width}, earlier clauses have width {expected}"
            ),
        }
    }
}

impl core::error::Error for FormulaError {}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn parse(text: &str) -> Formula {
        Formula::parse_dimacs(text).unwrap()
    }

    #[test]
    fn parses_simple_3cnf() {
        let f = parse("p cnf 4 2\n1 2 3 0\n-1 3 -4 0\n");
        assert_eq!((f.m(), f.n(), f.k()), (4, 2, 3));
        assert_eq!(f.clauses()[0].falsifying_pattern(), 0b000);
        assert_eq!(f.clauses()[1].falsifying_pattern(), 0b101);
        let lits: Vec<i64> = f.clauses()[1].literals().iter().map(|l| l.external()).collect();
        assert_eq!(lits, [-1, 3, -4]);
    }

    #[test]
    fn sorts_literals_by_variable() {
        let f = parse("p cnf 3 1\n3 -1 2 0\n");
        let lits: Vec<i64> = f.clauses()[0].literals().iter().map(|l| l.external()).collect();
        assert_eq!(lits, [-1, 2, 3]);
        assert_eq!(f.clauses()[0].falsifying_pattern(), 0b100);
    }

    #[test]
    fn skips_comments_and_percent_trailer() {
        let f = parse("c a comment\np cnf 2 1\nc another\n1 -2 0\n%\n0\n");
        assert_eq!(f.n(), 1);
    }

    #[test]
    fn rejects_clause_count_mismatch() {
        let e = Formula::parse_dimacs("p cnf 2 2\n1 2 0\n").unwrap_err();
        assert_eq!(e, FormulaError::ClauseCountMismatch { declared: 2, found: 1 });
    }

    #[test]
    fn rejects_variable_out_of_range() {
        let e = Formula::parse_dimacs("p cnf 2 1\n1 3 0\n").unwrap_err();
        assert_eq!(
            e,
            FormulaError::VariableOutOfRange { clause: 1, var: 3, m: 2 }
        );
    }

    #[test]
    fn rejects_repeated_variable() {
        let e = Formula::parse_dimacs("p cnf 3 1\n1 -1 0\n").unwrap_err();
        assert_eq!(e, FormulaError::RepeatedVariable { clause: 1, var: 1 });
    }

    #[test]
    fn rejects_mixed_width() {
        let e = Formula::parse_dimacs("p cnf 3 2\n1 2 0\n1 2 3 0\n").unwrap_err();
        assert_eq!(
            e,
            FormulaError::MixedWidth { clause: 2, width: 3, expected: 2 }
        );
    }

    #[test]
    fn rejects_width_one_and_width_nine() {
        let e = Formula::parse_dimacs("p cnf 2 1\n1 0\n").unwrap_err();
        assert!(matches!(e, FormulaError::WidthOutOfRange { width: 1, .. }));
        let nine: Vec<String> = (1..=9).map(|v| v.to_string()).collect();
        let text = format!("p cnf 9 1\n{} 0\n", nine.join(" "));
        let e = Formula::parse_dimacs(&text).unwrap_err();
        assert!(matches!(e, FormulaError::WidthOutOfRange { width: 9, .. }));
    }

    #[test]
    fn rejects_empty_clause() {
        let e = Formula::parse_dimacs("p cnf 2 1\n0\n").unwrap_err();
        assert_eq!(e, FormulaError::EmptyClause { clause: 1 });
    }

    #[test]
    fn empty_formula_is_fine() {
        let f = parse("p cnf 5 0\n");
        assert_eq!((f.m(), f.n(), f.k()), (5, 0, 0));
        assert!(f.evaluate(&Assignment::from_word(0, 5)));
    }

    #[test]
    fn evaluate_matches_clause_semantics() {
        let f = parse("p cnf 4 2\n1 2 3 0\n-1 3 -4 0\n");
        assert!(f.evaluate(&Assignment::new(vec![true, true, true, true])));
        assert!(!f.evaluate(&Assignment::new(vec![false, false, false, false])));
        // second clause falsified exactly at x1=1, x3=0, x4=1
        assert!(!f.evaluate(&Assignment::new(vec![true, true, false, true])));
    }

    #[test]
    fn from_word_orders_assignments_lexicographically() {
        let a = Assignment::from_word(0b0010, 4);
        assert_eq!(a.bits(), [false, false, true, false]);
        let lo = Assignment::from_word(3, 4);
        let hi = Assignment::from_word(4, 4);
        assert!(lo < hi);
        assert_eq!(a.external_literals(), [-1, -2, 3, -4]);
    }

    #[test]
    fn dimacs_round_trip() {
        let text = "p cnf 4 2\n1 2 3 0\n-1 3 -4 0\n";
        let f = parse(text);
        assert_eq!(f.to_dimacs(), text);
        assert_eq!(Formula::parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }
}
