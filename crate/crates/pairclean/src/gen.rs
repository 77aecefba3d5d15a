//! Seeded instance generation. Equal specs always produce identical
//! formulas, across runs and platforms.

use pairclean_core::formula::{
    Assignment, Clause, Formula, Literal, VarId, MAX_WIDTH, MIN_WIDTH,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters of one generated instance.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GenSpec {
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub seed: u64,
    /// Draw a hidden assignment first and re-roll each clause until it
    /// satisfies it, guaranteeing satisfiability.
    pub planted: bool,
}

impl GenSpec {
    pub fn random(m: u32, n: u32, k: u32, seed: u64) -> Self {
        GenSpec {
            m,
            n,
            k,
            seed,
            planted: false,
        }
    }

    pub fn planted(m: u32, n: u32, k: u32, seed: u64) -> Self {
        GenSpec {
            m,
            n,
            k,
            seed,
            planted: true,
        }
    }

    pub fn generate(&self) -> Formula {
        generate(self)
    }
}

/// Uniform clause: k distinct variables, independent polarities.
fn random_clause(rng: &mut ChaCha8Rng, pool: &mut [u32], k: u32) -> Clause {
    let m = pool.len();
    let mut lits = Vec::with_capacity(k as usize);
    for i in 0..k as usize {
        let j = rng.random_range(i..m);
        pool.swap(i, j);
        lits.push(Literal {
            var: VarId(pool[i]),
            negated: rng.random(),
        });
    }
    Clause::new(lits).expect("distinct variables by construction")
}

pub fn generate(spec: &GenSpec) -> Formula {
    assert!(
        (MIN_WIDTH..=MAX_WIDTH).contains(&spec.k) && spec.k <= spec.m,
        "generation needs {MIN_WIDTH} <= k <= {MAX_WIDTH} and k <= m, got k={} m={}",
        spec.k,
        spec.m
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pool: Vec<u32> = (0..spec.m).collect();
    let hidden = spec
        .planted
        .then(|| Assignment::new((0..spec.m).map(|_| rng.random()).collect()));
    let clauses = (0..spec.n)
        .map(|_| loop {
            let c = random_clause(&mut rng, &mut pool, spec.k);
            match &hidden {
                Some(a) if !c.evaluate(a) => continue,
                _ => return c,
            }
        })
        .collect();
    Formula::new(spec.m, clauses).expect("clauses conform by construction")
}

/// Random k-CNF whose clauses sit on pairwise distinct variable tuples, so
/// the group count equals `n_t` exactly. Used by the scaling study to
/// control its x-axis.
pub fn generate_distinct_groups(m: u32, n_t: u32, k: u32, seed: u64) -> Formula {
    assert!(
        pairclean_core::structure::binomial(m as u64, k as u64) >= n_t as u128,
        "only C({m},{k}) distinct tuples exist, cannot reach {n_t} groups"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<u32> = (0..m).collect();
    let mut seen = std::collections::HashSet::new();
    let mut clauses = Vec::with_capacity(n_t as usize);
    while clauses.len() < n_t as usize {
        let c = random_clause(&mut rng, &mut pool, k);
        if seen.insert(c.vars().collect::<Vec<_>>()) {
            clauses.push(c);
        }
    }
    Formula::new(m, clauses).expect("clauses conform by construction")
}
