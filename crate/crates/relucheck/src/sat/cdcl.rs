//! Plain propositional CDCL, the theory-free core of the search loop.
//!
//! Used directly for regression against a truth-table oracle; the
//! verifier's main loop adds theory deduction on top of the same
//! propagate / analyze / backjump machinery.

use super::{
    analyze_conflict, bcp, decide, BcpResult, ClauseDb, ConstantScorer, DecideCtx, Lit, Trail,
    Var, Watches,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
}

/// Decide satisfiability of a CNF over `num_vars` variables.
pub fn solve_propositional(num_vars: usize, clauses: &[Vec<Lit>], seed: u64) -> SatResult {
    let mut db = ClauseDb::new();
    for c in clauses {
        if c.is_empty() {
            return SatResult::Unsat;
        }
        db.add_initial(c.clone());
    }
    let mut watches = Watches::new(num_vars, &db);
    let mut trail = Trail::new(num_vars);
    let ctx = DecideCtx { seed, epoch: 0 };
    loop {
        match bcp(&db, &mut watches, &mut trail) {
            BcpResult::Conflict(cid) => {
                if trail.dl() == 0 {
                    return SatResult::Unsat;
                }
                let conflicting = db.clause(cid).clone();
                let (learned, backjump) = analyze_conflict(&trail, &db, &conflicting);
                trail.backtrack(backjump);
                match db.add_learned(learned.lits().to_vec()) {
                    Some(id) => watches.attach(&db, id),
                    // Already known: re-activate it so the asserting
                    // literal propagates at the backjump level.
                    None => {
                        let id = db.find(learned.lits()).expect("duplicate exists");
                        watches.reattach(&db, id);
                    }
                }
            }
            BcpResult::NoConflict => match decide(&trail.unassigned_vars(), &ConstantScorer, &ctx) {
                Some(lit) => trail.decide(lit),
                None => {
                    let model = (0..num_vars)
                        .map(|i| trail.value(Var::new(i)).expect("assignment is total"))
                        .collect();
                    return SatResult::Sat(model);
                }
            },
        }
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use rand::prelude::*;

    pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<Lit>]) -> bool {
        (0..1u64 << num_vars).any(|mask| {
            clauses.iter().all(|c| {
                c.iter()
                    .any(|l| (mask >> l.var().index()) & 1 == u64::from(l.is_positive()))
            })
        })
    }

    pub fn satisfies(model: &[bool], clauses: &[Vec<Lit>]) -> bool {
        clauses
            .iter()
            .all(|c| c.iter().any(|l| model[l.var().index()] == l.is_positive()))
    }

    /// Random CNF: clause count scales with variable count, clause length
    /// 1-3, no duplicate variables within a clause.
    pub fn random_cnf(rng: &mut impl Rng, num_vars: usize) -> Vec<Vec<Lit>> {
        let num_clauses = rng.gen_range(num_vars..=num_vars * 4);
        (0..num_clauses)
            .map(|_| {
                let len = rng.gen_range(1..=3usize.min(num_vars));
                let mut vars: Vec<usize> = (0..num_vars).collect();
                vars.shuffle(rng);
                vars[..len]
                    .iter()
                    .map(|&v| Lit::new(Var::new(v), rng.gen_bool(0.5)))
                    .collect()
            })
            .collect()
    }
}
