//! Conflict analysis: binary resolution driven to the first unique
//! implication point.
//!
//! Starting from the falsified clause, the literal assigned last is
//! resolved against its antecedent until exactly one literal of the
//! current decision level remains. The result is the learned (asserting)
//! clause; the backjump target is the second-highest level it mentions.

use super::{Clause, ClauseDb, Origin, Reason, Trail, Var};

/// Resolve `a` and `b` on `pivot`, which must occur with opposite signs.
/// The result keeps `a`'s literals (minus the pivot) followed by `b`'s,
/// with duplicates merged.
pub fn binary_resolution(a: &Clause, b: &Clause, pivot: Var) -> Clause {
    let pa = a.lits().iter().find(|l| l.var() == pivot);
    let pb = b.lits().iter().find(|l| l.var() == pivot);
    let (pa, pb) = match (pa, pb) {
        (Some(&pa), Some(&pb)) => (pa, pb),
        _ => panic!("pivot {pivot} missing from an operand"),
    };
    assert!(pa == !pb, "pivot {pivot} must occur with opposite signs");
    let lits = a
        .lits()
        .iter()
        .chain(b.lits())
        .copied()
        .filter(|l| l.var() != pivot)
        .collect();
    Clause::new(lits, Origin::Learned)
}

fn antecedent<'a>(trail: &'a Trail, db: &'a ClauseDb, var: Var) -> &'a Clause {
    match trail.reason(var) {
        Reason::Propagated(id) => db.clause(*id),
        Reason::Theory(clause) => clause,
        Reason::Decision => panic!("decision {var} has no antecedent"),
    }
}

/// Resolution loop shared by [`analyze_conflict`] and the terminal
/// level-0 conflict (where the derived clause is recorded right before
/// the search reports unsatisfiability). Every literal of `conflicting`
/// must be false under the trail.
pub(crate) fn resolve_to_asserting(
    trail: &Trail,
    db: &ClauseDb,
    conflicting: &Clause,
    mut on_step: impl FnMut(&Clause),
) -> Clause {
    debug_assert!(conflicting
        .lits()
        .iter()
        .all(|&l| trail.lit_value(l) == Some(false)));
    let mut clause = Clause::new(conflicting.lits().to_vec(), Origin::Learned);
    loop {
        let at_current: Vec<Var> = clause
            .lits()
            .iter()
            .map(|l| l.var())
            .filter(|&v| trail.level_of(v) == trail.dl())
            .collect();
        if at_current.len() <= 1 {
            // Every literal in the working clause is false under the trail,
            // so no variable can appear in both polarities.
            debug_assert!(!clause.is_tautology());
            return clause;
        }
        // Resolve away the literal assigned most recently.
        let pivot = at_current
            .into_iter()
            .max_by_key(|&v| trail.position_of(v))
            .expect("at least two candidates");
        clause = binary_resolution(&clause, antecedent(trail, db, pivot), pivot);
        on_step(&clause);
    }
}

/// Analyze a conflict at decision level > 0. Returns the learned clause
/// and the backjump level (0 for a unary clause). The learned clause is
/// asserting: exactly one of its literals sits at the conflict level.
pub fn analyze_conflict(trail: &Trail, db: &ClauseDb, conflicting: &Clause) -> (Clause, u32) {
    assert!(trail.dl() > 0, "level-0 conflicts terminate the search instead");
    let learned = resolve_to_asserting(trail, db, conflicting, |_| {});
    let backjump = backjump_level(trail, &learned);
    (learned, backjump)
}

/// [`analyze_conflict`] with the intermediate resolvents captured, for
/// tests that pin the exact resolution chain.
pub fn analyze_conflict_steps(
    trail: &Trail,
    db: &ClauseDb,
    conflicting: &Clause,
) -> (Clause, u32, Vec<Clause>) {
    assert!(trail.dl() > 0, "level-0 conflicts terminate the search instead");
    let mut steps = Vec::new();
    let learned = resolve_to_asserting(trail, db, conflicting, |c| steps.push(c.clone()));
    let backjump = backjump_level(trail, &learned);
    (learned, backjump, steps)
}

/// Second-highest decision level in the clause, or 0 if unary.
fn backjump_level(trail: &Trail, learned: &Clause) -> u32 {
    debug_assert_eq!(
        learned
            .lits()
            .iter()
            .filter(|l| trail.level_of(l.var()) == trail.dl())
            .count(),
        1,
        "learned clause must be asserting"
    );
    learned
        .lits()
        .iter()
        .map(|l| trail.level_of(l.var()))
        .filter(|&lv| lv < trail.dl())
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::super::{ClauseDb, Lit, Trail};
    use super::*;

    fn v(i: usize) -> Var {
        // Tests use the 1-based naming v1..v5 common in worked examples.
        Var::new(i - 1)
    }

    fn clause(lits: &[Lit]) -> Clause {
        Clause::new(lits.to_vec(), Origin::Initial)
    }

    fn sorted(c: &Clause) -> Vec<Lit> {
        let mut l = c.lits().to_vec();
        l.sort_unstable();
        l
    }

    /// Truth-table check that `a and b` entails `c` over the given vars.
    fn entails(premises: &[&Clause], c: &Clause, num_vars: usize) -> bool {
        for mask in 0..1u32 << num_vars {
            let value = |l: Lit| (mask >> l.var().index()) & 1 == u32::from(l.is_positive());
            let all_premises = premises.iter().all(|p| p.lits().iter().any(|&l| value(l)));
            if all_premises && !c.lits().iter().any(|&l| value(l)) {
                return false;
            }
        }
        true
    }

    #[test]
    fn resolution_worked_example() {
        // (~v3 | ~v4) resolved with (~v1 | v3 | v5) on v3
        // gives (~v4 | ~v1 | v5).
        let a = clause(&[v(3).negative(), v(4).negative()]);
        let b = clause(&[v(1).negative(), v(3).positive(), v(5).positive()]);
        let r = binary_resolution(&a, &b, v(3));
        assert_eq!(r.lits(), &[v(4).negative(), v(1).negative(), v(5).positive()]);
        assert!(entails(&[&a, &b], &r, 5));
    }

    #[test]
    fn resolution_merges_duplicates() {
        let a = clause(&[v(3).negative(), v(4).negative()]);
        let b = clause(&[v(4).negative(), v(3).positive()]);
        let r = binary_resolution(&a, &b, v(3));
        assert_eq!(r.lits(), &[v(4).negative()]);
        assert!(entails(&[&a, &b], &r, 4));
    }

    #[test]
    #[should_panic(expected = "missing from an operand")]
    fn resolution_rejects_missing_pivot() {
        let a = clause(&[v(1).positive()]);
        let b = clause(&[v(2).positive()]);
        binary_resolution(&a, &b, v(3));
    }

    #[test]
    #[should_panic(expected = "opposite signs")]
    fn resolution_rejects_same_signed_pivot() {
        let a = clause(&[v(1).positive(), v(2).positive()]);
        let b = clause(&[v(1).positive(), v(3).positive()]);
        binary_resolution(&a, &b, v(1));
    }

    /// Randomized resolution soundness: the resolvent is always entailed
    /// by its two premises.
    #[test]
    fn resolution_is_entailed() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..500 {
            let num_vars = rng.gen_range(2..8);
            let pivot = Var::new(rng.gen_range(0..num_vars));
            let mut mk = |sign: bool| {
                let mut lits = vec![Lit::new(pivot, sign)];
                for i in 0..num_vars {
                    let var = Var::new(i);
                    if var != pivot && rng.gen_bool(0.4) {
                        lits.push(Lit::new(var, rng.gen_bool(0.5)));
                    }
                }
                clause(&lits)
            };
            let a = mk(true);
            let b = mk(false);
            let r = binary_resolution(&a, &b, pivot);
            assert!(entails(&[&a, &b], &r, num_vars));
        }
    }

    /// The implication-graph worked example, with the trail constructed in
    /// the order used by the original diagram (v2, v4, v3 at level 6):
    /// conflict on (~v3 | ~v4) learns (~v1 | v5) and backjumps to level 3,
    /// through the exact chain
    ///   (~v3|~v4) x (~v1|v3|v5) -> (~v4|~v1|v5)
    ///            x (~v2|v4)    -> (~v1|v5|~v2)
    ///            x (~v1|v2)    -> (~v1|v5).
    #[test]
    fn analyze_implication_graph_example() {
        let mut db = ClauseDb::new();
        let c1 = db.add_initial(vec![v(1).negative(), v(2).positive()]);
        let c2 = db.add_initial(vec![v(1).negative(), v(3).positive(), v(5).positive()]);
        let c3 = db.add_initial(vec![v(2).negative(), v(4).positive()]);
        let c4 = db.add_initial(vec![v(3).negative(), v(4).negative()]);
        let mut trail = Trail::new(9);
        trail.decide(Var::new(5).positive()); // filler levels 1, 2
        trail.decide(Var::new(6).positive());
        trail.decide(v(5).negative()); // ~v5 @ 3
        trail.decide(Var::new(7).positive()); // filler levels 4, 5
        trail.decide(Var::new(8).positive());
        trail.decide(v(1).positive()); // v1 @ 6
        trail.assign(v(2).positive(), Reason::Propagated(c1));
        trail.assign(v(4).positive(), Reason::Propagated(c3));
        trail.assign(v(3).positive(), Reason::Propagated(c2));
        let conflicting = db.clause(c4).clone();
        let (learned, backjump, steps) = analyze_conflict_steps(&trail, &db, &conflicting);
        assert_eq!(learned.lits(), &[v(1).negative(), v(5).positive()]);
        assert_eq!(backjump, 3);
        let chain: Vec<Vec<Lit>> = steps.iter().map(sorted).collect();
        assert_eq!(
            chain,
            vec![
                sorted(&clause(&[v(4).negative(), v(1).negative(), v(5).positive()])),
                sorted(&clause(&[v(1).negative(), v(5).positive(), v(2).negative()])),
                sorted(&clause(&[v(1).negative(), v(5).positive()])),
            ]
        );
    }

    /// A conflict whose clause contains only the current decision yields a
    /// unary learned clause and backjump level 0.
    #[test]
    fn analyze_unary_learned_clause() {
        let db = ClauseDb::new();
        let mut trail = Trail::new(2);
        trail.decide(v(2).negative()); // ~v2 @ 1
        let conflicting = Clause::new(vec![v(2).positive()], Origin::Theory);
        let (learned, backjump) = analyze_conflict(&trail, &db, &conflicting);
        assert_eq!(learned.lits(), &[v(2).positive()]);
        assert_eq!(backjump, 0);
    }

    /// Resolution through a theory-implied literal's inline reason clause.
    #[test]
    fn analyze_through_theory_reason() {
        let db = ClauseDb::new();
        let mut trail = Trail::new(2);
        trail.decide(v(2).positive());
        let reason = Clause::new(vec![v(2).negative(), v(1).positive()], Origin::Theory);
        trail.assign(v(1).positive(), Reason::Theory(reason));
        let conflicting = Clause::new(vec![v(2).negative(), v(1).negative()], Origin::Theory);
        let (learned, backjump) = analyze_conflict(&trail, &db, &conflicting);
        assert_eq!(learned.lits(), &[v(2).negative()]);
        assert_eq!(backjump, 0);
    }

    #[test]
    #[should_panic(expected = "level-0")]
    fn analyze_rejects_level_zero() {
        let db = ClauseDb::new();
        let mut trail = Trail::new(1);
        trail.assign(v(1).positive(), Reason::Propagated(0));
        let conflicting = Clause::new(vec![v(1).negative()], Origin::Theory);
        analyze_conflict(&trail, &db, &conflicting);
    }
}
