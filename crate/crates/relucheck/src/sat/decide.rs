//! Branching: pick the unassigned variable whose worst-case phase looks
//! most refutable.
//!
//! The scorer estimates, for each phase of a variable, how much slack the
//! counterexample condition retains once the neuron is pinned to that
//! phase; a variable's score is the worse (larger) of its two phase
//! margins and the smallest score wins — splitting there gives the best
//! chance that both branches collapse quickly. Ties are broken by a tiny
//! seeded noise term and then by variable order; the phase itself is
//! drawn from the same seeded hash, and both are re-randomized each
//! restart epoch.

use super::{Lit, Var};

/// Scores a candidate branching variable; smaller is better.
pub trait BranchScorer {
    fn score(&self, var: Var) -> f64;
}

/// Degenerate scorer for pure propositional search: every variable ties,
/// so selection is driven by the seeded noise and variable order.
pub struct ConstantScorer;

impl BranchScorer for ConstantScorer {
    fn score(&self, _var: Var) -> f64 {
        0.0
    }
}

/// Seed material for one decision: the run seed plus the restart epoch.
#[derive(Debug, Clone, Copy)]
pub struct DecideCtx {
    pub seed: u64,
    pub epoch: u32,
}

impl DecideCtx {
    fn mix(self, var: Var, salt: u64) -> u64 {
        splitmix64(
            self.seed
                .wrapping_add(u64::from(self.epoch).wrapping_mul(0x9e3779b97f4a7c15))
                .wrapping_add((var.index() as u64 + 1).wrapping_mul(0xd1342543de82ef95))
                .wrapping_add(salt),
        )
    }

    /// Tie-breaking perturbation in [0, 1e-6).
    pub fn noise(self, var: Var) -> f64 {
        (self.mix(var, 0x5bf0_3635) >> 11) as f64 / (1u64 << 53) as f64 * 1e-6
    }

    pub fn phase(self, var: Var) -> bool {
        self.mix(var, 0xa076_1d64) & 1 == 1
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Pick a branching literal among `candidates` (the unassigned vars, in
/// ascending order), or `None` when the assignment is already total.
pub fn decide(candidates: &[Var], scorer: &impl BranchScorer, ctx: &DecideCtx) -> Option<Lit> {
    let best = candidates
        .iter()
        .copied()
        .min_by(|&a, &b| {
            let sa = scorer.score(a) + ctx.noise(a);
            let sb = scorer.score(b) + ctx.noise(b);
            sa.partial_cmp(&sb).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        })?;
    Some(Lit::new(best, ctx.phase(best)))
}
