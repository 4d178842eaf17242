//! Unit propagation with two watched literals per clause.
//!
//! Unary clauses cannot be watched and are rechecked at the start of
//! every propagation round, which also re-establishes them after a
//! restart clears the trail. Clauses attached mid-search (learned
//! clauses) sit in a pending list until the next round classifies them,
//! so propagation alone discovers a freshly learned asserting clause —
//! the caller never enqueues its literal by hand.

use super::{ClauseDb, ClauseId, Lit, Reason, Trail};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcpResult {
    NoConflict,
    Conflict(ClauseId),
}

/// Watch state for a clause database.
#[derive(Debug, Clone)]
pub struct Watches {
    // For each literal code, the clauses currently watching that literal.
    lists: Vec<Vec<ClauseId>>,
    // Which two literal slots of each clause are watched.
    slots: Vec<[usize; 2]>,
    unary: Vec<ClauseId>,
    // Classified first-in-first-out so clause order is respected.
    pending: VecDeque<ClauseId>,
}

impl Watches {
    pub fn new(num_vars: usize, db: &ClauseDb) -> Watches {
        let mut w = Watches {
            lists: vec![Vec::new(); 2 * num_vars],
            slots: Vec::with_capacity(db.len()),
            unary: Vec::new(),
            pending: VecDeque::new(),
        };
        for (id, _) in db.iter() {
            w.attach(db, id);
        }
        w
    }

    /// Register a clause. It becomes active at the next [`bcp`] call.
    pub fn attach(&mut self, db: &ClauseDb, id: ClauseId) {
        let clause = db.clause(id);
        assert!(!clause.is_empty(), "empty clause cannot be attached");
        while self.slots.len() <= id {
            self.slots.push([0, 0]);
        }
        if clause.len() == 1 {
            self.unary.push(id);
        } else {
            self.pending.push_back(id);
        }
    }

    /// Re-queue an already-attached clause for classification. Used when a
    /// derived clause duplicates a stored one: re-watching makes its unit
    /// literal propagate at the current trail. Stale watch-list entries
    /// left behind are dropped lazily by [`bcp`].
    pub fn reattach(&mut self, db: &ClauseDb, id: ClauseId) {
        if db.clause(id).len() > 1 && !self.pending.contains(&id) {
            self.pending.push_back(id);
        }
    }

    fn watch(&mut self, lit: Lit, id: ClauseId, slot_index: usize, slot: usize) {
        self.lists[lit.code()].push(id);
        self.slots[id][slot_index] = slot;
    }
}

/// Propagate to fixpoint. On `NoConflict` no clause in the database is
/// unit or false under the trail.
pub fn bcp(db: &ClauseDb, watches: &mut Watches, trail: &mut Trail) -> BcpResult {
    // Unary clauses first: they are units whenever unassigned.
    for i in 0..watches.unary.len() {
        let id = watches.unary[i];
        let lit = db.clause(id).lits()[0];
        match trail.lit_value(lit) {
            None => trail.assign(lit, Reason::Propagated(id)),
            Some(false) => return BcpResult::Conflict(id),
            Some(true) => {}
        }
    }
    // Classify clauses attached since the last round.
    while let Some(id) = watches.pending.pop_front() {
        let lits = db.clause(id).lits();
        let mut free = [None, None];
        let mut count = 0;
        for (i, &l) in lits.iter().enumerate() {
            if trail.lit_value(l) != Some(false) {
                if count < 2 {
                    free[count] = Some(i);
                }
                count += 1;
            }
        }
        match (free[0], free[1]) {
            (Some(a), Some(b)) => {
                watches.watch(lits[a], id, 0, a);
                watches.watch(lits[b], id, 1, b);
            }
            (Some(a), None) => {
                // Unit (or satisfied-by-its-last-literal). Watch the lone
                // non-false literal plus the latest-assigned one so the
                // invariant holds after backtracking.
                let newest = (0..lits.len())
                    .filter(|&i| i != a)
                    .max_by_key(|&i| trail.position_of(lits[i].var()))
                    .expect("len >= 2");
                watches.watch(lits[a], id, 0, a);
                watches.watch(lits[newest], id, 1, newest);
                if trail.lit_value(lits[a]).is_none() {
                    trail.assign(lits[a], Reason::Propagated(id));
                }
            }
            _ => {
                // All literals false: conflicting right now. Watch the two
                // newest literals to stay consistent after backtracking.
                let mut by_pos: Vec<usize> = (0..lits.len()).collect();
                by_pos.sort_by_key(|&i| std::cmp::Reverse(trail.position_of(lits[i].var())));
                watches.watch(lits[by_pos[0]], id, 0, by_pos[0]);
                watches.watch(lits[by_pos[1]], id, 1, by_pos[1]);
                return BcpResult::Conflict(id);
            }
        }
    }
    // Main loop: react to assignments made since the previous round.
    while trail.head < trail.len() {
        let assigned = trail.entries()[trail.head].lit;
        trail.head += 1;
        let falsified = !assigned;
        let mut list = std::mem::take(&mut watches.lists[falsified.code()]);
        let mut keep = 0;
        let mut conflict = None;
        'clauses: for i in 0..list.len() {
            let id = list[i];
            let lits = db.clause(id).lits();
            let [s0, s1] = watches.slots[id];
            if lits[s0] != falsified && lits[s1] != falsified {
                // Stale entry from a reattach; the live watches are
                // elsewhere. Drop it.
                continue;
            }
            let my_slot_index = usize::from(lits[s1] == falsified && lits[s0] != falsified);
            let other = lits[watches.slots[id][1 - my_slot_index]];
            if trail.lit_value(other) == Some(true) {
                // Satisfied; keep watching as-is.
                list[keep] = id;
                keep += 1;
                continue;
            }
            // Look for a replacement watch.
            for (j, &l) in lits.iter().enumerate() {
                if j == s0 || j == s1 {
                    continue;
                }
                if trail.lit_value(l) != Some(false) {
                    watches.watch(l, id, my_slot_index, j);
                    continue 'clauses;
                }
            }
            // None: clause is unit on `other`, or conflicting.
            list[keep] = id;
            keep += 1;
            match trail.lit_value(other) {
                None => {
                    debug_assert!(lits
                        .iter()
                        .all(|&l| l == other || trail.lit_value(l) == Some(false)));
                    trail.assign(other, Reason::Propagated(id));
                }
                Some(false) => {
                    conflict = Some(id);
                    // Keep the remaining watchers untouched.
                    list.copy_within(i + 1.., keep);
                    keep += list.len() - (i + 1);
                    break;
                }
                Some(true) => unreachable!("handled above"),
            }
        }
        list.truncate(keep);
        debug_assert!(watches.lists[falsified.code()].is_empty());
        watches.lists[falsified.code()] = list;
        if let Some(id) = conflict {
            return BcpResult::Conflict(id);
        }
    }
    BcpResult::NoConflict
}

/// Reference propagation by naive scanning, for differential tests: the
/// assignment closure of unit propagation is unique, so both engines must
/// agree on the final assignment (and on whether a conflict exists).
#[cfg(test)]
pub fn bcp_naive(db: &ClauseDb, trail: &mut Trail) -> Result<(), ()> {
    loop {
        let mut changed = false;
        for (_, clause) in db.iter() {
            let mut unassigned = None;
            let mut n_unassigned = 0;
            let mut satisfied = false;
            for &l in clause.lits() {
                match trail.lit_value(l) {
                    Some(true) => satisfied = true,
                    Some(false) => {}
                    None => {
                        unassigned = Some(l);
                        n_unassigned += 1;
                    }
                }
            }
            if satisfied {
                continue;
            }
            match n_unassigned {
                0 => return Err(()),
                1 => {
                    trail.assign(unassigned.unwrap(), Reason::Propagated(0));
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Ok(());
        }
    }
}
