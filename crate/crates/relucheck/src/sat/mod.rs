//! CDCL machinery over neuron activation literals.
//!
//! Each hidden neuron gets one Boolean variable: the positive literal
//! means "active" (pre-activation > 0), the negative literal "inactive"
//! (<= 0). The Boolean abstraction of a network is one tautological
//! clause per variable — every activation pattern is propositionally
//! allowed until theory conflicts teach the engine otherwise.

mod analyze;
mod cdcl;
mod decide;
mod propagate;
mod restart;

pub use analyze::{analyze_conflict, analyze_conflict_steps, binary_resolution};
pub(crate) use analyze::resolve_to_asserting;
pub use cdcl::{solve_propositional, SatResult};
pub use decide::{decide, BranchScorer, ConstantScorer, DecideCtx};
pub use propagate::{bcp, BcpResult, Watches};
pub use restart::{should_restart, EpochStats, RestartPolicy};

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::network::{Network, NeuronId};

/// A Boolean variable over a hidden neuron's activation status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: usize) -> Var {
        Var(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A literal: variable plus sign, packed as `var << 1 | negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index for watch lists.
    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_positive() { "" } else { "~" }, self.var())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Initial,
    Learned,
    /// Reason clause produced by the theory solver; lives on the trail,
    /// not in the clause database.
    Theory,
}

/// A disjunction of literals. Duplicate literals are merged on
/// construction; both polarities of one variable make the clause a
/// tautology, which is legal only for initial abstraction clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    lits: Vec<Lit>,
    pub origin: Origin,
}

impl Clause {
    pub fn new(mut lits: Vec<Lit>, origin: Origin) -> Clause {
        let mut seen = HashSet::with_capacity(lits.len());
        lits.retain(|l| seen.insert(*l));
        Clause { lits, origin }
    }

    /// A clause containing some variable in both polarities.
    pub fn is_tautology(&self) -> bool {
        let vars: HashSet<Var> = self.lits.iter().map(|l| l.var()).collect();
        vars.len() < self.lits.len()
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    /// Canonical literal order, used for duplicate detection.
    fn key(&self) -> Vec<Lit> {
        let mut k = self.lits.clone();
        k.sort_unstable();
        k
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

pub type ClauseId = usize;

/// Clause storage with duplicate detection for learned clauses.
#[derive(Debug, Clone, Default)]
pub struct ClauseDb {
    clauses: Vec<Clause>,
    keys: HashMap<Vec<Lit>, ClauseId>,
}

impl ClauseDb {
    pub fn new() -> ClauseDb {
        ClauseDb::default()
    }

    pub fn add_initial(&mut self, lits: Vec<Lit>) -> ClauseId {
        let clause = Clause::new(lits, Origin::Initial);
        let id = self.clauses.len();
        self.keys.insert(clause.key(), id);
        self.clauses.push(clause);
        id
    }

    /// Returns `None` (and stores nothing) if an equal clause exists.
    pub fn add_learned(&mut self, lits: Vec<Lit>) -> Option<ClauseId> {
        let clause = Clause::new(lits, Origin::Learned);
        debug_assert!(!clause.is_tautology(), "learned clause must not be tautological");
        let key = clause.key();
        if self.keys.contains_key(&key) {
            return None;
        }
        let id = self.clauses.len();
        self.keys.insert(key, id);
        self.clauses.push(clause);
        Some(id)
    }

    /// Id of the stored clause with exactly these literals, if any.
    pub fn find(&self, lits: &[Lit]) -> Option<ClauseId> {
        let mut key = lits.to_vec();
        key.sort_unstable();
        key.dedup();
        self.keys.get(&key).copied()
    }

    pub fn clause(&self, id: ClauseId) -> &Clause {
        &self.clauses[id]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClauseId, &Clause)> {
        self.clauses.iter().enumerate()
    }

    pub fn learned(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.origin == Origin::Learned)
    }
}

/// Maps Boolean variables to hidden neurons, in (layer, index) order.
#[derive(Debug, Clone)]
pub struct VarMap {
    neurons: Vec<NeuronId>,
}

impl VarMap {
    pub fn len(&self) -> usize {
        self.neurons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neurons.is_empty()
    }

    pub fn neuron(&self, var: Var) -> NeuronId {
        self.neurons[var.index()]
    }

    pub fn var(&self, neuron: NeuronId) -> Var {
        let i = self.neurons.binary_search(&neuron).expect("neuron exists");
        Var::new(i)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.neurons.len()).map(Var::new)
    }
}

/// One variable per hidden neuron plus the tautological clause
/// `(v | ~v)` for each, so every activation pattern starts allowed.
pub fn boolean_abstraction(net: &Network) -> (VarMap, ClauseDb) {
    let neurons: Vec<NeuronId> = net.hidden_neurons().collect();
    let mut db = ClauseDb::new();
    for i in 0..neurons.len() {
        let v = Var::new(i);
        db.add_initial(vec![v.positive(), v.negative()]);
    }
    (VarMap { neurons }, db)
}

/// Why a literal is on the trail.
#[derive(Debug, Clone)]
pub enum Reason {
    Decision,
    Propagated(ClauseId),
    /// Implied by the theory solver, with the reason clause inline.
    Theory(Clause),
}

#[derive(Debug, Clone)]
pub struct TrailEntry {
    pub lit: Lit,
    pub level: u32,
    pub reason: Reason,
    /// Used by the no-learning (chronological) mode: this decision has
    /// already been tried in the opposite phase.
    pub flipped: bool,
}

/// Assignment stack with decision levels and antecedents.
#[derive(Debug, Clone)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    // Indexed by variable: 0 unassigned, +1 true, -1 false.
    values: Vec<i8>,
    positions: Vec<usize>,
    levels: Vec<u32>,
    dl: u32,
    // First unpropagated entry; owned here so backtracking can fix it up.
    pub(crate) head: usize,
}

impl Trail {
    pub fn new(num_vars: usize) -> Trail {
        Trail {
            entries: Vec::new(),
            values: vec![0; num_vars],
            positions: vec![0; num_vars],
            levels: vec![0; num_vars],
            dl: 0,
            head: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn dl(&self) -> u32 {
        self.dl
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.entries.len() == self.values.len()
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        match self.values[var.index()] {
            0 => None,
            v => Some(v > 0),
        }
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var()).map(|v| v == lit.is_positive())
    }

    pub fn level_of(&self, var: Var) -> u32 {
        debug_assert!(self.value(var).is_some());
        self.levels[var.index()]
    }

    /// Trail position of an assigned variable (later = assigned later).
    pub fn position_of(&self, var: Var) -> usize {
        debug_assert!(self.value(var).is_some());
        self.positions[var.index()]
    }

    pub fn unassigned_vars(&self) -> Vec<Var> {
        (0..self.values.len())
            .filter(|&i| self.values[i] == 0)
            .map(Var::new)
            .collect()
    }

    /// Assignment view: (var, phase) pairs in trail order.
    pub fn assignment(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.entries.iter().map(|e| (e.lit.var(), e.lit.is_positive()))
    }

    /// Push a non-decision assignment at the current level.
    pub fn assign(&mut self, lit: Lit, reason: Reason) {
        debug_assert!(!matches!(reason, Reason::Decision));
        self.push(lit, reason, false);
    }

    /// Open a new decision level and push a decision.
    pub fn decide(&mut self, lit: Lit) {
        self.dl += 1;
        self.push(lit, Reason::Decision, false);
    }

    /// Re-decide the opposite phase at the same level (chronological mode).
    pub fn decide_flipped(&mut self, lit: Lit) {
        self.dl += 1;
        self.push(lit, Reason::Decision, true);
    }

    fn push(&mut self, lit: Lit, reason: Reason, flipped: bool) {
        let v = lit.var().index();
        assert_eq!(self.values[v], 0, "{} already assigned", lit.var());
        self.values[v] = if lit.is_positive() { 1 } else { -1 };
        self.positions[v] = self.entries.len();
        self.levels[v] = self.dl;
        self.entries.push(TrailEntry { lit, level: self.dl, reason, flipped });
    }

    /// Pop every entry above `level` and make it the current level.
    pub fn backtrack(&mut self, level: u32) {
        debug_assert!(level <= self.dl);
        while let Some(e) = self.entries.last() {
            if e.level <= level {
                break;
            }
            self.values[e.lit.var().index()] = 0;
            self.entries.pop();
        }
        self.dl = level;
        self.head = self.head.min(self.entries.len());
    }

    pub fn reason(&self, var: Var) -> &Reason {
        &self.entries[self.positions[var.index()]].reason
    }
}
