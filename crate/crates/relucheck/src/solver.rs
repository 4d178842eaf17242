//! Top-level search: attack fast path, disjunct and sub-box
//! decomposition, and the DPLL(T) loop that couples CDCL search over
//! activation literals with LP and bound deduction.
//!
//! `verify` first throws cheap falsification attacks at the problem;
//! a validated counterexample ends the run immediately. Otherwise every
//! disjunct of the negated output demand (optionally crossed with an
//! input-box grid) becomes an independent subproblem for [`dpllt_loop`]:
//! propagate, deduce, decide until a total activation pattern is exactly
//! checked or the pattern space is exhausted. Any subproblem with a
//! counterexample makes the whole problem `sat`; all-unsat subproblems
//! prove the property.

use std::time::{Duration, Instant};

use crate::attack::{attack, AttackConfig};
use crate::io::{CmpOp, Disjunct, OutputIneq, VerificationProblem};
use crate::network::Network;
use crate::sat::{
    analyze_conflict, bcp, boolean_abstraction, decide, resolve_to_asserting, should_restart,
    BcpResult, BranchScorer, Clause, ClauseDb, DecideCtx, EpochStats, Lit, Origin, Reason,
    RestartPolicy, Trail, Var, VarMap, Watches,
};
use crate::theory::bounds::{propagate, Abstraction};
use crate::theory::{
    deduction, functional_range, unassigned_map, ActivationMap, DeductionResult, TheoryConfig,
};

// ---------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------

/// Search variants for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Full,
    /// Never restart; otherwise identical to `Full`.
    NoRestart,
    /// Chronological backtracking: conflicts flip the deepest untried
    /// decision instead of learning a clause. Flips count as decisions.
    NoLearning,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub seed: u64,
    /// Wall-clock budget for one `verify` call.
    pub timeout: Duration,
    pub mode: SearchMode,
    pub theory: TheoryConfig,
    pub restarts: RestartPolicy,
    pub attack: AttackConfig,
    /// Sub-boxes per input dimension (1 disables splitting).
    pub split: usize,
    /// Splitting applies only to inputs of at most this dimension.
    pub split_threshold: usize,
    /// Worker threads for independent subproblems (1 = sequential).
    pub jobs: usize,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            seed: 0,
            timeout: Duration::from_secs(60),
            mode: SearchMode::Full,
            theory: TheoryConfig::default(),
            restarts: RestartPolicy::default(),
            attack: AttackConfig::default(),
            split: 1,
            split_threshold: 5,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// The property holds: no boxed input satisfies the negated demand.
    Unsat,
    /// Validated counterexample input.
    Sat(Vec<f64>),
    /// The search stopped without an answer, with the reason.
    Unknown(String),
    /// The wall-clock budget ran out first.
    Timeout,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Unsat => "unsat",
            Outcome::Sat(_) => "sat",
            Outcome::Unknown(_) => "unknown",
            Outcome::Timeout => "timeout",
        }
    }

    /// True for `sat` and `unsat`, the two answers that settle a query.
    pub fn is_definitive(&self) -> bool {
        matches!(self, Outcome::Unsat | Outcome::Sat(_))
    }
}

/// Work counters for one `verify` call, aggregated over subproblems.
/// All counters are deterministic for a fixed configuration; only
/// `wall_time` varies between runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchStats {
    /// Inner-loop passes (each one propagation + deduction round).
    pub iterations: u64,
    /// Branching steps, including chronological flips.
    pub decisions: u64,
    pub learned_clauses: u64,
    pub restarts: u64,
    /// Theory deduction invocations.
    pub theory_calls: u64,
    /// Seconds of wall clock, measured, not derived.
    pub wall_time: f64,
}

impl SearchStats {
    /// Fold another subproblem's counters in (wall time excluded: the
    /// caller measures it once around the whole run).
    pub fn absorb(&mut self, other: &SearchStats) {
        self.iterations += other.iterations;
        self.decisions += other.decisions;
        self.learned_clauses += other.learned_clauses;
        self.restarts += other.restarts;
        self.theory_calls += other.theory_calls;
    }

    /// One `key=value` line per counter.
    pub fn report(&self) -> String {
        format!(
            "iterations={}\ndecisions={}\nlearned_clauses={}\nrestarts={}\ntheory_calls={}\nwall_time={:.6}\n",
            self.iterations,
            self.decisions,
            self.learned_clauses,
            self.restarts,
            self.theory_calls,
            self.wall_time
        )
    }

    pub const CSV_HEADER: &'static str =
        "iterations,decisions,learned_clauses,restarts,theory_calls,wall_time";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6}",
            self.iterations,
            self.decisions,
            self.learned_clauses,
            self.restarts,
            self.theory_calls,
            self.wall_time
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

/// Why one subproblem search stopped without an answer.
#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    Timeout,
    /// A condition the search cannot settle soundly (for example a
    /// candidate witness that fails exact validation on the boundary).
    Unresolved(String),
}

/// Result of one [`dpllt_loop`] run.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopResult {
    Unsat,
    Sat(Vec<f64>),
    Budget(Stop),
}

// ---------------------------------------------------------------------
// Input splitting
// ---------------------------------------------------------------------

/// Cut the box into `splits_per_dim`^dim sub-boxes on an even grid. The
/// cut coordinates are shared floats, so the sub-boxes tile the original
/// exactly: common faces compare equal and the outer corners are the
/// original bounds.
pub fn split_input(bx: &[(f64, f64)], splits_per_dim: usize) -> Vec<Vec<(f64, f64)>> {
    assert!(splits_per_dim >= 1, "need at least one part per dimension");
    let k = splits_per_dim;
    let mut boxes: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(bx.len())];
    for &(lo, hi) in bx {
        // Interpolation hits the original endpoints exactly at t=0 and t=1.
        let cuts: Vec<f64> = (0..=k)
            .map(|i| {
                let t = i as f64 / k as f64;
                lo * (1.0 - t) + hi * t
            })
            .collect();
        let mut next = Vec::with_capacity(boxes.len() * k);
        for prefix in &boxes {
            for w in cuts.windows(2) {
                let mut b = prefix.clone();
                b.push((w[0], w[1]));
                next.push(b);
            }
        }
        boxes = next;
    }
    boxes
}

// ---------------------------------------------------------------------
// Trail <-> activation bridge and branching heuristic
// ---------------------------------------------------------------------

/// Read the trail back as a per-neuron activation assignment.
pub fn activation_map(trail: &Trail, vars: &VarMap, net: &Network) -> ActivationMap {
    let mut map = unassigned_map(net);
    for (var, phase) in trail.assignment() {
        let id = vars.neuron(var);
        map[id.layer][id.index] = Some(phase);
    }
    map
}

/// Upper bound on the demand's satisfaction slack over an output box:
/// the loosest inequality bound of the conjunction. Negative means the
/// bounds refute the demand outright.
fn best_slack(disjunct: &[OutputIneq], output: &[(f64, f64)]) -> f64 {
    disjunct
        .iter()
        .map(|ineq| {
            let (lo, hi) = functional_range(&ineq.coeffs, output);
            match ineq.op {
                CmpOp::Le | CmpOp::Lt => ineq.rhs - lo,
                CmpOp::Ge | CmpOp::Gt => hi - ineq.rhs,
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Branching heuristic: pin each candidate neuron to each phase, rerun a
/// cheap interval pass, and take the phase whose demand slack stays
/// larger. The candidate with the smallest such worst-case slack is the
/// split most likely to collapse on both sides.
struct SlackScorer<'a> {
    net: &'a Network,
    input_box: &'a [(f64, f64)],
    status: &'a ActivationMap,
    disjunct: &'a [OutputIneq],
    vars: &'a VarMap,
}

impl BranchScorer for SlackScorer<'_> {
    fn score(&self, var: Var) -> f64 {
        let id = self.vars.neuron(var);
        let mut worst = f64::NEG_INFINITY;
        for phase in [false, true] {
            let mut status = self.status.clone();
            status[id.layer][id.index] = Some(phase);
            let bounds = propagate(self.net, self.input_box, &status, Abstraction::Interval);
            worst = worst.max(best_slack(self.disjunct, &bounds.output));
        }
        worst
    }
}

// ---------------------------------------------------------------------
// The DPLL(T) loop
// ---------------------------------------------------------------------

fn box_contains(bx: &[(f64, f64)], x: &[f64]) -> bool {
    x.len() == bx.len() && x.iter().zip(bx).all(|(v, &(lo, hi))| lo <= *v && *v <= hi)
}

fn witness_is_valid(net: &Network, bx: &[(f64, f64)], disjunct: &[OutputIneq], x: &[f64]) -> bool {
    box_contains(bx, x)
        && net
            .forward(x)
            .map(|tr| disjunct.iter().all(|ineq| ineq.satisfied(&tr.outputs)))
            .unwrap_or(false)
}

/// One CDCL(T) search for an input in `input_box` that drives the
/// network to satisfy `disjunct`. `db` must already hold the Boolean
/// abstraction clauses for `vars`; learned clauses accumulate in it and
/// survive restarts, so the caller can inspect them afterwards.
#[allow(clippy::too_many_arguments)]
pub fn dpllt_loop(
    net: &Network,
    input_box: &[(f64, f64)],
    disjunct: &[OutputIneq],
    vars: &VarMap,
    db: &mut ClauseDb,
    config: &SolverConfig,
    deadline: Instant,
    stats: &mut SearchStats,
) -> LoopResult {
    let num_vars = vars.len();
    let mut watches = Watches::new(num_vars, db);
    let mut trail = Trail::new(num_vars);
    let mut policy = config.restarts;
    policy.epoch = 0;
    if config.mode == SearchMode::NoRestart {
        policy.max_restarts = 0;
    }
    let learning = config.mode != SearchMode::NoLearning;
    let mut epoch = EpochStats::default();
    let mut epoch_started = Instant::now();

    // Conflict handling shared by propagation and theory conflicts.
    // Every literal of `conflicting` is false under the trail. Returns
    // `Some` when the whole subproblem is decided.
    let handle_conflict = |conflicting: &Clause,
                           trail: &mut Trail,
                           db: &mut ClauseDb,
                           watches: &mut Watches,
                           stats: &mut SearchStats|
     -> Option<LoopResult> {
        if trail.dl() == 0 {
            // Terminal: record the clause this conflict proves before
            // reporting unsat, so the learned sequence tells the story.
            if learning && !conflicting.is_empty() {
                let learned = resolve_to_asserting(trail, db, conflicting, |_| {});
                if db.add_learned(learned.lits().to_vec()).is_some() {
                    stats.learned_clauses += 1;
                }
            }
            return Some(LoopResult::Unsat);
        }
        if learning {
            let (learned, backjump) = analyze_conflict(trail, db, conflicting);
            trail.backtrack(backjump);
            match db.add_learned(learned.lits().to_vec()) {
                Some(id) => {
                    stats.learned_clauses += 1;
                    watches.attach(db, id);
                }
                // Already known: re-activate it so the asserting literal
                // propagates at the backjump level.
                None => {
                    let id = db.find(learned.lits()).expect("duplicate exists");
                    watches.reattach(db, id);
                }
            }
        } else {
            // Chronological: flip the deepest decision not yet tried the
            // other way; exhausting them proves unsat.
            let target = trail
                .entries()
                .iter()
                .rev()
                .find(|e| matches!(e.reason, Reason::Decision) && !e.flipped)
                .map(|e| (e.level, e.lit));
            match target {
                None => return Some(LoopResult::Unsat),
                Some((level, lit)) => {
                    trail.backtrack(level - 1);
                    trail.decide_flipped(!lit);
                    stats.decisions += 1;
                }
            }
        }
        None
    };

    loop {
        stats.iterations += 1;
        epoch.nodes_processed += 1;
        epoch.elapsed = epoch_started.elapsed();
        if Instant::now() >= deadline {
            return LoopResult::Budget(Stop::Timeout);
        }
        if should_restart(&policy, &epoch) {
            policy.epoch += 1;
            stats.restarts += 1;
            trail.backtrack(0);
            epoch = EpochStats::default();
            epoch_started = Instant::now();
        }

        if let BcpResult::Conflict(cid) = bcp(db, &mut watches, &mut trail) {
            let conflicting = db.clause(cid).clone();
            match handle_conflict(&conflicting, &mut trail, db, &mut watches, stats) {
                Some(result) => return result,
                None => continue,
            }
        }

        stats.theory_calls += 1;
        let status = activation_map(&trail, vars, net);
        match deduction(net, input_box, &status, disjunct, &config.theory) {
            DeductionResult::Conflict => {
                if trail.is_empty() {
                    // Nothing was assumed: the box itself is infeasible.
                    return LoopResult::Unsat;
                }
                // The conjunction of everything assigned is theory-
                // inconsistent, so its negation is a consequence.
                let lits: Vec<Lit> = trail.entries().iter().map(|e| !e.lit).collect();
                let conflicting = Clause::new(lits, Origin::Theory);
                match handle_conflict(&conflicting, &mut trail, db, &mut watches, stats) {
                    Some(result) => return result,
                    None => continue,
                }
            }
            DeductionResult::Witness(x) => {
                return if witness_is_valid(net, input_box, disjunct, &x) {
                    LoopResult::Sat(x)
                } else {
                    // A relaxation-boundary point that the exact forward
                    // pass rejects: answering either way could be wrong.
                    LoopResult::Budget(Stop::Unresolved(
                        "candidate witness failed exact validation".to_string(),
                    ))
                };
            }
            DeductionResult::Feasible(ded) => {
                if !ded.implied.is_empty() {
                    // Each implication follows from the assignment the
                    // deduction saw: reason = (negated assignment | lit).
                    let negated: Vec<Lit> = trail.entries().iter().map(|e| !e.lit).collect();
                    for (id, phase) in &ded.implied {
                        let var = vars.var(*id);
                        if trail.value(var).is_some() {
                            continue;
                        }
                        let lit = Lit::new(var, *phase);
                        let mut reason_lits = negated.clone();
                        reason_lits.push(lit);
                        trail.assign(lit, Reason::Theory(Clause::new(reason_lits, Origin::Theory)));
                    }
                    continue;
                }
                let scorer = SlackScorer {
                    net,
                    input_box: &ded.tightened_box,
                    status: &status,
                    disjunct,
                    vars,
                };
                let ctx = DecideCtx { seed: config.seed, epoch: policy.epoch };
                match decide(&trail.unassigned_vars(), &scorer, &ctx) {
                    Some(lit) => {
                        trail.decide(lit);
                        stats.decisions += 1;
                    }
                    None => {
                        // A total assignment is checked exactly, so it
                        // cannot come back merely "feasible".
                        return LoopResult::Budget(Stop::Unresolved(
                            "total assignment was not decided by the exact check".to_string(),
                        ));
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------

fn run_subproblem(
    net: &Network,
    input_box: &[(f64, f64)],
    disjunct: &[OutputIneq],
    config: &SolverConfig,
    deadline: Instant,
) -> (LoopResult, SearchStats) {
    // Learned clauses depend on the disjunct and the box, so every
    // subproblem starts from a fresh database.
    let (vars, mut db) = boolean_abstraction(net);
    let mut stats = SearchStats::default();
    let result =
        dpllt_loop(net, input_box, disjunct, &vars, &mut db, config, deadline, &mut stats);
    (result, stats)
}

/// Decide the problem: attack first, then prove each disjunct (crossed
/// with sub-boxes when splitting is on) unsatisfiable or find a witness.
pub fn verify(problem: &VerificationProblem, config: &SolverConfig) -> Verdict {
    let started = Instant::now();
    let deadline = started + config.timeout;
    let mut stats = SearchStats::default();

    if let Some(x) = attack(problem, &config.attack) {
        debug_assert!(problem.validate_witness(&x));
        stats.wall_time = started.elapsed().as_secs_f64();
        return Verdict { outcome: Outcome::Sat(x), stats };
    }

    let boxes = if config.split > 1 && problem.input_box.len() <= config.split_threshold {
        split_input(&problem.input_box, config.split)
    } else {
        vec![problem.input_box.clone()]
    };
    let tasks: Vec<(&Disjunct, &Vec<(f64, f64)>)> = problem
        .negated_output
        .iter()
        .flat_map(|d| boxes.iter().map(move |b| (d, b)))
        .collect();

    let results = run_tasks(problem, &tasks, config, deadline);

    let mut outcome = Outcome::Unsat;
    let mut timed_out = false;
    let mut unresolved: Option<String> = None;
    for (result, sub) in results {
        stats.absorb(&sub);
        match result {
            LoopResult::Sat(x) => {
                outcome = if problem.validate_witness(&x) {
                    Outcome::Sat(x)
                } else {
                    Outcome::Unknown("witness failed final validation".to_string())
                };
                break;
            }
            LoopResult::Unsat => {}
            LoopResult::Budget(Stop::Timeout) => timed_out = true,
            LoopResult::Budget(Stop::Unresolved(reason)) => unresolved = Some(reason),
        }
    }
    if matches!(outcome, Outcome::Unsat) {
        if timed_out {
            outcome = Outcome::Timeout;
        } else if let Some(reason) = unresolved {
            outcome = Outcome::Unknown(reason);
        }
    }
    stats.wall_time = started.elapsed().as_secs_f64();
    Verdict { outcome, stats }
}

/// Run the subproblems in task order. Sequential execution stops at the
/// first counterexample; parallel execution runs all tasks and the
/// reduction still picks the first one in task order, so the verdict is
/// identical either way.
fn run_tasks(
    problem: &VerificationProblem,
    tasks: &[(&Disjunct, &Vec<(f64, f64)>)],
    config: &SolverConfig,
    deadline: Instant,
) -> Vec<(LoopResult, SearchStats)> {
    #[cfg(feature = "parallel")]
    if config.jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build();
        if let Ok(pool) = pool {
            return pool.install(|| {
                tasks
                    .par_iter()
                    .map(|(d, b)| run_subproblem(&problem.net, b, d, config, deadline))
                    .collect()
            });
        }
    }
    let mut results = Vec::with_capacity(tasks.len());
    for (d, b) in tasks {
        let (result, sub) = run_subproblem(&problem.net, b, d, config, deadline);
        let done = matches!(result, LoopResult::Sat(_));
        results.push((result, sub));
        if done {
            break;
        }
    }
    results
}
