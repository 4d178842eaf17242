//! Theory reasoning over activation assignments: linear relaxations of
//! the network under a partial assignment, feasibility checks, bound
//! propagation, and the implied activation statuses they produce.

pub mod bounds;
pub mod lp;
pub mod simplex;

use crate::io::{CmpOp, OutputIneq};
use crate::network::{Network, NeuronId};

use bounds::{propagate, Abstraction, NetworkBounds};
use lp::{build_lp, tighten_input_bounds, LpRelaxation};
use simplex::LpOutcome;

/// Activation status of each hidden neuron, indexed `[layer][index]`:
/// `Some(true)` active, `Some(false)` inactive, `None` undecided.
pub type ActivationMap = Vec<Vec<Option<bool>>>;

/// An activation map with every neuron undecided.
pub fn unassigned_map(net: &Network) -> ActivationMap {
    net.hidden_layers().iter().map(|l| vec![None; l.out_dim()]).collect()
}

#[derive(Debug, Clone)]
pub struct TheoryConfig {
    pub abstraction: Abstraction,
    pub relaxation: LpRelaxation,
    /// Input dimension above which the per-coordinate tightening solves
    /// are skipped (they cost two linear programs per input).
    pub tighten_threshold: usize,
}

impl Default for TheoryConfig {
    fn default() -> TheoryConfig {
        TheoryConfig {
            abstraction: Abstraction::default(),
            relaxation: LpRelaxation::default(),
            tighten_threshold: 10,
        }
    }
}

/// What a theory check of one partial assignment concluded.
#[derive(Debug, Clone, PartialEq)]
pub enum DeductionResult {
    /// No input in the box is consistent with the assignment and the
    /// output demand; the assignment itself is contradictory.
    Conflict,
    /// The assignment is total and a concrete input satisfies the exact
    /// system; it still needs exact validation against the network.
    Witness(Vec<f64>),
    /// Consistent so far; carries whatever was deduced along the way.
    Feasible(Deduction),
}

/// Byproducts of a successful theory check.
#[derive(Debug, Clone, PartialEq)]
pub struct Deduction {
    /// Undecided neurons whose activation status is forced by bounds.
    pub implied: Vec<(NeuronId, bool)>,
    /// Bounds computed over the tightened box.
    pub bounds: NetworkBounds,
    /// Smallest enclosing box of inputs consistent with the assignment
    /// (the original box when tightening is skipped).
    pub tightened_box: Vec<(f64, f64)>,
}

/// Interval of `coeffs . outputs` given per-output bounds.
pub(crate) fn functional_range(coeffs: &[f64], output: &[(f64, f64)]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (&c, &(olo, ohi)) in coeffs.iter().zip(output) {
        if c >= 0.0 {
            lo += c * olo;
            hi += c * ohi;
        } else {
            lo += c * ohi;
            hi += c * olo;
        }
    }
    (lo, hi)
}

/// True when the bounds alone refute one of the conjunct's inequalities.
fn bounds_refute(disjunct: &[OutputIneq], output: &[(f64, f64)]) -> bool {
    disjunct.iter().any(|ineq| {
        let (lo, hi) = functional_range(&ineq.coeffs, output);
        match ineq.op {
            CmpOp::Le | CmpOp::Lt => lo > ineq.rhs,
            CmpOp::Ge | CmpOp::Gt => hi < ineq.rhs,
        }
    })
}

/// Check one partial assignment against the network, the input box, and
/// one conjunction of output inequalities.
///
/// A total assignment is decided outright: its relaxation is exact, so
/// the demand rows join the system and an infeasible solve is a conflict,
/// while a feasible one pins a counterexample candidate at the maximal
/// demand margin. A partial assignment is checked for consistency alone
/// (can any boxed input realize it?); the demand only prunes through the
/// bounds, which keeps partial checks from deciding what only finer
/// splits may decide. Then the box is tightened, bounds are recomputed
/// over it, the demand is refuted by bounds if possible, and neurons
/// whose status the bounds force are collected.
pub fn deduction(
    net: &Network,
    input_box: &[(f64, f64)],
    status: &ActivationMap,
    disjunct: &[OutputIneq],
    config: &TheoryConfig,
) -> DeductionResult {
    let total = status.iter().flatten().all(Option::is_some);
    let pre_bounds = propagate(net, input_box, status, config.abstraction);
    if total {
        let with_margin = !disjunct.is_empty();
        let (lp, layout) = build_lp(
            net,
            input_box,
            status,
            disjunct,
            &pre_bounds,
            config.relaxation,
            with_margin,
        );
        let solved = if with_margin {
            lp.maximize(&layout.margin_objective())
        } else {
            match lp.feasible_point() {
                Some(point) => LpOutcome::Optimal { value: 0.0, point },
                None => LpOutcome::Infeasible,
            }
        };
        return match solved {
            LpOutcome::Infeasible => DeductionResult::Conflict,
            // The margin rows are soft (any point pairs with a low enough
            // margin), so the demand is satisfiable exactly when the best
            // margin is nonnegative.
            LpOutcome::Optimal { value, .. } if with_margin && value < 0.0 => {
                DeductionResult::Conflict
            }
            LpOutcome::Optimal { point, .. } => {
                // Clamp away solver roundoff that can leave a vertex an
                // ulp outside the box; exact validation follows anyway.
                let x = (0..net.input_dim())
                    .map(|i| {
                        let (lo, hi) = input_box[i];
                        point[layout.input(i)].clamp(lo, hi)
                    })
                    .collect();
                DeductionResult::Witness(x)
            }
            LpOutcome::Unbounded => {
                unreachable!("margin is capped by box-bounded output slacks")
            }
        };
    }
    let (lp, _) = build_lp(net, input_box, status, &[], &pre_bounds, config.relaxation, false);
    if lp.feasible_point().is_none() {
        return DeductionResult::Conflict;
    }
    let tightened_box = if net.input_dim() <= config.tighten_threshold {
        match tighten_input_bounds(net, input_box, status, &pre_bounds, config.relaxation) {
            Some(b) => b,
            None => return DeductionResult::Conflict,
        }
    } else {
        input_box.to_vec()
    };
    let bounds = propagate(net, &tightened_box, status, config.abstraction);
    if bounds_refute(disjunct, &bounds.output) {
        return DeductionResult::Conflict;
    }
    let mut implied = Vec::new();
    for (k, layer) in status.iter().enumerate() {
        for (i, slot) in layer.iter().enumerate() {
            if slot.is_some() {
                continue;
            }
            let (lo, hi) = bounds.pre[k][i];
            if lo > 0.0 {
                implied.push((NeuronId { layer: k, index: i }, true));
            } else if hi <= 0.0 {
                implied.push((NeuronId { layer: k, index: i }, false));
            }
        }
    }
    DeductionResult::Feasible(Deduction { implied, bounds, tightened_box })
}
