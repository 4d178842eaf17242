//! Linear relaxation of a network under a partial activation assignment,
//! expressed as a [`LinearProgram`] over inputs, pre-activations, and
//! post-activations.
//!
//! Assigned neurons contribute exact rows (`y = z`, `z >= 0` when active;
//! `y = 0`, `z <= 0` when inactive). Undecided neurons contribute the
//! rectifier envelope `y >= 0`, `y >= z`, capped above by the chord
//! through the endpoints of the neuron's pre-activation range — or only
//! by the constant cap when the looser relaxation is selected. When every
//! neuron is assigned the system is exact, so a feasible point is a real
//! counterexample candidate.

use crate::io::{CmpOp, OutputIneq};
use crate::network::Network;

use super::bounds::NetworkBounds;
use super::simplex::{LinearProgram, LpOutcome};
use super::ActivationMap;

/// Chord handling for undecided neurons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpRelaxation {
    /// Envelope with the chord upper edge.
    #[default]
    Triangle,
    /// Envelope without the chord; only the constant cap remains.
    Loose,
}

/// Variable numbering for the relaxation: inputs first, then a
/// `[pre-activations, post-activations]` block per hidden layer, then an
/// optional margin variable.
#[derive(Debug, Clone)]
pub struct VarLayout {
    input_dim: usize,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    margin: Option<usize>,
}

impl VarLayout {
    pub fn new(net: &Network, with_margin: bool) -> VarLayout {
        let widths: Vec<usize> = net.hidden_layers().iter().map(|l| l.out_dim()).collect();
        let mut offsets = Vec::with_capacity(widths.len());
        let mut next = net.input_dim();
        for w in &widths {
            offsets.push(next);
            next += 2 * w;
        }
        let margin = with_margin.then_some(next);
        VarLayout { input_dim: net.input_dim(), offsets, widths, margin }
    }

    pub fn num_vars(&self) -> usize {
        self.input_dim
            + 2 * self.widths.iter().sum::<usize>()
            + usize::from(self.margin.is_some())
    }

    pub fn input(&self, i: usize) -> usize {
        debug_assert!(i < self.input_dim);
        i
    }

    pub fn pre(&self, layer: usize, i: usize) -> usize {
        debug_assert!(i < self.widths[layer]);
        self.offsets[layer] + i
    }

    pub fn post(&self, layer: usize, i: usize) -> usize {
        debug_assert!(i < self.widths[layer]);
        self.offsets[layer] + self.widths[layer] + i
    }

    pub fn margin(&self) -> usize {
        self.margin.expect("layout built without a margin variable")
    }

    /// Indices feeding the output layer: the last hidden layer's
    /// post-activations, or the inputs if there are no hidden layers.
    fn penultimate(&self, i: usize) -> usize {
        match self.widths.len() {
            0 => self.input(i),
            n => self.post(n - 1, i),
        }
    }

    /// A unit vector usable as an LP row or objective.
    fn unit(&self, index: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.num_vars()];
        v[index] = 1.0;
        v
    }

    /// Objective maximizing the margin variable.
    pub fn margin_objective(&self) -> Vec<f64> {
        self.unit(self.margin())
    }

    /// Objective computing `coeffs . outputs` (up to the returned constant,
    /// which the objective value must be shifted by).
    pub fn output_objective(&self, net: &Network, coeffs: &[f64]) -> (Vec<f64>, f64) {
        let out = net.output_layer();
        let mut v = vec![0.0; self.num_vars()];
        let mut constant = 0.0;
        for (c, (row, b)) in coeffs.iter().zip(out.weights.iter().zip(&out.bias)) {
            constant += c * b;
            for (j, w) in row.iter().enumerate() {
                v[self.penultimate(j)] += c * w;
            }
        }
        (v, constant)
    }

    /// Objective extremizing one input coordinate.
    pub fn input_objective(&self, i: usize) -> Vec<f64> {
        self.unit(self.input(i))
    }
}

/// Build the relaxation. `disjunct` rows constrain the outputs (an empty
/// disjunct adds none); `with_margin` adds a variable kept below every
/// disjunct inequality's slack, so maximizing it finds the most
/// comfortably violating point. Note the margin makes those rows soft:
/// every point pairs with a low enough margin, and the demand holds at
/// the optimum exactly when the maximal margin is nonnegative.
pub fn build_lp(
    net: &Network,
    input_box: &[(f64, f64)],
    status: &ActivationMap,
    disjunct: &[OutputIneq],
    bounds: &NetworkBounds,
    relaxation: LpRelaxation,
    with_margin: bool,
) -> (LinearProgram, VarLayout) {
    let layout = VarLayout::new(net, with_margin);
    let mut lp = LinearProgram::new(layout.num_vars());
    for (i, &(lo, hi)) in input_box.iter().enumerate() {
        lp.bound_var(layout.input(i), lo, hi);
    }
    for (k, layer) in net.hidden_layers().iter().enumerate() {
        for (i, (w_row, &b)) in layer.weights.iter().zip(&layer.bias).enumerate() {
            // z = w . prev + b
            let mut row = vec![0.0; layout.num_vars()];
            row[layout.pre(k, i)] = -1.0;
            for (j, &w) in w_row.iter().enumerate() {
                let col = if k == 0 { layout.input(j) } else { layout.post(k - 1, j) };
                row[col] += w;
            }
            lp.add_equality(&row, -b);
            let z = layout.pre(k, i);
            let y = layout.post(k, i);
            let (zlo, zhi) = bounds.pre[k][i];
            lp.bound_var(z, zlo, zhi);
            let mut y_minus_z = vec![0.0; layout.num_vars()];
            y_minus_z[y] = 1.0;
            y_minus_z[z] = -1.0;
            match status[k][i] {
                Some(true) => {
                    lp.add_lower(&layout.unit(z), 0.0);
                    lp.add_equality(&y_minus_z, 0.0);
                }
                Some(false) => {
                    lp.add_upper(&layout.unit(z), 0.0);
                    lp.add_equality(&layout.unit(y), 0.0);
                }
                None => {
                    lp.add_lower(&layout.unit(y), 0.0);
                    lp.add_lower(&y_minus_z, 0.0);
                    lp.add_upper(&layout.unit(y), zhi.max(0.0));
                    if zlo < 0.0 && zhi > 0.0 && relaxation == LpRelaxation::Triangle {
                        // (zhi - zlo) y - zhi z <= -zhi zlo, the chord
                        // through (zlo, 0) and (zhi, zhi).
                        let mut chord = vec![0.0; layout.num_vars()];
                        chord[y] = zhi - zlo;
                        chord[z] = -zhi;
                        lp.add_upper(&chord, -zhi * zlo);
                    } else if zlo >= 0.0 {
                        lp.add_equality(&y_minus_z, 0.0);
                    } else if zhi <= 0.0 {
                        lp.add_equality(&layout.unit(y), 0.0);
                    }
                }
            }
        }
    }
    for ineq in disjunct {
        let (mut row, constant) = layout.output_objective(net, &ineq.coeffs);
        let bound = ineq.rhs - constant;
        match ineq.op {
            CmpOp::Le | CmpOp::Lt => {
                if with_margin {
                    row[layout.margin()] = 1.0;
                }
                lp.add_upper(&row, bound);
            }
            CmpOp::Ge | CmpOp::Gt => {
                if with_margin {
                    row[layout.margin()] = -1.0;
                }
                lp.add_lower(&row, bound);
            }
        }
    }
    (lp, layout)
}

/// Smallest enclosing box of the inputs consistent with the assignment,
/// found by extremizing each coordinate over the relaxation (without any
/// output constraint). `None` if the relaxation is already infeasible.
pub fn tighten_input_bounds(
    net: &Network,
    input_box: &[(f64, f64)],
    status: &ActivationMap,
    bounds: &NetworkBounds,
    relaxation: LpRelaxation,
) -> Option<Vec<(f64, f64)>> {
    let (lp, layout) = build_lp(net, input_box, status, &[], bounds, relaxation, false);
    let mut tightened = Vec::with_capacity(input_box.len());
    for (i, &(lo, hi)) in input_box.iter().enumerate() {
        let objective = layout.input_objective(i);
        let lo_new = match lp.minimize(&objective) {
            LpOutcome::Optimal { value, .. } => value.max(lo),
            LpOutcome::Infeasible => return None,
            LpOutcome::Unbounded => unreachable!("the box bounds every input"),
        };
        let hi_new = match lp.maximize(&objective) {
            LpOutcome::Optimal { value, .. } => value.min(hi),
            LpOutcome::Infeasible => return None,
            LpOutcome::Unbounded => unreachable!("the box bounds every input"),
        };
        tightened.push((lo_new, hi_new.max(lo_new)));
    }
    Some(tightened)
}
