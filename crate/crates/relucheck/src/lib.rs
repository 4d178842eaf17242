//! Complete verification of ReLU feedforward networks.
//!
//! Given a network, an input box, and a property over the outputs, the
//! solver either proves the property (`unsat`: no input violates it),
//! produces a concrete counterexample (`sat`), or gives up (`unknown` /
//! `timeout`). The search couples a CDCL SAT engine over neuron
//! activation literals with an LP-based theory solver: clause learning
//! prunes activation patterns, bound propagation and infeasibility
//! certificates prune the continuous side, and gradient-guided attacks
//! short-circuit falsifiable problems before the search starts.
//!
//! Crate layout:
//!
//! * [`network`] — network representation, evaluation, subgradients
//! * [`io`] — network JSON format and the VNN-LIB property subset
//! * [`sat`] — literals, clauses, trail, propagation, conflict analysis
//! * [`theory`] — LP construction, simplex, bound propagation, deduction
//! * [`attack`] — random sampling and projected gradient falsification
//! * [`oracle`] — exact verification by activation-pattern enumeration
//! * [`solver`] — the top-level search loop and orchestration

pub mod attack;
pub mod io;
pub mod network;
pub mod oracle;
pub mod sat;
pub mod solver;
pub mod theory;
