//! Shared helpers for the acceptance tests: fixture loading plus
//! independent reference oracles (truth-table satisfiability,
//! Fourier-Motzkin feasibility) that deliberately share no code with the
//! implementations they check.

use std::path::PathBuf;

use rand::prelude::*;
use relucheck::io::{parse_network, parse_vnnlib, VerificationProblem};
use relucheck::sat::{Lit, Var};

/// Load one of the on-disk fixture properties against the fixture net.
pub fn fixture_problem(prop_name: &str) -> VerificationProblem {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let net_text = std::fs::read_to_string(dir.join("papernet.json")).expect("fixture net");
    let net = parse_network(&net_text).expect("fixture net parses");
    let prop_text = std::fs::read_to_string(dir.join(prop_name)).expect("fixture property");
    parse_vnnlib(&prop_text, &net).expect("fixture property parses")
}

/// Satisfiability by exhaustive enumeration of all assignments.
pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<Lit>]) -> bool {
    (0..1u64 << num_vars).any(|mask| {
        clauses.iter().all(|c| {
            c.iter().any(|l| (mask >> l.var().index()) & 1 == u64::from(l.is_positive()))
        })
    })
}

/// Does the model satisfy every clause?
pub fn satisfies(model: &[bool], clauses: &[Vec<Lit>]) -> bool {
    clauses.iter().all(|c| c.iter().any(|l| model[l.var().index()] == l.is_positive()))
}

/// A clause entailed by a CNF is false in no satisfying assignment.
pub fn entailed_by(num_vars: usize, clauses: &[Vec<Lit>], candidate: &[Lit]) -> bool {
    (0..1u64 << num_vars).all(|mask| {
        let value = |l: &Lit| (mask >> l.var().index()) & 1 == u64::from(l.is_positive());
        let premises = clauses.iter().all(|c| c.iter().any(&value));
        !premises || candidate.iter().any(value)
    })
}

/// Random CNF: clause count scales with variable count, clause length
/// 1-3, no repeated variable within a clause.
pub fn random_cnf(rng: &mut impl Rng, num_vars: usize) -> Vec<Vec<Lit>> {
    let num_clauses = rng.gen_range(num_vars..=num_vars * 4);
    (0..num_clauses)
        .map(|_| {
            let len = rng.gen_range(1..=3usize.min(num_vars));
            let mut vars: Vec<usize> = (0..num_vars).collect();
            vars.shuffle(rng);
            vars[..len].iter().map(|&v| Lit::new(Var::new(v), rng.gen_bool(0.5))).collect()
        })
        .collect()
}

/// Feasibility of a system of `a . x <= b` rows by Fourier-Motzkin
/// elimination. Exact up to rounding; keep coefficients small and
/// well-scaled (integer test systems are ideal).
pub fn fourier_motzkin_feasible(rows: &[(Vec<f64>, f64)], num_vars: usize) -> bool {
    let mut rows: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for var in (0..num_vars).rev() {
        let mut uppers = Vec::new();
        let mut lowers = Vec::new();
        let mut rest = Vec::new();
        for (a, b) in rows {
            let c = a[var];
            if c.abs() <= 1e-12 {
                rest.push((a, b));
            } else {
                let scaled: Vec<f64> = a.iter().map(|v| v / c.abs()).collect();
                if c > 0.0 {
                    uppers.push((scaled, b / c.abs()));
                } else {
                    lowers.push((scaled, b / c.abs()));
                }
            }
        }
        for (u, bu) in &uppers {
            for (l, bl) in &lowers {
                let sum: Vec<f64> = u.iter().zip(l).map(|(x, y)| x + y).collect();
                rest.push((sum, bu + bl));
            }
        }
        rows = rest;
    }
    rows.iter().all(|(_, b)| *b >= -1e-9)
}

/// Median of an unsorted sample (mean of the middle pair when even).
pub fn median(xs: &[u64]) -> f64 {
    assert!(!xs.is_empty());
    let mut s = xs.to_vec();
    s.sort_unstable();
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        (s[n / 2 - 1] + s[n / 2]) as f64 / 2.0
    }
}

/// Uniform sample from a box.
pub fn sample_box(rng: &mut impl Rng, bx: &[(f64, f64)]) -> Vec<f64> {
    bx.iter().map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..hi) } else { lo }).collect()
}
