//! Counterexample search by sampling and projected gradient ascent.
//!
//! Both attacks climb the violation margin: the best disjunct's worst
//! inequality slack. A positive margin means the point satisfies some
//! disjunct outright. Every candidate is confirmed by an exact forward
//! pass before being returned, so a returned point is always a real
//! counterexample.

use crate::io::{Disjunct, VerificationProblem};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub seed: u64,
    /// Uniform samples drawn from the input box.
    pub samples: usize,
    /// Ascent steps per start point.
    pub pgd_steps: usize,
    /// Independent ascent start points.
    pub pgd_restarts: usize,
    /// Step length as a fraction of each coordinate's box width.
    pub step_size: f64,
}

impl Default for AttackConfig {
    fn default() -> AttackConfig {
        AttackConfig { seed: 0, samples: 1000, pgd_steps: 50, pgd_restarts: 5, step_size: 0.1 }
    }
}

/// Worst inequality slack within one disjunct at the given outputs.
fn disjunct_margin(disjunct: &Disjunct, outputs: &[f64]) -> f64 {
    disjunct
        .iter()
        .map(|ineq| ineq.slack(outputs))
        .fold(f64::INFINITY, f64::min)
}

/// Violation margin: the best disjunct's worst slack. Positive margins
/// satisfy that disjunct with room to spare (for strict inequalities a
/// zero margin is not enough, which exact validation settles).
pub fn violation_margin(problem: &VerificationProblem, outputs: &[f64]) -> f64 {
    problem
        .negated_output
        .iter()
        .map(|d| disjunct_margin(d, outputs))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn uniform_point(rng: &mut impl Rng, bx: &[(f64, f64)]) -> Vec<f64> {
    bx.iter().map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..=hi) } else { lo }).collect()
}

/// Evaluate candidates in index order and keep the first validated
/// witness, so the result does not depend on evaluation parallelism.
fn first_witness(problem: &VerificationProblem, candidates: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    #[cfg(feature = "parallel")]
    {
        candidates.into_par_iter().find_first(|x| problem.validate_witness(x))
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidates.into_iter().find(|x| problem.validate_witness(x))
    }
}

/// Uniform sampling over the input box.
pub fn random_attack(problem: &VerificationProblem, config: &AttackConfig) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let candidates: Vec<Vec<f64>> =
        (0..config.samples).map(|_| uniform_point(&mut rng, &problem.input_box)).collect();
    first_witness(problem, candidates)
}

/// One ascent trajectory; returns the first point (if any) that validates.
fn ascend(
    problem: &VerificationProblem,
    mut x: Vec<f64>,
    config: &AttackConfig,
) -> Option<Vec<f64>> {
    let bx = &problem.input_box;
    for _ in 0..config.pgd_steps {
        if problem.validate_witness(&x) {
            return Some(x);
        }
        let outputs = problem.net.forward(&x).ok()?.outputs;
        // Climb the active disjunct's worst inequality.
        let best = problem
            .negated_output
            .iter()
            .max_by(|a, b| {
                disjunct_margin(a, &outputs).total_cmp(&disjunct_margin(b, &outputs))
            })?;
        let worst = best
            .iter()
            .min_by(|a, b| a.slack(&outputs).total_cmp(&b.slack(&outputs)))?;
        // d(slack)/d(outputs) is +-coeffs depending on the direction.
        let sign = match worst.op {
            crate::io::CmpOp::Le | crate::io::CmpOp::Lt => -1.0,
            crate::io::CmpOp::Ge | crate::io::CmpOp::Gt => 1.0,
        };
        let loss: Vec<f64> = worst.coeffs.iter().map(|c| sign * c).collect();
        let grad = problem.net.gradient(&x, &loss).ok()?;
        for ((xi, g), &(lo, hi)) in x.iter_mut().zip(&grad).zip(bx) {
            let step = config.step_size * (hi - lo) * g.signum();
            *xi = (*xi + step).clamp(lo, hi);
        }
    }
    problem.validate_witness(&x).then_some(x)
}

/// Projected gradient ascent on the violation margin from several start
/// points.
pub fn pgd_attack(problem: &VerificationProblem, config: &AttackConfig) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let starts: Vec<Vec<f64>> =
        (0..config.pgd_restarts).map(|_| uniform_point(&mut rng, &problem.input_box)).collect();
    #[cfg(feature = "parallel")]
    {
        starts.into_par_iter().map(|s| ascend(problem, s, config)).find_first(Option::is_some)?
    }
    #[cfg(not(feature = "parallel"))]
    {
        starts.into_iter().map(|s| ascend(problem, s, config)).find(Option::is_some)?
    }
}

/// Sampling first, then gradient ascent.
pub fn attack(problem: &VerificationProblem, config: &AttackConfig) -> Option<Vec<f64>> {
    random_attack(problem, config).or_else(|| pgd_attack(problem, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_vnnlib;
    use crate::network::test_util::sample_box;
    use crate::network::Network;

    fn example_net_json() -> &'static str {
        include_str!("../tests/fixtures/papernet.json")
    }

    fn problem(vnnlib: &str) -> VerificationProblem {
        let net: Network = crate::io::parse_network(example_net_json()).unwrap();
        parse_vnnlib(vnnlib, &net).unwrap()
    }

    #[test]
    fn sampling_cracks_an_everywhere_false_property() {
        // Every boxed input violates this property (the output never
        // exceeds -0.5), so the very first sample wins.
        let p = problem(include_str!("../tests/fixtures/invalid.vnnlib"));
        let x = random_attack(&p, &AttackConfig::default()).expect("witness");
        assert!(p.validate_witness(&x));
    }

    #[test]
    fn attacks_cannot_break_a_true_property() {
        let p = problem(include_str!("../tests/fixtures/valid.vnnlib"));
        let cfg = AttackConfig::default();
        assert_eq!(random_attack(&p, &cfg), None);
        assert_eq!(pgd_attack(&p, &cfg), None);
        assert_eq!(attack(&p, &cfg), None);
    }

    #[test]
    fn ascent_reaches_a_thin_violation_region() {
        // Only outputs below -3.409 qualify; the box minimum is -3.5 at
        // the corner (-1, 2), and the qualifying sliver around it covers
        // well under a percent of the box. Random sampling misses it on a
        // small budget, but the gradient points straight at it.
        let text = r#"
(declare-const X_0 Real)
(declare-const X_1 Real)
(declare-const Y_0 Real)
(assert (<= X_0 1.0))
(assert (>= X_0 -1.0))
(assert (<= X_1 2.0))
(assert (>= X_1 -2.0))
(assert (<= Y_0 -3.409))
"#;
        let p = problem(text);
        let mut cfg = AttackConfig { samples: 10, ..AttackConfig::default() };
        assert_eq!(random_attack(&p, &cfg), None, "region too thin for 10 samples");
        let x = pgd_attack(&p, &cfg).expect("ascent finds the corner");
        assert!(p.validate_witness(&x));
        let out = p.net.forward(&x).unwrap().outputs[0];
        assert!(out <= -3.409, "output {out}");
        // And the combined attack also succeeds with the tiny budget.
        cfg.samples = 10;
        assert!(attack(&p, &cfg).is_some());
    }

    #[test]
    fn attacks_are_deterministic_per_seed() {
        let p = problem(include_str!("../tests/fixtures/invalid.vnnlib"));
        let cfg = AttackConfig::default();
        let a = attack(&p, &cfg);
        let b = attack(&p, &cfg);
        assert_eq!(a, b);
        let other = attack(&p, &AttackConfig { seed: 7, ..AttackConfig::default() });
        assert!(other.is_some());
    }

    /// Margins computed on random nets agree with the exact
    /// satisfied-disjunct test wherever the margin is not on the boundary.
    #[test]
    fn margin_sign_matches_exact_validation() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        let p = problem(include_str!("../tests/fixtures/two_disjunct.vnnlib"));
        for _ in 0..500 {
            let x = sample_box(&mut rng, &p.input_box);
            let outputs = p.net.forward(&x).unwrap().outputs;
            let margin = violation_margin(&p, &outputs);
            if margin.abs() < 1e-9 {
                continue;
            }
            assert_eq!(margin > 0.0, p.validate_witness(&x), "margin {margin} at {x:?}");
        }
    }
}
