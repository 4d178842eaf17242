//! Acceptance suite: one test per release criterion, each printing a
//! PASS line on success. Every tolerance and budget is pinned here, in
//! code. The suite leans on independent reference oracles (exhaustive
//! pattern enumeration, truth tables, Fourier-Motzkin, sampling) rather
//! than on the implementation's own intermediate results.

mod common;

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use relucheck::attack::AttackConfig;
use relucheck::network::NeuronId;
use relucheck::oracle::{enumerate_verify, generate_random_problem, ShapeSpec};
use relucheck::sat::{
    analyze_conflict, analyze_conflict_steps, bcp, boolean_abstraction, solve_propositional,
    BcpResult, ClauseDb, Lit, Reason, SatResult, Trail, Var, Watches,
};
use relucheck::solver::{
    dpllt_loop, verify, LoopResult, Outcome, SearchMode, SearchStats, SolverConfig,
};
use relucheck::theory::bounds::{propagate, Abstraction};
use relucheck::theory::simplex::{LinearProgram, LpOutcome, FEASIBILITY_TOL};
use relucheck::theory::{deduction, unassigned_map, DeductionResult, TheoryConfig};

/// Numeric tolerance for the pinned deduction values.
const VALUE_TOL: f64 = 1e-9;
/// Slack allowed when checking sampled traces against computed bounds
/// (covers float rounding in two different evaluation orders).
const SAMPLING_SLACK: f64 = 1e-7;
/// Fixture seed under which the reference search trace is reproduced.
const FIXTURE_SEED: u64 = 4;

fn interval_theory() -> TheoryConfig {
    TheoryConfig { abstraction: Abstraction::Interval, ..TheoryConfig::default() }
}

/// Attack budget trimmed for bulk runs; the search settles what the
/// cheap attacks miss.
fn bulk_attack(seed: u64) -> AttackConfig {
    AttackConfig { seed, samples: 200, pgd_restarts: 2, ..AttackConfig::default() }
}

/// Criterion 1: the fixture problem is proven unsat in under 5 seconds,
/// and under the pinned seed the search learns exactly the clause
/// sequence {v4}, {~v4} before terminating on a level-0 conflict.
#[test]
fn criterion_1_worked_example_reproduction() {
    let problem = common::fixture_problem("valid.vnnlib");
    let config = SolverConfig {
        seed: FIXTURE_SEED,
        theory: interval_theory(),
        ..SolverConfig::default()
    };

    // End to end, within the budget.
    let started = Instant::now();
    let verdict = verify(&problem, &config);
    assert!(started.elapsed() < Duration::from_secs(5), "budget exceeded");
    assert!(matches!(verdict.outcome, Outcome::Unsat), "expected unsat: {:?}", verdict.outcome);

    // Same search driven directly so the clause database is observable.
    let (vars, mut db) = boolean_abstraction(&problem.net);
    let mut stats = SearchStats::default();
    let result = dpllt_loop(
        &problem.net,
        &problem.input_box,
        &problem.negated_output[0],
        &vars,
        &mut db,
        &config,
        Instant::now() + Duration::from_secs(5),
        &mut stats,
    );
    assert!(matches!(result, LoopResult::Unsat), "expected unsat: {result:?}");

    let v4 = Var::new(1); // second hidden neuron of the first layer
    let learned: Vec<Vec<Lit>> = db.learned().map(|c| c.lits().to_vec()).collect();
    assert_eq!(
        learned,
        vec![vec![v4.positive()], vec![v4.negative()]],
        "learned sequence must be exactly {{v4}}, {{~v4}}"
    );
    // With one decision, two learned clauses, and four loop passes, the
    // only consistent trace ends in a conflict handled at level 0: the
    // first conflict learns {v4} and backjumps to the root, propagation
    // re-enters with v4 forced, and the second conflict is terminal.
    assert_eq!(
        (stats.iterations, stats.decisions, stats.learned_clauses, stats.restarts),
        (4, 1, 2, 0),
        "reference trace counters"
    );
    println!("criterion 1 (worked-example reproduction): PASS");
}

/// Criterion 2: pinned bound and tightening values on the fixture
/// network in interval mode, tolerance 1e-9, and the infeasibility of
/// the fully active pattern.
#[test]
fn criterion_2_deduction_unit_values() {
    let problem = common::fixture_problem("valid.vnnlib");
    let net = &problem.net;
    let bx = &problem.input_box;
    let demand = &problem.negated_output[0];
    let cfg = interval_theory();
    let close = |got: f64, want: f64| (got - want).abs() <= VALUE_TOL;

    // Nothing assigned: the output interval tops out at exactly 1.
    let b = propagate(net, bx, &unassigned_map(net), Abstraction::Interval);
    assert!(close(b.output[0].1, 1.0), "got {}", b.output[0].1);

    // Second unit inactive: the output tops out at -1, so the demand
    // "output >= 0" is refuted outright.
    let status = vec![vec![None, Some(false)]];
    let b = propagate(net, bx, &status, Abstraction::Interval);
    assert!(close(b.output[0].1, -1.0), "got {}", b.output[0].1);
    assert_eq!(deduction(net, bx, &status, demand, &cfg), DeductionResult::Conflict);

    // Second unit active: the box tightens to [-1,1] x [0,2], the first
    // unit's pre-activation becomes [0.5, 2.5], and the output tops out
    // at 0.5.
    let status = vec![vec![None, Some(true)]];
    let r = deduction(net, bx, &status, demand, &cfg);
    let DeductionResult::Feasible(d) = r else { panic!("expected feasible, got {r:?}") };
    let want_box = [(-1.0, 1.0), (0.0, 2.0)];
    for ((glo, ghi), (wlo, whi)) in d.tightened_box.iter().zip(want_box) {
        assert!(close(*glo, wlo) && close(*ghi, whi), "tightened box {:?}", d.tightened_box);
    }
    let (zlo, zhi) = d.bounds.pre[0][0];
    assert!(close(zlo, 0.5) && close(zhi, 2.5), "first unit pre-bounds [{zlo}, {zhi}]");
    assert!(close(d.bounds.output[0].1, 0.5), "got {}", d.bounds.output[0].1);

    // Both units active: the linear system with the demand is
    // infeasible, so the deduction reports a conflict.
    let status = vec![vec![Some(true), Some(true)]];
    assert_eq!(deduction(net, bx, &status, demand, &cfg), DeductionResult::Conflict);
    println!("criterion 2 (deduction unit values): PASS");
}

/// Criterion 3: the classic implication-graph fixture yields the learned
/// clause {~v1, v5}, backjump level 3, and the exact three-step
/// resolution chain.
#[test]
fn criterion_3_conflict_analysis_fixture() {
    // 1-based naming to match the usual presentation of the example.
    let v = |i: usize| Var::new(i - 1);
    let mut db = ClauseDb::new();
    let c1 = db.add_initial(vec![v(1).negative(), v(2).positive()]);
    let c2 = db.add_initial(vec![v(1).negative(), v(3).positive(), v(5).positive()]);
    let c3 = db.add_initial(vec![v(2).negative(), v(4).positive()]);
    let c4 = db.add_initial(vec![v(3).negative(), v(4).negative()]);

    let mut trail = Trail::new(9);
    trail.decide(Var::new(5).positive()); // filler levels 1, 2
    trail.decide(Var::new(6).positive());
    trail.decide(v(5).negative()); // ~v5 at level 3
    trail.decide(Var::new(7).positive()); // filler levels 4, 5
    trail.decide(Var::new(8).positive());
    trail.decide(v(1).positive()); // v1 at level 6
    trail.assign(v(2).positive(), Reason::Propagated(c1));
    trail.assign(v(4).positive(), Reason::Propagated(c3));
    trail.assign(v(3).positive(), Reason::Propagated(c2));

    let conflicting = db.clause(c4).clone();
    let (learned, backjump, steps) = analyze_conflict_steps(&trail, &db, &conflicting);
    assert_eq!(learned.lits(), &[v(1).negative(), v(5).positive()]);
    assert_eq!(backjump, 3);

    let sorted = |lits: &[Lit]| {
        let mut s = lits.to_vec();
        s.sort_unstable();
        s
    };
    let chain: Vec<Vec<Lit>> = steps.iter().map(|c| sorted(c.lits())).collect();
    assert_eq!(
        chain,
        vec![
            sorted(&[v(4).negative(), v(1).negative(), v(5).positive()]),
            sorted(&[v(1).negative(), v(5).positive(), v(2).negative()]),
            sorted(&[v(1).negative(), v(5).positive()]),
        ],
        "resolution chain"
    );
    println!("criterion 3 (conflict-analysis fixture): PASS");
}

/// Criterion 4: on 200 seeded random problems (at most 12 hidden
/// neurons) the search verdict equals the enumeration oracle's verdict
/// on every instance, with the whole sweep under 10 minutes.
#[test]
fn criterion_4_oracle_equivalence_on_random_problems() {
    let started = Instant::now();
    let shape = ShapeSpec::default();
    let mut sat_seen = 0u32;
    let mut unsat_seen = 0u32;
    for seed in 0..200 {
        let problem = generate_random_problem(&shape, seed);
        let expected = enumerate_verify(&problem).expect("within the enumeration cap");
        let config = SolverConfig { seed, attack: bulk_attack(seed), ..SolverConfig::default() };
        let got = verify(&problem, &config);
        match (&expected.outcome, &got.outcome) {
            (Outcome::Unsat, Outcome::Unsat) => unsat_seen += 1,
            (Outcome::Sat(reference), Outcome::Sat(x)) => {
                assert!(problem.validate_witness(x), "seed {seed}: witness fails validation");
                assert!(problem.validate_witness(reference), "seed {seed}: oracle witness");
                sat_seen += 1;
            }
            (want, got) => {
                panic!("seed {seed}: verdicts disagree: oracle {want:?} vs search {got:?}")
            }
        }
    }
    assert_eq!(sat_seen + unsat_seen, 200);
    assert!(sat_seen >= 40 && unsat_seen >= 40, "degenerate corpus: {sat_seen} sat");
    assert!(started.elapsed() < Duration::from_secs(600), "sweep exceeded 10 minutes");
    println!(
        "criterion 4 (oracle equivalence, 200 instances, {sat_seen} sat / {unsat_seen} unsat): PASS"
    );
}

/// Criterion 5: the falsifiable fixture property is answered sat by the
/// attack fast path (zero search iterations) in under a second, with a
/// strictly validated witness.
#[test]
fn criterion_5_falsification_fast_path() {
    let problem = common::fixture_problem("invalid.vnnlib");
    let verdict = verify(&problem, &SolverConfig::default());
    let Outcome::Sat(x) = &verdict.outcome else {
        panic!("expected sat, got {:?}", verdict.outcome)
    };
    assert!(problem.validate_witness(x), "witness must validate exactly");
    assert_eq!(verdict.stats.iterations, 0, "the attack must answer before any search");
    assert!(verdict.stats.wall_time < 1.0, "took {} s", verdict.stats.wall_time);
    println!("criterion 5 (falsification fast path): PASS");
}

/// Criterion 6: clause learning pays off. Over the random corpus, on
/// proven-unsat instances needing at least 10 decisions, the median
/// decision count with learning is no larger than without; and within a
/// 10-second per-instance budget the learning solver settles a superset
/// of the instances the non-learning solver settles.
#[test]
fn criterion_6_clause_learning_ablation() {
    let shape = ShapeSpec::default();
    let budget = Duration::from_secs(10);
    let mut with_learning = Vec::new();
    let mut without_learning = Vec::new();
    for seed in 0..200 {
        let problem = generate_random_problem(&shape, seed);
        let run = |mode: SearchMode| {
            let config = SolverConfig {
                seed,
                timeout: budget,
                mode,
                attack: bulk_attack(seed),
                ..SolverConfig::default()
            };
            verify(&problem, &config)
        };
        let full = run(SearchMode::Full);
        let nolearn = run(SearchMode::NoLearning);

        if let Outcome::Sat(x) = &full.outcome {
            assert!(problem.validate_witness(x), "seed {seed}: witness fails validation");
        }
        if let Outcome::Sat(x) = &nolearn.outcome {
            assert!(problem.validate_witness(x), "seed {seed}: witness fails validation");
        }
        // Superset: anything the chronological solver settles in budget,
        // the learning solver settles too, and they agree.
        if nolearn.outcome.is_definitive() {
            assert!(
                full.outcome.is_definitive(),
                "seed {seed}: learning solver lost an instance ({:?})",
                full.outcome
            );
            assert_eq!(full.outcome.label(), nolearn.outcome.label(), "seed {seed}");
        }
        // The comparison population: proven unsat, nontrivial search.
        if matches!(full.outcome, Outcome::Unsat)
            && full.stats.decisions.max(nolearn.stats.decisions) >= 10
        {
            with_learning.push(full.stats.decisions);
            without_learning.push(nolearn.stats.decisions);
        }
    }
    assert!(
        with_learning.len() >= 5,
        "corpus produced only {} nontrivial unsat instances",
        with_learning.len()
    );
    let med_with = common::median(&with_learning);
    let med_without = common::median(&without_learning);
    assert!(
        med_with <= med_without,
        "median decisions with learning {med_with} vs without {med_without}"
    );
    println!(
        "criterion 6 (clause-learning ablation, {} nontrivial unsat instances, \
         median decisions {med_with} with vs {med_without} without): PASS",
        with_learning.len()
    );
}

/// Criterion 7: five invariant suites, 500 randomized trials each.
#[test]
fn criterion_7_invariant_suites() {
    trail_consistency_suite();
    asserting_clause_suite();
    bcp_fixpoint_suite();
    bound_soundness_suite();
    simplex_tolerance_suite();
    println!("criterion 7 (invariant suites, 5 x 500 trials): PASS");
}

/// Trail bookkeeping stays consistent under random decide / assign /
/// backtrack sequences.
fn trail_consistency_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..500 {
        let num_vars = rng.gen_range(2..12);
        let mut trail = Trail::new(num_vars);
        for _ in 0..rng.gen_range(1..16) {
            let unassigned = trail.unassigned_vars();
            match rng.gen_range(0..3) {
                0 | 1 if !unassigned.is_empty() => {
                    let var = unassigned[rng.gen_range(0..unassigned.len())];
                    let lit = Lit::new(var, rng.gen_bool(0.5));
                    if rng.gen_bool(0.7) {
                        trail.decide(lit);
                    } else {
                        // A stand-in implied assignment at the current level.
                        trail.assign(
                            lit,
                            Reason::Theory(relucheck::sat::Clause::new(
                                vec![lit],
                                relucheck::sat::Origin::Theory,
                            )),
                        );
                    }
                }
                2 if trail.dl() > 0 => {
                    let keep: Vec<_> = trail
                        .entries()
                        .iter()
                        .map(|e| (e.lit, e.level))
                        .collect();
                    let target = rng.gen_range(0..trail.dl());
                    trail.backtrack(target);
                    assert_eq!(trail.dl(), target);
                    // Exactly the prefix at or below the target survives.
                    let expect: Vec<_> =
                        keep.iter().copied().take_while(|&(_, lv)| lv <= target).collect();
                    let got: Vec<_> =
                        trail.entries().iter().map(|e| (e.lit, e.level)).collect();
                    assert_eq!(got, expect, "backtrack must truncate to a level prefix");
                }
                _ => {}
            }
            // Global invariants after every operation.
            let mut seen = std::collections::HashSet::new();
            let mut decisions = 0;
            let mut prev_level = 0;
            for (pos, e) in trail.entries().iter().enumerate() {
                assert!(seen.insert(e.lit.var()), "variable assigned twice");
                assert!(e.level >= prev_level, "levels must be nondecreasing");
                prev_level = e.level;
                decisions += u32::from(matches!(e.reason, Reason::Decision));
                assert_eq!(trail.value(e.lit.var()), Some(e.lit.is_positive()));
                assert_eq!(trail.level_of(e.lit.var()), e.level);
                assert_eq!(trail.position_of(e.lit.var()), pos);
            }
            assert_eq!(trail.dl(), decisions, "dl equals the decision count");
            assert_eq!(trail.unassigned_vars().len(), num_vars - trail.len());
        }
    }
}

/// Every clause learned during real searches is asserting (exactly one
/// literal at the conflict level) and entailed by the input formula.
fn asserting_clause_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let mut analyzed = 0;
    while analyzed < 500 {
        let num_vars = rng.gen_range(3..=10);
        let cnf = common::random_cnf(&mut rng, num_vars);
        let mut db = ClauseDb::new();
        for c in &cnf {
            db.add_initial(c.clone());
        }
        let mut watches = Watches::new(num_vars, &db);
        let mut trail = Trail::new(num_vars);
        loop {
            match bcp(&db, &mut watches, &mut trail) {
                BcpResult::Conflict(cid) => {
                    if trail.dl() == 0 {
                        break;
                    }
                    let conflicting = db.clause(cid).clone();
                    let (learned, backjump) = analyze_conflict(&trail, &db, &conflicting);
                    analyzed += 1;
                    let at_conflict_level = learned
                        .lits()
                        .iter()
                        .filter(|l| trail.level_of(l.var()) == trail.dl())
                        .count();
                    assert_eq!(at_conflict_level, 1, "clause must be asserting: {learned}");
                    assert!(
                        learned.lits().iter().all(|&l| trail.lit_value(l) == Some(false)),
                        "learned clause must be false under the conflicting trail"
                    );
                    assert!(backjump < trail.dl());
                    assert!(
                        common::entailed_by(num_vars, &cnf, learned.lits()),
                        "learned clause must follow from the formula: {learned}"
                    );
                    trail.backtrack(backjump);
                    match db.add_learned(learned.lits().to_vec()) {
                        Some(id) => watches.attach(&db, id),
                        None => {
                            let id = db.find(learned.lits()).expect("duplicate exists");
                            watches.reattach(&db, id);
                        }
                    }
                }
                BcpResult::NoConflict => match trail.unassigned_vars().first() {
                    Some(&v) => trail.decide(Lit::new(v, rng.gen_bool(0.5))),
                    None => break,
                },
            }
        }
    }
}

/// After propagation reports no conflict, no clause is unit or false.
fn bcp_fixpoint_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    for _ in 0..500 {
        let num_vars = rng.gen_range(2..=10);
        let cnf = common::random_cnf(&mut rng, num_vars);
        let mut db = ClauseDb::new();
        for c in &cnf {
            db.add_initial(c.clone());
        }
        let mut watches = Watches::new(num_vars, &db);
        let mut trail = Trail::new(num_vars);
        let mut conflicted = matches!(bcp(&db, &mut watches, &mut trail), BcpResult::Conflict(_));
        for _ in 0..rng.gen_range(0..3) {
            if conflicted {
                break;
            }
            let Some(&v) = trail.unassigned_vars().first() else { break };
            trail.decide(Lit::new(v, rng.gen_bool(0.5)));
            conflicted = matches!(bcp(&db, &mut watches, &mut trail), BcpResult::Conflict(_));
        }
        if conflicted {
            continue;
        }
        for (_, clause) in db.iter() {
            if clause.lits().iter().any(|&l| trail.lit_value(l) == Some(true)) {
                continue;
            }
            let open = clause.lits().iter().filter(|&&l| trail.lit_value(l).is_none()).count();
            assert!(open >= 2, "clause {clause} is unit or false after propagation");
        }
    }
}

/// Computed bounds contain every sampled trace whose activation pattern
/// agrees with the partial assignment, in all three abstraction modes.
fn bound_soundness_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let shape = ShapeSpec::default();
    for trial in 0..500 {
        let problem = generate_random_problem(&shape, 10_000 + trial);
        let net = &problem.net;
        // A satisfiable partial assignment: take a sample's own pattern
        // and forget a random subset of it.
        let seed_point = common::sample_box(&mut rng, &problem.input_box);
        let seed_trace = net.forward(&seed_point).expect("in-box point evaluates");
        let mut status = unassigned_map(net);
        for (k, layer) in status.iter_mut().enumerate() {
            for (i, slot) in layer.iter_mut().enumerate() {
                if rng.gen_bool(0.5) {
                    *slot = Some(seed_trace.is_active(NeuronId { layer: k, index: i }));
                }
            }
        }
        let mode = [Abstraction::Interval, Abstraction::Polytope, Abstraction::Both]
            [trial as usize % 3];
        let b = propagate(net, &problem.input_box, &status, mode);
        let samples = std::iter::once(seed_point.clone())
            .chain((0..30).map(|_| common::sample_box(&mut rng, &problem.input_box)));
        for x in samples {
            let t = net.forward(&x).expect("in-box point evaluates");
            let agrees = status.iter().enumerate().all(|(k, layer)| {
                layer.iter().enumerate().all(|(i, slot)| {
                    slot.is_none_or(|want| t.is_active(NeuronId { layer: k, index: i }) == want)
                })
            });
            if !agrees {
                continue;
            }
            for (k, zs) in t.pre_activations.iter().enumerate() {
                for (i, &z) in zs.iter().enumerate() {
                    let (lo, hi) = b.pre[k][i];
                    assert!(
                        z >= lo - SAMPLING_SLACK && z <= hi + SAMPLING_SLACK,
                        "trial {trial}: pre-activation {z} outside [{lo}, {hi}]"
                    );
                }
            }
            for (i, &y) in t.outputs.iter().enumerate() {
                let (lo, hi) = b.output[i];
                assert!(
                    y >= lo - SAMPLING_SLACK && y <= hi + SAMPLING_SLACK,
                    "trial {trial}: output {y} outside [{lo}, {hi}]"
                );
            }
        }
    }
}

/// Simplex answers agree with Fourier-Motzkin on feasibility, and every
/// optimal point satisfies all rows within the feasibility tolerance.
fn simplex_tolerance_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(89);
    let mut infeasible_seen = 0;
    let mut optimal_seen = 0;
    for _ in 0..500 {
        let num_vars = rng.gen_range(1..=3);
        let num_rows = rng.gen_range(1..=6);
        let rows: Vec<(Vec<f64>, f64)> = (0..num_rows)
            .map(|_| {
                let coeffs: Vec<f64> =
                    (0..num_vars).map(|_| rng.gen_range(-3..=3) as f64).collect();
                (coeffs, rng.gen_range(-4..=4) as f64)
            })
            .collect();
        let mut lp = LinearProgram::new(num_vars);
        for (coeffs, rhs) in &rows {
            lp.add_upper(coeffs, *rhs);
        }
        let expected = common::fourier_motzkin_feasible(&rows, num_vars);
        assert_eq!(lp.feasible_point().is_some(), expected, "system {rows:?}");
        // Optimize over a boxed version so the optimum exists. The box
        // itself can exclude all solutions, so the reference check runs
        // on the boxed system too.
        let mut boxed_rows = rows.clone();
        for v in 0..num_vars {
            let unit = |sign: f64| {
                let mut c = vec![0.0; num_vars];
                c[v] = sign;
                c
            };
            boxed_rows.push((unit(1.0), 10.0));
            boxed_rows.push((unit(-1.0), 10.0));
        }
        let boxed_feasible = common::fourier_motzkin_feasible(&boxed_rows, num_vars);
        let mut bounded = LinearProgram::new(num_vars);
        for v in 0..num_vars {
            bounded.bound_var(v, -10.0, 10.0);
        }
        for (coeffs, rhs) in &rows {
            bounded.add_upper(coeffs, *rhs);
        }
        let objective: Vec<f64> = (0..num_vars).map(|_| rng.gen_range(-3..=3) as f64).collect();
        match bounded.maximize(&objective) {
            LpOutcome::Infeasible => {
                assert!(!boxed_feasible, "simplex misses a solution of {boxed_rows:?}");
                infeasible_seen += 1;
            }
            LpOutcome::Optimal { point, .. } => {
                assert!(boxed_feasible, "simplex found a point in an infeasible system");
                optimal_seen += 1;
                for (coeffs, rhs) in &rows {
                    let lhs: f64 = coeffs.iter().zip(&point).map(|(c, x)| c * x).sum();
                    assert!(
                        lhs <= rhs + FEASIBILITY_TOL,
                        "optimal point violates {coeffs:?} . x <= {rhs}: {lhs}"
                    );
                }
                for &x in &point {
                    assert!((-10.0 - FEASIBILITY_TOL..=10.0 + FEASIBILITY_TOL).contains(&x));
                }
            }
            out => panic!("boxed system must settle as optimal or infeasible, got {out:?}"),
        }
    }
    assert!(infeasible_seen >= 25, "suite too easy: {infeasible_seen} infeasible systems");
    assert!(optimal_seen >= 25, "suite too easy: {optimal_seen} optimized systems");
}

/// Criterion 8: the propositional core agrees with a truth-table oracle
/// on 500 random CNFs of up to 12 variables, and every claimed model
/// satisfies its formula.
#[test]
fn criterion_8_pure_sat_regression() {
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let mut sat_seen = 0u32;
    for round in 0..500u64 {
        let num_vars = rng.gen_range(2..=12);
        let cnf = common::random_cnf(&mut rng, num_vars);
        let expected = common::truth_table_sat(num_vars, &cnf);
        match solve_propositional(num_vars, &cnf, round) {
            SatResult::Sat(model) => {
                assert!(expected, "round {round}: claimed sat on an unsat formula");
                assert!(common::satisfies(&model, &cnf), "round {round}: bad model");
                sat_seen += 1;
            }
            SatResult::Unsat => {
                assert!(!expected, "round {round}: claimed unsat on a sat formula");
            }
        }
    }
    assert!((50..=450).contains(&sat_seen), "degenerate CNF population: {sat_seen} sat");
    println!("criterion 8 (pure-SAT regression, 500 CNFs): PASS");
}
