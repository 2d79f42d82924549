//! End-to-end acceptance suite.
//!
//! Each test covers one acceptance criterion and prints one pass line when
//! its assertions hold; a failed assertion fails the test, so the pass and
//! fail states mirror the criterion states one to one.

use std::collections::BTreeSet;

use corelab::auction::{
    run_auction, run_auction_all_branches, StepKind, StepThreePolicy, DEFAULT_BRANCH_CAP,
};
use corelab::gen::{random_market, random_market_rich_budgets, GenLimits};
use corelab::hardness::{
    assignment_from_independent_set, rule_assignment, verify_reduction, CubicGraph, EdgeBuyer,
    EdgeGood, GadgetMarket,
};
use corelab::market::{GoodSet, Market, PriceVector, Utility};
use corelab::rational::{rat, ratio};
use corelab::solver::milp::{certify_outcome, indicator_case_holds};
use corelab::solver::{
    assignment_optimum, brute_force_oracle, enumerate_core_outcomes, solve_welfare_max_core,
    OracleOptions, SolveOptions,
};
use corelab::strategy::{
    general_position_check, misreport_experiment, GenPosOptions, GenPosVerdict, MechanismKind,
};

fn squeeze_market() -> Market {
    Market::without_reserves(
        vec![vec![10, 0], vec![0, 10], vec![10, 10]],
        vec![1, 2, 10],
    )
    .unwrap()
}

fn tied_market() -> Market {
    Market::without_reserves(vec![vec![10, 0], vec![0, 11], vec![5, 3]], vec![3, 1, 10]).unwrap()
}

fn small_market() -> Market {
    Market::without_reserves(vec![vec![6], vec![10]], vec![1, 1]).unwrap()
}

fn goods(list: &[usize]) -> GoodSet {
    list.iter().copied().collect()
}

#[test]
fn criterion_01_squeeze_trace() {
    let market = squeeze_market();
    let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
    let rows = &run.trace.rows;
    assert_eq!(rows.len(), 4);

    let prices: Vec<&[i64]> = rows.iter().map(|r| r.prices.as_slice()).collect();
    assert_eq!(prices, vec![&[0, 0], &[1, 1], &[2, 2], &[1, 1]]);
    let steps: Vec<StepKind> = rows.iter().map(|r| r.step).collect();
    assert_eq!(
        steps,
        vec![StepKind::Raise, StepKind::Raise, StepKind::Rollback, StepKind::Clear]
    );

    assert_eq!(rows[0].demands, vec![goods(&[1]), goods(&[2]), goods(&[1, 2])]);
    assert_eq!(rows[1].demands, rows[0].demands);
    assert_eq!(rows[2].demands, vec![goods(&[0]), goods(&[2]), goods(&[1, 2])]);
    assert_eq!(rows[3].demands, rows[2].demands);

    let full = market.full_good_set();
    for row in &rows[..3] {
        assert!(row.restrictions.iter().all(|r| *r == full));
    }
    assert_eq!(
        rows[3].restrictions,
        vec![goods(&[0, 2]), full.clone(), full.clone()]
    );

    assert_eq!(rows[0].overdemanded, goods(&[1, 2]));
    assert_eq!(rows[1].overdemanded, goods(&[1, 2]));
    assert_eq!(rows[2].overdemanded, goods(&[]));
    assert_eq!(rows[2].conflict, BTreeSet::from([0]));
    let rollback = rows[2].rollback.as_ref().unwrap();
    assert_eq!(rollback.bidder, 0);
    assert_eq!(rollback.removed, goods(&[1]));

    assert_eq!(run.outcome.assignment.slots(), &[0, 2, 1]);
    assert_eq!(run.outcome.prices, PriceVector::from_integers(&[1, 1]).unwrap());
    assert!(run.certificate);
    assert!(market.is_core(&run.outcome));
    println!("criterion 01 (squeeze trace): pass");
}

#[test]
fn criterion_02_branching_outcomes() {
    let market = tied_market();
    let branches = run_auction_all_branches(&market, DEFAULT_BRANCH_CAP).unwrap();
    assert_eq!(branches.outcomes.len(), 2);
    let expected_prices = PriceVector::from_integers(&[3, 1]).unwrap();
    let mut welfares = Vec::new();
    for outcome in &branches.outcomes {
        assert_eq!(outcome.prices, expected_prices);
        assert!(market.is_core(outcome));
        welfares.push(market.welfare(&outcome.assignment));
    }
    welfares.sort();
    assert_eq!(welfares, vec![13, 16]);

    let report = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
    assert_eq!(report.welfare, 16);
    println!("criterion 02 (branching outcomes): pass");
}

#[test]
fn criterion_03_two_outcome_market() {
    let market = small_market();
    let outcomes = enumerate_core_outcomes(&market, &OracleOptions::default()).unwrap();
    assert_eq!(outcomes.len(), 2);
    let mut welfares: Vec<i64> = outcomes
        .iter()
        .map(|o| market.welfare(&o.assignment))
        .collect();
    welfares.sort();
    assert_eq!(welfares, vec![6, 10]);

    let report = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
    assert_eq!(report.welfare, 10);
    assert_eq!(report.outcome.prices.get(1), rat(1));
    println!("criterion 03 (two-outcome market): pass");
}

#[test]
fn criterion_04_solver_matches_oracle() {
    let limits = GenLimits::default();
    for seed in 0..200 {
        let market = random_market(seed, &limits);
        let solved = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
        let oracle = brute_force_oracle(&market, &OracleOptions::default()).unwrap();
        assert_eq!(
            solved.welfare, oracle.welfare,
            "seed {seed}: solver and oracle disagree"
        );
    }
    println!("criterion 04 (solver matches oracle, 200 seeds): pass");
}

#[test]
fn criterion_05_auction_soundness() {
    let limits = GenLimits {
        max_bidders: 6,
        max_goods: 5,
        max_value: 8,
        max_budget: 8,
        max_reserve: 0,
    };
    for seed in 0..500 {
        let market = random_market(seed, &limits);
        let run = run_auction(&market, &StepThreePolicy::FirstIndex)
            .unwrap_or_else(|e| panic!("seed {seed}: auction failed: {e}"));
        assert!(market.is_core(&run.outcome), "seed {seed}: outcome not stable");
    }
    println!("criterion 05 (auction soundness, 500 seeds): pass");
}

fn utility_ge(a: &Utility, b: &Utility) -> bool {
    a >= b
}

#[test]
fn criterion_06_branch_reachability() {
    let limits = GenLimits::default();
    let mut outcomes_checked = 0u64;
    for seed in 0..200 {
        let market = random_market(seed, &limits);
        let targets = enumerate_core_outcomes(&market, &OracleOptions::default()).unwrap();
        let branches = run_auction_all_branches(&market, DEFAULT_BRANCH_CAP).unwrap();
        for target in &targets {
            outcomes_checked += 1;
            let dominated = branches.outcomes.iter().any(|reached| {
                let prices_below = (1..=market.n_goods())
                    .all(|j| reached.prices.get(j) <= target.prices.get(j));
                let utilities_above = (0..market.n_bidders()).all(|i| {
                    utility_ge(
                        &market.utility(i, reached.assignment.good_of(i), &reached.prices),
                        &market.utility(i, target.assignment.good_of(i), &target.prices),
                    )
                });
                prices_below && utilities_above
            });
            assert!(
                dominated,
                "seed {seed}: a stable outcome dominates every auction branch"
            );
        }
    }
    println!(
        "criterion 06 (branch reachability, 200 seeds, {outcomes_checked} stable outcomes): pass"
    );
}

#[test]
fn criterion_07_certificate_and_tie_freedom() {
    let limits = GenLimits::default();
    let genpos_options = GenPosOptions {
        max_walk_edges: 9,
        max_walks: 5_000,
    };
    let mut certified_instances = 0u64;
    let mut confirmed_instances = 0u64;
    let mut singleton_rollbacks = 0u64;
    for seed in 0..200 {
        let market = random_market(seed, &limits);
        let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
        if run.certificate {
            certified_instances += 1;
            let oracle = brute_force_oracle(&market, &OracleOptions::default()).unwrap();
            assert_eq!(
                market.welfare(&run.outcome.assignment),
                oracle.welfare,
                "seed {seed}: clean certificate but suboptimal welfare"
            );
        }
        let genpos = general_position_check(&market, &genpos_options).unwrap();
        if genpos.verdict == GenPosVerdict::Confirmed {
            confirmed_instances += 1;
            for row in &run.trace.rows {
                if row.step == StepKind::Rollback {
                    singleton_rollbacks += 1;
                    let info = row.rollback.as_ref().unwrap();
                    assert_eq!(row.conflict.len(), 1, "seed {seed}: conflict set not a singleton");
                    assert_eq!(info.removed.len(), 1, "seed {seed}: removed set not a singleton");
                }
            }
        }
    }
    assert!(certified_instances > 0);
    assert!(confirmed_instances > 0);
    println!(
        "criterion 07 (clean certificates optimal on {certified_instances} instances; \
         {singleton_rollbacks} singleton rollbacks across {confirmed_instances} tie-free instances): pass"
    );
}

#[test]
fn criterion_08_reduction_verifies() {
    for (graph, k, threshold) in [(CubicGraph::k4(), 1, 1611), (CubicGraph::k33(), 3, 4884)] {
        let report = verify_reduction(&graph, k).unwrap();
        for check in &report.checks {
            assert!(
                check.passed,
                "{} vertices: failed {} ({})",
                report.n_vertices, check.name, check.detail
            );
        }
        assert_eq!(report.threshold, threshold);
        let gm = GadgetMarket::new(graph);
        for set in gm.graph().maximal_independent_sets().unwrap() {
            let outcome = assignment_from_independent_set(&gm, &set).unwrap();
            let v = gm.graph().n_vertices() as i64;
            let e = gm.graph().n_edges() as i64;
            assert_eq!(
                gm.market().gains_from_trade(&outcome.assignment),
                v * (3 * v + 26) + set.len() as i64 + e * (6 * e * e + 27)
            );
        }
    }
    println!("criterion 08 (reduction verifies on both fixture graphs): pass");
}

#[test]
fn criterion_09_gadget_payoff_spot_checks() {
    let gm = GadgetMarket::new(CubicGraph::k4());
    let market = gm.market();
    assert_eq!(gm.graph().n_edges(), 6);

    // Edge 0 joins vertices 0 and 1. A set containing the lower endpoint
    // puts the edge in its first pattern; a set containing neither puts it
    // in the second.
    let first = rule_assignment(&gm, &BTreeSet::from([0]));
    let second = rule_assignment(&gm, &BTreeSet::from([2]));
    let beta = gm.edge_buyer(0, EdgeBuyer::Beta);
    let gamma = gm.edge_buyer(0, EdgeBuyer::Gamma);
    let delta = gm.edge_buyer(0, EdgeBuyer::Delta);
    let payoff = |a: &corelab::Assignment, i: usize| {
        market.value(i, a.good_of(i)) - market.budget(i)
    };

    assert_eq!(first.good_of(beta), gm.edge_good(0, EdgeGood::Eta));
    assert_eq!(payoff(&first, beta), 75);
    assert_eq!(payoff(&first, gamma), 78);

    assert_eq!(second.good_of(delta), gm.edge_good(0, EdgeGood::Eta));
    assert_eq!(payoff(&second, delta), 81);
    let high = gm.edge_good(0, EdgeGood::GateHigh);
    let holder = second.bidder_of(high).unwrap();
    assert_eq!(market.budget(holder) - market.reserve(high), 8);
    println!("criterion 09 (gadget payoff spot checks at six edges): pass");
}

#[test]
fn criterion_10_misreport_gains() {
    let market = corelab::strategy::squeeze_out_market();
    for mechanism in [MechanismKind::Auction, MechanismKind::Solver] {
        let report = misreport_experiment(&market, mechanism, 2).unwrap();
        assert_eq!(report.truthful_utility, Utility::Finite(rat(0)));
        assert_eq!(report.reported_budget, 2);
        assert_eq!(report.true_utility, Utility::Finite(rat(9)));
        let expected = PriceVector::from_integers(&[1, 1]).unwrap();
        assert_eq!(report.truthful.prices, expected);
        assert_eq!(report.adjusted.prices, expected);
    }
    println!("criterion 10 (left-out bidder gains 9 under both mechanisms): pass");
}

#[test]
fn criterion_11_rich_budgets_degenerate() {
    let limits = GenLimits::default();
    for seed in 0..100 {
        let market = random_market_rich_budgets(seed, &limits);
        let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
        let optimum = assignment_optimum(&market).unwrap();
        assert_eq!(
            market.welfare(&run.outcome.assignment),
            optimum,
            "seed {seed}: auction welfare below the matching optimum"
        );
        assert!(
            market.is_competitive_equilibrium(&run.outcome),
            "seed {seed}: outcome not an equilibrium"
        );
    }
    println!("criterion 11 (rich budgets reach the matching optimum, 100 seeds): pass");
}

#[test]
fn criterion_12_solve_outcomes_certify() {
    let epsilon = ratio(1, 2);
    for (alpha, beta, y) in [
        (false, false, false),
        (false, true, false),
        (true, false, false),
        (true, true, false),
        (false, true, true),
        (true, false, true),
        (true, true, true),
    ] {
        assert!(indicator_case_holds(alpha, beta, y, &epsilon));
    }
    assert!(!indicator_case_holds(false, false, true, &epsilon));

    let mut certified = 0u64;
    let limits = GenLimits::default();
    let mut markets: Vec<Market> = (0..200).map(|seed| random_market(seed, &limits)).collect();
    markets.push(squeeze_market());
    markets.push(tied_market());
    markets.push(small_market());
    for (idx, market) in markets.iter().enumerate() {
        let report = solve_welfare_max_core(market, &SolveOptions::default()).unwrap();
        let certificate = certify_outcome(market, &report.outcome, &epsilon).unwrap();
        assert!(
            certificate.satisfied,
            "market {idx}: solve outcome failed certification: {:?}",
            certificate.violations
        );
        certified += 1;
    }
    println!("criterion 12 ({certified} solve outcomes certified at epsilon 1/2): pass");
}
