//! Strategic analysis: a bounded general-position checker and a budget
//! misreport experiment.
//!
//! The auction's clean-termination guarantee (every conflict set a
//! singleton) holds on markets in general position, a no-ties condition
//! over alternating walks in the bidder-good graph. The checker here
//! enumerates walks breadth-first under caps and reports a verdict with a
//! witness when the condition fails.
//!
//! The misreport experiment demonstrates that stable mechanisms reward
//! budget inflation: on a market whose stable outcomes must leave one
//! bidder empty-handed, the bidder a mechanism leaves out can misreport a
//! higher budget and come away strictly better off at prices it can truly
//! afford.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::auction::{run_auction, StepThreePolicy};
use crate::error::{Error, Result};
use crate::market::{good_label, Market, Outcome, Utility};
use crate::solver::{solve_welfare_max_core, SolveOptions};

/// Edge-count cap per walk; nine covers four forward-backward hops plus
/// the closing edge.
pub const DEFAULT_MAX_WALK_EDGES: usize = 9;

/// Cap on completed walks across the whole check.
pub const DEFAULT_MAX_WALKS: u64 = 250_000;

#[derive(Clone, Debug)]
pub struct GenPosOptions {
    pub max_walk_edges: usize,
    pub max_walks: u64,
}

impl Default for GenPosOptions {
    fn default() -> Self {
        GenPosOptions {
            max_walk_edges: DEFAULT_MAX_WALK_EDGES,
            max_walks: DEFAULT_MAX_WALKS,
        }
    }
}

/// The closing edge of a walk, which also identifies it for tie purposes:
/// two equal-weight walks from one start bidder tie only when their
/// closing edges differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WalkClose {
    /// Bidder exits toward a good at its maximum price, weight `b - v`.
    MaxPrice { bidder: usize, good: usize },
    /// Bidder exits to the null good, weight zero.
    Terminal { bidder: usize },
}

/// An alternating walk: a start bidder, forward-backward hops each
/// recorded as the good stepped through and the bidder stepped back to,
/// and a closing edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub start: usize,
    pub hops: Vec<(usize, usize)>,
    pub close: WalkClose,
    pub weight: i64,
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (good, bidder) in &self.hops {
            write!(f, " -f-> {} -b-> {}", good_label(*good), bidder)?;
        }
        match self.close {
            WalkClose::MaxPrice { good, .. } => write!(f, " -m-> {}", good_label(good))?,
            WalkClose::Terminal { .. } => write!(f, " -t-> 0")?,
        }
        write!(f, " [{}]", self.weight)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenPosVerdict {
    /// Every walk within the caps was enumerated and no tie exists.
    Confirmed,
    /// Two equal-weight walks with distinct closing edges were found.
    Violated,
    /// A cap was hit before the frontier was exhausted.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct GenPosReport {
    pub verdict: GenPosVerdict,
    pub witness: Option<(Walk, Walk)>,
    pub walks_enumerated: u64,
    pub frontier_exhausted: bool,
}

/// Enumerates alternating walks breadth-first from every start bidder.
///
/// A walk alternates forward and backward edges over real goods, never
/// immediately retracing the edge it arrived by, and closes with a
/// maximum-price edge toward any good or a terminal edge to the null
/// good. Forward edges weigh `-v`, backward edges `+v`, the closing edge
/// `b - v` or zero. The condition holds when no two walks from one start
/// bidder carry equal weight into distinct closing edges.
///
/// Markets with two or more bidders and goods admit arbitrarily long
/// walks, so the check is bounded: `Confirmed` is only returned when the
/// frontier exhausts below the caps, which happens for single-bidder or
/// single-good markets.
pub fn general_position_check(market: &Market, options: &GenPosOptions) -> Result<GenPosReport> {
    if options.max_walk_edges == 0 {
        return Err(Error::invalid("walk cap must allow at least one edge"));
    }
    let n = market.n_bidders();
    let m = market.n_goods();
    let mut walks_enumerated = 0u64;

    struct Partial {
        bidder: usize,
        banned_good: Option<usize>,
        weight: i64,
        edges: usize,
        hops: Vec<(usize, usize)>,
    }

    for start in 0..n {
        let mut queue = VecDeque::new();
        queue.push_back(Partial {
            bidder: start,
            banned_good: None,
            weight: 0,
            edges: 0,
            hops: Vec::new(),
        });
        let mut seen: HashMap<i64, Walk> = HashMap::new();
        while let Some(partial) = queue.pop_front() {
            let mut closes = vec![(WalkClose::Terminal { bidder: partial.bidder }, 0i64)];
            for good in 1..=m {
                closes.push((
                    WalkClose::MaxPrice {
                        bidder: partial.bidder,
                        good,
                    },
                    market.budget(partial.bidder) - market.value(partial.bidder, good),
                ));
            }
            for (close, delta) in closes {
                if walks_enumerated >= options.max_walks {
                    return Ok(GenPosReport {
                        verdict: GenPosVerdict::Inconclusive,
                        witness: None,
                        walks_enumerated,
                        frontier_exhausted: false,
                    });
                }
                walks_enumerated += 1;
                let walk = Walk {
                    start,
                    hops: partial.hops.clone(),
                    close,
                    weight: partial.weight + delta,
                };
                match seen.get(&walk.weight) {
                    Some(prior) if prior.close != walk.close => {
                        return Ok(GenPosReport {
                            verdict: GenPosVerdict::Violated,
                            witness: Some((prior.clone(), walk)),
                            walks_enumerated,
                            frontier_exhausted: false,
                        });
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(walk.weight, walk);
                    }
                }
            }
            if partial.edges + 3 > options.max_walk_edges {
                continue;
            }
            for good in 1..=m {
                if partial.banned_good == Some(good) {
                    continue;
                }
                for next in 0..n {
                    if next == partial.bidder {
                        continue;
                    }
                    let mut hops = partial.hops.clone();
                    hops.push((good, next));
                    queue.push_back(Partial {
                        bidder: next,
                        banned_good: Some(good),
                        weight: partial.weight - market.value(partial.bidder, good)
                            + market.value(next, good),
                        edges: partial.edges + 2,
                        hops,
                    });
                }
            }
        }
    }
    Ok(GenPosReport {
        verdict: GenPosVerdict::Confirmed,
        witness: None,
        walks_enumerated,
        frontier_exhausted: true,
    })
}

/// The mechanism under study in the misreport experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MechanismKind {
    /// The ascending auction with the first-index conflict policy.
    Auction,
    /// The exact welfare-maximizing stable solver.
    Solver,
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismKind::Auction => write!(f, "auction"),
            MechanismKind::Solver => write!(f, "solver"),
        }
    }
}

/// What happened when the left-out bidder inflated its reported budget.
#[derive(Clone, Debug)]
pub struct MisreportReport {
    pub mechanism: MechanismKind,
    pub truthful: Outcome,
    /// The first bidder the truthful run leaves on the null good.
    pub loser: usize,
    pub truthful_utility: Utility,
    pub reported_budget: i64,
    pub adjusted: Outcome,
    /// The loser's good in the adjusted run, 0 when still left out.
    pub assigned_good: usize,
    /// Valued at the true valuations and the true budget.
    pub true_utility: Utility,
}

/// Runs a mechanism truthfully, finds the bidder it leaves out, reruns
/// with that bidder's budget misreported as `reported_budget`, and values
/// the result at the bidder's true preferences.
///
/// Both runs must produce outcomes stable for the market they saw; a
/// mechanism that fails that contract is reported as an error rather than
/// a strategic finding.
pub fn misreport_experiment(
    market: &Market,
    mechanism: MechanismKind,
    reported_budget: i64,
) -> Result<MisreportReport> {
    let truthful = run_mechanism(market, mechanism)?;
    if !market.is_core(&truthful) {
        return Err(Error::MechanismContract(format!(
            "{mechanism} produced an unstable outcome on the truthful market"
        )));
    }
    let loser = (0..market.n_bidders())
        .find(|&i| truthful.assignment.good_of(i) == 0)
        .ok_or_else(|| Error::invalid("every bidder is assigned; no bidder to study"))?;
    let truthful_utility = market.utility(loser, 0, &truthful.prices);

    let mut budgets = market.budgets().to_vec();
    budgets[loser] = reported_budget;
    let values = (0..market.n_bidders())
        .map(|i| {
            (1..=market.n_goods())
                .map(|j| market.value(i, j))
                .collect()
        })
        .collect();
    let reported = Market::new(values, budgets, market.reserves().to_vec())?;

    let adjusted = run_mechanism(&reported, mechanism)?;
    if !reported.is_core(&adjusted) {
        return Err(Error::MechanismContract(format!(
            "{mechanism} produced an unstable outcome on the reported market"
        )));
    }
    let assigned_good = adjusted.assignment.good_of(loser);
    let true_utility = market.utility(loser, assigned_good, &adjusted.prices);
    Ok(MisreportReport {
        mechanism,
        truthful,
        loser,
        truthful_utility,
        reported_budget,
        adjusted,
        assigned_good,
        true_utility,
    })
}

fn run_mechanism(market: &Market, mechanism: MechanismKind) -> Result<Outcome> {
    match mechanism {
        MechanismKind::Auction => {
            Ok(run_auction(market, &StepThreePolicy::FirstIndex)?.outcome)
        }
        MechanismKind::Solver => {
            Ok(solve_welfare_max_core(market, &SolveOptions::default())?.outcome)
        }
    }
}

/// Three bidders, two goods, all values ten, all budgets one: every
/// stable outcome leaves one bidder out at prices (1, 1).
pub fn squeeze_out_market() -> Market {
    Market::without_reserves(vec![vec![10, 10], vec![10, 10], vec![10, 10]], vec![1, 1, 1])
        .expect("fixture data is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn equal_budgets_are_a_tie_violation() {
        let market =
            Market::without_reserves(vec![vec![3], vec![5]], vec![2, 2]).unwrap();
        let report = general_position_check(&market, &GenPosOptions::default()).unwrap();
        assert_eq!(report.verdict, GenPosVerdict::Violated);
        let (first, second) = report.witness.unwrap();
        assert_eq!(first.weight, second.weight);
        assert_ne!(first.close, second.close);
        // The shorter walk closes straight at the good's maximum price;
        // the longer one hops through the other bidder first.
        assert_eq!(first.to_string(), "0 -m-> A [-1]");
        assert_eq!(second.to_string(), "0 -f-> A -b-> 1 -m-> A [-1]");
    }

    #[test]
    fn distinct_weights_confirm_a_single_good_market() {
        let market =
            Market::without_reserves(vec![vec![3], vec![5]], vec![2, 4]).unwrap();
        let report = general_position_check(&market, &GenPosOptions::default()).unwrap();
        assert_eq!(report.verdict, GenPosVerdict::Confirmed);
        assert!(report.frontier_exhausted);
        assert!(report.witness.is_none());
    }

    #[test]
    fn a_single_bidder_market_exhausts_immediately() {
        let market = Market::without_reserves(vec![vec![3, 9]], vec![5]).unwrap();
        let report = general_position_check(&market, &GenPosOptions::default()).unwrap();
        assert_eq!(report.verdict, GenPosVerdict::Confirmed);
        assert_eq!(report.walks_enumerated, 3);
    }

    #[test]
    fn unbounded_walk_families_stay_inconclusive() {
        let market = Market::without_reserves(
            vec![vec![4, 9], vec![2, 7], vec![6, 1]],
            vec![3, 8, 5],
        )
        .unwrap();
        let options = GenPosOptions {
            max_walk_edges: 5,
            max_walks: 5,
        };
        let report = general_position_check(&market, &options).unwrap();
        assert_eq!(report.verdict, GenPosVerdict::Inconclusive);
        assert!(!report.frontier_exhausted);
    }

    #[test]
    fn the_left_out_bidder_gains_by_inflating_its_budget() {
        let market = squeeze_out_market();
        for mechanism in [MechanismKind::Auction, MechanismKind::Solver] {
            let report = misreport_experiment(&market, mechanism, 2).unwrap();
            assert_eq!(report.loser, 0, "{mechanism}");
            assert_eq!(report.truthful_utility, Utility::Finite(rat(0)));
            assert_ne!(report.assigned_good, 0);
            assert_eq!(report.true_utility, Utility::Finite(rat(9)));
            assert_eq!(report.adjusted.prices.as_integers().unwrap(), vec![1, 1]);
            assert_eq!(report.truthful.prices.as_integers().unwrap(), vec![1, 1]);
        }
    }

    #[test]
    fn a_fully_assigned_market_has_no_bidder_to_study() {
        let market = Market::without_reserves(vec![vec![5, 1], vec![1, 5]], vec![9, 9]).unwrap();
        assert!(matches!(
            misreport_experiment(&market, MechanismKind::Solver, 3),
            Err(Error::InvalidInput(_))
        ));
    }
}
