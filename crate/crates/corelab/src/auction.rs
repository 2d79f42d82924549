//! Ascending-price auction with per-bidder menu restrictions.
//!
//! Prices start at the reserve prices and rise by one on a minimally
//! overdemanded set of goods each round. When a price raise makes some
//! bidder's demand collapse out of the previously raised set, the auction
//! rolls prices back one round, removes the goods that bidder just dropped
//! from its menu, and continues. The auction clears once no set of goods is
//! overdemanded, selling every positively priced good to a bidder that
//! demands it.
//!
//! All prices inside the auction are integers: they start integral and move
//! by unit increments or exact rollbacks. Demand queries still go through
//! the exact rational machinery of [`crate::market`] so that the auction and
//! the solver share one notion of demand.
//!
//! When several bidders' demands collapse in the same round the rollback
//! must pick one of them, and different picks can end in different final
//! outcomes. [`StepThreePolicy`] controls the pick;
//! [`run_auction_all_branches`] explores every pick. A run whose rollback
//! picks were all forced (every conflict set was a singleton) reports
//! `certificate = true`; such a run's outcome is welfare-maximal over all
//! core outcomes of the market.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{good_label, Assignment, GoodSet, Market, Outcome, PriceVector};
use crate::matching::{all_left_saturable, Matcher};

/// Default cap on completed runs explored by [`run_auction_all_branches`].
pub const DEFAULT_BRANCH_CAP: usize = 4096;

// === Pure set predicates and helpers ===

/// True when `set` is a non-empty set of real goods demanded by strictly
/// more bidders than it has members, counting only bidders whose whole
/// demand lies inside `set`.
pub fn is_overdemanded(set: &GoodSet, demands: &[GoodSet]) -> bool {
    if set.is_empty() || set.contains(&0) {
        return false;
    }
    let exclusive = demands.iter().filter(|d| d.is_subset(set)).count();
    exclusive > set.len()
}

/// True when `set` is a non-empty set of real goods, all priced strictly
/// above reserve, that fewer bidders than `|set|` demand at all.
pub fn is_underdemanded(
    set: &GoodSet,
    prices: &[i64],
    reserves: &[i64],
    demands: &[GoodSet],
) -> bool {
    if set.is_empty() || set.contains(&0) {
        return false;
    }
    if set.iter().any(|&j| prices[j - 1] <= reserves[j - 1]) {
        return false;
    }
    let interested = demands.iter().filter(|d| !d.is_disjoint(set)).count();
    interested < set.len()
}

/// True when some subset of `universe` (real goods only) is overdemanded.
///
/// By Hall's theorem this holds exactly when the bidders whose demand lies
/// inside `universe` cannot all be matched to distinct goods of `universe`.
fn has_overdemanded_subset(universe: &GoodSet, demands: &[GoodSet], n_goods: usize) -> bool {
    let adj: Vec<Vec<usize>> = demands
        .iter()
        .filter(|d| d.is_subset(universe))
        .map(|d| d.iter().map(|&j| j - 1).collect())
        .collect();
    !all_left_saturable(&adj, n_goods)
}

/// Finds a minimally overdemanded set of goods, or `None` when no set is
/// overdemanded. Deterministic: repeatedly drops the smallest good whose
/// removal still leaves an overdemanded subset in play.
pub fn minimal_overdemanded_set(demands: &[GoodSet], n_goods: usize) -> Option<GoodSet> {
    let mut universe: GoodSet = (1..=n_goods).collect();
    if !has_overdemanded_subset(&universe, demands, n_goods) {
        return None;
    }
    'shrink: loop {
        for j in universe.clone() {
            let mut candidate = universe.clone();
            candidate.remove(&j);
            if has_overdemanded_subset(&candidate, demands, n_goods) {
                universe = candidate;
                continue 'shrink;
            }
        }
        // No single removal keeps an overdemanded subset around, so the
        // remaining universe is itself overdemanded and minimal.
        return Some(universe);
    }
}

/// Bidders whose previous demand sat entirely inside the previously raised
/// set and lost at least one good after the raise. These are the candidates
/// for a rollback.
pub fn conflict_set(
    prev_demands: Option<&[GoodSet]>,
    cur_demands: &[GoodSet],
    prev_overdemanded: &GoodSet,
) -> BTreeSet<usize> {
    let Some(prev) = prev_demands else {
        return BTreeSet::new();
    };
    prev.iter()
        .enumerate()
        .filter(|(i, d)| {
            d.is_subset(prev_overdemanded) && d.difference(&cur_demands[*i]).next().is_some()
        })
        .map(|(i, _)| i)
        .collect()
}

/// Builds a final assignment from clearing-round demands: every bidder whose
/// demand excludes the dummy good gets a demanded good, every good in
/// `must_sell` finds a buyer, and everyone else takes the dummy good.
///
/// Errors with an internal invariant violation when no such assignment
/// exists; the auction guarantees one does whenever it reaches the clearing
/// step.
pub fn extract_assignment(
    demands: &[GoodSet],
    must_sell: &GoodSet,
    n_goods: usize,
) -> Result<Assignment> {
    let adj: Vec<Vec<usize>> = demands
        .iter()
        .map(|d| d.iter().filter(|&&j| j != 0).map(|&j| j - 1).collect())
        .collect();
    let mut matcher = Matcher::new(adj, n_goods);
    for (i, demand) in demands.iter().enumerate() {
        if !demand.contains(&0) && !matcher.augment_left(i) {
            return Err(Error::internal(format!(
                "clearing failed: bidder {i} demands only real goods but none is free"
            )));
        }
    }
    // Freely priced goods may stay unsold, so covering a must-sell good is
    // allowed to bump a bidder off one of them.
    let mut required = vec![false; n_goods];
    for &j in must_sell {
        required[j - 1] = true;
    }
    for &j in must_sell {
        if matcher.match_right[j - 1].is_none() && !matcher.cover_right(j - 1, &required) {
            return Err(Error::internal(format!(
                "clearing failed: no demander left for positively priced good {}",
                good_label(j)
            )));
        }
    }
    let slots: Vec<usize> = matcher
        .match_left
        .iter()
        .map(|m| m.map_or(0, |r| r + 1))
        .collect();
    debug_assert!(slots
        .iter()
        .zip(demands)
        .all(|(&j, d)| j != 0 || d.contains(&0)));
    Assignment::new(slots, n_goods)
        .map_err(|e| Error::internal(format!("clearing produced an invalid assignment: {e}")))
}

// === Auction driver ===

/// How a rollback round picks one bidder out of a tied conflict set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepThreePolicy {
    /// Always pick the smallest bidder index.
    FirstIndex,
    /// Consume one pre-scripted bidder index (0-based) per rollback round.
    /// Errors if the script runs out or names a bidder outside the conflict
    /// set; leftover entries after clearing are ignored.
    FixedScript(Vec<usize>),
}

/// Stateful chooser built from a [`StepThreePolicy`].
#[derive(Clone, Debug)]
pub struct PolicyDriver {
    policy: StepThreePolicy,
    cursor: usize,
}

impl PolicyDriver {
    pub fn new(policy: StepThreePolicy) -> PolicyDriver {
        PolicyDriver { policy, cursor: 0 }
    }

    /// Picks a bidder from a non-empty conflict set.
    pub fn choose(&mut self, conflict: &BTreeSet<usize>) -> Result<usize> {
        match &self.policy {
            StepThreePolicy::FirstIndex => Ok(*conflict.iter().next().expect("non-empty")),
            StepThreePolicy::FixedScript(script) => {
                let Some(&pick) = script.get(self.cursor) else {
                    return Err(Error::invalid(format!(
                        "rollback script exhausted after {} entries",
                        self.cursor
                    )));
                };
                self.cursor += 1;
                if !conflict.contains(&pick) {
                    return Err(Error::invalid(format!(
                        "scripted bidder {pick} is not in the conflict set {conflict:?}"
                    )));
                }
                Ok(pick)
            }
        }
    }
}

/// Which of the three actions a round executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    /// Undo the last raise and shrink one bidder's menu.
    Rollback,
    /// Raise prices on a minimally overdemanded set.
    Raise,
    /// No overdemand left: assign goods and stop.
    Clear,
}

impl StepKind {
    /// Short lowercase label used in traces.
    pub fn label(self) -> &'static str {
        match self {
            StepKind::Rollback => "rollback",
            StepKind::Raise => "raise",
            StepKind::Clear => "clear",
        }
    }
}

/// Rollback details for a trace row: who was picked and what left its menu.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RollbackInfo {
    pub bidder: usize,
    pub removed: GoodSet,
}

/// One round of the auction as observed before the round's action ran:
/// prices, per-bidder demands and menus at the start of the round, then the
/// action taken, the set raised (empty unless a raise) and the conflict set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub step: StepKind,
    pub prices: Vec<i64>,
    pub demands: Vec<GoodSet>,
    pub restrictions: Vec<GoodSet>,
    pub overdemanded: GoodSet,
    pub conflict: BTreeSet<usize>,
    pub rollback: Option<RollbackInfo>,
}

/// The full round-by-round record of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuctionTrace {
    pub rows: Vec<TraceRow>,
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct AuctionRun {
    pub outcome: Outcome,
    pub trace: AuctionTrace,
    /// True when every rollback round had exactly one candidate bidder, so
    /// no discretionary choice was ever made. A certified run's outcome is
    /// welfare-maximal among all core outcomes of the market.
    pub certificate: bool,
}

/// Distinct final outcomes over every rollback choice sequence.
#[derive(Clone, Debug)]
pub struct BranchOutcomes {
    /// Deduplicated outcomes, sorted by assignment then prices.
    pub outcomes: Vec<Outcome>,
    /// Completed runs explored, counting duplicates.
    pub paths_explored: usize,
}

/// Mutable auction position between rounds.
#[derive(Clone, Debug)]
pub struct AuctionState {
    /// Current round number, starting at 1.
    pub round: usize,
    /// Current integer prices of the real goods, indexed by `j - 1`.
    pub prices: Vec<i64>,
    /// Current per-bidder menus.
    pub restrictions: Vec<GoodSet>,
    /// Prices of the previous round (rollback target).
    pub prev_prices: Vec<i64>,
    /// Demands computed in the previous round, if any.
    pub prev_demands: Option<Vec<GoodSet>>,
    /// Set raised in the previous round (empty if it did not raise).
    pub prev_overdemanded: GoodSet,
}

/// What a round decided to do, before any mutation.
#[derive(Clone, Debug)]
enum RoundPlan {
    Rollback(BTreeSet<usize>),
    Raise(GoodSet),
    Clear,
}

/// A single run in progress. Clone to fork at a rollback decision.
#[derive(Clone, Debug)]
pub struct Auction<'m> {
    market: &'m Market,
    state: AuctionState,
    trace: AuctionTrace,
    certificate: bool,
    rounds_cap: usize,
    done: bool,
}

impl<'m> Auction<'m> {
    /// Sets up round 1: prices at the reserves, full menus, empty history.
    pub fn new(market: &'m Market) -> Auction<'m> {
        let n = market.n_bidders();
        let m = market.n_goods();
        let prices = market.reserves().to_vec();
        let b_max = market.budgets().iter().copied().max().unwrap_or(1);
        let rounds_cap = ((n as u128 * (m as u128 + 1) + 2)
            * (m as u128 * (b_max as u128 + 2) + 4)
            + 64)
            .min(usize::MAX as u128) as usize;
        Auction {
            market,
            state: AuctionState {
                round: 1,
                prices: prices.clone(),
                restrictions: vec![market.full_good_set(); n],
                prev_prices: prices,
                prev_demands: None,
                prev_overdemanded: GoodSet::new(),
            },
            trace: AuctionTrace::default(),
            certificate: true,
            rounds_cap,
            done: false,
        }
    }

    /// Read-only view of the current position.
    pub fn state(&self) -> &AuctionState {
        &self.state
    }

    /// Rounds recorded so far.
    pub fn trace(&self) -> &AuctionTrace {
        &self.trace
    }

    /// Runs one round. Returns the final outcome once the auction clears.
    pub fn step(&mut self, driver: &mut PolicyDriver) -> Result<Option<Outcome>> {
        let (plan, demands) = self.plan_round()?;
        let choice = match &plan {
            RoundPlan::Rollback(conflict) => Some(driver.choose(conflict)?),
            _ => None,
        };
        self.commit_round(plan, demands, choice)
    }

    /// Computes everything the current round needs without mutating state:
    /// demands, the conflict set and the action to take. Also enforces the
    /// internal invariants that every strictly affordable good is still on
    /// its bidder's menu and that no underdemanded set survives into a raise
    /// or clearing round (checked exhaustively up to six goods).
    fn plan_round(&self) -> Result<(RoundPlan, Vec<GoodSet>)> {
        if self.done {
            return Err(Error::invalid("auction already finished"));
        }
        if self.state.round > self.rounds_cap {
            return Err(Error::internal(format!(
                "auction exceeded its round cap of {}",
                self.rounds_cap
            )));
        }
        let market = self.market;
        let prices = PriceVector::from_integers(&self.state.prices)
            .map_err(|e| Error::internal(format!("auction produced bad prices: {e}")))?;

        for i in 0..market.n_bidders() {
            let affordable = market.strict_budget_set(i, &prices);
            if !affordable.is_subset(&self.state.restrictions[i]) {
                return Err(Error::internal(format!(
                    "bidder {i} lost strictly affordable goods from its menu: \
                     affordable {} vs menu {}",
                    crate::market::good_set_label(&affordable),
                    crate::market::good_set_label(&self.state.restrictions[i]),
                )));
            }
        }

        let demands: Vec<GoodSet> = (0..market.n_bidders())
            .map(|i| market.restricted_demand_set(i, &prices, &self.state.restrictions[i]))
            .collect::<Result<_>>()?;
        if let Some((i, _)) = demands.iter().enumerate().find(|(_, d)| d.is_empty()) {
            return Err(Error::internal(format!("bidder {i} has an empty demand")));
        }

        let conflict = conflict_set(
            self.state.prev_demands.as_deref(),
            &demands,
            &self.state.prev_overdemanded,
        );
        let plan = if !conflict.is_empty() {
            RoundPlan::Rollback(conflict)
        } else if let Some(set) = minimal_overdemanded_set(&demands, market.n_goods()) {
            RoundPlan::Raise(set)
        } else {
            RoundPlan::Clear
        };

        if !matches!(plan, RoundPlan::Rollback(_)) && market.n_goods() <= 6 {
            self.check_no_underdemanded_set(&demands)?;
        }
        Ok((plan, demands))
    }

    /// Exhaustive sweep over subsets of the positively priced goods.
    fn check_no_underdemanded_set(&self, demands: &[GoodSet]) -> Result<()> {
        let positive: Vec<usize> = (1..=self.market.n_goods())
            .filter(|&j| self.state.prices[j - 1] > self.market.reserve(j))
            .collect();
        for mask in 1u32..(1u32 << positive.len()) {
            let set: GoodSet = positive
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &j)| j)
                .collect();
            if is_underdemanded(&set, &self.state.prices, self.market.reserves(), demands) {
                return Err(Error::internal(format!(
                    "underdemanded set {} survived into a non-rollback round",
                    crate::market::good_set_label(&set)
                )));
            }
        }
        Ok(())
    }

    /// Executes a planned round: records the trace row, mutates prices and
    /// menus, and on clearing builds the outcome.
    fn commit_round(
        &mut self,
        plan: RoundPlan,
        demands: Vec<GoodSet>,
        rollback_choice: Option<usize>,
    ) -> Result<Option<Outcome>> {
        let mut row = TraceRow {
            round: self.state.round,
            step: match plan {
                RoundPlan::Rollback(_) => StepKind::Rollback,
                RoundPlan::Raise(_) => StepKind::Raise,
                RoundPlan::Clear => StepKind::Clear,
            },
            prices: self.state.prices.clone(),
            demands: demands.clone(),
            restrictions: self.state.restrictions.clone(),
            overdemanded: GoodSet::new(),
            conflict: BTreeSet::new(),
            rollback: None,
        };

        let mut outcome = None;
        let mut raised = GoodSet::new();
        match plan {
            RoundPlan::Rollback(conflict) => {
                let bidder = rollback_choice
                    .ok_or_else(|| Error::internal("rollback without a chosen bidder"))?;
                if !conflict.contains(&bidder) {
                    return Err(Error::internal(format!(
                        "rollback chose bidder {bidder} outside the conflict set"
                    )));
                }
                if conflict.len() > 1 {
                    self.certificate = false;
                }
                let prev = self.state.prev_demands.as_ref()
                    .expect("a rollback round always has a predecessor")[bidder]
                    .clone();
                let removed: GoodSet = prev.difference(&demands[bidder]).copied().collect();
                if removed.is_empty() {
                    return Err(Error::internal(format!(
                        "bidder {bidder} was picked for rollback but dropped nothing"
                    )));
                }
                debug_assert!(!removed.contains(&0), "the dummy good never leaves a menu");
                for j in &removed {
                    self.state.restrictions[bidder].remove(j);
                }
                row.conflict = conflict;
                row.rollback = Some(RollbackInfo {
                    bidder,
                    removed,
                });
                let target = self.state.prev_prices.clone();
                self.state.prev_prices = std::mem::replace(&mut self.state.prices, target);
            }
            RoundPlan::Raise(set) => {
                self.state.prev_prices = self.state.prices.clone();
                for &j in &set {
                    self.state.prices[j - 1] += 1;
                }
                row.overdemanded = set.clone();
                raised = set;
            }
            RoundPlan::Clear => {
                let must_sell: GoodSet = (1..=self.market.n_goods())
                    .filter(|&j| self.state.prices[j - 1] > self.market.reserve(j))
                    .collect();
                let assignment =
                    extract_assignment(&demands, &must_sell, self.market.n_goods())?;
                let prices = PriceVector::from_integers(&self.state.prices)
                    .map_err(|e| Error::internal(format!("bad clearing prices: {e}")))?;
                let built = Outcome::new(self.market, assignment, prices).map_err(|e| {
                    Error::internal(format!("auction cleared with an invalid outcome: {e}"))
                })?;
                self.done = true;
                outcome = Some(built);
            }
        }

        self.trace.rows.push(row);
        if !self.done {
            self.state.prev_demands = Some(demands);
            self.state.prev_overdemanded = raised;
            self.state.round += 1;
        }
        Ok(outcome)
    }
}

/// Runs the auction to completion under one rollback policy.
pub fn run_auction(market: &Market, policy: &StepThreePolicy) -> Result<AuctionRun> {
    let mut auction = Auction::new(market);
    let mut driver = PolicyDriver::new(policy.clone());
    loop {
        if let Some(outcome) = auction.step(&mut driver)? {
            return Ok(AuctionRun {
                outcome,
                trace: auction.trace,
                certificate: auction.certificate,
            });
        }
    }
}

/// Explores every rollback choice and collects the distinct final outcomes.
/// Errors once more than `max_paths` completed runs have been explored.
pub fn run_auction_all_branches(market: &Market, max_paths: usize) -> Result<BranchOutcomes> {
    let mut found = BTreeSet::new();
    let mut paths = 0usize;
    explore(Auction::new(market), &mut found, &mut paths, max_paths)?;
    Ok(BranchOutcomes {
        outcomes: found.into_iter().collect(),
        paths_explored: paths,
    })
}

fn explore(
    mut auction: Auction<'_>,
    found: &mut BTreeSet<Outcome>,
    paths: &mut usize,
    cap: usize,
) -> Result<()> {
    loop {
        let (plan, demands) = auction.plan_round()?;
        if let RoundPlan::Rollback(ref conflict) = plan {
            let choices: Vec<usize> = conflict.iter().copied().collect();
            let (&last, rest) = choices.split_last().expect("conflict sets are never empty");
            for &bidder in rest {
                let mut fork = auction.clone();
                fork.commit_round(plan.clone(), demands.clone(), Some(bidder))?;
                explore(fork, found, paths, cap)?;
            }
            auction.commit_round(plan, demands, Some(last))?;
            continue;
        }
        if let Some(outcome) = auction.commit_round(plan, demands, None)? {
            *paths += 1;
            if *paths > cap {
                return Err(Error::resource(format!(
                    "rollback branch exploration exceeded {cap} completed runs"
                )));
            }
            found.insert(outcome);
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::good_set_label;
    use proptest::prelude::*;

    fn set(goods: &[usize]) -> GoodSet {
        goods.iter().copied().collect()
    }

    /// Three bidders, two goods; the middle price level squeezes out the
    /// low-budget bidder and forces a rollback.
    fn squeeze_market() -> Market {
        Market::without_reserves(
            vec![vec![10, 0], vec![0, 10], vec![10, 10]],
            vec![1, 2, 10],
        )
        .unwrap()
    }

    /// Tied conflict: two bidders drop out of the raised set in the same
    /// round, so the rollback has a real choice.
    fn tied_conflict_market() -> Market {
        Market::without_reserves(
            vec![vec![10, 0], vec![0, 11], vec![5, 3]],
            vec![3, 1, 10],
        )
        .unwrap()
    }

    #[test]
    fn overdemand_counts_only_fully_inside_demands() {
        let demands = vec![set(&[1]), set(&[2]), set(&[1, 2])];
        assert!(is_overdemanded(&set(&[1, 2]), &demands));
        assert!(!is_overdemanded(&set(&[1]), &demands));
        assert!(!is_overdemanded(&set(&[]), &demands));
        assert!(!is_overdemanded(&set(&[0, 1]), &demands));
    }

    #[test]
    fn underdemand_requires_prices_above_reserve() {
        let demands = vec![set(&[1]), set(&[1])];
        let prices = [1, 1];
        assert!(is_underdemanded(&set(&[2]), &prices, &[0, 0], &demands));
        assert!(!is_underdemanded(&set(&[2]), &prices, &[0, 1], &demands));
        // Both bidders touch {A,B} through A, so the pair is not underdemanded.
        assert!(!is_underdemanded(&set(&[1, 2]), &prices, &[0, 0], &demands));
        assert!(!is_underdemanded(&set(&[1]), &prices, &[0, 0], &demands));
    }

    #[test]
    fn minimal_overdemanded_set_shrinks_past_reachability() {
        // Good A is overdemanded on its own; a naive alternating-tree answer
        // starting from the wrong bidder would report {A,B}.
        let demands = vec![set(&[1]), set(&[1]), set(&[1, 2]), set(&[2])];
        assert_eq!(minimal_overdemanded_set(&demands, 2), Some(set(&[1])));
    }

    #[test]
    fn no_overdemanded_set_when_hall_holds() {
        let demands = vec![set(&[1]), set(&[2]), set(&[0])];
        assert_eq!(minimal_overdemanded_set(&demands, 2), None);
    }

    #[test]
    fn conflict_set_wants_subset_of_raised_and_a_dropped_good() {
        let prev = vec![set(&[1]), set(&[2]), set(&[1, 2])];
        let cur = vec![set(&[0]), set(&[2]), set(&[1, 2])];
        let raised = set(&[1, 2]);
        let conflict = conflict_set(Some(&prev), &cur, &raised);
        assert_eq!(conflict, BTreeSet::from([0]));
        assert!(conflict_set(None, &cur, &raised).is_empty());
        // A bidder whose demand was not inside the raised set is exempt.
        let prev2 = vec![set(&[0, 1])];
        let cur2 = vec![set(&[0])];
        assert!(conflict_set(Some(&prev2), &cur2, &raised).is_empty());
    }

    #[test]
    fn extraction_covers_positive_goods_and_respects_demands() {
        let demands = vec![set(&[0]), set(&[2]), set(&[1, 2])];
        let assignment = extract_assignment(&demands, &set(&[1, 2]), 2).unwrap();
        assert_eq!(assignment.slots(), &[0, 2, 1]);
    }

    #[test]
    fn extraction_reroutes_to_sell_everything() {
        // Bidder 1 would grab good A first, but good B's only demander is
        // bidder 1, so the extraction must give A to bidder 0.
        let demands = vec![set(&[0, 1]), set(&[1, 2])];
        let assignment = extract_assignment(&demands, &set(&[1, 2]), 2).unwrap();
        assert_eq!(assignment.slots(), &[1, 2]);
    }

    #[test]
    fn extraction_fails_loudly_when_a_good_cannot_sell() {
        let demands = vec![set(&[0]), set(&[0])];
        let err = extract_assignment(&demands, &set(&[1]), 1).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
    }

    #[test]
    fn squeeze_run_rolls_back_and_clears_at_the_old_prices() {
        let market = squeeze_market();
        let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();

        let rows = &run.trace.rows;
        assert_eq!(rows.len(), 4);
        let price_path: Vec<&[i64]> = rows.iter().map(|r| r.prices.as_slice()).collect();
        assert_eq!(price_path, [&[0, 0], &[1, 1], &[2, 2], &[1, 1]]);
        let steps: Vec<StepKind> = rows.iter().map(|r| r.step).collect();
        assert_eq!(
            steps,
            [StepKind::Raise, StepKind::Raise, StepKind::Rollback, StepKind::Clear]
        );

        let rollback = rows[2].rollback.as_ref().unwrap();
        assert_eq!(rollback.bidder, 0);
        assert_eq!(rollback.removed, set(&[1]));
        assert_eq!(rows[2].conflict, BTreeSet::from([0]));
        assert_eq!(good_set_label(&rows[3].restrictions[0]), "{0,B}");

        assert_eq!(run.outcome.assignment.slots(), &[0, 2, 1]);
        assert_eq!(run.outcome.prices, PriceVector::from_integers(&[1, 1]).unwrap());
        assert!(run.certificate, "the only conflict set was a singleton");
        assert!(market.is_core(&run.outcome));
    }

    #[test]
    fn tied_conflict_resolution_changes_the_winner() {
        let market = tied_conflict_market();

        let first = run_auction(&market, &StepThreePolicy::FixedScript(vec![0])).unwrap();
        assert_eq!(first.outcome.assignment.slots(), &[0, 2, 1]);
        assert_eq!(market.welfare(&first.outcome.assignment), 16);
        assert_eq!(first.outcome.prices, PriceVector::from_integers(&[3, 1]).unwrap());
        assert!(!first.certificate, "two bidders were tied in the conflict");

        let second = run_auction(&market, &StepThreePolicy::FixedScript(vec![1])).unwrap();
        assert_eq!(second.outcome.assignment.slots(), &[1, 0, 2]);
        assert_eq!(market.welfare(&second.outcome.assignment), 13);
        assert_eq!(second.outcome.prices, PriceVector::from_integers(&[3, 1]).unwrap());

        let default_run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
        assert_eq!(default_run.outcome, first.outcome);
    }

    #[test]
    fn branch_exploration_collects_each_distinct_outcome_once() {
        let market = tied_conflict_market();
        let branches = run_auction_all_branches(&market, DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(branches.outcomes.len(), 2);
        assert_eq!(branches.paths_explored, 2);
        let welfares: BTreeSet<i64> = branches
            .outcomes
            .iter()
            .map(|o| market.welfare(&o.assignment))
            .collect();
        assert_eq!(welfares, BTreeSet::from([13, 16]));
        for outcome in &branches.outcomes {
            assert!(market.is_core(outcome));
        }
    }

    #[test]
    fn branch_cap_trips_a_resource_error() {
        let market = tied_conflict_market();
        let err = run_auction_all_branches(&market, 1).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn scripted_policy_rejects_outsiders_and_exhaustion() {
        let market = squeeze_market();
        let outsider = run_auction(&market, &StepThreePolicy::FixedScript(vec![2]));
        assert!(matches!(outsider.unwrap_err(), Error::InvalidInput(_)));
        let exhausted = run_auction(&market, &StepThreePolicy::FixedScript(vec![]));
        assert!(matches!(exhausted.unwrap_err(), Error::InvalidInput(_)));
    }

    #[test]
    fn prices_start_at_the_reserves() {
        let market = Market::new(
            vec![vec![5, 4], vec![4, 5]],
            vec![9, 9],
            vec![2, 1],
        )
        .unwrap();
        let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
        assert_eq!(run.trace.rows[0].prices, vec![2, 1]);
        assert!(market.is_core(&run.outcome));
        let sold = run.outcome.assignment.assigned_goods();
        assert_eq!(sold.len(), 2, "both goods are profitable at reserve");
    }

    #[test]
    fn single_bidder_market_clears_immediately() {
        let market = Market::without_reserves(vec![vec![3]], vec![5]).unwrap();
        let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
        assert_eq!(run.trace.rows.len(), 1);
        assert_eq!(run.outcome.assignment.slots(), &[1]);
        assert_eq!(run.outcome.prices, PriceVector::zeros(1));
        assert!(run.certificate);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_runs_end_in_the_core_with_clean_invariants(
            seed in 0u64..512
        ) {
            let market = crate::gen::random_market(
                seed,
                &crate::gen::GenLimits { max_bidders: 4, max_goods: 3, max_value: 6, max_budget: 5, max_reserve: 2 },
            );
            let run = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
            prop_assert!(market.is_core(&run.outcome));
            prop_assert_eq!(run.trace.rows.last().unwrap().step, StepKind::Clear);

            // Same market, same policy: byte-for-byte the same trace.
            let again = run_auction(&market, &StepThreePolicy::FirstIndex).unwrap();
            prop_assert_eq!(run.trace, again.trace);
            prop_assert_eq!(run.outcome, again.outcome);
        }

        #[test]
        fn minimal_overdemanded_sets_agree_with_enumeration(
            demand_bits in proptest::collection::vec(1u8..15, 1..6)
        ) {
            // Four goods max; bits select each bidder's demanded goods.
            let n_goods = 4;
            let demands: Vec<GoodSet> = demand_bits
                .iter()
                .map(|bits| (1..=n_goods).filter(|j| bits & (1 << (j - 1)) != 0).collect())
                .collect();
            let reported = minimal_overdemanded_set(&demands, n_goods);

            let mut all_od: Vec<GoodSet> = Vec::new();
            for mask in 1u32..(1 << n_goods) {
                let s: GoodSet = (1..=n_goods).filter(|j| mask & (1 << (j - 1)) != 0).collect();
                if is_overdemanded(&s, &demands) {
                    all_od.push(s);
                }
            }
            match reported {
                None => prop_assert!(all_od.is_empty()),
                Some(set) => {
                    prop_assert!(is_overdemanded(&set, &demands));
                    prop_assert!(
                        !all_od.iter().any(|t| *t != set && t.is_subset(&set)),
                        "reported set {:?} is not minimal", set
                    );
                }
            }
        }
    }
}
