//! Exact search for welfare-maximal core outcomes.
//!
//! A core outcome must, for every bidder `i` and every real good `j` it does
//! not hold, satisfy at least one of two linear conditions on prices:
//!
//! * no envy: `i`'s payoff from its own good is at least `v_i(j) - p(j)`, or
//! * unaffordable: `p(j) >= b_i`, so `i` could not strictly outbid anyway.
//!
//! Fixing an assignment and choosing one disjunct per pair turns core
//! membership into a conjunction of linear constraints over prices, decided
//! exactly by [`lp::feasible_point`]. The solver branches over assignments
//! in welfare order and over disjuncts within an assignment, so the first
//! feasible assignment found is welfare-maximal (ties broken by
//! lexicographically smallest assignment vector).
//!
//! Two independent reference implementations keep the solver honest: a
//! brute-force oracle that enumerates whole integer-price outcome spaces
//! ([`brute_force_oracle`]), and a mixed-integer certification of individual
//! outcomes ([`milp::certify_outcome`]). All market data is integral, and
//! every per-assignment system mixes only integer bounds with unit-coefficient
//! difference constraints, so rational feasibility and integer feasibility
//! coincide; the oracle and the solver must therefore agree exactly, and the
//! test suite checks that they do.

pub mod lp;
pub mod milp;

use std::collections::{BinaryHeap, BTreeMap};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::market::{Assignment, Market, Outcome, PriceVector};
use crate::matching::max_weight_matching_value;
use crate::rational::{rat, Rational};
use lp::{feasible_point, LinearSystem, Relation};

/// Default cap on partial assignments the branch-and-bound search may pop.
pub const DEFAULT_MAX_NODES: u64 = 1_000_000;

/// Default cap on `(assignment, prices)` candidates the oracle may test.
pub const DEFAULT_MAX_CANDIDATES: u64 = 20_000_000;

/// Which side of the per-pair core disjunction to enforce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disjunct {
    /// The bidder weakly prefers its assigned good to this one.
    NoEnvy,
    /// The good's price has reached the bidder's budget.
    Unaffordable,
}

/// A disjunct per bidder-good pair, keyed by `(bidder, good)` with real
/// goods only. Pairs where the bidder holds the good never appear.
#[derive(Clone, Debug, Default)]
pub struct DisjunctChoice {
    pub picks: BTreeMap<(usize, usize), Disjunct>,
}

/// Builds the price constraint system for one assignment and one choice of
/// disjuncts, over variables `p_1 ... p_m` (variable `j - 1` is good `j`):
///
/// * every price at least the reserve and at most `min(value, budget)` of
///   its holder, with unsold goods pinned to their reserve;
/// * for each selected pair, the corresponding linear disjunct.
///
/// The system captures core membership exactly when `choice` covers every
/// pair `(i, j)` with `j != mu(i)`; with fewer pairs it is a relaxation.
pub fn core_constraints(
    market: &Market,
    assignment: &Assignment,
    choice: &DisjunctChoice,
) -> LinearSystem {
    let m = market.n_goods();
    let mut system = LinearSystem::new(m);
    for j in 1..=m {
        let reserve = rat(market.reserve(j));
        match assignment.bidder_of(j) {
            Some(i) => {
                // r_j <= p_j <= min(v_i(j), b_i)
                let mut floor = vec![Rational::zero(); m];
                floor[j - 1] = rat(-1);
                system.push(floor, Relation::Le, -reserve);
                let cap = market.value(i, j).min(market.budget(i));
                system.push_bound(j - 1, Relation::Le, rat(cap));
            }
            None => {
                system.push_bound(j - 1, Relation::Eq, reserve);
            }
        }
    }
    for (&(i, j), &disjunct) in &choice.picks {
        debug_assert!(j >= 1 && j <= m && assignment.good_of(i) != j);
        match disjunct {
            Disjunct::Unaffordable => {
                // p_j >= b_i
                let mut coeffs = vec![Rational::zero(); m];
                coeffs[j - 1] = rat(-1);
                system.push(coeffs, Relation::Le, rat(-market.budget(i)));
            }
            Disjunct::NoEnvy => {
                let g = assignment.good_of(i);
                if g == 0 {
                    // 0 >= v_i(j) - p_j
                    let mut coeffs = vec![Rational::zero(); m];
                    coeffs[j - 1] = rat(-1);
                    system.push(coeffs, Relation::Le, rat(-market.value(i, j)));
                } else {
                    // v_i(g) - p_g >= v_i(j) - p_j
                    let mut coeffs = vec![Rational::zero(); m];
                    coeffs[g - 1] = rat(1);
                    coeffs[j - 1] = rat(-1);
                    let rhs = market.value(i, g) - market.value(i, j);
                    system.push(coeffs, Relation::Le, rat(rhs));
                }
            }
        }
    }
    system
}

/// How each pair is currently decided during the disjunct search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairState {
    Open,
    Decided(Disjunct),
}

/// Interval-propagation state for one assignment: integer price bounds per
/// good plus the committed difference constraints.
#[derive(Clone, Debug)]
struct PairSearch {
    lo: Vec<i64>,
    hi: Vec<i64>,
    /// `(g, j, d)` meaning `p_g - p_j <= d`.
    diffs: Vec<(usize, usize, i64)>,
    pairs: Vec<(usize, usize)>,
    states: Vec<PairState>,
}

struct SearchStats {
    lp_calls: u64,
}

/// One disjunct of one pair, in linear form over goods.
enum PairConstraint {
    /// `p_j >= c`
    LowerBound { j: usize, c: i64 },
    /// `p_g - p_j <= d`
    Difference { g: usize, j: usize, d: i64 },
}

fn pair_constraint(market: &Market, assignment: &Assignment, i: usize, j: usize, d: Disjunct) -> PairConstraint {
    match d {
        Disjunct::Unaffordable => PairConstraint::LowerBound {
            j,
            c: market.budget(i),
        },
        Disjunct::NoEnvy => {
            let g = assignment.good_of(i);
            if g == 0 {
                PairConstraint::LowerBound {
                    j,
                    c: market.value(i, j),
                }
            } else {
                PairConstraint::Difference {
                    g,
                    j,
                    d: market.value(i, g) - market.value(i, j),
                }
            }
        }
    }
}

impl PairSearch {
    fn new(market: &Market, assignment: &Assignment) -> Option<PairSearch> {
        let m = market.n_goods();
        let mut lo = Vec::with_capacity(m);
        let mut hi = Vec::with_capacity(m);
        for j in 1..=m {
            let floor = market.reserve(j);
            let cap = match assignment.bidder_of(j) {
                Some(i) => market.value(i, j).min(market.budget(i)),
                None => floor,
            };
            if cap < floor {
                return None;
            }
            lo.push(floor);
            hi.push(cap);
        }
        let pairs: Vec<(usize, usize)> = (0..market.n_bidders())
            .flat_map(|i| (1..=m).map(move |j| (i, j)))
            .filter(|&(i, j)| assignment.good_of(i) != j)
            .collect();
        let states = vec![PairState::Open; pairs.len()];
        Some(PairSearch {
            lo,
            hi,
            diffs: Vec::new(),
            pairs,
            states,
        })
    }

    /// Whether the constraint could still hold / must already hold within
    /// the current bounds.
    fn classify(&self, c: &PairConstraint) -> (bool, bool) {
        match *c {
            PairConstraint::LowerBound { j, c } => (self.hi[j - 1] >= c, self.lo[j - 1] >= c),
            PairConstraint::Difference { g, j, d } => (
                self.lo[g - 1] - self.hi[j - 1] <= d,
                self.hi[g - 1] - self.lo[j - 1] <= d,
            ),
        }
    }

    /// Tightens the bounds with one constraint. Returns false on an empty
    /// interval.
    fn commit(&mut self, c: &PairConstraint) -> bool {
        match *c {
            PairConstraint::LowerBound { j, c } => {
                if c > self.lo[j - 1] {
                    self.lo[j - 1] = c;
                }
            }
            PairConstraint::Difference { g, j, d } => {
                self.diffs.push((g, j, d));
            }
        }
        self.refresh_diffs()
    }

    /// Re-propagates every committed difference constraint to a fixpoint.
    /// All data is integral, so each pass either changes nothing or moves
    /// an integer bound; divergence is cut off by the emptiness check.
    fn refresh_diffs(&mut self) -> bool {
        loop {
            let mut changed = false;
            for &(g, j, d) in &self.diffs {
                let cap = d + self.hi[j - 1];
                if cap < self.hi[g - 1] {
                    self.hi[g - 1] = cap;
                    changed = true;
                }
                let floor = self.lo[g - 1] - d;
                if floor > self.lo[j - 1] {
                    self.lo[j - 1] = floor;
                    changed = true;
                }
            }
            if self.lo.iter().zip(&self.hi).any(|(l, h)| l > h) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    /// Forces and discharges pairs until nothing changes. Returns false when
    /// some pair has no viable disjunct left.
    fn propagate(&mut self, market: &Market, assignment: &Assignment) -> bool {
        loop {
            let mut changed = false;
            for idx in 0..self.pairs.len() {
                if self.states[idx] != PairState::Open {
                    continue;
                }
                let (i, j) = self.pairs[idx];
                let envy = pair_constraint(market, assignment, i, j, Disjunct::NoEnvy);
                let broke = pair_constraint(market, assignment, i, j, Disjunct::Unaffordable);
                let (envy_possible, envy_implied) = self.classify(&envy);
                let (broke_possible, broke_implied) = self.classify(&broke);
                if envy_implied {
                    self.states[idx] = PairState::Decided(Disjunct::NoEnvy);
                    changed = true;
                } else if broke_implied {
                    self.states[idx] = PairState::Decided(Disjunct::Unaffordable);
                    changed = true;
                } else if !envy_possible && !broke_possible {
                    return false;
                } else if !envy_possible {
                    self.states[idx] = PairState::Decided(Disjunct::Unaffordable);
                    if !self.commit(&broke) {
                        return false;
                    }
                    changed = true;
                } else if !broke_possible {
                    self.states[idx] = PairState::Decided(Disjunct::NoEnvy);
                    if !self.commit(&envy) {
                        return false;
                    }
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn first_open(&self) -> Option<usize> {
        self.states.iter().position(|s| *s == PairState::Open)
    }

    fn to_choice(&self) -> DisjunctChoice {
        let mut choice = DisjunctChoice::default();
        for (idx, &(i, j)) in self.pairs.iter().enumerate() {
            if let PairState::Decided(d) = self.states[idx] {
                choice.picks.insert((i, j), d);
            }
        }
        choice
    }
}

fn search_disjuncts(
    market: &Market,
    assignment: &Assignment,
    search: PairSearch,
    stats: &mut SearchStats,
) -> Result<Option<PriceVector>> {
    let mut search = search;
    if !search.propagate(market, assignment) {
        return Ok(None);
    }
    match search.first_open() {
        None => {
            let system = core_constraints(market, assignment, &search.to_choice());
            stats.lp_calls += 1;
            match feasible_point(&system)? {
                None => Ok(None),
                Some(point) => {
                    let prices = PriceVector::new(point).map_err(|e| {
                        Error::internal(format!("feasible point with a negative price: {e}"))
                    })?;
                    Ok(Some(prices))
                }
            }
        }
        Some(idx) => {
            let (i, j) = search.pairs[idx];
            for d in [Disjunct::NoEnvy, Disjunct::Unaffordable] {
                let mut branch = search.clone();
                branch.states[idx] = PairState::Decided(d);
                let constraint = pair_constraint(market, assignment, i, j, d);
                let (possible, _) = branch.classify(&constraint);
                if !possible || !branch.commit(&constraint) {
                    continue;
                }
                if let Some(prices) = search_disjuncts(market, assignment, branch, stats)? {
                    return Ok(Some(prices));
                }
            }
            Ok(None)
        }
    }
}

/// Decides whether the assignment can be supported as a core outcome by any
/// non-negative rational prices, returning supporting prices if so.
pub fn assignment_core_feasible(
    market: &Market,
    assignment: &Assignment,
) -> Result<Option<PriceVector>> {
    let mut stats = SearchStats { lp_calls: 0 };
    assignment_core_feasible_counted(market, assignment, &mut stats)
}

fn assignment_core_feasible_counted(
    market: &Market,
    assignment: &Assignment,
    stats: &mut SearchStats,
) -> Result<Option<PriceVector>> {
    match PairSearch::new(market, assignment) {
        None => Ok(None),
        Some(search) => search_disjuncts(market, assignment, search, stats),
    }
}

/// Options for [`solve_welfare_max_core`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Cap on partial assignments popped from the search queue.
    pub max_nodes: u64,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Result of a successful solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// A welfare-maximal core outcome; among equally good assignments the
    /// lexicographically smallest assignment vector wins.
    pub outcome: Outcome,
    pub welfare: i64,
    /// Complete assignments whose core feasibility was decided.
    pub assignments_explored: u64,
    /// Rational feasibility checks performed.
    pub lp_calls: u64,
    /// Partial assignments popped from the queue.
    pub nodes_expanded: u64,
}

/// Search node: a prefix of the assignment vector with an upper bound on
/// the welfare of any completion. Orders by bound, then by
/// lexicographically smaller prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
struct SearchNode {
    bound: i64,
    prefix: Vec<usize>,
}

impl Ord for SearchNode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bound
            .cmp(&other.bound)
            .then_with(|| other.prefix.cmp(&self.prefix))
    }
}

impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Finds a welfare-maximal core outcome by best-first search over
/// assignments. The bound ignores budgets and core constraints (a maximum
/// weight matching of the remaining bidders to the remaining goods), so a
/// complete assignment pops only after every strictly better one, and equal
/// welfare pops in ascending assignment order.
pub fn solve_welfare_max_core(market: &Market, options: &SolveOptions) -> Result<SolveReport> {
    let n = market.n_bidders();
    let m = market.n_goods();
    let weights: Vec<Vec<i64>> = (0..n)
        .map(|i| (1..=m).map(|j| market.value(i, j)).collect())
        .collect();
    let full_mask: u32 = if m >= 32 { u32::MAX } else { (1u32 << m) - 1 };

    let mut stats = SearchStats { lp_calls: 0 };
    let mut nodes_expanded = 0u64;
    let mut assignments_explored = 0u64;
    let mut heap = BinaryHeap::new();
    let root_bound = max_weight_matching_value(&weights, full_mask)?;
    heap.push(SearchNode {
        bound: root_bound,
        prefix: Vec::new(),
    });

    while let Some(node) = heap.pop() {
        nodes_expanded += 1;
        if nodes_expanded > options.max_nodes {
            return Err(Error::resource(format!(
                "assignment search exceeded {} nodes",
                options.max_nodes
            )));
        }
        if node.prefix.len() == n {
            assignments_explored += 1;
            let assignment = Assignment::new(node.prefix.clone(), m)
                .map_err(|e| Error::internal(format!("search built a bad assignment: {e}")))?;
            if let Some(prices) =
                assignment_core_feasible_counted(market, &assignment, &mut stats)?
            {
                let outcome = Outcome::new(market, assignment, prices)
                    .map_err(|e| Error::internal(format!("solver outcome invalid: {e}")))?;
                return Ok(SolveReport {
                    welfare: node.bound,
                    outcome,
                    assignments_explored,
                    lp_calls: stats.lp_calls,
                    nodes_expanded,
                });
            }
            continue;
        }

        let i = node.prefix.len();
        let mut used_mask = 0u32;
        let mut prefix_welfare = 0i64;
        for (b, &g) in node.prefix.iter().enumerate() {
            if g != 0 {
                used_mask |= 1 << (g - 1);
            }
            prefix_welfare += market.value(b, g);
        }
        let mut candidates: Vec<usize> = vec![0];
        candidates.extend((1..=m).filter(|&j| used_mask & (1 << (j - 1)) == 0));
        for j in candidates {
            let mut prefix = node.prefix.clone();
            prefix.push(j);
            let child_used = if j == 0 {
                used_mask
            } else {
                used_mask | 1 << (j - 1)
            };
            let child_welfare = prefix_welfare + market.value(i, j);
            let rest = &weights[i + 1..];
            let tail = max_weight_matching_value(rest, full_mask & !child_used)?;
            heap.push(SearchNode {
                bound: child_welfare + tail,
                prefix,
            });
        }
    }
    Err(Error::internal(
        "assignment search exhausted without a core outcome; one always exists",
    ))
}

/// Options for the brute-force oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Cap on `(assignment, integer prices)` candidates tested.
    pub max_candidates: u64,
}

impl Default for OracleOptions {
    fn default() -> OracleOptions {
        OracleOptions {
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

/// What the oracle found.
#[derive(Clone, Debug)]
pub struct OracleReport {
    /// A welfare-maximal core outcome: smallest assignment vector among the
    /// best, with the lexicographically smallest integer prices for it.
    pub outcome: Option<Outcome>,
    pub welfare: i64,
    pub candidates_checked: u64,
    pub core_outcomes_found: u64,
}

/// Exhaustively enumerates integer-price outcomes and keeps the best one in
/// the core. Sold goods range over `reserve ..= holder's budget`; unsold
/// goods sit at their reserve. Every price vector in between is tested with
/// plain integer arithmetic, fully independent of the rational-arithmetic
/// solver above.
pub fn brute_force_oracle(market: &Market, options: &OracleOptions) -> Result<OracleReport> {
    let mut best: Option<(i64, Vec<usize>, Vec<i64>)> = None;
    let mut candidates = 0u64;
    let mut core_count = 0u64;
    visit_outcomes(market, options.max_candidates, &mut candidates, &mut |slots,
                                                                           prices,
                                                                           welfare| {
        core_count += 1;
        let better = match &best {
            None => true,
            Some((bw, bs, _)) => welfare > *bw || (welfare == *bw && slots < bs.as_slice()),
        };
        if better {
            best = Some((welfare, slots.to_vec(), prices.to_vec()));
        }
    })?;
    let outcome = match &best {
        None => None,
        Some((_, slots, prices)) => Some(build_outcome(market, slots, prices)?),
    };
    Ok(OracleReport {
        welfare: best.as_ref().map_or(0, |(w, _, _)| *w),
        outcome,
        candidates_checked: candidates,
        core_outcomes_found: core_count,
    })
}

/// Enumerates every integer-price core outcome, in ascending assignment
/// order and ascending price order within an assignment.
pub fn enumerate_core_outcomes(market: &Market, options: &OracleOptions) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    let mut candidates = 0u64;
    visit_outcomes(market, options.max_candidates, &mut candidates, &mut |slots,
                                                                           prices,
                                                                           _| {
        out.push((slots.to_vec(), prices.to_vec()));
    })?;
    out.into_iter()
        .map(|(slots, prices)| build_outcome(market, &slots, &prices))
        .collect()
}

fn build_outcome(market: &Market, slots: &[usize], prices: &[i64]) -> Result<Outcome> {
    let assignment = Assignment::new(slots.to_vec(), market.n_goods())
        .map_err(|e| Error::internal(format!("oracle built a bad assignment: {e}")))?;
    let prices = PriceVector::from_integers(prices)
        .map_err(|e| Error::internal(format!("oracle built bad prices: {e}")))?;
    Outcome::new(market, assignment, prices)
        .map_err(|e| Error::internal(format!("oracle outcome invalid: {e}")))
}

/// Core calls `visit` for every integer-price core outcome.
fn visit_outcomes(
    market: &Market,
    max_candidates: u64,
    candidates: &mut u64,
    visit: &mut dyn FnMut(&[usize], &[i64], i64),
) -> Result<()> {
    let n = market.n_bidders();
    let mut slots = vec![0usize; n];
    let mut used = vec![false; market.n_goods() + 1];
    assign_rec(market, 0, &mut slots, &mut used, max_candidates, candidates, visit)
}

fn assign_rec(
    market: &Market,
    i: usize,
    slots: &mut Vec<usize>,
    used: &mut Vec<bool>,
    cap: u64,
    candidates: &mut u64,
    visit: &mut dyn FnMut(&[usize], &[i64], i64),
) -> Result<()> {
    let n = market.n_bidders();
    if i == n {
        return price_scan(market, slots, cap, candidates, visit);
    }
    for j in 0..=market.n_goods() {
        if j != 0 && used[j] {
            continue;
        }
        slots[i] = j;
        if j != 0 {
            used[j] = true;
        }
        assign_rec(market, i + 1, slots, used, cap, candidates, visit)?;
        if j != 0 {
            used[j] = false;
        }
        slots[i] = 0;
    }
    Ok(())
}

/// Iterates all integer price vectors for a fixed assignment: an odometer
/// over the sold goods' ranges, unsold goods pinned at reserve.
fn price_scan(
    market: &Market,
    slots: &[usize],
    cap: u64,
    candidates: &mut u64,
    visit: &mut dyn FnMut(&[usize], &[i64], i64),
) -> Result<()> {
    let m = market.n_goods();
    let mut prices: Vec<i64> = (1..=m).map(|j| market.reserve(j)).collect();
    let mut sold: Vec<(usize, i64, i64)> = Vec::new(); // (good, floor, cap)
    for (i, &j) in slots.iter().enumerate() {
        if j != 0 {
            let floor = market.reserve(j);
            let ceil = market.budget(i);
            if ceil < floor {
                return Ok(()); // no affordable price at all
            }
            sold.push((j, floor, ceil));
        }
    }
    let welfare = market.welfare(&Assignment::new(slots.to_vec(), m).expect("valid by search"));
    loop {
        *candidates += 1;
        if *candidates > cap {
            return Err(Error::resource(format!(
                "oracle exceeded {cap} candidate outcomes"
            )));
        }
        if integer_core_check(market, slots, &prices) {
            visit(slots, &prices, welfare);
        }
        // advance the odometer
        let mut k = sold.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            let (j, floor, ceil) = sold[k];
            if prices[j - 1] < ceil {
                prices[j - 1] += 1;
                break;
            }
            prices[j - 1] = floor;
        }
    }
}

/// Integer-only core test: no bidder strictly prefers a strictly affordable
/// alternative (the dummy good included) to its assigned good.
fn integer_core_check(market: &Market, slots: &[usize], prices: &[i64]) -> bool {
    let price_of = |j: usize| if j == 0 { 0 } else { prices[j - 1] };
    for (i, &held) in slots.iter().enumerate() {
        if price_of(held) > market.budget(i) {
            return false;
        }
        let held_payoff = market.value(i, held) - price_of(held);
        for j in 0..=market.n_goods() {
            if j == held {
                continue;
            }
            if price_of(j) < market.budget(i)
                && market.value(i, j) - price_of(j) > held_payoff
            {
                return false;
            }
        }
    }
    true
}

/// The budget-free welfare optimum: the value of a maximum-weight matching
/// of bidders to goods, which is also the optimum of the fractional
/// relaxation of the assignment problem.
pub fn assignment_optimum(market: &Market) -> Result<i64> {
    let weights: Vec<Vec<i64>> = (0..market.n_bidders())
        .map(|i| (1..=market.n_goods()).map(|j| market.value(i, j)).collect())
        .collect();
    let m = market.n_goods();
    let mask: u32 = if m >= 32 { u32::MAX } else { (1u32 << m) - 1 };
    max_weight_matching_value(&weights, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tied_conflict_market() -> Market {
        Market::without_reserves(
            vec![vec![10, 0], vec![0, 11], vec![5, 3]],
            vec![3, 1, 10],
        )
        .unwrap()
    }

    #[test]
    fn two_value_market_has_exactly_two_core_outcomes() {
        let market =
            Market::without_reserves(vec![vec![6], vec![10]], vec![1, 1]).unwrap();
        let outcomes = enumerate_core_outcomes(&market, &OracleOptions::default()).unwrap();
        assert_eq!(outcomes.len(), 2);
        let mut welfares: Vec<i64> = outcomes
            .iter()
            .map(|o| market.welfare(&o.assignment))
            .collect();
        welfares.sort();
        assert_eq!(welfares, vec![6, 10]);
        for o in &outcomes {
            assert_eq!(o.prices, PriceVector::from_integers(&[1]).unwrap());
            assert!(market.is_core(o));
        }

        let report = brute_force_oracle(&market, &OracleOptions::default()).unwrap();
        assert_eq!(report.welfare, 10);
        let best = report.outcome.unwrap();
        assert_eq!(best.assignment.slots(), &[0, 1]);
        assert_eq!(report.core_outcomes_found, 2);
    }

    #[test]
    fn solver_matches_the_forced_price_point() {
        let market =
            Market::without_reserves(vec![vec![6], vec![10]], vec![1, 1]).unwrap();
        let report = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
        assert_eq!(report.welfare, 10);
        assert_eq!(report.outcome.assignment.slots(), &[0, 1]);
        assert_eq!(report.outcome.prices, PriceVector::from_integers(&[1]).unwrap());
    }

    #[test]
    fn solver_reproduces_the_auction_supported_prices() {
        let market = tied_conflict_market();
        let report = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
        assert_eq!(report.welfare, 16);
        assert_eq!(report.outcome.assignment.slots(), &[0, 2, 1]);
        assert_eq!(
            report.outcome.prices,
            PriceVector::from_integers(&[3, 1]).unwrap()
        );
        assert!(market.is_core(&report.outcome));
    }

    #[test]
    fn infeasible_assignment_is_rejected_by_both_routes() {
        // Bidder 1 holds B, bidder 0 holds A; bidder 1 strictly prefers A at
        // any price bidder 0 can afford, and cannot be priced out of A.
        let market = Market::without_reserves(
            vec![vec![4, 10], vec![3, 6]],
            vec![2, 4],
        )
        .unwrap();
        let assignment = Assignment::new(vec![2, 1], 2).unwrap();
        assert!(assignment_core_feasible(&market, &assignment)
            .unwrap()
            .is_none());
        let outcomes = enumerate_core_outcomes(&market, &OracleOptions::default()).unwrap();
        assert!(outcomes
            .iter()
            .all(|o| o.assignment.slots() != [2, 1]));
    }

    #[test]
    fn unsold_goods_are_pinned_to_their_reserve() {
        let market = Market::new(vec![vec![5, 0]], vec![9], vec![1, 3]).unwrap();
        let assignment = Assignment::new(vec![1], 2).unwrap();
        let prices = assignment_core_feasible(&market, &assignment)
            .unwrap()
            .unwrap();
        assert_eq!(prices.get(2), rat(3));
        let outcome = Outcome::new(&market, assignment, prices).unwrap();
        assert!(market.is_core(&outcome));
    }

    #[test]
    fn oracle_cap_trips_a_resource_error() {
        let market = tied_conflict_market();
        let err = brute_force_oracle(
            &market,
            &OracleOptions { max_candidates: 10 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn solver_node_cap_trips_a_resource_error() {
        let market = tied_conflict_market();
        let err = solve_welfare_max_core(&market, &SolveOptions { max_nodes: 2 }).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn assignment_optimum_ignores_budgets() {
        let market = tied_conflict_market();
        assert_eq!(assignment_optimum(&market).unwrap(), 21);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        /// The rational solver and the integer oracle must agree exactly:
        /// the constraint systems have integer data, non-strict comparisons
        /// and unit coefficients, so rational feasibility implies integer
        /// feasibility assignment by assignment.
        #[test]
        fn rational_and_integer_feasibility_coincide(seed in 0u64..200) {
            let market = crate::gen::random_market(
                seed,
                &crate::gen::GenLimits { max_bidders: 3, max_goods: 3, max_value: 5, max_budget: 5, max_reserve: 1 },
            );
            let outcomes = enumerate_core_outcomes(&market, &OracleOptions::default()).unwrap();
            let mut integer_feasible: std::collections::BTreeSet<Vec<usize>> =
                std::collections::BTreeSet::new();
            for o in &outcomes {
                integer_feasible.insert(o.assignment.slots().to_vec());
            }
            // Enumerate all assignments and compare both routes.
            let n = market.n_bidders();
            let m = market.n_goods();
            let mut all: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for prefix in &all {
                    for j in 0..=m {
                        if j != 0 && prefix.contains(&j) {
                            continue;
                        }
                        let mut p = prefix.clone();
                        p.push(j);
                        next.push(p);
                    }
                }
                all = next;
            }
            for slots in all {
                let assignment = Assignment::new(slots.clone(), m).unwrap();
                let rational = assignment_core_feasible(&market, &assignment).unwrap();
                prop_assert_eq!(
                    rational.is_some(),
                    integer_feasible.contains(&slots),
                    "disagreement on assignment {:?}", slots
                );
                if let Some(prices) = rational {
                    let outcome = Outcome::new(&market, assignment, prices).unwrap();
                    prop_assert!(market.is_core(&outcome));
                }
            }
        }

        #[test]
        fn solver_welfare_equals_oracle_welfare(seed in 0u64..120) {
            let market = crate::gen::random_market(
                seed,
                &crate::gen::GenLimits { max_bidders: 4, max_goods: 3, max_value: 6, max_budget: 6, max_reserve: 0 },
            );
            let solved = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
            let oracle = brute_force_oracle(&market, &OracleOptions::default()).unwrap();
            prop_assert_eq!(solved.welfare, oracle.welfare);
            prop_assert!(market.is_core(&solved.outcome));
            // The oracle reports the same best assignment: both tie-break by
            // the smallest assignment vector.
            let best = oracle.outcome.unwrap();
            prop_assert_eq!(solved.outcome.assignment.slots(), best.assignment.slots());
        }
    }
}
