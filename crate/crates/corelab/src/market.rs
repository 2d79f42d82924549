//! Market data model: bidders, goods, prices, assignments, outcomes.
//!
//! Conventions used across the crate:
//!
//! * bidders are `0..n`;
//! * real goods are `1..=m` and good `0` is the dummy good, which every
//!   bidder values at zero, which costs zero, and which can be held by any
//!   number of bidders at once;
//! * values, budgets and reserve prices are non-negative integers (budgets
//!   strictly positive), while prices are exact non-negative rationals.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, rat, Rational};

/// A set of good indices (possibly including the dummy good `0`).
pub type GoodSet = BTreeSet<usize>;

/// Renders a good index for humans: `0` for the dummy good, letters from `A`
/// for real goods, falling back to `g27`, `g28`, ... past the alphabet.
pub fn good_label(j: usize) -> String {
    match j {
        0 => "0".to_string(),
        1..=26 => char::from(b'A' + (j as u8 - 1)).to_string(),
        _ => format!("g{j}"),
    }
}

/// Renders a good set like `{A,B}` or `{0,C}`; the empty set is `{}`.
pub fn good_set_label(set: &GoodSet) -> String {
    let inner: Vec<String> = set.iter().map(|&j| good_label(j)).collect();
    format!("{{{}}}", inner.join(","))
}

// === Utility ===

/// A bidder's payoff from holding one good at given prices.
///
/// The payoff is `value - price` when the price is within budget and
/// `NegInfinity` when the price strictly exceeds the budget: overspending is
/// impossible, not just unattractive. `NegInfinity` compares below every
/// finite payoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Utility {
    /// The good is strictly unaffordable at these prices.
    NegInfinity,
    /// Affordable, with the given exact payoff (may be negative).
    Finite(Rational),
}

impl Utility {
    /// The finite payoff, if there is one.
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Utility::Finite(r) => Some(r),
            Utility::NegInfinity => None,
        }
    }

    /// True when the payoff is finite.
    pub fn is_finite(&self) -> bool {
        matches!(self, Utility::Finite(_))
    }
}

impl PartialOrd for Utility {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Utility {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Utility::NegInfinity, Utility::NegInfinity) => Equal,
            (Utility::NegInfinity, Utility::Finite(_)) => Less,
            (Utility::Finite(_), Utility::NegInfinity) => Greater,
            (Utility::Finite(a), Utility::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Utility::NegInfinity => write!(f, "-inf"),
            Utility::Finite(r) => write!(f, "{r}"),
        }
    }
}

// === Market ===

/// An assignment market: `n` unit-demand bidders, `m` indivisible goods, a
/// free dummy good, integer values and reserve prices, and a hard integer
/// budget per bidder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MarketDoc", into = "MarketDoc")]
pub struct Market {
    values: Vec<Vec<i64>>,
    budgets: Vec<i64>,
    reserves: Vec<i64>,
}

/// JSON wire form of a [`Market`].
#[derive(Clone, Debug, Serialize, Deserialize)]
struct MarketDoc {
    bidders: Vec<BidderDoc>,
    #[serde(default)]
    reserves: Option<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BidderDoc {
    values: Vec<i64>,
    budget: i64,
}

impl TryFrom<MarketDoc> for Market {
    type Error = Error;

    fn try_from(doc: MarketDoc) -> Result<Market> {
        let values: Vec<Vec<i64>> = doc.bidders.iter().map(|b| b.values.clone()).collect();
        let budgets: Vec<i64> = doc.bidders.iter().map(|b| b.budget).collect();
        let m = values.first().map_or(0, Vec::len);
        let reserves = doc.reserves.unwrap_or_else(|| vec![0; m]);
        Market::new(values, budgets, reserves)
    }
}

impl From<Market> for MarketDoc {
    fn from(market: Market) -> MarketDoc {
        MarketDoc {
            bidders: market
                .values
                .iter()
                .zip(&market.budgets)
                .map(|(values, &budget)| BidderDoc {
                    values: values.clone(),
                    budget,
                })
                .collect(),
            reserves: Some(market.reserves.clone()),
        }
    }
}

impl Market {
    /// Builds a market after validating shapes and sign constraints:
    /// at least one bidder, rectangular value matrix, non-negative values
    /// and reserves, budgets at least `1`.
    pub fn new(values: Vec<Vec<i64>>, budgets: Vec<i64>, reserves: Vec<i64>) -> Result<Market> {
        if values.is_empty() {
            return Err(Error::invalid("market needs at least one bidder"));
        }
        if values.len() != budgets.len() {
            return Err(Error::invalid(format!(
                "{} value rows but {} budgets",
                values.len(),
                budgets.len()
            )));
        }
        let m = values[0].len();
        for (i, row) in values.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!(
                    "bidder {i} values {} goods, expected {m}",
                    row.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v < 0) {
                return Err(Error::invalid(format!("bidder {i} has negative value {v}")));
            }
        }
        for (i, &b) in budgets.iter().enumerate() {
            if b < 1 {
                return Err(Error::invalid(format!(
                    "bidder {i} has budget {b}, must be at least 1"
                )));
            }
        }
        if reserves.len() != m {
            return Err(Error::invalid(format!(
                "{} reserve prices for {m} goods",
                reserves.len()
            )));
        }
        if let Some(&r) = reserves.iter().find(|&&r| r < 0) {
            return Err(Error::invalid(format!("negative reserve price {r}")));
        }
        Ok(Market {
            values,
            budgets,
            reserves,
        })
    }

    /// Builds a market with all reserve prices zero.
    pub fn without_reserves(values: Vec<Vec<i64>>, budgets: Vec<i64>) -> Result<Market> {
        let m = values.first().map_or(0, Vec::len);
        Market::new(values, budgets, vec![0; m])
    }

    /// Number of bidders.
    pub fn n_bidders(&self) -> usize {
        self.values.len()
    }

    /// Number of real goods (the dummy good is not counted).
    pub fn n_goods(&self) -> usize {
        self.values[0].len()
    }

    /// Bidder `i`'s value for good `j`; the dummy good is worth zero.
    pub fn value(&self, i: usize, j: usize) -> i64 {
        if j == 0 {
            0
        } else {
            self.values[i][j - 1]
        }
    }

    /// Bidder `i`'s budget.
    pub fn budget(&self, i: usize) -> i64 {
        self.budgets[i]
    }

    /// All budgets, indexed by bidder.
    pub fn budgets(&self) -> &[i64] {
        &self.budgets
    }

    /// Reserve price of good `j`; the dummy good's reserve is zero.
    pub fn reserve(&self, j: usize) -> i64 {
        if j == 0 {
            0
        } else {
            self.reserves[j - 1]
        }
    }

    /// Reserve prices of the real goods, indexed by `j - 1`.
    pub fn reserves(&self) -> &[i64] {
        &self.reserves
    }

    /// The full menu `{0, 1, ..., m}`: every real good plus the dummy.
    pub fn full_good_set(&self) -> GoodSet {
        (0..=self.n_goods()).collect()
    }

    // === Demand and payoffs ===

    /// Bidder `i`'s payoff from holding good `j` at prices `p`.
    pub fn utility(&self, i: usize, j: usize, prices: &PriceVector) -> Utility {
        let price = prices.get(j);
        if price > rat(self.budget(i)) {
            Utility::NegInfinity
        } else {
            Utility::Finite(rat(self.value(i, j)) - price)
        }
    }

    /// Bidder `i`'s most preferred goods at prices `p`: the payoff maximizers
    /// over the full menu including the dummy good. Never empty.
    pub fn demand_set(&self, i: usize, prices: &PriceVector) -> GoodSet {
        self.restricted_demand_set(i, prices, &self.full_good_set())
            .expect("full menu is never empty")
    }

    /// Bidder `i`'s payoff maximizers within the menu `restriction`.
    ///
    /// Errors if the menu is empty or mentions an unknown good. With the
    /// dummy good in the menu the result always contains an affordable
    /// option; a menu of only unaffordable goods demands all of them
    /// (every option is a maximizer of the constant `-inf` payoff).
    pub fn restricted_demand_set(
        &self,
        i: usize,
        prices: &PriceVector,
        restriction: &GoodSet,
    ) -> Result<GoodSet> {
        if restriction.is_empty() {
            return Err(Error::invalid(format!("empty menu for bidder {i}")));
        }
        if let Some(&j) = restriction.iter().find(|&&j| j > self.n_goods()) {
            return Err(Error::invalid(format!(
                "menu for bidder {i} mentions unknown good {j}"
            )));
        }
        let best = restriction
            .iter()
            .map(|&j| self.utility(i, j, prices))
            .max()
            .expect("menu checked non-empty");
        Ok(restriction
            .iter()
            .copied()
            .filter(|&j| self.utility(i, j, prices) == best)
            .collect())
    }

    /// Goods bidder `i` could strictly outbid at prices `p`: every real good
    /// priced strictly below the budget, plus the dummy good.
    pub fn strict_budget_set(&self, i: usize, prices: &PriceVector) -> GoodSet {
        let budget = rat(self.budget(i));
        let mut set: GoodSet = (1..=self.n_goods())
            .filter(|&j| prices.get(j) < budget)
            .collect();
        set.insert(0);
        set
    }

    // === Outcome predicates ===

    /// All pairs `(i, j)` where bidder `i` strictly prefers good `j` to its
    /// assigned good and could strictly outbid the price of `j`, in
    /// lexicographic order. An empty result means the outcome is in the core.
    pub fn blocking_pairs(&self, outcome: &Outcome) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.n_bidders() {
            let held = self.utility(i, outcome.assignment.good_of(i), &outcome.prices);
            for j in 0..=self.n_goods() {
                if j == outcome.assignment.good_of(i) {
                    continue;
                }
                let afford_strictly = outcome.prices.get(j) < rat(self.budget(i));
                if afford_strictly && self.utility(i, j, &outcome.prices) > held {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// True when no bidder-good pair blocks the outcome.
    pub fn is_core(&self, outcome: &Outcome) -> bool {
        self.blocking_pairs(outcome).is_empty()
    }

    /// True when every bidder holds a good from its unrestricted demand set.
    /// Together with the outcome invariant that unsold goods sit at their
    /// reserve price, this is the competitive equilibrium condition.
    pub fn is_competitive_equilibrium(&self, outcome: &Outcome) -> bool {
        (0..self.n_bidders())
            .all(|i| self.demand_set(i, &outcome.prices).contains(&outcome.assignment.good_of(i)))
    }

    /// Total bidder value of the assignment, `sum_i v_i(mu(i))`.
    pub fn welfare(&self, assignment: &Assignment) -> i64 {
        (0..self.n_bidders())
            .map(|i| self.value(i, assignment.good_of(i)))
            .sum()
    }

    /// Total surplus over reserve prices, `sum_i (v_i(mu(i)) - r_mu(i))`.
    /// The dummy good contributes zero.
    pub fn gains_from_trade(&self, assignment: &Assignment) -> i64 {
        (0..self.n_bidders())
            .map(|i| {
                let j = assignment.good_of(i);
                self.value(i, j) - self.reserve(j)
            })
            .sum()
    }

    /// For a core outcome, per-bidder menus under which each bidder demands
    /// its assigned good: the strict budget set plus the assigned good.
    /// Returns `None` when the outcome is not in the core.
    pub fn restriction_witness(&self, outcome: &Outcome) -> Option<Vec<GoodSet>> {
        if !self.is_core(outcome) {
            return None;
        }
        Some(
            (0..self.n_bidders())
                .map(|i| {
                    let mut menu = self.strict_budget_set(i, &outcome.prices);
                    menu.insert(outcome.assignment.good_of(i));
                    menu
                })
                .collect(),
        )
    }
}

// === PriceVector ===

/// Exact non-negative prices for the real goods `1..=m`. The dummy good's
/// price is implicitly zero and is not stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriceVector {
    entries: Vec<Rational>,
}

impl PriceVector {
    /// All-zero prices for `m` real goods.
    pub fn zeros(m: usize) -> PriceVector {
        PriceVector {
            entries: vec![Rational::zero(); m],
        }
    }

    /// Builds a price vector, rejecting negative entries.
    pub fn new(entries: Vec<Rational>) -> Result<PriceVector> {
        if let Some(r) = entries.iter().find(|r| **r < Rational::zero()) {
            return Err(Error::invalid(format!("negative price {r}")));
        }
        Ok(PriceVector { entries })
    }

    /// Builds a price vector from integers, rejecting negative entries.
    pub fn from_integers(entries: &[i64]) -> Result<PriceVector> {
        if let Some(&v) = entries.iter().find(|&&v| v < 0) {
            return Err(Error::invalid(format!("negative price {v}")));
        }
        Ok(PriceVector {
            entries: entries.iter().map(|&v| rat(v)).collect(),
        })
    }

    /// Number of real goods priced.
    pub fn n_goods(&self) -> usize {
        self.entries.len()
    }

    /// Price of good `j` (`0` is the dummy good, always free).
    pub fn get(&self, j: usize) -> Rational {
        if j == 0 {
            Rational::zero()
        } else {
            self.entries[j - 1].clone()
        }
    }

    /// Prices of the real goods, indexed by `j - 1`.
    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    /// The prices as integers, when every entry is integral.
    pub fn as_integers(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.entries
            .iter()
            .map(|r| {
                if r.is_integer() {
                    r.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }
}

impl fmt::Display for PriceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

// === Assignment ===

/// A unit-demand assignment: one good index per bidder, `0` for the dummy
/// good. Injective on real goods; any number of bidders may hold the dummy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    slots: Vec<usize>,
    n_goods: usize,
}

impl Assignment {
    /// Builds an assignment of `slots.len()` bidders over goods `0..=n_goods`,
    /// rejecting out-of-range goods and real goods held twice.
    pub fn new(slots: Vec<usize>, n_goods: usize) -> Result<Assignment> {
        let mut seen = vec![false; n_goods + 1];
        for (i, &j) in slots.iter().enumerate() {
            if j > n_goods {
                return Err(Error::invalid(format!(
                    "bidder {i} assigned unknown good {j}"
                )));
            }
            if j != 0 {
                if seen[j] {
                    return Err(Error::invalid(format!(
                        "good {} assigned to two bidders",
                        good_label(j)
                    )));
                }
                seen[j] = true;
            }
        }
        Ok(Assignment { slots, n_goods })
    }

    /// The all-dummy assignment for `n` bidders.
    pub fn all_dummy(n: usize, n_goods: usize) -> Assignment {
        Assignment {
            slots: vec![0; n],
            n_goods,
        }
    }

    /// Good held by bidder `i` (`0` for the dummy good).
    pub fn good_of(&self, i: usize) -> usize {
        self.slots[i]
    }

    /// The bidder holding real good `j`, if any.
    pub fn bidder_of(&self, j: usize) -> Option<usize> {
        debug_assert!(j >= 1);
        self.slots.iter().position(|&g| g == j)
    }

    /// Number of bidders.
    pub fn n_bidders(&self) -> usize {
        self.slots.len()
    }

    /// Number of real goods in the underlying market.
    pub fn n_goods(&self) -> usize {
        self.n_goods
    }

    /// One good index per bidder, `0` meaning the dummy good.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// The real goods held by some bidder.
    pub fn assigned_goods(&self) -> GoodSet {
        self.slots.iter().copied().filter(|&j| j != 0).collect()
    }

    /// The real goods held by nobody.
    pub fn unsold_goods(&self) -> GoodSet {
        let sold = self.assigned_goods();
        (1..=self.n_goods).filter(|j| !sold.contains(j)).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.slots.iter().map(|&j| good_label(j)).collect();
        write!(f, "({})", parts.join(","))
    }
}

// === Outcome ===

/// An assignment together with prices, validated against a market:
/// every bidder can afford its good (prices never exceed budgets on
/// assigned goods) and every unsold real good sits at its reserve price.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Outcome {
    pub assignment: Assignment,
    pub prices: PriceVector,
}

impl Outcome {
    /// Builds an outcome, checking it against the market invariants.
    pub fn new(market: &Market, assignment: Assignment, prices: PriceVector) -> Result<Outcome> {
        if assignment.n_bidders() != market.n_bidders() {
            return Err(Error::invalid(format!(
                "assignment covers {} bidders, market has {}",
                assignment.n_bidders(),
                market.n_bidders()
            )));
        }
        if assignment.n_goods() != market.n_goods() || prices.n_goods() != market.n_goods() {
            return Err(Error::invalid(format!(
                "assignment/prices sized for {}/{} goods, market has {}",
                assignment.n_goods(),
                prices.n_goods(),
                market.n_goods()
            )));
        }
        for i in 0..market.n_bidders() {
            let j = assignment.good_of(i);
            if prices.get(j) > rat(market.budget(i)) {
                return Err(Error::invalid(format!(
                    "bidder {i} cannot afford good {} at price {}",
                    good_label(j),
                    prices.get(j)
                )));
            }
        }
        for j in assignment.unsold_goods() {
            if prices.get(j) != rat(market.reserve(j)) {
                return Err(Error::invalid(format!(
                    "unsold good {} priced {} away from its reserve {}",
                    good_label(j),
                    prices.get(j),
                    market.reserve(j)
                )));
            }
        }
        Ok(Outcome { assignment, prices })
    }

    /// Wire form with `"num/den"` price strings.
    pub fn to_doc(&self) -> OutcomeDoc {
        OutcomeDoc {
            assignment: self.assignment.slots().to_vec(),
            prices: self
                .prices
                .entries()
                .iter()
                .map(format_rational)
                .collect(),
        }
    }

    /// Parses and validates a wire-form outcome against a market.
    pub fn from_doc(market: &Market, doc: &OutcomeDoc) -> Result<Outcome> {
        let assignment = Assignment::new(doc.assignment.clone(), market.n_goods())?;
        let entries = doc
            .prices
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        let prices = PriceVector::new(entries)?;
        Outcome::new(market, assignment, prices)
    }
}

/// JSON wire form of an [`Outcome`]: good index per bidder and `"num/den"`
/// price strings for the real goods.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeDoc {
    pub assignment: Vec<usize>,
    pub prices: Vec<String>,
}
