//! Exact algorithms for unit-demand assignment markets in which every bidder
//! has a hard budget: paying more than the budget is infeasible, not merely
//! undesirable.
//!
//! The crate provides:
//!
//! * a data model for markets, price vectors, assignments and outcomes with
//!   exact rational prices ([`market`]);
//! * an ascending-price auction with demand-driven price raises and a
//!   rollback step that restricts a bidder's menu when its demand collapses
//!   ([`auction`]);
//! * an exact solver that searches for welfare-maximal core outcomes by
//!   branching over assignments and deciding rational feasibility with
//!   Fourier-Motzkin elimination, plus a brute-force integer-price oracle and
//!   an independent mixed-integer certification of stability ([`solver`]);
//! * a reduction from maximum independent set on cubic graphs to stability in
//!   budget-constrained matching markets ([`hardness`]);
//! * tooling for strategic analysis: a general-position test on value data
//!   and misreport experiments against a pluggable mechanism ([`strategy`]);
//! * a seeded random instance generator ([`gen`]).
//!
//! Bidders are indexed from `0`; goods are indexed from `1` with `0` reserved
//! for the dummy good that is always available at price zero and never runs
//! out. All monetary data (values, budgets, reserve prices) is integral;
//! prices may be arbitrary non-negative rationals.

pub mod auction;
pub mod error;
pub mod gen;
pub mod hardness;
pub mod market;
mod matching;
pub mod rational;
pub mod solver;
pub mod strategy;

pub use error::{Error, Result};
pub use market::{Assignment, GoodSet, Market, Outcome, PriceVector, Utility};
