//! Stability certification through a mixed-integer constraint system.
//!
//! Core membership of an outcome can be phrased as feasibility of a system
//! over matching indicators `m_i(j)`, payoff variables, prices, and three
//! families of binary indicators per bidder-good pair:
//!
//! * `alpha_i(j) = 1` when bidder `i` does not strictly gain by switching
//!   to good `j` at the current prices,
//! * `beta_i(j) = 1` when good `j` has reached `i`'s budget,
//! * `y_i(j) = 0` only when both deviation tests fail, which activates a
//!   seller-side payoff floor that no actual price can meet.
//!
//! [`certify_outcome`] instantiates every variable from a concrete outcome
//! and checks each constraint with exact rational arithmetic, reporting the
//! violated ones. For outcomes that price sold goods between the reserve
//! and the holder's valuation this check accepts exactly the core outcomes,
//! which makes it an independent cross-check on the search in the parent
//! module.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::market::{good_label, Market, Outcome};
use crate::rational::{rat, ratio, Rational};

/// The strictness margin used by the indicator coupling constraint. Any
/// value strictly between 0 and 1 yields the same accepted set.
pub fn default_epsilon() -> Rational {
    ratio(1, 2)
}

/// Outcome of a certification run.
#[derive(Clone, Debug)]
pub struct StabilityCertificate {
    /// True when every constraint holds.
    pub satisfied: bool,
    /// Human-readable descriptions of the violated constraints.
    pub violations: Vec<String>,
    /// The margin the run used.
    pub epsilon: Rational,
    /// The big-M constant the run used.
    pub big_m: i64,
}

/// Evaluates the indicator coupling row for one pair:
///
/// `(1 - alpha) + (1 - beta) - 2 <= 2(1 - y) - epsilon * y`
///
/// With `alpha = beta = 0` the row forces `y = 0`; every other combination
/// admits `y = 1`.
pub fn indicator_case_holds(alpha: bool, beta: bool, y: bool, epsilon: &Rational) -> bool {
    let b2r = |b: bool| if b { rat(1) } else { rat(0) };
    let lhs = (rat(1) - b2r(alpha)) + (rat(1) - b2r(beta)) - rat(2);
    let rhs = rat(2) * (rat(1) - b2r(y)) - epsilon * b2r(y);
    lhs <= rhs
}

/// Certifies an outcome against the full constraint system. All binaries
/// are instantiated from the outcome: `m` from the assignment, `beta` from
/// budget exhaustion, `alpha` from payoff comparisons, and `y = 0` exactly
/// when `alpha = beta = 0`. Returns an error only for malformed inputs;
/// instability shows up as recorded violations.
pub fn certify_outcome(
    market: &Market,
    outcome: &Outcome,
    epsilon: &Rational,
) -> Result<StabilityCertificate> {
    if *epsilon <= Rational::zero() || *epsilon >= rat(1) {
        return Err(Error::invalid(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    let n = market.n_bidders();
    let m = market.n_goods();
    if outcome.assignment.slots().len() != n || outcome.prices.n_goods() != m {
        return Err(Error::invalid(
            "outcome dimensions do not match the market",
        ));
    }

    let price = |j: usize| outcome.prices.get(j);
    let held = |i: usize| outcome.assignment.good_of(i);
    let matched = |i: usize, j: usize| held(i) == j;

    let big_m = big_m_constant(market, outcome);

    // Payoffs as the system defines them.
    let bidder_payoff: Vec<Rational> = (0..n)
        .map(|i| {
            let g = held(i);
            if g == 0 {
                Rational::zero()
            } else {
                rat(market.value(i, g)) - price(g)
            }
        })
        .collect();
    let seller_payoff: Vec<Rational> = (1..=m)
        .map(|j| match outcome.assignment.bidder_of(j) {
            Some(_) => price(j) - rat(market.reserve(j)),
            None => Rational::zero(),
        })
        .collect();

    let mut violations = Vec::new();
    let mut violated = |msg: String| violations.push(msg);

    // Per-bidder and per-good matching degrees.
    for i in 0..n {
        let row: usize = (1..=m).filter(|&j| matched(i, j)).count();
        if row > 1 {
            violated(format!("bidder {i} holds {row} goods"));
        }
    }
    for j in 1..=m {
        let col: usize = (0..n).filter(|&i| matched(i, j)).count();
        if col > 1 {
            violated(format!("good {} has {col} holders", good_label(j)));
        }
    }

    for j in 1..=m {
        if price(j) < Rational::zero() {
            violated(format!("good {} has a negative price", good_label(j)));
        }
    }

    for i in 0..n {
        for j in 1..=m {
            let v = rat(market.value(i, j));
            let cap = rat(market.value(i, j).min(market.budget(i)));
            let b = rat(market.budget(i));
            let p = price(j);

            let alpha = bidder_payoff[i] >= v.clone() - p.clone();
            let beta = p >= b;
            let y = alpha || beta;

            if !indicator_case_holds(alpha, beta, y, epsilon) {
                violated(format!(
                    "pair (bidder {i}, good {}): indicator coupling fails",
                    good_label(j)
                ));
            }
            if alpha && bidder_payoff[i] < v.clone() - p.clone() {
                violated(format!(
                    "pair (bidder {i}, good {}): payoff floor broken",
                    good_label(j)
                ));
            }
            if !y && seller_payoff[j - 1] < cap {
                violated(format!(
                    "pair (bidder {i}, good {}): bidder {i} strictly gains by taking \
                     good {} at {} within budget, and the seller cannot be compensated",
                    good_label(j),
                    good_label(j),
                    p
                ));
            }
            if !beta && b < p {
                violated(format!(
                    "pair (bidder {i}, good {}): price exceeds the budget yet the \
                     exhaustion indicator is off",
                    good_label(j)
                ));
            }
            if beta && p < b {
                violated(format!(
                    "pair (bidder {i}, good {}): exhaustion indicator is on below \
                     the budget",
                    good_label(j)
                ));
            }
            if matched(i, j) {
                if p < rat(market.reserve(j)) {
                    violated(format!(
                        "good {} sells below its reserve",
                        good_label(j)
                    ));
                }
                if p > cap {
                    violated(format!(
                        "good {} sells above bidder {i}'s value or budget",
                        good_label(j)
                    ));
                }
            } else if p > rat(big_m) {
                violated(format!(
                    "good {} is priced above the big-M bound",
                    good_label(j)
                ));
            }
        }
    }

    // Bidders that hold the dummy good must not envy it either; holding a
    // good at a price above its value would make the dummy strictly better.
    for i in 0..n {
        if bidder_payoff[i] < Rational::zero() {
            violated(format!(
                "bidder {i} ends with a negative payoff and would rather hold nothing"
            ));
        }
    }

    Ok(StabilityCertificate {
        satisfied: violations.is_empty(),
        violations,
        epsilon: epsilon.clone(),
        big_m,
    })
}

/// A constant exceeding every price the system could want: one more than
/// the largest budget, value, reserve, or quoted price.
fn big_m_constant(market: &Market, outcome: &Outcome) -> i64 {
    let mut top = 0i64;
    for i in 0..market.n_bidders() {
        top = top.max(market.budget(i));
        for j in 1..=market.n_goods() {
            top = top.max(market.value(i, j));
        }
    }
    for j in 1..=market.n_goods() {
        top = top.max(market.reserve(j));
        let p = outcome.prices.get(j);
        let ceil = p.ceil().to_integer();
        if let Ok(as_i64) = i64::try_from(ceil.clone()) {
            top = top.max(as_i64);
        }
    }
    top + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Assignment, PriceVector};
    use crate::solver::{solve_welfare_max_core, SolveOptions};

    #[test]
    fn indicator_rows_match_the_case_analysis() {
        let eps = default_epsilon();
        // Both deviation tests fail: y is forced to 0.
        assert!(indicator_case_holds(false, false, false, &eps));
        assert!(!indicator_case_holds(false, false, true, &eps));
        // Any satisfied test admits y = 1.
        assert!(indicator_case_holds(false, true, true, &eps));
        assert!(indicator_case_holds(true, false, true, &eps));
        assert!(indicator_case_holds(true, true, true, &eps));
        // y = 0 stays feasible in those cases, just never preferable.
        assert!(indicator_case_holds(false, true, false, &eps));
        assert!(indicator_case_holds(true, false, false, &eps));
        assert!(indicator_case_holds(true, true, false, &eps));
    }

    #[test]
    fn certifier_accepts_a_solved_outcome() {
        let market = crate::market::Market::without_reserves(
            vec![vec![10, 0], vec![0, 11], vec![5, 3]],
            vec![3, 1, 10],
        )
        .unwrap();
        let report = solve_welfare_max_core(&market, &SolveOptions::default()).unwrap();
        let cert = certify_outcome(&market, &report.outcome, &default_epsilon()).unwrap();
        assert!(cert.satisfied, "violations: {:?}", cert.violations);
        assert_eq!(cert.big_m, 12);
    }

    #[test]
    fn certifier_flags_a_blocked_outcome() {
        let market = crate::market::Market::without_reserves(
            vec![vec![6], vec![10]],
            vec![1, 1],
        )
        .unwrap();
        let outcome = crate::market::Outcome::new(
            &market,
            Assignment::all_dummy(2, 1),
            PriceVector::zeros(1),
        )
        .unwrap();
        assert!(!market.is_core(&outcome));
        let cert = certify_outcome(&market, &outcome, &default_epsilon()).unwrap();
        assert!(!cert.satisfied);
        assert!(cert
            .violations
            .iter()
            .any(|v| v.contains("cannot be compensated")));
    }

    #[test]
    fn certifier_flags_prices_above_value() {
        // Selling at 4 beats bidder 0's value of 2, so holding nothing
        // would be strictly better.
        let market =
            crate::market::Market::without_reserves(vec![vec![2]], vec![5]).unwrap();
        let outcome = crate::market::Outcome::new(
            &market,
            Assignment::new(vec![1], 1).unwrap(),
            PriceVector::from_integers(&[4]).unwrap(),
        )
        .unwrap();
        let cert = certify_outcome(&market, &outcome, &default_epsilon()).unwrap();
        assert!(!cert.satisfied);
        assert!(cert.violations.iter().any(|v| v.contains("above bidder")));
        assert!(cert.violations.iter().any(|v| v.contains("negative payoff")));
    }

    #[test]
    fn bad_epsilon_is_an_input_error() {
        let market =
            crate::market::Market::without_reserves(vec![vec![2]], vec![5]).unwrap();
        let outcome = crate::market::Outcome::new(
            &market,
            Assignment::all_dummy(1, 1),
            PriceVector::zeros(1),
        )
        .unwrap();
        for eps in [rat(0), rat(1), rat(2), -ratio(1, 2)] {
            let err = certify_outcome(&market, &outcome, &eps).unwrap_err();
            assert!(matches!(err, crate::error::Error::InvalidInput(_)));
        }
    }
}
