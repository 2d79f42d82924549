//! Seeded random market generation.
//!
//! The generator is fully deterministic: one `u64` seed and a set of limits
//! produce exactly one market, independent of platform. Tests and the CLI
//! rely on that to name an instance by its seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::market::Market;

/// Inclusive upper limits for each drawn quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenLimits {
    pub max_bidders: usize,
    pub max_goods: usize,
    pub max_value: i64,
    pub max_budget: i64,
    pub max_reserve: i64,
}

impl Default for GenLimits {
    fn default() -> GenLimits {
        GenLimits {
            max_bidders: 4,
            max_goods: 3,
            max_value: 6,
            max_budget: 6,
            max_reserve: 0,
        }
    }
}

/// Draws a market from a seed. The draw order is fixed: bidder count, good
/// count, values row by row, budgets, then reserves. Bidder and good counts
/// are uniform on `1..=max`, values and reserves on `0..=max`, budgets on
/// `1..=max`.
pub fn random_market(seed: u64, limits: &GenLimits) -> Market {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=limits.max_bidders.max(1));
    let m = rng.gen_range(1..=limits.max_goods.max(1));
    let values: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..=limits.max_value.max(0))).collect())
        .collect();
    let budgets: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=limits.max_budget.max(1))).collect();
    let reserves: Vec<i64> = (0..m)
        .map(|_| rng.gen_range(0..=limits.max_reserve.max(0)))
        .collect();
    Market::new(values, budgets, reserves).expect("generated data is valid by construction")
}

/// Same as [`random_market`] but forces every budget to `1 + max v_i(j)`,
/// making budgets non-binding: no price a bidder would ever be asked to pay
/// reaches its budget.
pub fn random_market_rich_budgets(seed: u64, limits: &GenLimits) -> Market {
    let base = random_market(seed, limits);
    let mut rich = 1;
    for i in 0..base.n_bidders() {
        for j in 1..=base.n_goods() {
            rich = rich.max(1 + base.value(i, j));
        }
    }
    let values: Vec<Vec<i64>> = (0..base.n_bidders())
        .map(|i| (1..=base.n_goods()).map(|j| base.value(i, j)).collect())
        .collect();
    Market::new(values, vec![rich; base.n_bidders()], base.reserves().to_vec())
        .expect("only budgets changed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_market() {
        let limits = GenLimits::default();
        assert_eq!(random_market(42, &limits), random_market(42, &limits));
        assert_ne!(random_market(1, &limits), random_market(2, &limits));
    }

    #[test]
    fn respects_limits() {
        let limits = GenLimits {
            max_bidders: 6,
            max_goods: 5,
            max_value: 8,
            max_budget: 8,
            max_reserve: 3,
        };
        for seed in 0..200 {
            let market = random_market(seed, &limits);
            assert!(market.n_bidders() >= 1 && market.n_bidders() <= 6);
            assert!(market.n_goods() >= 1 && market.n_goods() <= 5);
            for i in 0..market.n_bidders() {
                assert!((1..=8).contains(&market.budget(i)));
                for j in 1..=market.n_goods() {
                    assert!((0..=8).contains(&market.value(i, j)));
                }
            }
            for j in 1..=market.n_goods() {
                assert!((0..=3).contains(&market.reserve(j)));
            }
        }
    }

    #[test]
    fn rich_budgets_exceed_every_value() {
        let limits = GenLimits::default();
        for seed in 0..50 {
            let market = random_market_rich_budgets(seed, &limits);
            let mut max_value = 0;
            for i in 0..market.n_bidders() {
                for j in 1..=market.n_goods() {
                    max_value = max_value.max(market.value(i, j));
                }
            }
            for i in 0..market.n_bidders() {
                assert_eq!(market.budget(i), max_value + 1);
            }
        }
    }
}
