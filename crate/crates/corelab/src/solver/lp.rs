//! Exact linear feasibility over the rationals via Fourier-Motzkin
//! elimination, with support for strict inequalities.
//!
//! The systems solved here are tiny (one variable per good), so the
//! notorious blowup of Fourier-Motzkin is not a concern; in exchange we get
//! exact arithmetic, strict inequality handling and an actual witness point,
//! none of which a floating-point LP solver provides out of the box.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

/// Comparison operator of a linear constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `coeffs . x <= rhs`
    Le,
    /// `coeffs . x < rhs`
    Lt,
    /// `coeffs . x == rhs`
    Eq,
}

/// One linear constraint `coeffs . x REL rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A conjunction of linear constraints over `n_vars` rational variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    pub n_vars: usize,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearSystem {
    pub fn new(n_vars: usize) -> LinearSystem {
        LinearSystem {
            n_vars,
            constraints: Vec::new(),
        }
    }

    /// Adds `coeffs . x REL rhs`; the coefficient vector must cover every
    /// variable.
    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.n_vars, "coefficient vector length");
        self.constraints.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Convenience for single-variable constraints `x_var REL rhs`.
    pub fn push_bound(&mut self, var: usize, relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.n_vars];
        coeffs[var] = rat(1);
        self.push(coeffs, relation, rhs);
    }

    /// Checks a candidate point against every constraint.
    pub fn satisfies(&self, point: &[Rational]) -> bool {
        if point.len() != self.n_vars {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c
                .coeffs
                .iter()
                .zip(point)
                .map(|(a, x)| a * x)
                .fold(Rational::zero(), |acc, t| acc + t);
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Lt => lhs < c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }
}

/// A row in `<=`/`<` normal form: `coeffs . x (< | <=) rhs`.
#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<Rational>,
    rhs: Rational,
    strict: bool,
}

/// An upper or lower bound on one variable, as an affine expression
/// `constant + coeffs . x` over the not-yet-eliminated variables.
#[derive(Clone, Debug)]
struct Bound {
    constant: Rational,
    coeffs: Vec<Rational>,
    strict: bool,
}

impl Bound {
    fn eval(&self, point: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(point)
            .map(|(a, x)| a * x)
            .fold(self.constant.clone(), |acc, t| acc + t)
    }
}

/// Bounds collected while eliminating one variable.
struct Frame {
    lowers: Vec<Bound>,
    uppers: Vec<Bound>,
}

/// Decides feasibility of the system and, when feasible, returns a point
/// that is verified against every original constraint before being handed
/// back. The point choice is deterministic: each variable takes its lowest
/// admissible value when that value is attained, preferring zero when
/// unconstrained from below.
pub fn feasible_point(system: &LinearSystem) -> Result<Option<Vec<Rational>>> {
    let mut rows: Vec<Row> = Vec::with_capacity(system.constraints.len() * 2);
    for c in &system.constraints {
        match c.relation {
            Relation::Le | Relation::Lt => rows.push(Row {
                coeffs: c.coeffs.clone(),
                rhs: c.rhs.clone(),
                strict: c.relation == Relation::Lt,
            }),
            Relation::Eq => {
                rows.push(Row {
                    coeffs: c.coeffs.clone(),
                    rhs: c.rhs.clone(),
                    strict: false,
                });
                rows.push(Row {
                    coeffs: c.coeffs.iter().map(|a| -a).collect(),
                    rhs: -c.rhs.clone(),
                    strict: false,
                });
            }
        }
    }

    let mut frames: Vec<Frame> = Vec::with_capacity(system.n_vars);
    for var in (0..system.n_vars).rev() {
        let mut keep: Vec<Row> = Vec::new();
        let mut lowers: Vec<Bound> = Vec::new();
        let mut uppers: Vec<Bound> = Vec::new();
        for row in rows {
            let coeff = row.coeffs[var].clone();
            let truncated: Vec<Rational> = row.coeffs[..var].to_vec();
            if coeff.is_zero() {
                keep.push(Row {
                    coeffs: truncated,
                    rhs: row.rhs,
                    strict: row.strict,
                });
                continue;
            }
            // coeff * x_var + rest . x REL rhs, solved for x_var.
            let bound = Bound {
                constant: &row.rhs / &coeff,
                coeffs: truncated.iter().map(|a| -(a / &coeff)).collect(),
                strict: row.strict,
            };
            if coeff > Rational::zero() {
                uppers.push(bound);
            } else {
                lowers.push(bound);
            }
        }
        // Each lower/upper pair projects to `lower REL upper` over the
        // remaining variables.
        for lo in &lowers {
            for up in &uppers {
                let coeffs: Vec<Rational> = lo
                    .coeffs
                    .iter()
                    .zip(&up.coeffs)
                    .map(|(a, b)| a - b)
                    .collect();
                keep.push(Row {
                    coeffs,
                    rhs: &up.constant - &lo.constant,
                    strict: lo.strict || up.strict,
                });
            }
        }
        rows = dedup_rows(keep, var);
        // Constant rows can be decided on the spot.
        let mut remaining = Vec::with_capacity(rows.len());
        for row in rows {
            if row.coeffs.iter().all(Rational::is_zero) {
                let ok = if row.strict {
                    Rational::zero() < row.rhs
                } else {
                    Rational::zero() <= row.rhs
                };
                if !ok {
                    return Ok(None);
                }
            } else {
                remaining.push(row);
            }
        }
        rows = remaining;
        frames.push(Frame { lowers, uppers });
    }

    // All variables eliminated; `rows` holds only constant rows already
    // checked above, except when n_vars == 0.
    for row in &rows {
        let ok = if row.strict {
            Rational::zero() < row.rhs
        } else {
            Rational::zero() <= row.rhs
        };
        if !ok {
            return Ok(None);
        }
    }

    // Back-substitute in ascending variable order; the frame for variable k
    // was pushed when k was eliminated, i.e. at position n_vars - 1 - k.
    let mut point: Vec<Rational> = Vec::with_capacity(system.n_vars);
    for var in 0..system.n_vars {
        let frame = &frames[system.n_vars - 1 - var];
        let lo = frame
            .lowers
            .iter()
            .map(|b| (b.eval(&point), b.strict))
            .reduce(|best, cand| merge_bound(best, cand, true));
        let hi = frame
            .uppers
            .iter()
            .map(|b| (b.eval(&point), b.strict))
            .reduce(|best, cand| merge_bound(best, cand, false));
        point.push(pick_value(lo, hi)?);
    }

    if !system.satisfies(&point) {
        return Err(Error::internal(
            "elimination produced a point that violates the original system",
        ));
    }
    Ok(Some(point))
}

/// Keeps the tighter of two bounds on the same side; `want_max` picks the
/// larger value (lower bounds), otherwise the smaller (upper bounds). At
/// equal values a strict bound dominates.
fn merge_bound(
    best: (Rational, bool),
    cand: (Rational, bool),
    want_max: bool,
) -> (Rational, bool) {
    use std::cmp::Ordering::*;
    match cand.0.cmp(&best.0) {
        Equal => (best.0, best.1 || cand.1),
        Greater if want_max => cand,
        Less if !want_max => cand,
        _ => best,
    }
}

/// Picks a value inside the (possibly open) interval. The projection step
/// already certified the interval non-empty, so failures here are bugs.
fn pick_value(lo: Option<(Rational, bool)>, hi: Option<(Rational, bool)>) -> Result<Rational> {
    Ok(match (lo, hi) {
        (None, None) => Rational::zero(),
        (Some((lo, false)), _) => lo,
        (Some((lo, true)), None) => lo + rat(1),
        (Some((lo, true)), Some((hi, _))) => {
            if lo >= hi {
                return Err(Error::internal("empty interval slipped past projection"));
            }
            (lo + hi) / rat(2)
        }
        (None, Some((hi, strict))) => {
            let zero_ok = if strict {
                Rational::zero() < hi
            } else {
                Rational::zero() <= hi
            };
            if zero_ok {
                Rational::zero()
            } else if strict {
                hi - rat(1)
            } else {
                hi
            }
        }
    })
}

/// Removes duplicate rows and keeps only the tightest rhs per coefficient
/// vector. Rows are scaled to a canonical leading coefficient first.
fn dedup_rows(rows: Vec<Row>, _var: usize) -> Vec<Row> {
    let mut best: HashMap<Vec<Rational>, (Rational, bool)> = HashMap::new();
    let mut order: Vec<Vec<Rational>> = Vec::new();
    for row in rows {
        let scale = row
            .coeffs
            .iter()
            .find(|a| !a.is_zero())
            .map(|a| {
                if *a < Rational::zero() {
                    -a.clone()
                } else {
                    a.clone()
                }
            })
            .unwrap_or_else(|| rat(1));
        let coeffs: Vec<Rational> = row.coeffs.iter().map(|a| a / &scale).collect();
        let rhs = &row.rhs / &scale;
        match best.get_mut(&coeffs) {
            None => {
                best.insert(coeffs.clone(), (rhs, row.strict));
                order.push(coeffs);
            }
            Some(existing) => {
                let tighter = rhs < existing.0 || (rhs == existing.0 && row.strict);
                if tighter {
                    *existing = (rhs, row.strict);
                }
            }
        }
    }
    order
        .into_iter()
        .map(|coeffs| {
            let (rhs, strict) = best[&coeffs].clone();
            Row {
                coeffs,
                rhs,
                strict,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn le(system: &mut LinearSystem, coeffs: &[i64], rhs: i64) {
        system.push(coeffs.iter().map(|&c| rat(c)).collect(), Relation::Le, rat(rhs));
    }

    #[test]
    fn simple_box_is_feasible_at_the_lower_corner() {
        let mut s = LinearSystem::new(2);
        le(&mut s, &[-1, 0], -1); // x >= 1
        le(&mut s, &[1, 0], 5);
        le(&mut s, &[0, -1], 0); // y >= 0
        le(&mut s, &[0, 1], 3);
        let p = feasible_point(&s).unwrap().unwrap();
        assert_eq!(p, vec![rat(1), rat(0)]);
    }

    #[test]
    fn detects_infeasible_opposing_bounds() {
        let mut s = LinearSystem::new(1);
        le(&mut s, &[1], 2); // x <= 2
        le(&mut s, &[-1], -3); // x >= 3
        assert_eq!(feasible_point(&s).unwrap(), None);
    }

    #[test]
    fn coupled_constraints_are_projected_correctly() {
        // x - y <= -1, y <= 4, x >= 2  => x in [2, 3].
        let mut s = LinearSystem::new(2);
        le(&mut s, &[1, -1], -1);
        le(&mut s, &[0, 1], 4);
        le(&mut s, &[-1, 0], -2);
        let p = feasible_point(&s).unwrap().unwrap();
        assert!(s.satisfies(&p));
        assert_eq!(p[0], rat(2));
    }

    #[test]
    fn strict_inequalities_shift_off_the_boundary() {
        let mut s = LinearSystem::new(1);
        s.push(vec![rat(-1)], Relation::Lt, rat(-1)); // x > 1
        s.push(vec![rat(1)], Relation::Le, rat(2)); // x <= 2
        let p = feasible_point(&s).unwrap().unwrap();
        assert!(p[0] > rat(1) && p[0] <= rat(2));
        assert_eq!(p[0], ratio(3, 2));
    }

    #[test]
    fn strict_boundary_contact_is_infeasible() {
        let mut s = LinearSystem::new(1);
        s.push(vec![rat(-1)], Relation::Lt, rat(-1)); // x > 1
        s.push(vec![rat(1)], Relation::Le, rat(1)); // x <= 1
        assert_eq!(feasible_point(&s).unwrap(), None);
        // Non-strict contact is fine.
        let mut s2 = LinearSystem::new(1);
        s2.push(vec![rat(-1)], Relation::Le, rat(-1));
        s2.push(vec![rat(1)], Relation::Le, rat(1));
        assert_eq!(feasible_point(&s2).unwrap().unwrap(), vec![rat(1)]);
    }

    #[test]
    fn equalities_pin_variables() {
        let mut s = LinearSystem::new(2);
        s.push(vec![rat(1), rat(0)], Relation::Eq, ratio(7, 2));
        le(&mut s, &[-1, 1], 0); // y <= x
        le(&mut s, &[0, -1], -1); // y >= 1
        let p = feasible_point(&s).unwrap().unwrap();
        assert_eq!(p[0], ratio(7, 2));
        assert!(s.satisfies(&p));
    }

    #[test]
    fn unconstrained_variables_default_to_zero() {
        let s = LinearSystem::new(3);
        assert_eq!(
            feasible_point(&s).unwrap().unwrap(),
            vec![rat(0), rat(0), rat(0)]
        );
    }

    #[test]
    fn zero_variable_constant_system() {
        let mut s = LinearSystem::new(0);
        s.push(vec![], Relation::Le, rat(0));
        assert_eq!(feasible_point(&s).unwrap(), Some(vec![]));
        let mut bad = LinearSystem::new(0);
        bad.push(vec![], Relation::Lt, rat(0));
        assert_eq!(feasible_point(&bad).unwrap(), None);
    }

    #[test]
    fn chains_of_differences_stay_exact() {
        // x0 <= x1 - 1/3, x1 <= x2 - 1/3, x2 <= 1, x0 >= 1/3.
        let mut s = LinearSystem::new(3);
        s.push(vec![rat(1), rat(-1), rat(0)], Relation::Le, ratio(-1, 3));
        s.push(vec![rat(0), rat(1), rat(-1)], Relation::Le, ratio(-1, 3));
        s.push(vec![rat(0), rat(0), rat(1)], Relation::Le, rat(1));
        s.push(vec![rat(-1), rat(0), rat(0)], Relation::Le, ratio(-1, 3));
        let p = feasible_point(&s).unwrap().unwrap();
        assert!(s.satisfies(&p));
        assert_eq!(p[0], ratio(1, 3));
    }
}
