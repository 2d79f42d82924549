//! Small bipartite matching helpers shared by the auction and the solver.
//!
//! Left vertices are bidders, right vertices are real goods re-indexed to
//! `0..m`. Everything here is deterministic: neighbors are tried in
//! ascending order, so equal inputs produce equal matchings.

use crate::error::{Error, Result};

/// Incremental bipartite matcher with augmenting-path search from either
/// side. `adj[l]` lists the right neighbors of left vertex `l` in ascending
/// order.
pub(crate) struct Matcher {
    adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
    pub match_left: Vec<Option<usize>>,
    pub match_right: Vec<Option<usize>>,
}

impl Matcher {
    pub fn new(adj: Vec<Vec<usize>>, n_right: usize) -> Matcher {
        let mut right_adj = vec![Vec::new(); n_right];
        for (l, neighbors) in adj.iter().enumerate() {
            for &r in neighbors {
                right_adj[r].push(l);
            }
        }
        let n_left = adj.len();
        Matcher {
            adj,
            right_adj,
            match_left: vec![None; n_left],
            match_right: vec![None; n_right],
        }
    }

    /// Tries to saturate left vertex `l`, possibly re-routing existing
    /// matches along an alternating path. Returns whether it succeeded.
    pub fn augment_left(&mut self, l: usize) -> bool {
        let mut visited = vec![false; self.match_right.len()];
        self.augment_left_inner(l, &mut visited)
    }

    fn augment_left_inner(&mut self, l: usize, visited: &mut [bool]) -> bool {
        for idx in 0..self.adj[l].len() {
            let r = self.adj[l][idx];
            if visited[r] {
                continue;
            }
            visited[r] = true;
            let next = self.match_right[r];
            let reachable = match next {
                None => true,
                Some(l2) => self.augment_left_inner(l2, visited),
            };
            if reachable {
                self.match_left[l] = Some(r);
                self.match_right[r] = Some(l);
                return true;
            }
        }
        false
    }

    /// Tries to saturate right vertex `r` without unsaturating any left
    /// vertex. A neighbor is taken directly when unmatched, stolen outright
    /// when its current right vertex is not `required` (that vertex becomes
    /// free), and stolen after a recursive re-cover when it is. On failure
    /// the matching is left untouched.
    pub fn cover_right(&mut self, r: usize, required: &[bool]) -> bool {
        let mut visited = vec![false; self.match_left.len()];
        self.cover_right_inner(r, required, &mut visited)
    }

    fn cover_right_inner(&mut self, r: usize, required: &[bool], visited: &mut [bool]) -> bool {
        for idx in 0..self.right_adj[r].len() {
            let l = self.right_adj[r][idx];
            if visited[l] {
                continue;
            }
            visited[l] = true;
            let reachable = match self.match_left[l] {
                None => true,
                Some(r2) if !required[r2] => {
                    self.match_right[r2] = None;
                    true
                }
                Some(r2) => self.cover_right_inner(r2, required, visited),
            };
            if reachable {
                self.match_left[l] = Some(r);
                self.match_right[r] = Some(l);
                return true;
            }
        }
        false
    }
}

/// True when every left vertex can be saturated simultaneously
/// (Hall's condition holds for the left side).
pub(crate) fn all_left_saturable(adj: &[Vec<usize>], n_right: usize) -> bool {
    let mut matcher = Matcher::new(adj.to_vec(), n_right);
    (0..adj.len()).all(|l| matcher.augment_left(l))
}

/// Maximum total weight of a bidder-to-good matching where any bidder may
/// stay unmatched at weight zero. `weights[i][j]` is bidder `i`'s weight on
/// good index `j` (real good `j + 1`); `good_mask` restricts the available
/// goods. Errors above 20 goods, where the subset table would blow up.
pub(crate) fn max_weight_matching_value(weights: &[Vec<i64>], good_mask: u32) -> Result<i64> {
    let n = weights.len();
    let m = weights.first().map_or(0, Vec::len);
    if m > 20 {
        return Err(Error::resource(format!(
            "weighted matching limited to 20 goods, got {m}"
        )));
    }
    // dp[mask] = best value using bidders processed so far with the goods in
    // `mask` already consumed; iterate bidders outermost.
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let universe = good_mask & full;
    let mut dp = vec![i64::MIN; 1usize << m];
    dp[0] = 0;
    for i in 0..n {
        let mut next = dp.clone();
        for (mask, &base) in dp.iter().enumerate() {
            if base == i64::MIN {
                continue;
            }
            for j in 0..m {
                let bit = 1u32 << j;
                if universe & bit == 0 || mask as u32 & bit != 0 {
                    continue;
                }
                let cand = base + weights[i][j];
                let slot = mask | bit as usize;
                if cand > next[slot] {
                    next[slot] = cand;
                }
            }
        }
        dp = next;
    }
    Ok(dp.into_iter().filter(|&v| v != i64::MIN).max().unwrap_or(0))
}
