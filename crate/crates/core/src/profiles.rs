//! Radius profiles: candidate vectors of cluster radii that drive the cover
//! search.
//!
//! Two enumerations are offered. [`enumerate_exact`] lists every sorted
//! k-multiset of pairwise distances and therefore contains the exact radius
//! profile of every clustering centered at points of the space.
//! [`enumerate_grid`] rounds radii onto a geometric grid anchored at the
//! largest radius: the anchor is a pairwise distance and is hit exactly,
//! radii below `eps * r_max / (2k)` round up to that floor (adding at most
//! `eps/2` of the optimum in total), and every other radius rounds up by a
//! factor of at most `1 + eps`. Some emitted profile therefore dominates any
//! optimal profile entrywise with sum at most `(1 + 2 eps)` times larger.

use thiserror::Error;

use crate::metric::{leq_tol, MetricSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("epsilon must be a positive finite number, got {0}")]
    BadEpsilon(f64),
}

/// Candidate radii sorted non-increasing, zero-padded to length k.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusProfile {
    radii: Vec<f64>,
}

impl RadiusProfile {
    /// Sorts `radii` non-increasing and pads with zeros to length `k`.
    pub fn new(mut radii: Vec<f64>, k: usize) -> Self {
        radii.sort_by(|a, b| b.total_cmp(a));
        radii.truncate(k);
        radii.resize(k, 0.0);
        RadiusProfile { radii }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn k(&self) -> usize {
        self.radii.len()
    }

    pub fn sum(&self) -> f64 {
        self.radii.iter().sum()
    }

    /// Distinct entries, non-increasing. Branching on profile indices only
    /// ever sees these values.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v = self.radii.clone();
        v.dedup();
        v
    }

    /// Entrywise `self[i] >= other[i]` under sorted matching (with slack).
    pub fn dominates(&self, other: &RadiusProfile) -> bool {
        self.radii.len() == other.radii.len()
            && self.radii.iter().zip(&other.radii).all(|(&a, &b)| leq_tol(b, a))
    }
}

fn check_eps(eps: f64) -> Result<(), ProfileError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(ProfileError::BadEpsilon(eps))
    }
}

/// Visits every non-increasing sequence of length `len` over `values`
/// (sorted descending), starting at index `from`.
fn multisets(values: &[f64], len: usize, from: usize, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    if len == 0 {
        out.push(prefix.clone());
        return;
    }
    for i in from..values.len() {
        prefix.push(values[i]);
        multisets(values, len - 1, i, prefix, out);
        prefix.pop();
    }
}

fn finish(mut tuples: Vec<Vec<f64>>) -> Vec<RadiusProfile> {
    tuples.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    tuples.dedup();
    tuples.into_iter().map(|radii| RadiusProfile { radii }).collect()
}

/// Every sorted k-multiset over the distinct pairwise distances plus zero.
pub fn enumerate_exact(m: &MetricSpace, k: usize) -> Vec<RadiusProfile> {
    let mut values = m.distinct_distances();
    values.push(0.0);
    values.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::new();
    multisets(&values, k, 0, &mut Vec::with_capacity(k), &mut out);
    finish(out)
}

/// Number of geometric grid steps below the anchor radius.
pub fn grid_steps(k: usize, eps: f64) -> usize {
    ((2.0 * k as f64 / eps).ln() / (1.0 + eps).ln()).ceil().max(0.0) as usize
}

/// Grid values anchored at `r_max`, sorted descending and deduplicated.
pub fn grid_values(r_max: f64, k: usize, eps: f64) -> Vec<f64> {
    if r_max == 0.0 {
        return vec![0.0];
    }
    let steps = grid_steps(k, eps);
    let mut g: Vec<f64> = (0..=steps).map(|j| r_max * (1.0 + eps).powi(-(j as i32))).collect();
    g.push(eps * r_max / (2.0 * k as f64));
    g.push(0.0);
    g.sort_by(|a, b| b.total_cmp(a));
    g.dedup();
    g
}

/// Geometric-grid profiles: for every anchor `r_max` in the distinct distances
/// plus zero, all non-increasing k-tuples over the anchor's grid whose first
/// entry is `r_max`.
pub fn enumerate_grid(m: &MetricSpace, k: usize, eps: f64) -> Result<Vec<RadiusProfile>, ProfileError> {
    check_eps(eps)?;
    let mut anchors = m.distinct_distances();
    anchors.push(0.0);
    let mut out = Vec::new();
    for r_max in anchors {
        let grid = grid_values(r_max, k, eps);
        let mut tails = Vec::new();
        multisets(&grid, k - 1, 0, &mut Vec::with_capacity(k), &mut tails);
        for tail in tails {
            let mut t = Vec::with_capacity(k);
            t.push(r_max);
            t.extend(tail);
            out.push(t);
        }
    }
    Ok(finish(out))
}

fn binomial(n: usize, r: usize) -> u128 {
    let r = r.min(n.saturating_sub(r));
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Closed-form upper bound on the size of [`enumerate_grid`]'s output.
pub fn grid_size_bound(m: &MetricSpace, k: usize, eps: f64) -> u128 {
    let anchors = m.distinct_distances().len() as u128 + 1;
    let j = grid_steps(k, eps);
    anchors * binomial(j + 3 + k - 1, k)
}
