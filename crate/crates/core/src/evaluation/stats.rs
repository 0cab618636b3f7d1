//! Rank-sum test, false-discovery-rate adjustment and effect size.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Largest combined sample size for which the exact distribution is used.
pub const EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("sample is empty")]
pub struct EmptySample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of the first sample: pairs where a > b, ties counting one half.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

/// Midranks of the pooled sample, doubled so they stay integral.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && pooled[order[end + 1]] == pooled[order[start]] {
            end += 1;
        }
        // ranks start..=end (1-based start+1..=end+1), midrank doubled
        let doubled = (start + 1 + end + 1) as u64;
        for &k in &order[start..=end] {
            ranks[k] = doubled;
        }
        start = end + 1;
    }
    ranks
}

fn tie_sizes(pooled: &[f64]) -> Vec<usize> {
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        sizes.push(j - i + 1);
        i = j + 1;
    }
    sizes
}

/// Exact two-sided p: share of all size-`na` subsets of the pooled ranks
/// whose U is at least as far from its mean as the observed one.
fn exact_p(ranks: &[u64], na: usize, observed_2r: u64) -> f64 {
    let n = ranks.len();
    let nb = n - na;
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0f64; width]; na + 1];
    ways[0][0] = 1.0;
    for &r in ranks {
        for k in (1..=na).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let (from, to) = (&lower[k - 1], &mut upper[0]);
            for s in (r as usize..width).rev() {
                to[s] += from[s - r as usize];
            }
        }
    }
    // 2U = 2R - na(na+1); mean of 2U is na*nb
    let offset = (na * (na + 1)) as i64;
    let centre = (na * nb) as i64;
    let dev = |two_r: i64| ((two_r - offset) - centre).abs();
    let observed = dev(observed_2r as i64);
    let mut hit = 0.0;
    let mut total = 0.0;
    for (s, &w) in ways[na].iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        total += w;
        if dev(s as i64) >= observed {
            hit += w;
        }
    }
    (hit / total).min(1.0)
}

fn normal_p(u: f64, na: usize, nb: usize, ties: &[usize]) -> f64 {
    let (a, b) = (na as f64, nb as f64);
    let n = a + b;
    let mu = a * b / 2.0;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::standard();
    (2.0 * (1.0 - std.cdf(z))).min(1.0)
}

/// Two-sided Mann-Whitney U test.
///
/// Exact for combined sizes up to [`EXACT_LIMIT`], normal approximation with
/// tie and continuity correction above.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, EmptySample> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptySample);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let two_r: u64 = ranks[..a.len()].iter().sum();
    let na = a.len();
    let u = (two_r as f64 - (na * (na + 1)) as f64) / 2.0;
    let exact = pooled.len() <= EXACT_LIMIT;
    let p = if exact {
        exact_p(&ranks, na, two_r)
    } else {
        normal_p(u, na, b.len(), &tie_sizes(&pooled))
    };
    Ok(MannWhitney { u, p, exact })
}

/// Benjamini-Hochberg step-up adjustment; output is in input order.
pub fn benjamini_hochberg(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        let value = p[i] * (m as f64 / (rank + 1) as f64);
        running = running.min(value).min(1.0);
        adjusted[i] = running;
    }
    adjusted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn of(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.33 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        })
    }
}

/// Cliff's delta: P(a > b) - P(a < b) over all pairs.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<(f64, Magnitude), EmptySample> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptySample);
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut diff: i64 = 0;
    for &x in a {
        let below = sorted.partition_point(|&y| y < x) as i64;
        let not_above = sorted.partition_point(|&y| y <= x) as i64;
        let above = sorted.len() as i64 - not_above;
        diff += below - above;
    }
    let delta = diff as f64 / (a.len() * b.len()) as f64;
    Ok((delta, Magnitude::of(delta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_statistic() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.exact);
        // only 2 of the 6 splits are as extreme
        assert!((r.p - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn constant_samples() {
        let r = mann_whitney_u(&[3.0; 4], &[3.0; 5]).unwrap();
        assert_eq!(r.p, 1.0);
        let r = mann_whitney_u(&[3.0; 20], &[3.0; 20]).unwrap();
        assert!(!r.exact);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn normal_branch_is_sane() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (100..120).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.p < 1e-6);
    }

    #[test]
    fn empty() {
        assert_eq!(mann_whitney_u(&[], &[1.0]), Err(EmptySample));
        assert_eq!(cliffs_delta(&[1.0], &[]), Err(EmptySample));
    }

    #[test]
    fn bh() {
        let adj = benjamini_hochberg(&[0.01, 0.04]);
        assert!((adj[0] - 0.02).abs() < 1e-15 && (adj[1] - 0.04).abs() < 1e-15);
        assert_eq!(benjamini_hochberg(&[0.3]), vec![0.3]);
        assert_eq!(benjamini_hochberg(&[0.2, 0.2, 0.2]), vec![0.2; 3]);
        assert_eq!(benjamini_hochberg(&[0.04, 0.01]), vec![0.04, 0.02]);
        assert_eq!(benjamini_hochberg(&[0.9, 0.8]), vec![0.9, 0.9]);
        assert!(benjamini_hochberg(&[]).is_empty());
    }

    #[test]
    fn cliff() {
        assert_eq!(cliffs_delta(&[1.0, 3.0], &[2.0]).unwrap(), (0.0, Magnitude::Negligible));
        assert_eq!(cliffs_delta(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), (1.0, Magnitude::Large));
        assert_eq!(cliffs_delta(&[1.0, 1.0], &[1.0]).unwrap().0, 0.0);
        assert_eq!(Magnitude::of(0.2), Magnitude::Small);
        assert_eq!(Magnitude::of(-0.4), Magnitude::Medium);
    }
}
