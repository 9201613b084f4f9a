use std::collections::{BTreeMap, HashMap};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{average_ranks, check_finite, Method, StatResult};
use crate::error::{Error, Result};

/// Designs with at most this many within-block permutations, `(k!)^n`, get
/// an exact permutation p-value instead of the chi-square approximation.
pub const FRIEDMAN_EXACT_MAX_PERMUTATIONS: f64 = 1e8;

struct Ranked {
    n: usize,
    k: usize,
    ranks: Vec<Vec<f64>>,
    rank_sums: Vec<f64>,
    statistic: f64,
}

fn rank_blocks(scores: &[Vec<f64>]) -> Result<Ranked> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::Validation(format!(
            "Friedman test needs at least 2 blocks, got {n}"
        )));
    }
    let k = scores[0].len();
    if k < 3 {
        return Err(Error::Validation(format!(
            "Friedman test needs at least 3 treatments, got {k}"
        )));
    }
    for (i, block) in scores.iter().enumerate() {
        if block.len() != k {
            return Err(Error::Validation(format!(
                "block {i} has {} treatments, expected {k}",
                block.len()
            )));
        }
        check_finite(&format!("block {i}"), block)?;
    }

    let ranks: Vec<Vec<f64>> = scores.iter().map(|b| average_ranks(b)).collect();
    let mut rank_sums = vec![0.0; k];
    for block in &ranks {
        for (j, r) in block.iter().enumerate() {
            rank_sums[j] += r;
        }
    }

    // tie correction 1 − Σ(t³ − t) / (n k (k² − 1))
    let mut tie_term = 0.0;
    for block in &ranks {
        let mut groups: HashMap<u64, f64> = HashMap::new();
        for r in block {
            *groups.entry(r.to_bits()).or_insert(0.0) += 1.0;
        }
        tie_term += groups.values().map(|t| t * t * t - t).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let correction = 1.0 - tie_term / (nf * kf * (kf * kf - 1.0));
    if correction <= 1e-12 {
        return Err(Error::Degenerate(
            "every block ties all treatments; Friedman statistic undefined".into(),
        ));
    }
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0);
    Ok(Ranked {
        n,
        k,
        ranks,
        rank_sums,
        statistic: (raw / correction).max(0.0),
    })
}

fn chi_square_p(statistic: f64, k: usize) -> f64 {
    ChiSquared::new((k - 1) as f64)
        .expect("k >= 3")
        .sf(statistic)
        .clamp(0.0, 1.0)
}

/// Exact upper-tail probability of the rank-sum statistic when each block's
/// ranks are permuted uniformly and independently. Works on doubled ranks so
/// mid-ranks stay integral.
fn exact_p(ranked: &Ranked) -> f64 {
    let k = ranked.k;
    let observed: f64 = ranked.rank_sums.iter().map(|r| 4.0 * r * r).sum();

    let mut dist: HashMap<Vec<u32>, f64> = HashMap::from([(vec![0u32; k], 1.0)]);
    for block in &ranked.ranks {
        let doubled: Vec<u32> = block.iter().map(|r| (2.0 * r).round() as u32).collect();
        let perms = permutations(&doubled);
        let weight = 1.0 / perms.len() as f64;
        let mut next: HashMap<Vec<u32>, f64> = HashMap::with_capacity(dist.len() * perms.len());
        for (sums, p) in &dist {
            for perm in &perms {
                let key: Vec<u32> = sums.iter().zip(perm).map(|(s, r)| s + r).collect();
                *next.entry(key).or_insert(0.0) += p * weight;
            }
        }
        dist = next;
    }

    let tol = 1e-9 * observed.max(1.0);
    dist.iter()
        .filter(|(sums, _)| {
            let sq: f64 = sums.iter().map(|s| (*s as f64) * (*s as f64)).sum();
            sq >= observed - tol
        })
        .map(|(_, p)| p)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn permutation_count(n: usize, k: usize) -> f64 {
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    factorial.powi(n as i32)
}

fn build(ranked: &Ranked, p_value: f64, chi_p: f64, exact: bool) -> StatResult {
    let mut extras = BTreeMap::new();
    extras.insert("df".to_owned(), (ranked.k - 1) as f64);
    extras.insert("chi2_p_value".to_owned(), chi_p);
    extras.insert("exact".to_owned(), if exact { 1.0 } else { 0.0 });
    for (j, r) in ranked.rank_sums.iter().enumerate() {
        extras.insert(format!("mean_rank_{j}"), r / ranked.n as f64);
    }
    StatResult {
        statistic: ranked.statistic,
        p_value,
        n: ranked.n,
        method: Method::Friedman,
        extras,
    }
}

/// Friedman test over `scores[block][treatment]`.
///
/// The statistic is the tie-corrected chi-square form on `k − 1` degrees of
/// freedom. Small designs (at most [`FRIEDMAN_EXACT_MAX_PERMUTATIONS`]
/// within-block permutations) report the exact permutation p-value; larger
/// ones use the chi-square upper tail. Both are kept in `extras`
/// (`chi2_p_value`, `exact`), along with `mean_rank_<j>` per treatment.
pub fn friedman(scores: &[Vec<f64>]) -> Result<StatResult> {
    let ranked = rank_blocks(scores)?;
    let chi_p = chi_square_p(ranked.statistic, ranked.k);
    if permutation_count(ranked.n, ranked.k) <= FRIEDMAN_EXACT_MAX_PERMUTATIONS {
        let p = exact_p(&ranked);
        Ok(build(&ranked, p, chi_p, true))
    } else {
        Ok(build(&ranked, chi_p, chi_p, false))
    }
}

/// Friedman test that always uses the chi-square approximation.
pub fn friedman_asymptotic(scores: &[Vec<f64>]) -> Result<StatResult> {
    let ranked = rank_blocks(scores)?;
    let chi_p = chi_square_p(ranked.statistic, ranked.k);
    Ok(build(&ranked, chi_p, chi_p, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        let scores: Vec<Vec<f64>> = (0..10).map(|_| vec![0.1, 0.5, 0.9]).collect();
        let r = friedman_asymptotic(&scores).unwrap();
        assert!((r.statistic - 20.0).abs() < 1e-12);
        assert!(r.p_value < 1e-4);
        assert_eq!(r.extra("mean_rank_2"), Some(3.0));
        // exact: only one of 6 orderings per block reaches the maximum
        let exact = friedman(&scores[..4]).unwrap();
        assert_eq!(exact.extra("exact"), Some(1.0));
        assert!((exact.p_value - 6.0 / 6f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn constant_blocks_are_degenerate() {
        let scores = vec![vec![1.0; 3]; 5];
        assert!(matches!(friedman(&scores), Err(Error::Degenerate(_))));
    }

    #[test]
    fn shape_validation() {
        assert!(friedman(&[vec![1.0, 2.0, 3.0]]).is_err());
        assert!(friedman(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(friedman(&[vec![1.0, 2.0, 3.0], vec![2.0, 1.0]]).is_err());
    }

    #[test]
    fn ties_raise_the_statistic() {
        let scores = vec![vec![1.0, 1.0, 2.0], vec![1.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]];
        let r = friedman(&scores).unwrap();
        // rank sums 4, 5, 9; raw = 12/36·122 − 36 = 4.667; c = 1 − 12/72
        assert!((r.statistic - (14.0 / 3.0) / (5.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn large_designs_use_chi_square() {
        let scores: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 3) as f64, ((i + 1) % 3) as f64, 2.5])
            .collect();
        let r = friedman(&scores).unwrap();
        assert_eq!(r.extra("exact"), Some(0.0));
        assert_eq!(Some(r.p_value), r.extra("chi2_p_value"));
    }
}
