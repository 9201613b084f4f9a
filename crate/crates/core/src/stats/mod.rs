//! Correlation and rank-based significance tests.

mod correlation;
mod friedman;
mod nemenyi;
mod protocol;

use std::collections::BTreeMap;
use std::fmt;

pub use correlation::{
    correlate_metric_vs_defects, pearson, spearman, spearman_exact, EntropyMetric, SPEARMAN_EXACT_MAX_N,
};
pub use friedman::{friedman, friedman_asymptotic, FRIEDMAN_EXACT_MAX_PERMUTATIONS};
pub use nemenyi::{nemenyi, studentized_range_critical, Alpha, NemenyiResult};
pub use protocol::{load_evaluations, run_protocol, write_protocol, EvaluationRecord, ProtocolRow, EVALUATION_METRICS};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pearson,
    Spearman,
    Friedman,
    Nemenyi,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pearson => "pearson",
            Method::Spearman => "spearman",
            Method::Friedman => "friedman",
            Method::Nemenyi => "nemenyi",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: Method,
    /// Method-specific values such as `df` or `mean_rank_<j>`.
    pub extras: BTreeMap<String, f64>,
}

impl StatResult {
    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extras.get(key).copied()
    }
}

/// 1-based ranks with ties sharing the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let mean = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = mean;
        }
        i = j;
    }
    ranks
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Validation(format!("{name} contains non-finite value {v}"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_share_mean_rank() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[3.0, 3.0, 3.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(average_ranks(&[5.0, -1.0, 0.0]), vec![3.0, 1.0, 2.0]);
        assert!(average_ranks(&[]).is_empty());
    }
}
