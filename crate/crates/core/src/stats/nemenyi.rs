use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alpha {
    P05,
    P10,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::P05 => 0.05,
            Alpha::P10 => 0.10,
        }
    }

    pub fn from_value(alpha: f64) -> Result<Self> {
        if (alpha - 0.05).abs() < 1e-12 {
            Ok(Alpha::P05)
        } else if (alpha - 0.10).abs() < 1e-12 {
            Ok(Alpha::P10)
        } else {
            Err(Error::Config(format!(
                "Nemenyi critical values are tabulated for alpha 0.05 and 0.10, got {alpha}"
            )))
        }
    }
}

// Two-tailed Nemenyi critical values q_alpha for k = 2..=10: studentized
// range quantiles with infinite degrees of freedom divided by sqrt(2), as
// tabulated in Demšar (2006), "Statistical Comparisons of Classifiers over
// Multiple Data Sets", JMLR 7, Table 5.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn studentized_range_critical(k: usize, alpha: Alpha) -> Result<f64> {
    if !(2..=10).contains(&k) {
        return Err(Error::Config(format!(
            "Nemenyi critical values are tabulated for 2 to 10 treatments, got {k}"
        )));
    }
    let table = match alpha {
        Alpha::P05 => &Q_05,
        Alpha::P10 => &Q_10,
    };
    Ok(table[k - 2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NemenyiResult {
    pub q_alpha: f64,
    pub critical_difference: f64,
    pub mean_ranks: Vec<f64>,
    /// `significant[i][j]` is true iff `|rank_i − rank_j| > critical_difference`.
    pub significant: Vec<Vec<bool>>,
}

impl NemenyiResult {
    pub fn is_significant(&self, i: usize, j: usize) -> bool {
        self.significant[i][j]
    }

    pub fn rank_gap(&self, i: usize, j: usize) -> f64 {
        (self.mean_ranks[i] - self.mean_ranks[j]).abs()
    }
}

/// Nemenyi post-hoc comparison of `k` treatments ranked over `n` blocks:
/// `CD = q_alpha · sqrt(k(k+1) / 6n)`.
pub fn nemenyi(mean_ranks: &[f64], n: usize, alpha: Alpha) -> Result<NemenyiResult> {
    let k = mean_ranks.len();
    let q_alpha = studentized_range_critical(k, alpha)?;
    if n == 0 {
        return Err(Error::Validation("Nemenyi test needs at least one block".into()));
    }
    let kf = k as f64;
    let cd = q_alpha * (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt();
    let significant = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| i != j && (mean_ranks[i] - mean_ranks[j]).abs() > cd)
                .collect()
        })
        .collect();
    Ok(NemenyiResult {
        q_alpha,
        critical_difference: cd,
        mean_ranks: mean_ranks.to_vec(),
        significant,
    })
}
