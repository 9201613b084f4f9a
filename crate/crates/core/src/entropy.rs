//! Shannon entropy of change and co-change distributions, attributed to
//! individual files.
//!
//! The system entropy of a window is `H = -Σ p_k log2 p_k` over a
//! probability distribution on files; each file receives `p_k · H`. The
//! change measure takes `p_k` from how often a file was touched, the
//! co-change measure from the file's degree in the co-change graph.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::CoChangeGraph;
use crate::ingest::Commit;

const SUM_TOLERANCE: f64 = 1e-9;

/// A distribution over files held as integer weights, so probabilities can
/// be compared exactly as rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    weights: BTreeMap<String, u64>,
    total: u64,
}

impl Distribution {
    pub fn from_weights<I, K>(weights: I) -> Self
    where
        I: IntoIterator<Item = (K, u64)>,
        K: Into<String>,
    {
        let weights: BTreeMap<String, u64> = weights.into_iter().map(|(k, w)| (k.into(), w)).collect();
        let total = weights.values().sum();
        Self { weights, total }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, key: &str) -> u64 {
        self.weights.get(key).copied().unwrap_or(0)
    }

    /// Probability of `key`; 0 for keys outside the support.
    pub fn probability(&self, key: &str) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.weight(key) as f64 / self.total as f64
    }

    /// Exact probability of `key` in lowest terms.
    pub fn ratio(&self, key: &str) -> Ratio<u64> {
        Ratio::new(self.weight(key), self.total.max(1))
    }

    pub fn ratios(&self) -> BTreeMap<String, Ratio<u64>> {
        self.weights.keys().map(|k| (k.clone(), self.ratio(k))).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.weights.keys().map(move |k| (k.as_str(), self.probability(k)))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.iter().map(|(_, p)| p).collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(k, p)| (k.to_owned(), p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Change,
    Cochange,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::Change, Measure::Cochange];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Change => "change",
            Measure::Cochange => "cochange",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "change" => Ok(Measure::Change),
            "cochange" => Ok(Measure::Cochange),
            other => Err(Error::Config(format!(
                "unknown entropy measure {other:?} (expected change or cochange)"
            ))),
        }
    }
}

/// Shannon entropy in bits, with `0 · log2 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64> {
    if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Validation(format!("invalid probability {bad}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::Validation(format!("probabilities sum to {sum}, expected 1")));
    }
    let h: f64 = probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.log2()).sum();
    // -0.0 and rounding below zero for one-point distributions
    Ok(h.max(0.0))
}

/// Per-file probability of being touched: the number of commits touching
/// the file over the total number of file touches in the window.
pub fn change_probabilities<'a>(commits: impl IntoIterator<Item = &'a Commit>) -> Result<Distribution> {
    let mut touches: BTreeMap<&str, u64> = BTreeMap::new();
    for c in commits {
        for p in c.paths() {
            *touches.entry(p).or_insert(0) += 1;
        }
    }
    if touches.is_empty() {
        return Err(Error::Degenerate(
            "window has no file changes; change probabilities are undefined".into(),
        ));
    }
    Ok(Distribution::from_weights(touches))
}

pub fn attribute_entropy(system_entropy: f64, probs: &Distribution) -> BTreeMap<String, f64> {
    probs.iter().map(|(k, p)| (k.to_owned(), p * system_entropy)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub measure: Measure,
    pub system_entropy: f64,
    pub probabilities: BTreeMap<String, f64>,
    pub per_file: BTreeMap<String, f64>,
}

impl EntropyReport {
    pub fn from_distribution(measure: Measure, dist: &Distribution) -> Result<Self> {
        let system_entropy = shannon_entropy(&dist.probabilities())?;
        Ok(Self {
            measure,
            system_entropy,
            probabilities: dist.to_map(),
            per_file: attribute_entropy(system_entropy, dist),
        })
    }

    /// The all-zero report used when a window has no co-change edges.
    pub fn zero<'a>(measure: Measure, files: impl IntoIterator<Item = &'a str>) -> Self {
        let zeros: BTreeMap<String, f64> = files.into_iter().map(|f| (f.to_owned(), 0.0)).collect();
        Self {
            measure,
            system_entropy: 0.0,
            probabilities: zeros.clone(),
            per_file: zeros,
        }
    }

    pub fn file_entropy(&self, file: &str) -> Option<f64> {
        self.per_file.get(file).copied()
    }

    /// CSV `file,measure,probability,entropy_bits`, preceded by a comment
    /// row carrying the system entropy.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# measure={},system_entropy={}", self.measure, self.system_entropy)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["file", "measure", "probability", "entropy_bits"])?;
        for (file, h) in &self.per_file {
            let p = self.probabilities.get(file).copied().unwrap_or(0.0);
            w.write_record([file.as_str(), self.measure.as_str(), &p.to_string(), &h.to_string()])?;
        }
        w.flush()
    }
}

/// Entropy report for one window. `window` names the window in errors.
pub fn entropy_report(
    window: &str,
    commits: &[Commit],
    graph: &CoChangeGraph,
    measure: Measure,
) -> Result<EntropyReport> {
    let dist = match measure {
        Measure::Change => change_probabilities(commits),
        Measure::Cochange => graph.cochange_probabilities(),
    };
    dist.and_then(|d| EntropyReport::from_distribution(measure, &d))
        .map_err(|e| match e {
            Error::Degenerate(m) => Error::Degenerate(format!("window {window}, {measure} entropy: {m}")),
            other => other,
        })
}
