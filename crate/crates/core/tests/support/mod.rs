//! Test fixtures and independent oracles. Nothing here calls into the
//! library's entropy, graph or statistics code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use cochange::ingest::{read_change_log, Commit, FileChange};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn toy_commits() -> Vec<Commit> {
    read_change_log(&fixture("toy/toy.log")).expect("toy fixture parses")
}

pub fn commit_touching(id: usize, ts: i64, author: &str, paths: &[String]) -> Commit {
    Commit {
        id: format!("{id:08x}"),
        timestamp: ts,
        author: author.to_owned(),
        parents: vec![],
        changes: paths.iter().map(|p| FileChange::new(p.as_str(), 1, 1)).collect(),
    }
}

/// `-Σ p ln p / ln 2` over the positive entries.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>() / std::f64::consts::LN_2
}

pub struct OracleReport {
    pub system: f64,
    pub probability: BTreeMap<String, f64>,
    pub per_file: BTreeMap<String, f64>,
}

fn all_files(commits: &[Commit]) -> BTreeSet<String> {
    commits
        .iter()
        .flat_map(|c| c.changes.iter().map(|ch| ch.path.clone()))
        .collect()
}

fn report_from_weights(weights: BTreeMap<String, f64>) -> OracleReport {
    let total: f64 = weights.values().sum();
    let probability: BTreeMap<String, f64> = weights.into_iter().map(|(k, w)| (k, w / total)).collect();
    let system = entropy_bits(&probability.values().copied().collect::<Vec<_>>());
    let per_file = probability.iter().map(|(k, p)| (k.clone(), p * system)).collect();
    OracleReport {
        system,
        probability,
        per_file,
    }
}

/// Change-entropy oracle: counts, for every file, the commits touching it.
pub fn oracle_change_report(commits: &[Commit]) -> OracleReport {
    let weights = all_files(commits)
        .into_iter()
        .map(|f| {
            let touches = commits
                .iter()
                .filter(|c| c.changes.iter().any(|ch| ch.path == f))
                .count();
            (f, touches as f64)
        })
        .collect();
    report_from_weights(weights)
}

fn cochanged(commits: &[Commit], a: &str, b: &str) -> bool {
    commits
        .iter()
        .any(|c| c.changes.iter().any(|ch| ch.path == a) && c.changes.iter().any(|ch| ch.path == b))
}

/// Co-change oracle: tests every ordered pair of distinct files for a
/// shared commit and takes degrees from that adjacency.
pub fn oracle_cochange_report(commits: &[Commit]) -> Option<OracleReport> {
    let files: Vec<String> = all_files(commits).into_iter().collect();
    let mut degrees = BTreeMap::new();
    for a in &files {
        let d = files.iter().filter(|b| *b != a && cochanged(commits, a, b)).count();
        degrees.insert(a.clone(), d as f64);
    }
    if degrees.values().all(|d| *d == 0.0) {
        return None;
    }
    Some(report_from_weights(degrees))
}

/// Textbook computational formula
/// `(nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²))`.
pub fn oracle_pearson_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Mid-ranks by counting: `1 + #less + (#equal − 1)/2`.
pub fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson_r(&oracle_ranks(x), &oracle_ranks(y))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Two-sided Student-t tail by Simpson quadrature of the density on `[0, |t|]`.
pub fn oracle_t_two_sided_p(t: f64, df: f64) -> f64 {
    let norm = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let pdf = |x: f64| norm * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let upper = t.abs();
    let steps = 20_000;
    let h = upper / steps as f64;
    let mut s = pdf(0.0) + pdf(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(i as f64 * h);
    }
    (1.0 - 2.0 * s * h / 3.0).max(0.0)
}

pub fn oracle_correlation_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    oracle_t_two_sided_p(r * (df / (1.0 - r * r)).sqrt(), df)
}

fn tie_term(blocks: &[Vec<f64>]) -> f64 {
    let mut ties = 0.0;
    for b in blocks {
        let distinct: BTreeSet<u64> = b.iter().map(|v| v.to_bits()).collect();
        for d in distinct {
            let t = b.iter().filter(|v| v.to_bits() == d).count() as f64;
            ties += t * t * t - t;
        }
    }
    ties
}

/// Tie-corrected Friedman statistic from per-treatment rank sums.
fn friedman_q_from_sums(sums: &[f64], n: f64, ties: f64) -> f64 {
    let k = sums.len() as f64;
    let mean = n * (k + 1.0) / 2.0;
    let ss: f64 = sums.iter().map(|s| (s - mean) * (s - mean)).sum();
    12.0 * ss / (n * k * (k + 1.0)) / (1.0 - ties / (n * k * (k * k - 1.0)))
}

pub fn oracle_friedman_statistic(scores: &[Vec<f64>]) -> f64 {
    let mut sums = vec![0.0; scores[0].len()];
    for b in scores {
        for (j, r) in oracle_ranks(b).into_iter().enumerate() {
            sums[j] += r;
        }
    }
    friedman_q_from_sums(&sums, scores.len() as f64, tie_term(scores))
}

fn all_orderings(block: &[f64]) -> Vec<Vec<f64>> {
    if block.len() == 1 {
        return vec![block.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..block.len() {
        let mut rest = block.to_vec();
        let head = rest.remove(i);
        for mut tail in all_orderings(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Exhaustive permutation p-value of the Friedman statistic: every block's
/// scores are reassigned to treatments in all `k!` ways, independently.
pub fn oracle_friedman_permutation_p(scores: &[Vec<f64>]) -> f64 {
    let n = scores.len() as f64;
    let k = scores[0].len();
    // reassignment does not change a block's tie structure
    let ties = tie_term(scores);
    let observed = oracle_friedman_statistic(scores);
    let ranked: Vec<Vec<Vec<f64>>> = scores
        .iter()
        .map(|b| all_orderings(b).iter().map(|o| oracle_ranks(o)).collect())
        .collect();
    let mut idx = vec![0usize; scores.len()];
    let (mut hits, mut total) = (0u64, 0u64);
    let mut sums = vec![0.0; k];
    loop {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (b, i) in ranked.iter().zip(&idx) {
            for (s, r) in sums.iter_mut().zip(&b[*i]) {
                *s += r;
            }
        }
        total += 1;
        if friedman_q_from_sums(&sums, n, ties) >= observed - 1e-9 {
            hits += 1;
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return hits as f64 / total as f64;
            }
            idx[pos] += 1;
            if idx[pos] < ranked[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
