//! Unweighted co-change graph over file paths.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::entropy::Distribution;
use crate::error::{Error, Result};
use crate::ingest::Commit;

/// Undirected simple graph whose edges join files modified in the same
/// commit. Each edge also records how many commits co-changed the pair;
/// the count is diagnostic and does not affect degrees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoChangeGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
    // keyed by (smaller, larger) path
    counts: BTreeMap<(String, String), u64>,
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl CoChangeGraph {
    pub fn build<'a>(commits: impl IntoIterator<Item = &'a Commit>) -> Self {
        let mut g = Self::default();
        for commit in commits {
            let paths: BTreeSet<&str> = commit.paths().collect();
            for p in &paths {
                g.adjacency.entry((*p).to_owned()).or_default();
            }
            let paths: Vec<&str> = paths.into_iter().collect();
            for (i, a) in paths.iter().enumerate() {
                for b in &paths[i + 1..] {
                    *g.counts.entry(edge_key(a, b)).or_insert(0) += 1;
                    g.adjacency.get_mut(*a).unwrap().insert((*b).to_owned());
                    g.adjacency.get_mut(*b).unwrap().insert((*a).to_owned());
                }
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.counts.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn contains(&self, node: &str) -> bool {
        self.adjacency.contains_key(node)
    }

    /// Edges as canonical `(a, b)` pairs with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.counts.iter().map(|((a, b), n)| (a.as_str(), b.as_str(), *n))
    }

    pub fn co_change_count(&self, a: &str, b: &str) -> Option<u64> {
        self.counts.get(&edge_key(a, b)).copied()
    }

    pub fn neighbors(&self, node: &str) -> Result<impl Iterator<Item = &str>> {
        self.adjacency
            .get(node)
            .map(|n| n.iter().map(String::as_str))
            .ok_or_else(|| Error::Lookup(format!("file {node} is not in the co-change graph")))
    }

    pub fn degree(&self, node: &str) -> Result<usize> {
        self.adjacency
            .get(node)
            .map(BTreeSet::len)
            .ok_or_else(|| Error::Lookup(format!("file {node} is not in the co-change graph")))
    }

    /// Sum of co-change counts over the edges incident to `node`.
    pub fn weighted_degree(&self, node: &str) -> Result<u64> {
        let neighbors = self.neighbors(node)?;
        Ok(neighbors.map(|n| self.co_change_count(node, n).unwrap_or(0)).sum())
    }

    /// Degree-based co-change probabilities `deg(k) / 2|E|`. Isolated
    /// nodes get probability 0.
    pub fn cochange_probabilities(&self) -> Result<Distribution> {
        if self.counts.is_empty() {
            return Err(Error::Degenerate(
                "co-change graph has no edges; co-change probabilities are undefined".into(),
            ));
        }
        Ok(Distribution::from_weights(
            self.adjacency.iter().map(|(k, n)| (k.clone(), n.len() as u64)),
        ))
    }

    /// Weighted-degree probabilities `d_w(k) / Σ d_w(i)`.
    pub fn weighted_cochange_probabilities(&self) -> Result<Distribution> {
        if self.counts.is_empty() {
            return Err(Error::Degenerate(
                "co-change graph has no edges; weighted co-change probabilities are undefined".into(),
            ));
        }
        let mut weights: BTreeMap<String, u64> = self.adjacency.keys().map(|k| (k.clone(), 0)).collect();
        for ((a, b), n) in &self.counts {
            *weights.get_mut(a).unwrap() += n;
            *weights.get_mut(b).unwrap() += n;
        }
        Ok(Distribution::from_weights(weights))
    }

    /// Writes the edge list as CSV `file_a,file_b,count`.
    pub fn write_edge_list<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["file_a", "file_b", "count"])?;
        for (a, b, n) in self.edges() {
            w.write_record([a, b, &n.to_string()])?;
        }
        w.flush()
    }
}
