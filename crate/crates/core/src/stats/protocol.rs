//! Friedman + Nemenyi comparison of the three metric sets over classifier
//! evaluation results.
//!
//! Each `(project, classifier)` pair is a block and each metric set a
//! treatment. For every evaluation metric the output holds one Friedman row
//! and one Nemenyi row per pair of metric sets.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Deserialize;

use super::{friedman, nemenyi, Alpha};
use crate::error::{Error, Result};
use crate::metrics::MetricSet;

pub const EVALUATION_METRICS: [&str; 5] = ["auroc", "f1", "mcc", "precision", "recall"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EvaluationRecord {
    pub project: String,
    pub classifier: String,
    pub set_id: String,
    pub auroc: f64,
    pub f1: f64,
    pub mcc: f64,
    pub precision: f64,
    pub recall: f64,
}

impl EvaluationRecord {
    fn metric(&self, name: &str) -> f64 {
        match name {
            "auroc" => self.auroc,
            "f1" => self.f1,
            "mcc" => self.mcc,
            "precision" => self.precision,
            "recall" => self.recall,
            _ => unreachable!("unknown evaluation metric {name}"),
        }
    }
}

/// Reads a results CSV with header
/// `project,classifier,set_id,auroc,f1,mcc,precision,recall`.
pub fn load_evaluations<R: Read>(reader: R) -> Result<Vec<EvaluationRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<EvaluationRecord>().enumerate() {
        let rec: EvaluationRecord = rec.map_err(|e| Error::parse(i + 2, format!("results row: {e}")))?;
        rec.set_id.parse::<MetricSet>()?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRow {
    pub metric: String,
    /// `friedman` or `nemenyi`.
    pub test: String,
    /// `P+C,P+Co,P+C+Co` for Friedman, `A vs B` for Nemenyi.
    pub comparison: String,
    /// Chi-square statistic (Friedman) or mean-rank gap (Nemenyi).
    pub statistic: f64,
    /// Empty for Nemenyi rows.
    pub p_value: Option<f64>,
    pub critical_difference: Option<f64>,
    pub significant: bool,
}

pub fn run_protocol(records: &[EvaluationRecord], alpha: Alpha) -> Result<Vec<ProtocolRow>> {
    let sets = MetricSet::ALL;
    let mut blocks: BTreeMap<(&str, &str), [Option<&EvaluationRecord>; 3]> = BTreeMap::new();
    for rec in records {
        let set: MetricSet = rec.set_id.parse()?;
        let slot = sets.iter().position(|s| *s == set).unwrap();
        let entry = blocks
            .entry((rec.project.as_str(), rec.classifier.as_str()))
            .or_insert([None; 3]);
        if entry[slot].replace(rec).is_some() {
            return Err(Error::Validation(format!(
                "duplicate result for {}/{}/{}",
                rec.project, rec.classifier, rec.set_id
            )));
        }
    }
    let mut complete = Vec::with_capacity(blocks.len());
    for ((project, classifier), entry) in &blocks {
        let mut row = Vec::with_capacity(3);
        for (slot, set) in entry.iter().zip(sets) {
            row.push(
                slot.ok_or_else(|| Error::Validation(format!("missing {set} result for {project}/{classifier}")))?,
            );
        }
        complete.push(row);
    }

    let mut out = Vec::new();
    for metric in EVALUATION_METRICS {
        let scores: Vec<Vec<f64>> = complete
            .iter()
            .map(|b| b.iter().map(|r| r.metric(metric)).collect())
            .collect();
        let f = friedman(&scores)?;
        out.push(ProtocolRow {
            metric: metric.to_owned(),
            test: "friedman".to_owned(),
            comparison: sets.map(|s| s.as_str()).join(","),
            statistic: f.statistic,
            p_value: Some(f.p_value),
            critical_difference: None,
            significant: f.p_value < alpha.value(),
        });
        let mean_ranks: Vec<f64> = (0..sets.len())
            .map(|j| f.extra(&format!("mean_rank_{j}")).unwrap())
            .collect();
        let nem = nemenyi(&mean_ranks, f.n, alpha)?;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            out.push(ProtocolRow {
                metric: metric.to_owned(),
                test: "nemenyi".to_owned(),
                comparison: format!("{} vs {}", sets[i], sets[j]),
                statistic: nem.rank_gap(i, j),
                p_value: None,
                critical_difference: Some(nem.critical_difference),
                significant: nem.is_significant(i, j),
            });
        }
    }
    Ok(out)
}

/// CSV `metric,test,comparison,statistic,p_value,critical_difference,significant`.
pub fn write_protocol<W: Write>(rows: &[ProtocolRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "metric",
        "test",
        "comparison",
        "statistic",
        "p_value",
        "critical_difference",
        "significant",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.metric.as_str(),
            r.test.as_str(),
            r.comparison.as_str(),
            &r.statistic.to_string(),
            &opt(r.p_value),
            &opt(r.critical_difference),
            if r.significant { "true" } else { "false" },
        ])?;
    }
    w.flush()
}
