//! Defect labels and train/test dataset assembly.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ingest::{ReleaseRole, ReleaseSpec};
use crate::metrics::{build_metric_set, FileMetricsRow, MetricSet, MetricTable};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct DefectLabelRecord {
    pub release: String,
    pub file: String,
    pub defect_count: u64,
}

/// Reads a label CSV with header `release,file,defect_count`.
pub fn load_labels<R: Read>(reader: R) -> Result<Vec<DefectLabelRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Validation(format!("label file: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["release", "file", "defect_count"] {
        return Err(Error::Validation(format!(
            "label file header must be `release,file,defect_count`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, format!("label row: {e}")))?;
        let count = rec.get(2).unwrap_or_default();
        let defect_count = match count.parse::<i64>() {
            Ok(n) if n < 0 => return Err(Error::Validation(format!("line {line}: negative defect count {n}"))),
            Ok(n) => n as u64,
            Err(_) => return Err(Error::parse(line, format!("invalid defect count {count:?}"))),
        };
        let record = DefectLabelRecord {
            release: rec.get(0).unwrap_or_default().to_owned(),
            file: rec.get(1).unwrap_or_default().to_owned(),
            defect_count,
        };
        if !seen.insert((record.release.clone(), record.file.clone())) {
            return Err(Error::Validation(format!(
                "line {line}: duplicate label for release {} file {}",
                record.release, record.file
            )));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<DefectLabelRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_labels(file).map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinOutcome {
    pub rows: Vec<FileMetricsRow>,
    /// Label records whose (release, file) has no metric row.
    pub orphans: Vec<DefectLabelRecord>,
}

/// Attaches defect counts to metric rows. Rows without a label record are
/// clean (count 0).
pub fn join_and_label(rows: Vec<FileMetricsRow>, labels: &[DefectLabelRecord]) -> JoinOutcome {
    let index: HashMap<(&str, &str), &DefectLabelRecord> = labels
        .iter()
        .map(|l| ((l.release.as_str(), l.file.as_str()), l))
        .collect();
    let mut used = BTreeSet::new();
    let rows = rows
        .into_iter()
        .map(|mut row| {
            let count = match index.get(&(row.release.as_str(), row.file.as_str())) {
                Some(l) => {
                    used.insert((l.release.clone(), l.file.clone()));
                    l.defect_count
                }
                None => 0,
            };
            row.defect_count = Some(count);
            row.label = Some(count > 0);
            row
        })
        .collect();
    let orphans = labels
        .iter()
        .filter(|l| !used.contains(&(l.release.clone(), l.file.clone())))
        .cloned()
        .collect();
    JoinOutcome { rows, orphans }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub train: MetricTable,
    pub test: MetricTable,
}

/// Splits labeled rows by release role: every train release is
/// concatenated (in release order) into the training table and the single
/// test release forms the test table.
pub fn emit_experiment(rows: &[FileMetricsRow], releases: &[ReleaseSpec], set: MetricSet) -> Result<Experiment> {
    let train: Vec<&ReleaseSpec> = releases.iter().filter(|r| r.role == ReleaseRole::Train).collect();
    let test: Vec<&ReleaseSpec> = releases.iter().filter(|r| r.role == ReleaseRole::Test).collect();
    if train.is_empty() {
        return Err(Error::Config("experiment needs at least one train release".into()));
    }
    let [test] = test.as_slice() else {
        return Err(Error::Config(format!(
            "experiment needs exactly one test release, found {}",
            test.len()
        )));
    };

    let rows_of = |name: &str| rows.iter().filter(|r| r.release == name).cloned().collect::<Vec<_>>();
    let train_rows: Vec<FileMetricsRow> = train.iter().flat_map(|r| rows_of(&r.name)).collect();
    let test_rows = rows_of(&test.name);
    if test_rows.is_empty() {
        return Err(Error::Config(format!("test release {} has no metric rows", test.name)));
    }
    Ok(Experiment {
        train: build_metric_set(train_rows, set),
        test: build_metric_set(test_rows, set),
    })
}
