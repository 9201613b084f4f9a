//! Per-(release, file) process metrics.
//!
//! The metric suite follows Rahman and Devanbu's process metrics:
//!
//! | column | meaning |
//! |--------|---------|
//! | `comm` | commits touching the file in the release window |
//! | `adev` | distinct authors of those commits |
//! | `ddev` | distinct authors who ever touched the file up to the window end |
//! | `add`, `del` | lines added / deleted as a fraction of the file's window churn |
//! | `own` | largest single-author share of the file's window commits |
//! | `minor` | authors holding less than 5% of the file's window commits |
//! | `sctr` | change entropy attributed to the file |
//! | `cce` | co-change graph entropy attributed to the file |
//! | `nadev`, `nddev`, `ncomm`, `nsctr` | means of the base metric over co-change neighbors |
//! | `oexp` | experience of the file's owner |
//! | `exp` | geometric mean of the experience of the file's authors |
//!
//! An author's experience is their share of all project commits made up to
//! the window end.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::entropy::{entropy_report, EntropyReport, Measure};
use crate::error::{Error, Result};
use crate::graph::CoChangeGraph;
use crate::ingest::{ChangeHistory, Commit, ReleaseSpec};

/// Authors below this share of a file's commits count as minor contributors.
pub const MINOR_CONTRIBUTOR_SHARE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FileMetricsRow {
    pub release: String,
    pub file: String,
    pub comm: u64,
    pub adev: u64,
    pub ddev: u64,
    pub add: f64,
    pub del: f64,
    pub own: f64,
    pub minor: u64,
    pub sctr: f64,
    pub cce: f64,
    pub nadev: f64,
    pub nddev: f64,
    pub ncomm: f64,
    pub nsctr: f64,
    /// Neighbor mean of `cce`; stands in for `nsctr` in the P+Co set.
    pub ncce: f64,
    pub oexp: f64,
    pub exp: f64,
    pub defect_count: Option<u64>,
    pub label: Option<bool>,
}

/// Everything derived from one release window.
#[derive(Debug, Clone)]
pub struct WindowAnalysis {
    pub release: ReleaseSpec,
    pub commits: Vec<Commit>,
    pub graph: CoChangeGraph,
    pub change: EntropyReport,
    pub cochange: EntropyReport,
}

impl WindowAnalysis {
    /// Builds the graph and both entropy reports. Windows without file
    /// changes or without co-change edges get all-zero reports and a
    /// warning instead of an error.
    pub fn new(release: ReleaseSpec, commits: Vec<Commit>) -> Result<Self> {
        let graph = CoChangeGraph::build(&commits);
        let report = |measure| match entropy_report(&release.name, &commits, &graph, measure) {
            Err(Error::Degenerate(msg)) => {
                log::warn!("{msg}; using zero {measure} entropy");
                Ok(EntropyReport::zero(measure, graph.nodes()))
            }
            other => other,
        };
        let change = report(Measure::Change)?;
        let cochange = report(Measure::Cochange)?;
        Ok(Self {
            release,
            commits,
            graph,
            change,
            cochange,
        })
    }

    pub fn report(&self, measure: Measure) -> &EntropyReport {
        match measure {
            Measure::Change => &self.change,
            Measure::Cochange => &self.cochange,
        }
    }

    pub fn files(&self) -> impl Iterator<Item = &str> {
        self.graph.nodes()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct BaseMetrics {
    comm: u64,
    adev: u64,
    ddev: u64,
    add: f64,
    del: f64,
    own: f64,
    minor: u64,
    sctr: f64,
    cce: f64,
    oexp: f64,
    exp: f64,
}

/// Author experience up to the window end.
struct Experience {
    share: HashMap<String, f64>,
}

impl Experience {
    fn new(history: &[Commit]) -> Self {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for c in history {
            *counts.entry(c.author.as_str()).or_insert(0) += 1;
        }
        let total = history.len().max(1) as f64;
        Self {
            share: counts
                .into_iter()
                .map(|(a, n)| (a.to_owned(), n as f64 / total))
                .collect(),
        }
    }

    fn of(&self, author: &str) -> f64 {
        self.share.get(author).copied().unwrap_or(0.0)
    }
}

fn base_metrics(window: &WindowAnalysis, file: &str, history: &[Commit], experience: &Experience) -> BaseMetrics {
    let mut comm = 0u64;
    let mut added = 0u64;
    let mut deleted = 0u64;
    let mut touches: BTreeMap<&str, u64> = BTreeMap::new();
    for c in &window.commits {
        if let Some(ch) = c.changes.iter().find(|ch| ch.path == file) {
            comm += 1;
            added += ch.lines_added;
            deleted += ch.lines_deleted;
            *touches.entry(c.author.as_str()).or_insert(0) += 1;
        }
    }

    let ddev = history
        .iter()
        .filter(|c| c.touches(file))
        .map(|c| c.author.as_str())
        .collect::<BTreeSet<_>>()
        .len() as u64;

    let churn = added + deleted;
    let (add, del) = if churn == 0 {
        (0.0, 0.0)
    } else {
        (added as f64 / churn as f64, deleted as f64 / churn as f64)
    };

    // BTreeMap order makes the lexicographically smallest author win ties
    let (owner, owner_touches) = touches
        .iter()
        .fold(("", 0u64), |best, (a, n)| if *n > best.1 { (a, *n) } else { best });
    let share = |n: u64| if comm == 0 { 0.0 } else { n as f64 / comm as f64 };
    let minor = touches
        .values()
        .filter(|n| share(**n) < MINOR_CONTRIBUTOR_SHARE)
        .count() as u64;

    let positive: Vec<f64> = touches.keys().map(|a| experience.of(a)).filter(|e| *e > 0.0).collect();
    let exp = if positive.is_empty() {
        0.0
    } else {
        (positive.iter().map(|e| e.ln()).sum::<f64>() / positive.len() as f64).exp()
    };

    BaseMetrics {
        comm,
        adev: touches.len() as u64,
        ddev,
        add,
        del,
        own: share(owner_touches),
        minor,
        sctr: window.change.file_entropy(file).unwrap_or(0.0),
        cce: window.cochange.file_entropy(file).unwrap_or(0.0),
        oexp: if owner.is_empty() { 0.0 } else { experience.of(owner) },
        exp,
    }
}

fn assemble(window: &WindowAnalysis, file: &str, bases: &HashMap<&str, BaseMetrics>) -> FileMetricsRow {
    let base = &bases[file];
    let neighbors: Vec<&BaseMetrics> = window
        .graph
        .neighbors(file)
        .map(|it| it.map(|n| &bases[n]).collect())
        .unwrap_or_default();
    let mean = |f: fn(&BaseMetrics) -> f64| {
        if neighbors.is_empty() {
            0.0
        } else {
            neighbors.iter().map(|b| f(b)).sum::<f64>() / neighbors.len() as f64
        }
    };
    FileMetricsRow {
        release: window.release.name.clone(),
        file: file.to_owned(),
        comm: base.comm,
        adev: base.adev,
        ddev: base.ddev,
        add: base.add,
        del: base.del,
        own: base.own,
        minor: base.minor,
        sctr: base.sctr,
        cce: base.cce,
        nadev: mean(|b| b.adev as f64),
        nddev: mean(|b| b.ddev as f64),
        ncomm: mean(|b| b.comm as f64),
        nsctr: mean(|b| b.sctr),
        ncce: mean(|b| b.cce),
        oexp: base.oexp,
        exp: base.exp,
        defect_count: None,
        label: None,
    }
}

/// Metrics for one file of a window. `history` supplies the project-wide
/// commits used for `ddev` and experience; only commits up to the window end
/// are consulted.
pub fn compute_row(window: &WindowAnalysis, file: &str, history: &ChangeHistory) -> Result<FileMetricsRow> {
    if !window.graph.contains(file) {
        return Err(Error::Lookup(format!(
            "file {file} is not changed in release window {}",
            window.release.name
        )));
    }
    let past = history.commits_until(window.release.end_time);
    let experience = Experience::new(past);
    let mut bases = HashMap::new();
    for f in std::iter::once(file).chain(window.graph.neighbors(file)?) {
        bases.insert(f, base_metrics(window, f, past, &experience));
    }
    Ok(assemble(window, file, &bases))
}

/// Metrics for every file changed in the window, sorted by path.
pub fn compute_rows(window: &WindowAnalysis, history: &ChangeHistory) -> Vec<FileMetricsRow> {
    let past = history.commits_until(window.release.end_time);
    let experience = Experience::new(past);
    let bases: HashMap<&str, BaseMetrics> = window
        .files()
        .map(|f| (f, base_metrics(window, f, past, &experience)))
        .collect();
    window.files().map(|f| assemble(window, f, &bases)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricSet {
    /// Process metrics with change entropy.
    ProcessChange,
    /// Process metrics with co-change entropy in place of change entropy.
    ProcessCochange,
    /// Process metrics with both entropies.
    ProcessBoth,
}

impl MetricSet {
    pub const ALL: [MetricSet; 3] = [
        MetricSet::ProcessChange,
        MetricSet::ProcessCochange,
        MetricSet::ProcessBoth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricSet::ProcessChange => "P+C",
            MetricSet::ProcessCochange => "P+Co",
            MetricSet::ProcessBoth => "P+C+Co",
        }
    }

    pub fn columns(self) -> Vec<Column> {
        Column::ALL
            .iter()
            .copied()
            .filter(|c| {
                !matches!(
                    (self, c),
                    (MetricSet::ProcessChange, Column::Cce) | (MetricSet::ProcessCochange, Column::Sctr)
                )
            })
            .collect()
    }
}

impl fmt::Display for MetricSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricSet::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric set {s:?} (expected P+C, P+Co or P+C+Co)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Release,
    File,
    Comm,
    Adev,
    Ddev,
    Add,
    Del,
    Own,
    Minor,
    Sctr,
    Cce,
    Nadev,
    Nddev,
    Ncomm,
    Nsctr,
    Oexp,
    Exp,
    DefectCount,
    Label,
}

impl Column {
    pub const ALL: [Column; 19] = [
        Column::Release,
        Column::File,
        Column::Comm,
        Column::Adev,
        Column::Ddev,
        Column::Add,
        Column::Del,
        Column::Own,
        Column::Minor,
        Column::Sctr,
        Column::Cce,
        Column::Nadev,
        Column::Nddev,
        Column::Ncomm,
        Column::Nsctr,
        Column::Oexp,
        Column::Exp,
        Column::DefectCount,
        Column::Label,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::Release => "release",
            Column::File => "file",
            Column::Comm => "comm",
            Column::Adev => "adev",
            Column::Ddev => "ddev",
            Column::Add => "add",
            Column::Del => "del",
            Column::Own => "own",
            Column::Minor => "minor",
            Column::Sctr => "sctr",
            Column::Cce => "cce",
            Column::Nadev => "nadev",
            Column::Nddev => "nddev",
            Column::Ncomm => "ncomm",
            Column::Nsctr => "nsctr",
            Column::Oexp => "oexp",
            Column::Exp => "exp",
            Column::DefectCount => "defect_count",
            Column::Label => "label",
        }
    }
}

impl FileMetricsRow {
    /// Cell text for `column` as projected into `set`.
    pub fn cell(&self, column: Column, set: MetricSet) -> String {
        match column {
            Column::Release => self.release.clone(),
            Column::File => self.file.clone(),
            Column::Comm => self.comm.to_string(),
            Column::Adev => self.adev.to_string(),
            Column::Ddev => self.ddev.to_string(),
            Column::Add => self.add.to_string(),
            Column::Del => self.del.to_string(),
            Column::Own => self.own.to_string(),
            Column::Minor => self.minor.to_string(),
            Column::Sctr => self.sctr.to_string(),
            Column::Cce => self.cce.to_string(),
            Column::Nadev => self.nadev.to_string(),
            Column::Nddev => self.nddev.to_string(),
            Column::Ncomm => self.ncomm.to_string(),
            Column::Nsctr => match set {
                MetricSet::ProcessCochange => self.ncce.to_string(),
                _ => self.nsctr.to_string(),
            },
            Column::Oexp => self.oexp.to_string(),
            Column::Exp => self.exp.to_string(),
            Column::DefectCount => self.defect_count.map(|d| d.to_string()).unwrap_or_default(),
            Column::Label => self
                .label
                .map(|l| if l { "1" } else { "0" }.to_owned())
                .unwrap_or_default(),
        }
    }
}

/// Rows projected onto the columns of one metric set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub set: MetricSet,
    pub rows: Vec<FileMetricsRow>,
}

impl MetricTable {
    pub fn columns(&self) -> Vec<Column> {
        self.set.columns()
    }

    pub fn header(&self) -> Vec<&'static str> {
        self.columns().into_iter().map(Column::name).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        let columns = self.columns();
        self.rows
            .iter()
            .map(move |r| columns.iter().map(|c| r.cell(*c, self.set)).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for rec in self.records() {
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

pub fn build_metric_set(rows: Vec<FileMetricsRow>, set: MetricSet) -> MetricTable {
    MetricTable { set, rows }
}

/// Writes the full dataset with every column.
pub fn write_dataset<W: Write>(rows: &[FileMetricsRow], out: W) -> std::io::Result<()> {
    build_metric_set(rows.to_vec(), MetricSet::ProcessBoth).write_csv(out)
}
