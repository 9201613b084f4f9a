//! Stage orchestration: ingestion → graph → entropy → metrics → datasets →
//! statistics, with every output written under `<outdir>/<project>/`.
//!
//! ```text
//! <outdir>/<project>/commits.csv
//! <outdir>/<project>/<release>/edges.csv
//! <outdir>/<project>/<release>/entropy_{change,cochange}.csv
//! <outdir>/<project>/metrics.csv
//! <outdir>/<project>/correlation.csv
//! <outdir>/<project>/<set_id>/{train,test}.csv
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ProjectConfig;
use crate::entropy::Measure;
use crate::error::{Error, Result};
use crate::ingest::{
    assign_release_windows, filter_fatty, filter_merges, filter_source_files, read_change_log, read_releases,
    ChangeHistory,
};
use crate::labels::{emit_experiment, join_and_label, read_labels};
use crate::metrics::{compute_rows, write_dataset, FileMetricsRow, MetricSet, WindowAnalysis};
use crate::stats::{correlate_metric_vs_defects, load_evaluations, run_protocol, write_protocol, Alpha, EntropyMetric};

/// A loaded project: configuration plus the cleaned change history.
#[derive(Debug, Clone)]
pub struct Project {
    pub config: ProjectConfig,
    pub history: ChangeHistory,
    jobs: usize,
}

impl Project {
    /// Reads the log and release file and applies the merge, fatty-commit
    /// and source-file filters, in that order.
    pub fn load(config: ProjectConfig) -> Result<Self> {
        let commits = read_change_log(&config.log_path)?;
        let releases = read_releases(&config.releases_path)?;
        let parsed = commits.len();
        let commits = if config.include_merges {
            commits
        } else {
            filter_merges(commits)
        };
        let commits = filter_fatty(commits, config.fatty_threshold);
        let commits = filter_source_files(commits, &config.include_patterns).map_err(|e| e.in_file(&config.source))?;
        log::info!(
            "{}: kept {} of {} commits after filtering",
            config.project_name,
            commits.len(),
            parsed
        );
        let history = ChangeHistory::new(commits, releases).map_err(|e| e.in_file(&config.releases_path))?;
        Ok(Self {
            config,
            history,
            jobs: 1,
        })
    }

    /// Worker threads used for per-release stages; 0 means one per core.
    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }

    /// Per-release analyses in release-file order.
    pub fn analyze(&self) -> Result<Vec<WindowAnalysis>> {
        let mut windows = assign_release_windows(&self.history).map_err(|e| e.in_file(&self.config.releases_path))?;
        let work: Vec<_> = self
            .history
            .releases()
            .iter()
            .map(|r| (r.clone(), windows.remove(&r.name).unwrap_or_default()))
            .collect();
        self.pool()?.install(|| {
            work.into_par_iter()
                .map(|(release, commits)| WindowAnalysis::new(release, commits))
                .collect()
        })
    }

    /// Metric rows for every release, without labels.
    pub fn metric_rows(&self, analyses: &[WindowAnalysis]) -> Result<Vec<FileMetricsRow>> {
        let per_release: Vec<Vec<FileMetricsRow>> = self
            .pool()?
            .install(|| analyses.par_iter().map(|w| compute_rows(w, &self.history)).collect());
        Ok(per_release.into_iter().flatten().collect())
    }

    /// Metric rows joined with the configured labels.
    pub fn labeled_rows(&self, analyses: &[WindowAnalysis]) -> Result<Vec<FileMetricsRow>> {
        let labels = read_labels(self.config.labels_path()?)?;
        let joined = join_and_label(self.metric_rows(analyses)?, &labels);
        for orphan in &joined.orphans {
            log::warn!(
                "label for {}/{} has no metric row (file unchanged in that window)",
                orphan.release,
                orphan.file
            );
        }
        Ok(joined.rows)
    }

    fn dir(&self) -> PathBuf {
        self.config.project_dir()
    }
}

fn write_file(path: &Path, render: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut buf = Vec::new();
    render(&mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// `commits.csv`: `release,commit,timestamp,author,files` for every commit
/// assigned to a window.
pub fn write_ingest(project: &Project, analyses: &[WindowAnalysis]) -> Result<Vec<PathBuf>> {
    let path = project.dir().join("commits.csv");
    let written = write_file(&path, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["release", "commit", "timestamp", "author", "files"])?;
        for a in analyses {
            for c in &a.commits {
                w.write_record([
                    a.release.name.as_str(),
                    c.id.as_str(),
                    &c.timestamp.to_string(),
                    c.author.as_str(),
                    &c.changes.len().to_string(),
                ])?;
            }
        }
        w.flush()
    })?;
    Ok(vec![written])
}

pub fn write_graphs(project: &Project, analyses: &[WindowAnalysis]) -> Result<Vec<PathBuf>> {
    analyses
        .iter()
        .map(|a| {
            let path = project.dir().join(&a.release.name).join("edges.csv");
            write_file(&path, |buf| a.graph.write_edge_list(buf))
        })
        .collect()
}

pub fn write_entropy(project: &Project, analyses: &[WindowAnalysis], measures: &[Measure]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for a in analyses {
        for m in measures {
            let path = project.dir().join(&a.release.name).join(format!("entropy_{m}.csv"));
            out.push(write_file(&path, |buf| a.report(*m).write_csv(buf))?);
        }
    }
    Ok(out)
}

/// Metric rows for the `metrics` stage: labeled when the project has a
/// label file, with empty defect columns otherwise.
pub fn dataset_rows(project: &Project, analyses: &[WindowAnalysis]) -> Result<Vec<FileMetricsRow>> {
    if project.config.labels_path.is_some() {
        project.labeled_rows(analyses)
    } else {
        project.metric_rows(analyses)
    }
}

pub fn write_metrics(project: &Project, rows: &[FileMetricsRow]) -> Result<Vec<PathBuf>> {
    let path = project.dir().join("metrics.csv");
    Ok(vec![write_file(&path, |buf| write_dataset(rows, buf))?])
}

/// `correlation.csv`: `project,metric,pearson_r,pearson_p,spearman_rho,spearman_p`,
/// one row per entropy metric, pooled over all releases.
pub fn write_correlation(project: &Project, labeled: &[FileMetricsRow]) -> Result<Vec<PathBuf>> {
    let mut results = Vec::new();
    for metric in [EntropyMetric::Sctr, EntropyMetric::Cce] {
        let pair = correlate_metric_vs_defects(labeled, metric).map_err(|e| e.in_file(&project.config.source))?;
        results.push((metric, pair));
    }
    let path = project.dir().join("correlation.csv");
    let written = write_file(&path, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "project",
            "metric",
            "pearson_r",
            "pearson_p",
            "spearman_rho",
            "spearman_p",
        ])?;
        for (metric, (p, s)) in &results {
            w.write_record([
                project.config.project_name.as_str(),
                metric.as_str(),
                &p.statistic.to_string(),
                &p.p_value.to_string(),
                &s.statistic.to_string(),
                &s.p_value.to_string(),
            ])?;
        }
        w.flush()
    })?;
    Ok(vec![written])
}

pub fn write_datasets(project: &Project, labeled: &[FileMetricsRow], sets: &[MetricSet]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for set in sets {
        let exp = emit_experiment(labeled, project.history.releases(), *set)
            .map_err(|e| e.in_file(&project.config.releases_path))?;
        let dir = project.dir().join(set.as_str());
        out.push(write_file(&dir.join("train.csv"), |buf| exp.train.write_csv(buf))?);
        out.push(write_file(&dir.join("test.csv"), |buf| exp.test.write_csv(buf))?);
    }
    Ok(out)
}

/// Every project-level stage in order. Requires a label file.
pub fn run_pipeline(project: &Project) -> Result<Vec<PathBuf>> {
    let analyses = project.analyze()?;
    let labeled = project.labeled_rows(&analyses)?;
    let mut out = write_ingest(project, &analyses)?;
    out.extend(write_graphs(project, &analyses)?);
    out.extend(write_entropy(project, &analyses, &Measure::ALL)?);
    out.extend(write_metrics(project, &labeled)?);
    out.extend(write_correlation(project, &labeled)?);
    out.extend(write_datasets(project, &labeled, &MetricSet::ALL)?);
    Ok(out)
}

/// Friedman + Nemenyi over a classifier results CSV, written to
/// `<outdir>/stats.csv`.
pub fn run_stats(results: &Path, outdir: &Path, alpha: Alpha) -> Result<PathBuf> {
    let file = std::fs::File::open(results).map_err(|e| Error::io(results, e))?;
    let records = load_evaluations(file).map_err(|e| e.in_file(results))?;
    let rows = run_protocol(&records, alpha).map_err(|e| e.in_file(results))?;
    write_file(&outdir.join("stats.csv"), |buf| write_protocol(&rows, buf))
}
