//! Version-control history ingestion.
//!
//! The input is the text produced by
//!
//! ```text
//! git log --reverse --no-merges --pretty=format:'@%H|%at|%ae' --numstat
//! ```
//!
//! A record starts with `@<hash>|<unix-ts>|<author>` and is followed by
//! `<added>\t<deleted>\t<path>` lines until the next `@` line or EOF. A `-`
//! count marks a binary file. An optional fourth header field carries the
//! space-separated parent hashes (`%P`), which is how merge commits are
//! recognized when the log was produced without `--no-merges`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Read, Write};
use std::path::Path;

use globset::{Glob, GlobSetBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fatty-commit threshold: commits touching more files are noise.
pub const DEFAULT_FATTY_THRESHOLD: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FileChange {
    pub path: String,
    pub lines_added: u64,
    pub lines_deleted: u64,
}

impl FileChange {
    pub fn new(path: impl Into<String>, lines_added: u64, lines_deleted: u64) -> Self {
        Self {
            path: path.into(),
            lines_added,
            lines_deleted,
        }
    }

    /// A binary change: the file was touched but has no line deltas.
    pub fn binary(path: impl Into<String>) -> Self {
        Self::new(path, 0, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commit {
    pub id: String,
    /// Author time, UTC seconds since the epoch.
    pub timestamp: i64,
    pub author: String,
    /// Parent hashes when the log recorded them; empty otherwise.
    pub parents: Vec<String>,
    /// Changed files in log order, one entry per distinct path.
    pub changes: Vec<FileChange>,
}

impl Commit {
    pub fn is_merge(&self) -> bool {
        self.parents.len() > 1
    }

    pub fn touches(&self, path: &str) -> bool {
        self.changes.iter().any(|c| c.path == path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.changes.iter().map(|c| c.path.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReleaseRole {
    Train,
    Test,
}

/// One release window `(start_time, end_time]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseSpec {
    pub name: String,
    pub start_time: i64,
    pub end_time: i64,
    pub role: ReleaseRole,
}

impl ReleaseSpec {
    pub fn contains(&self, timestamp: i64) -> bool {
        self.start_time < timestamp && timestamp <= self.end_time
    }

    fn overlaps(&self, other: &ReleaseSpec) -> bool {
        self.start_time < other.end_time && other.start_time < self.end_time
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeHistory {
    commits: Vec<Commit>,
    releases: Vec<ReleaseSpec>,
}

impl ChangeHistory {
    /// Sorts the commits by timestamp (stable, so log order breaks ties) and
    /// validates the release list.
    pub fn new(mut commits: Vec<Commit>, releases: Vec<ReleaseSpec>) -> Result<Self> {
        validate_releases(&releases)?;
        commits.sort_by_key(|c| c.timestamp);
        Ok(Self { commits, releases })
    }

    pub fn commits(&self) -> &[Commit] {
        &self.commits
    }

    pub fn releases(&self) -> &[ReleaseSpec] {
        &self.releases
    }

    pub fn release(&self, name: &str) -> Option<&ReleaseSpec> {
        self.releases.iter().find(|r| r.name == name)
    }

    /// Commits with `timestamp <= until`.
    pub fn commits_until(&self, until: i64) -> &[Commit] {
        let end = self.commits.partition_point(|c| c.timestamp <= until);
        &self.commits[..end]
    }

    /// Applies `f` to the commit list, keeping the releases.
    pub fn map_commits(self, f: impl FnOnce(Vec<Commit>) -> Result<Vec<Commit>>) -> Result<Self> {
        let releases = self.releases;
        Self::new(f(self.commits)?, releases)
    }
}

fn validate_releases(releases: &[ReleaseSpec]) -> Result<()> {
    let mut seen = HashMap::new();
    for r in releases {
        if r.name.is_empty() {
            return Err(Error::Validation("release with empty name".into()));
        }
        if r.start_time >= r.end_time {
            return Err(Error::Validation(format!(
                "release {}: start_time {} is not before end_time {}",
                r.name, r.start_time, r.end_time
            )));
        }
        if seen.insert(r.name.as_str(), ()).is_some() {
            return Err(Error::Validation(format!("duplicate release name {}", r.name)));
        }
    }
    Ok(())
}

/// Parses a numstat change log.
///
/// Duplicate paths inside one record are merged by summing their line
/// counts; the merged entry keeps the position of the first occurrence.
pub fn parse_change_log<R: BufRead>(reader: R) -> Result<Vec<Commit>> {
    let mut commits = Vec::new();
    let mut current: Option<Commit> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, format!("unreadable line: {e}")))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('@') {
            if let Some(done) = current.take() {
                commits.push(done);
            }
            current = Some(parse_header(header, lineno)?);
            continue;
        }
        let commit = current
            .as_mut()
            .ok_or_else(|| Error::parse(lineno, "file change before any commit header"))?;
        let change = parse_numstat(line, lineno)?;
        match commit.changes.iter_mut().find(|c| c.path == change.path) {
            Some(existing) => {
                existing.lines_added += change.lines_added;
                existing.lines_deleted += change.lines_deleted;
            }
            None => commit.changes.push(change),
        }
    }
    if let Some(done) = current {
        commits.push(done);
    }
    Ok(commits)
}

fn parse_header(header: &str, lineno: usize) -> Result<Commit> {
    let mut fields = header.splitn(4, '|');
    let id = fields.next().unwrap_or_default().trim();
    if id.is_empty() {
        return Err(Error::parse(lineno, "commit header without a revision id"));
    }
    let ts = fields
        .next()
        .ok_or_else(|| Error::parse(lineno, "commit header missing timestamp"))?;
    let timestamp = ts
        .trim()
        .parse::<i64>()
        .map_err(|_| Error::parse(lineno, format!("invalid timestamp {ts:?}")))?;
    let author = fields
        .next()
        .ok_or_else(|| Error::parse(lineno, "commit header missing author"))?;
    let parents = fields
        .next()
        .map(|p| p.split_whitespace().map(str::to_owned).collect())
        .unwrap_or_default();
    Ok(Commit {
        id: id.to_owned(),
        timestamp,
        author: author.trim().to_owned(),
        parents,
        changes: Vec::new(),
    })
}

fn parse_numstat(line: &str, lineno: usize) -> Result<FileChange> {
    let mut fields = line.splitn(3, '\t');
    let (Some(added), Some(deleted), Some(path)) = (fields.next(), fields.next(), fields.next()) else {
        return Err(Error::parse(
            lineno,
            format!("expected `<added>\\t<deleted>\\t<path>`, got {line:?}"),
        ));
    };
    if path.is_empty() {
        return Err(Error::parse(lineno, "empty path"));
    }
    if added == "-" || deleted == "-" {
        return Ok(FileChange::binary(path));
    }
    let count = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| Error::parse(lineno, format!("invalid line count {s:?}")))
    };
    Ok(FileChange::new(path, count(added)?, count(deleted)?))
}

/// Writes commits back out in the numstat log format.
pub fn write_change_log<W: Write>(commits: &[Commit], mut out: W) -> std::io::Result<()> {
    for (i, c) in commits.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        write!(out, "@{}|{}|{}", c.id, c.timestamp, c.author)?;
        if !c.parents.is_empty() {
            write!(out, "|{}", c.parents.join(" "))?;
        }
        writeln!(out)?;
        for ch in &c.changes {
            writeln!(out, "{}\t{}\t{}", ch.lines_added, ch.lines_deleted, ch.path)?;
        }
    }
    Ok(())
}

/// Reads a release CSV with header `name,start_time,end_time,role`.
pub fn load_releases<R: Read>(reader: R) -> Result<Vec<ReleaseSpec>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Validation(format!("release file: {e}")))?
        .clone();
    let expected = ["name", "start_time", "end_time", "role"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Validation(format!(
            "release file header must be `{}`, got `{}`",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut releases = Vec::new();
    for (i, rec) in rdr.deserialize::<ReleaseSpec>().enumerate() {
        let rec = rec.map_err(|e| Error::parse(i + 2, format!("release row: {e}")))?;
        releases.push(rec);
    }
    validate_releases(&releases)?;
    Ok(releases)
}

pub fn read_change_log(path: &Path) -> Result<Vec<Commit>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_change_log(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

pub fn read_releases(path: &Path) -> Result<Vec<ReleaseSpec>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_releases(file).map_err(|e| e.in_file(path))
}

/// Assigns each commit to the release whose window `(start_time, end_time]`
/// contains its timestamp. Commits outside every window are dropped.
pub fn assign_release_windows(history: &ChangeHistory) -> Result<BTreeMap<String, Vec<Commit>>> {
    let mut sorted: Vec<&ReleaseSpec> = history.releases().iter().collect();
    sorted.sort_by_key(|r| (r.start_time, r.end_time));
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(Error::Config(format!(
                "release windows {} ({}, {}] and {} ({}, {}] overlap",
                pair[0].name, pair[0].start_time, pair[0].end_time, pair[1].name, pair[1].start_time, pair[1].end_time
            )));
        }
    }

    let commits = history.commits();
    Ok(history
        .releases()
        .iter()
        .map(|r| {
            let lo = commits.partition_point(|c| c.timestamp <= r.start_time);
            let hi = commits.partition_point(|c| c.timestamp <= r.end_time);
            (r.name.clone(), commits[lo..hi].to_vec())
        })
        .collect())
}

/// Drops commits touching more than `threshold` files.
pub fn filter_fatty(commits: Vec<Commit>, threshold: usize) -> Vec<Commit> {
    assert!(threshold >= 1, "fatty threshold must be at least 1");
    commits.into_iter().filter(|c| c.changes.len() <= threshold).collect()
}

pub fn filter_merges(commits: Vec<Commit>) -> Vec<Commit> {
    commits.into_iter().filter(|c| !c.is_merge()).collect()
}

/// Restricts every commit to the paths matching any of `include_patterns`,
/// dropping commits left without changes.
pub fn filter_source_files(commits: Vec<Commit>, include_patterns: &[String]) -> Result<Vec<Commit>> {
    if include_patterns.is_empty() {
        return Err(Error::Config("include_patterns must not be empty".into()));
    }
    let mut builder = GlobSetBuilder::new();
    for p in include_patterns {
        let glob = Glob::new(p).map_err(|e| Error::Config(format!("invalid glob {p:?}: {e}")))?;
        builder.add(glob);
    }
    let set = builder
        .build()
        .map_err(|e| Error::Config(format!("invalid include patterns: {e}")))?;

    Ok(commits
        .into_iter()
        .filter_map(|mut c| {
            c.changes.retain(|ch| set.is_match(&ch.path));
            (!c.changes.is_empty()).then_some(c)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commit(id: &str, ts: i64, paths: &[&str]) -> Commit {
        Commit {
            id: id.into(),
            timestamp: ts,
            author: "dev@example.org".into(),
            parents: vec![],
            changes: paths.iter().map(|p| FileChange::new(*p, 1, 0)).collect(),
        }
    }

    fn release(name: &str, start: i64, end: i64) -> ReleaseSpec {
        ReleaseSpec {
            name: name.into(),
            start_time: start,
            end_time: end,
            role: ReleaseRole::Train,
        }
    }

    #[test]
    fn empty_stream() {
        assert!(parse_change_log("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_path_is_merged() {
        let log = "@abc|100|a@x\n3\t1\tsrc/A.java\n2\t0\tsrc/A.java\n1\t1\tsrc/B.java\n";
        let commits = parse_change_log(log.as_bytes()).unwrap();
        assert_eq!(commits.len(), 1);
        assert_eq!(
            commits[0].changes,
            vec![FileChange::new("src/A.java", 5, 1), FileChange::new("src/B.java", 1, 1)]
        );
    }

    #[test]
    fn binary_counts_are_zero() {
        let log = "@abc|100|a@x\n-\t-\tlogo.png\n";
        let commits = parse_change_log(log.as_bytes()).unwrap();
        assert_eq!(commits[0].changes, vec![FileChange::binary("logo.png")]);
    }

    #[test]
    fn parse_errors_carry_line_number() {
        let log = "@abc|100|a@x\n1\t2\tA\n\nx\t2\tB\n";
        match parse_change_log(log.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_change_log("1\t2\tA\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_change_log("@abc|notatime|a\n".as_bytes()).is_err());
        assert!(parse_change_log("@abc|1\n".as_bytes()).is_err());
        assert!(parse_change_log("@abc|1|a\n1\t2\n".as_bytes()).is_err());
    }

    #[test]
    fn parents_mark_merges() {
        let log = "@m|5|a|p1 p2\n1\t1\tA\n@n|6|a|p1\n1\t1\tA\n";
        let commits = parse_change_log(log.as_bytes()).unwrap();
        assert!(commits[0].is_merge());
        assert!(!commits[1].is_merge());
        assert_eq!(filter_merges(commits).len(), 1);
    }

    #[test]
    fn window_upper_bound_is_inclusive() {
        let history = ChangeHistory::new(
            vec![
                commit("a", 10, &["A"]),
                commit("b", 11, &["A"]),
                commit("c", -5, &["A"]),
            ],
            vec![release("r1", 0, 10), release("r2", 10, 20)],
        )
        .unwrap();
        let windows = assign_release_windows(&history).unwrap();
        let ids = |r: &str| windows[r].iter().map(|c| c.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids("r1"), vec!["a"]);
        assert_eq!(ids("r2"), vec!["b"]);
    }

    #[test]
    fn overlapping_windows_are_rejected() {
        let history = ChangeHistory::new(vec![], vec![release("r1", 0, 15), release("r2", 10, 20)]).unwrap();
        let err = assign_release_windows(&history).unwrap_err().to_string();
        assert!(err.contains("r1") && err.contains("r2"), "{err}");
    }

    #[test]
    fn invalid_release_specs() {
        assert!(ChangeHistory::new(vec![], vec![release("r", 5, 5)]).is_err());
        assert!(ChangeHistory::new(vec![], vec![release("r", 0, 5), release("r", 6, 9)]).is_err());
    }

    #[test]
    fn fatty_filter_is_strict() {
        let paths: Vec<String> = (0..31).map(|i| format!("f{i}")).collect();
        let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
        let commits = vec![commit("thirty", 1, &refs[..30]), commit("thirtyone", 2, &refs)];
        let kept = filter_fatty(commits, DEFAULT_FATTY_THRESHOLD);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "thirty");
        assert!(filter_fatty(vec![], 30).is_empty());
    }

    #[test]
    fn source_filter() {
        let java = vec!["*.java".to_string()];
        let out = filter_source_files(vec![commit("a", 1, &["A.java", "README.md"])], &java).unwrap();
        assert_eq!(out[0].paths().collect::<Vec<_>>(), vec!["A.java"]);
        assert!(filter_source_files(vec![commit("a", 1, &["README.md"])], &java)
            .unwrap()
            .is_empty());

        let all = vec![commit("a", 1, &["src/x/A.java", "README.md"])];
        assert_eq!(filter_source_files(all.clone(), &["**/*".to_string()]).unwrap(), all);

        assert!(matches!(
            filter_source_files(all.clone(), &["a[".to_string()]),
            Err(Error::Config(_))
        ));
        assert!(matches!(filter_source_files(all, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn release_csv() {
        let csv = "name,start_time,end_time,role\nr1,0,10,train\nr2,10,20,test\n";
        let releases = load_releases(csv.as_bytes()).unwrap();
        assert_eq!(releases[1].role, ReleaseRole::Test);
        assert!(load_releases("name,start,end,role\n".as_bytes()).is_err());
        assert!(load_releases("name,start_time,end_time,role\nr1,0,10,dev\n".as_bytes()).is_err());
    }
}
