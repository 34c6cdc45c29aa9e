//! On-disk artifacts: splits, runs, manifests and evaluation reports.
//!
//! Every artifact is written deterministically (sorted keys, struct-order
//! fields, shortest round-trip float formatting), so re-running a command
//! with identical inputs rewrites byte-identical files. Runs are stored with
//! raw string ids to stay meaningful outside a particular universe.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{InteractionSet, Universe, UserId};
use crate::run::{Provenance, RecommendationList, RecommendationRun};

use super::EvalReport;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json at {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("run references unknown {what} id {id:?}")]
    UnknownId { what: &'static str, id: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> StoreError + '_ {
    move |source| StoreError::Json {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    let mut body = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    body.push('\n');
    std::fs::write(path, body).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StoreError> {
    let raw = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&raw).map_err(json_err(path))
}

/// A persisted run: ranked raw-id lists per raw user id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFile {
    pub provenance: Provenance,
    pub lists: BTreeMap<String, Vec<RankedEntry>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedEntry {
    pub item: String,
    pub score: f64,
}

pub fn run_to_file(run: &RecommendationRun, universe: &Universe) -> RunFile {
    let lists = run
        .lists
        .iter()
        .map(|(&user, list)| {
            (
                universe.user_raw(user).to_string(),
                list.entries()
                    .iter()
                    .map(|&(item, score)| RankedEntry {
                        item: universe.item_raw(item).to_string(),
                        score,
                    })
                    .collect(),
            )
        })
        .collect();
    RunFile {
        provenance: run.provenance.clone(),
        lists,
    }
}

pub fn run_from_file(file: &RunFile, universe: &Universe) -> Result<RecommendationRun, StoreError> {
    let mut run = RecommendationRun::new(file.provenance.clone());
    for (raw_user, entries) in &file.lists {
        let user = universe.user(raw_user).ok_or_else(|| StoreError::UnknownId {
            what: "user",
            id: raw_user.clone(),
        })?;
        let mut scored = Vec::with_capacity(entries.len());
        for entry in entries {
            let item = universe.item(&entry.item).ok_or_else(|| StoreError::UnknownId {
                what: "item",
                id: entry.item.clone(),
            })?;
            scored.push((item, entry.score));
        }
        run.insert(RecommendationList::from_scores(user, scored));
    }
    Ok(run)
}

pub fn save_run(path: &Path, run: &RecommendationRun, universe: &Universe) -> Result<(), StoreError> {
    write_json(path, &run_to_file(run, universe))
}

pub fn load_run(path: &Path, universe: &Universe) -> Result<RecommendationRun, StoreError> {
    run_from_file(&read_json::<RunFile>(path)?, universe)
}

/// Index of one experiment invocation: everything evaluation needs without
/// re-querying any model or endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub dataset: String,
    pub fingerprint: String,
    pub config_hash: String,
    pub split_seed: u64,
    pub cutoffs: Vec<usize>,
    /// model id -> run file, relative to the manifest directory.
    pub run_files: BTreeMap<String, String>,
    /// model id -> hallucination report file (LLM runs only).
    pub hallucination_files: BTreeMap<String, String>,
}

/// Writes interactions back out in the `csv_header` layout that
/// `load_interactions` reads, rows sorted by (user, item) raw ids.
pub fn write_interactions_csv(path: &Path, data: &InteractionSet) -> Result<(), StoreError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    let universe = data.universe();
    let mut rows: Vec<(&str, &str, f64, Option<i64>)> = data
        .interactions()
        .iter()
        .map(|r| {
            (
                universe.user_raw(r.user),
                universe.item_raw(r.item),
                r.rating,
                r.timestamp,
            )
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = Vec::new();
    writeln!(out, "userId,itemId,rating,timestamp").expect("vec write");
    for (user, item, rating, timestamp) in rows {
        match timestamp {
            Some(t) => writeln!(out, "{user},{item},{rating},{t}").expect("vec write"),
            None => writeln!(out, "{user},{item},{rating},").expect("vec write"),
        }
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Rebuilds a [`Split`] from the persisted train/test CSVs. Both sides are
/// re-expressed in their union universe, which reproduces the original
/// post-preprocessing universe exactly (the split partitions it).
pub fn load_split(
    train_path: &Path,
    test_path: &Path,
    scale: Option<crate::dataset::RatingScale>,
    ratio: f64,
    seed: u64,
) -> Result<crate::dataset::Split, StoreError> {
    use crate::dataset::{load_interactions, InteractionFormat, Split};
    let wrap = |path: &Path, e: crate::dataset::DatasetError| StoreError::Io {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
    };
    let train_side = load_interactions(train_path, InteractionFormat::CsvHeader, scale)
        .map_err(|e| wrap(train_path, e))?;
    let test_side = match load_interactions(test_path, InteractionFormat::CsvHeader, scale) {
        Ok(set) => Some(set),
        // A valid split can hold zero test rows.
        Err(crate::dataset::DatasetError::EmptyFile { .. }) => None,
        Err(e) => return Err(wrap(test_path, e)),
    };
    let mut records = raw_records(&train_side);
    let train_keys: std::collections::BTreeSet<(String, String)> = records
        .iter()
        .map(|(u, i, _, _)| (u.clone(), i.clone()))
        .collect();
    if let Some(test) = &test_side {
        records.extend(raw_records(test));
    }
    let union = InteractionSet::from_records(records, scale);
    let universe = union.universe().clone();
    let (mut train_rows, mut test_rows) = (Vec::new(), Vec::new());
    for row in union.interactions() {
        let key = (
            universe.user_raw(row.user).to_string(),
            universe.item_raw(row.item).to_string(),
        );
        if train_keys.contains(&key) {
            train_rows.push(*row);
        } else {
            test_rows.push(*row);
        }
    }
    Ok(Split {
        train: InteractionSet::from_parts(universe.clone(), train_rows, scale),
        test: InteractionSet::from_parts(universe, test_rows, scale),
        seed,
        ratio,
    })
}

fn raw_records(set: &InteractionSet) -> Vec<(String, String, f64, Option<i64>)> {
    let universe = set.universe();
    set.interactions()
        .iter()
        .map(|r| {
            (
                universe.user_raw(r.user).to_string(),
                universe.item_raw(r.item).to_string(),
                r.rating,
                r.timestamp,
            )
        })
        .collect()
}

/// Popularity statistics in raw-id form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsFile {
    pub head_share: f64,
    pub max_phi: u32,
    pub phi: BTreeMap<String, u32>,
    pub short_head: Vec<String>,
}

pub fn stats_to_file(
    stats: &crate::dataset::PopularityStats,
    universe: &Universe,
) -> StatsFile {
    StatsFile {
        head_share: stats.head_share,
        max_phi: stats.max_phi,
        phi: universe
            .item_ids()
            .map(|i| (universe.item_raw(i).to_string(), stats.phi(i)))
            .collect(),
        short_head: stats
            .short_head
            .iter()
            .map(|&i| universe.item_raw(i).to_string())
            .collect(),
    }
}

pub fn eval_report_path(dir: &Path, model_id: &str) -> PathBuf {
    dir.join(format!("eval_{}.json", sanitize(model_id)))
}

pub fn run_path(dir: &Path, model_id: &str) -> PathBuf {
    dir.join(format!("run_{}.json", sanitize(model_id)))
}

pub fn hallucination_path(dir: &Path, model_id: &str) -> PathBuf {
    dir.join(format!("hallucinations_{}.json", sanitize(model_id)))
}

/// File-name-safe model id.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn save_reports(dir: &Path, reports: &[EvalReport]) -> Result<(), StoreError> {
    for report in reports {
        write_json(&eval_report_path(dir, &report.model_id), report)?;
    }
    Ok(())
}

pub fn load_reports(dir: &Path) -> Result<Vec<EvalReport>, StoreError> {
    let mut reports = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(io_err(dir))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("eval_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    for path in paths {
        reports.push(read_json(&path)?);
    }
    Ok(reports)
}

/// Per-user UserId set helper for run restriction.
pub fn restrict_run(run: &RecommendationRun, users: &std::collections::BTreeSet<UserId>) -> RecommendationRun {
    let mut out = RecommendationRun::new(run.provenance.clone());
    for (user, list) in &run.lists {
        if users.contains(user) {
            out.insert(list.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::InteractionSet;
    use crate::run::Provenance;

    #[test]
    fn runs_round_trip_through_disk() {
        let data = InteractionSet::from_records(
            vec![
                ("u1".into(), "a".into(), 1.0, None),
                ("u1".into(), "b".into(), 2.0, None),
                ("u2".into(), "b".into(), 1.0, None),
            ],
            None,
        );
        let universe = data.universe();
        let mut run = RecommendationRun::new(Provenance {
            model_id: "MostPop".into(),
            experiment: "free_top50".into(),
            dataset_fingerprint: "f".into(),
            split_seed: 1,
            prompt_hash: String::new(),
        });
        run.insert(RecommendationList::from_scores(
            UserId(0),
            vec![
                (data.universe().item("a").unwrap(), 2.0),
                (data.universe().item("b").unwrap(), 1.0),
            ],
        ));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        save_run(&path, &run, universe).unwrap();
        let loaded = load_run(&path, universe).unwrap();
        assert_eq!(loaded.model_id(), "MostPop");
        assert_eq!(loaded.lists[&UserId(0)].entries(), run.lists[&UserId(0)].entries());
    }

    #[test]
    fn interactions_csv_round_trips() {
        let data = InteractionSet::from_records(
            vec![
                ("u2".into(), "b".into(), 3.5, Some(9)),
                ("u1".into(), "a".into(), 1.0, None),
            ],
            None,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        write_interactions_csv(&path, &data).unwrap();
        let loaded = crate::dataset::load_interactions(
            &path,
            crate::dataset::InteractionFormat::CsvHeader,
            None,
        )
        .unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.universe().item_count(), 2);
        let u2 = loaded.universe().user("u2").unwrap();
        let row = loaded.profile(u2).next().unwrap();
        assert_eq!(row.rating, 3.5);
        assert_eq!(row.timestamp, Some(9));
    }

    #[test]
    fn identical_writes_are_byte_identical() {
        let report = EvalReport {
            model_id: "MostPop".into(),
            experiment: "free_top50".into(),
            dataset: "toy".into(),
            fingerprint: "f".into(),
            split_seed: 42,
            config_hash: "h".into(),
            metrics: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        save_reports(dir.path(), std::slice::from_ref(&report)).unwrap();
        let first = std::fs::read(eval_report_path(dir.path(), "MostPop")).unwrap();
        save_reports(dir.path(), std::slice::from_ref(&report)).unwrap();
        let second = std::fs::read(eval_report_path(dir.path(), "MostPop")).unwrap();
        assert_eq!(first, second);
    }
}
