//! Command implementations over the core library: each command reads its
//! inputs from the run directory and rewrites its outputs deterministically.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use reckit_core::config::RunConfig;
use reckit_core::dataset::{
    load_catalog, load_interactions, popularity_stats, split_holdout, InteractionSet, ItemCatalog,
    ItemId, UserId,
};
use reckit_core::experiments::{
    self, build_fixed_mostpop_candidates, neighbor_candidates_all, store, EvalReport,
    ExperimentKind, ExperimentSpec, ModelSet, PreparedData,
};
use reckit_core::llm::{
    ChatClient, ClientConfig, ExchangeCache, HttpChatClient, LlmRunner, StubClient, TitleMatcher,
};
use reckit_core::recommenders::{fit, FittedModel, ModelKind};
use reckit_core::report::{emit_comparison_table, TableFormat};

use crate::CliError;

/// Sidecar describing what `prepare` produced.
#[derive(Debug, Serialize, Deserialize)]
pub struct PrepareInfo {
    pub dataset: String,
    pub fingerprint: String,
    pub config_hash: String,
    pub split_ratio: f64,
    pub split_seed: u64,
    pub head_share: f64,
    pub relevance_threshold: f64,
    pub interactions: usize,
    pub train_interactions: usize,
    pub test_interactions: usize,
    pub users: usize,
    pub items: usize,
}

pub fn paths(config: &RunConfig) -> RunPaths {
    let dir = config.output.dir.clone();
    RunPaths {
        train_csv: dir.join("train.csv"),
        test_csv: dir.join("test.csv"),
        stats_json: dir.join("stats.json"),
        prepare_json: dir.join("prepare.json"),
        runs_dir: dir.join("runs"),
        reports_dir: dir.join("reports"),
        tables_dir: dir.join("tables"),
        similarity_csv: dir.join("similarity.csv"),
    }
}

pub struct RunPaths {
    pub train_csv: PathBuf,
    pub test_csv: PathBuf,
    pub stats_json: PathBuf,
    pub prepare_json: PathBuf,
    pub runs_dir: PathBuf,
    pub reports_dir: PathBuf,
    pub tables_dir: PathBuf,
    pub similarity_csv: PathBuf,
}

fn load_raw_dataset(config: &RunConfig) -> Result<InteractionSet, CliError> {
    let mut data = load_interactions(
        &config.dataset.interactions,
        config.dataset.format.into(),
        config.dataset.rating_scale,
    )?;
    let pre = &config.preprocessing;
    if pre.min_user_interactions.unwrap_or(1) > 1 || pre.min_item_interactions.unwrap_or(1) > 1 {
        data = data.apply_core_filter(
            pre.min_user_interactions.unwrap_or(1),
            pre.min_item_interactions.unwrap_or(1),
        )?;
    }
    if let Some(cap) = pre.history_cap {
        data = data.apply_history_cap(cap)?;
    }
    Ok(data)
}

fn load_catalog_for(config: &RunConfig) -> Result<ItemCatalog, CliError> {
    match &config.dataset.metadata {
        Some(path) => Ok(load_catalog(path)?),
        None => Ok(ItemCatalog::default()),
    }
}

pub fn prepare(config: &RunConfig) -> Result<PrepareInfo, CliError> {
    let data = load_raw_dataset(config)?;
    let split = split_holdout(&data, config.split.ratio, config.split.seed)?;
    let stats = popularity_stats(&split.train, config.evaluation.head_share)?;
    let paths = paths(config);
    store::write_interactions_csv(&paths.train_csv, &split.train)?;
    store::write_interactions_csv(&paths.test_csv, &split.test)?;
    store::write_json(
        &paths.stats_json,
        &store::stats_to_file(&stats, split.train.universe()),
    )?;
    let info = PrepareInfo {
        dataset: config.dataset.name.clone(),
        fingerprint: data.fingerprint(),
        config_hash: config.hash(),
        split_ratio: config.split.ratio,
        split_seed: config.split.seed,
        head_share: config.evaluation.head_share,
        relevance_threshold: config.evaluation.relevance_threshold,
        interactions: data.len(),
        train_interactions: split.train.len(),
        test_interactions: split.test.len(),
        users: data.universe().user_count(),
        items: data.universe().item_count(),
    };
    store::write_json(&paths.prepare_json, &info)?;
    Ok(info)
}

/// Reloads what `prepare` wrote and checks it still matches the config.
pub fn load_prepared(config: &RunConfig) -> Result<PreparedData, CliError> {
    let paths = paths(config);
    if !paths.prepare_json.exists() {
        return Err(CliError::Data(format!(
            "{} not found; run `reckit prepare` first",
            paths.prepare_json.display()
        )));
    }
    let info: PrepareInfo = store::read_json(&paths.prepare_json)?;
    let split = store::load_split(
        &paths.train_csv,
        &paths.test_csv,
        config.dataset.rating_scale,
        config.split.ratio,
        config.split.seed,
    )?;
    let union_fingerprint = {
        // train and test partition the post-preprocessing data, so the
        // union's fingerprint must equal the one prepare recorded.
        let mut rows = split.train.interactions().to_vec();
        rows.extend_from_slice(split.test.interactions());
        InteractionSet::from_parts(split.train.universe().clone(), rows, split.train.scale())
            .fingerprint()
    };
    if union_fingerprint != info.fingerprint {
        return Err(CliError::Data(format!(
            "split files do not match prepare.json (fingerprint {union_fingerprint} vs {}); \
             run `reckit prepare` again",
            info.fingerprint
        )));
    }
    if info.split_seed != config.split.seed || info.config_hash != config.hash() {
        return Err(CliError::Data(
            "config changed since prepare; run `reckit prepare` again".into(),
        ));
    }
    let stats = popularity_stats(&split.train, config.evaluation.head_share)?;
    let catalog = load_catalog_for(config)?;
    Ok(PreparedData {
        dataset_name: config.dataset.name.clone(),
        split,
        catalog,
        stats,
        fingerprint: info.fingerprint,
        relevance_threshold: config.evaluation.relevance_threshold,
    })
}

fn experiment_spec(config: &RunConfig) -> ExperimentSpec {
    ExperimentSpec {
        kind: config.experiment.kind,
        cutoffs: config.evaluation.cutoffs.clone(),
        list_length: config.experiment.list_length,
        n_neighbors: config.experiment.n_neighbors,
        per_neighbor: config.experiment.per_neighbor,
        shuffle_seed: config.split.seed,
        exclude_seen_candidates: config.experiment.exclude_seen_candidates,
    }
}

fn fitted_roster(
    config: &RunConfig,
    prepared: &PreparedData,
) -> Result<Vec<(String, FittedModel)>, CliError> {
    let mut fitted = Vec::new();
    for (kind, params) in config.roster() {
        let model = fit(kind, params, &prepared.split.train, &prepared.catalog)?;
        fitted.push((kind.to_string(), model));
    }
    Ok(fitted)
}

fn rerank_candidates(
    prepared: &PreparedData,
    spec: &ExperimentSpec,
) -> (String, BTreeMap<UserId, Vec<ItemId>>) {
    match spec.kind {
        ExperimentKind::RerankMostPop => {
            let (ids, _) = build_fixed_mostpop_candidates(
                &prepared.split.train,
                &prepared.catalog,
                spec.list_length,
            );
            let users = prepared.split.train.active_users();
            let per_user = users.into_iter().map(|u| (u, ids.clone())).collect();
            ("MostPop".to_string(), per_user)
        }
        ExperimentKind::RerankNeighbors => {
            let per_user = neighbor_candidates_all(
                &prepared.split.train,
                spec.n_neighbors,
                spec.per_neighbor,
                spec.shuffle_seed,
                spec.exclude_seen_candidates,
            );
            ("NearestNeighbors".to_string(), per_user)
        }
        _ => unreachable!("only called for re-rank kinds"),
    }
}

fn write_runs(
    config: &RunConfig,
    prepared: &PreparedData,
    output: &experiments::ExperimentOutput,
    manifest_name: &str,
) -> Result<(), CliError> {
    let paths = paths(config);
    let universe = prepared.split.train.universe();
    let mut run_files = BTreeMap::new();
    let mut hallucination_files = BTreeMap::new();
    for run in &output.runs {
        let path = store::run_path(&paths.runs_dir, run.model_id());
        store::save_run(&path, run, universe)?;
        run_files.insert(
            run.model_id().to_string(),
            path.file_name().unwrap().to_string_lossy().into_owned(),
        );
    }
    for report in &output.hallucinations {
        let path = store::hallucination_path(&paths.runs_dir, &report.model_id);
        store::write_json(&path, report)?;
        hallucination_files.insert(
            report.model_id.clone(),
            path.file_name().unwrap().to_string_lossy().into_owned(),
        );
    }
    let manifest = store::RunManifest {
        experiment: config.experiment.kind.as_str().to_string(),
        dataset: config.dataset.name.clone(),
        fingerprint: prepared.fingerprint.clone(),
        config_hash: config.hash(),
        split_seed: config.split.seed,
        cutoffs: config.evaluation.cutoffs.clone(),
        run_files,
        hallucination_files,
    };
    store::write_json(&paths.runs_dir.join(manifest_name), &manifest)?;
    Ok(())
}

pub fn run_baselines(config: &RunConfig) -> Result<usize, CliError> {
    let prepared = load_prepared(config)?;
    let spec = experiment_spec(config);
    let fitted = fitted_roster(config, &prepared)?;
    let models = ModelSet {
        baselines: fitted.iter().map(|(id, m)| (id.clone(), m)).collect(),
        llms: vec![],
    };
    let output = match spec.kind {
        ExperimentKind::FreeTop50 => experiments::run_free_top50(&models, &prepared, &spec)?,
        ExperimentKind::ColdStart => experiments::run_cold_start(&models, &prepared, &spec)?,
        ExperimentKind::RerankMostPop | ExperimentKind::RerankNeighbors => {
            let (reference_id, candidates) = rerank_candidates(&prepared, &spec);
            experiments::run_rerank(&models, &candidates, &reference_id, &prepared, &spec)?
        }
    };
    let count = output.runs.len();
    write_runs(config, &prepared, &output, "manifest_baselines.json")?;
    Ok(count)
}

enum BuiltClient {
    Http(HttpChatClient),
    Stub(StubClient),
}

impl BuiltClient {
    fn as_chat(&self) -> &dyn ChatClient {
        match self {
            BuiltClient::Http(c) => c,
            BuiltClient::Stub(s) => s,
        }
    }
}

fn build_client(
    config: &RunConfig,
    prepared: &PreparedData,
    spec: &ExperimentSpec,
    client_config: &ClientConfig,
    cache: &ExchangeCache,
) -> Result<BuiltClient, CliError> {
    let llm = config.llm.as_ref().expect("checked by caller");
    match llm.client.as_str() {
        "http" => Ok(BuiltClient::Http(HttpChatClient::new(
            client_config.clone(),
            Some(cache.clone()),
        ))),
        "stub:echo-mostpop" => {
            let mostpop = fit(
                ModelKind::MostPop,
                Default::default(),
                &prepared.split.train,
                &prepared.catalog,
            )?;
            let users = prepared.split.train.active_users();
            let lists =
                experiments::titled_lists(&mostpop, &users, spec.list_length, prepared)?;
            Ok(BuiltClient::Stub(StubClient::echo("stub:echo-mostpop", lists)))
        }
        "stub:reverse-candidates" => Ok(BuiltClient::Stub(StubClient::ReverseCandidates)),
        "stub:gibberish" => Ok(BuiltClient::Stub(StubClient::Gibberish {
            titles: spec.list_length,
            seed: config.split.seed,
        })),
        other => Err(CliError::Config(format!("unknown llm.client {other:?}"))),
    }
}

pub fn run_llm(config: &RunConfig) -> Result<usize, CliError> {
    let llm = config.llm.as_ref().ok_or_else(|| {
        CliError::Config("run-llm needs an [llm] section in the config".into())
    })?;
    let prepared = load_prepared(config)?;
    let spec = experiment_spec(config);
    let client_config = llm.client_config();
    let cache = ExchangeCache::new(config.cache_dir().expect("llm section present"));
    let built = build_client(config, &prepared, &spec, &client_config, &cache)?;
    let matcher = TitleMatcher::new(
        prepared.split.train.universe(),
        &prepared.catalog,
        llm.title_match_threshold,
    );
    let mut runner = LlmRunner::new(built.as_chat(), &client_config, Some(&cache), matcher);
    runner.max_failure_fraction = llm.max_failure_fraction;
    let model_id = built.as_chat().model_id().to_string();
    let models = ModelSet {
        baselines: vec![],
        llms: vec![(model_id, &runner)],
    };
    let output = match spec.kind {
        ExperimentKind::FreeTop50 => experiments::run_free_top50(&models, &prepared, &spec)?,
        ExperimentKind::ColdStart => experiments::run_cold_start(&models, &prepared, &spec)?,
        ExperimentKind::RerankMostPop | ExperimentKind::RerankNeighbors => {
            let (reference_id, candidates) = rerank_candidates(&prepared, &spec);
            experiments::run_rerank(&models, &candidates, &reference_id, &prepared, &spec)?
        }
    };
    let count = output.runs.len();
    write_runs(config, &prepared, &output, "manifest_llm.json")?;
    Ok(count)
}

fn load_all_runs(
    config: &RunConfig,
    prepared: &PreparedData,
) -> Result<Vec<reckit_core::run::RecommendationRun>, CliError> {
    let paths = paths(config);
    if !paths.runs_dir.exists() {
        return Err(CliError::Data(format!(
            "{} not found; run `reckit run-baselines` or `reckit run-llm` first",
            paths.runs_dir.display()
        )));
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&paths.runs_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", paths.runs_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".json"))
        })
        .collect();
    entries.sort();
    let mut runs = Vec::new();
    for path in entries {
        let run = store::load_run(&path, prepared.split.train.universe())?;
        if run.provenance.dataset_fingerprint != prepared.fingerprint {
            return Err(CliError::Data(format!(
                "run {} was produced on fingerprint {}, current data is {}; re-run it",
                path.display(),
                run.provenance.dataset_fingerprint,
                prepared.fingerprint
            )));
        }
        runs.push(run);
    }
    if runs.is_empty() {
        return Err(CliError::Data(format!(
            "no run_*.json files under {}",
            paths.runs_dir.display()
        )));
    }
    Ok(runs)
}

pub fn evaluate(config: &RunConfig) -> Result<Vec<EvalReport>, CliError> {
    let prepared = load_prepared(config)?;
    let runs = load_all_runs(config, &prepared)?;
    let hash = config.hash();
    let mut reports = Vec::new();
    for run in &runs {
        reports.push(experiments::evaluate_run(
            run,
            &prepared,
            &config.evaluation.cutoffs,
            &hash,
        )?);
    }
    let paths = paths(config);
    store::save_reports(&paths.reports_dir, &reports)?;
    Ok(reports)
}

pub fn compare(
    config: &RunConfig,
    base: &str,
    against: Option<&str>,
) -> Result<PathBuf, CliError> {
    let prepared = load_prepared(config)?;
    let runs = load_all_runs(config, &prepared)?;
    let base_run = runs
        .iter()
        .find(|r| r.model_id() == base)
        .ok_or_else(|| CliError::Data(format!("no persisted run named {base:?}")))?;
    let others: Vec<_> = runs
        .iter()
        .filter(|r| r.model_id() != base)
        .filter(|r| against.is_none_or(|a| r.model_id() == a))
        .collect();
    if others.is_empty() {
        return Err(CliError::Data("nothing to compare against".into()));
    }
    let mut out = String::from("model_a,model_b,metric,cutoff,value\n");
    for other in others {
        for value in experiments::compare_runs(base_run, other, &config.evaluation.cutoffs) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                base_run.model_id(),
                other.model_id(),
                value.name,
                value.cutoff,
                value.value
            ));
        }
    }
    let paths = paths(config);
    std::fs::write(&paths.similarity_csv, out)
        .map_err(|e| CliError::Data(format!("{}: {e}", paths.similarity_csv.display())))?;
    Ok(paths.similarity_csv)
}

pub fn report(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let paths = paths(config);
    if !paths.reports_dir.exists() {
        return Err(CliError::Data(format!(
            "{} not found; run `reckit evaluate` first",
            paths.reports_dir.display()
        )));
    }
    let reports = store::load_reports(&paths.reports_dir)?;
    if reports.is_empty() {
        return Err(CliError::Data("no evaluation reports found".into()));
    }
    let written = emit_comparison_table(
        &reports,
        &config.evaluation.sort_metric,
        &[TableFormat::Csv, TableFormat::Markdown],
        &paths.tables_dir,
    )?;
    Ok(written)
}
