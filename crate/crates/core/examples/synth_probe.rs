//! Prints summary statistics and quick metric numbers for the synthetic
//! generator, for parameter tuning.

use reckit_core::dataset::{popularity_stats, split_holdout};
use reckit_core::experiments::{
    baseline_run, evaluate_run, ExperimentKind, PreparedData,
};
use reckit_core::recommenders::{fit, ModelKind, ModelParams};
use reckit_core::synth::{generate, SynthSpec};

fn main() {
    let mut spec = SynthSpec::default();
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        let value: f64 = args.next().unwrap().parse().unwrap();
        match arg.as_str() {
            "--zipf" => spec.zipf = value,
            "--affinity" => spec.affinity = value,
            "--users" => spec.users = value as usize,
            "--items" => spec.items = value as usize,
            "--max-profile" => spec.max_profile = value as usize,
            other => panic!("unknown arg {other}"),
        }
    }
    let start = std::time::Instant::now();
    let (data, catalog) = generate(&spec);
    println!(
        "generated {} interactions, {} users, {} items in {:?}",
        data.len(),
        data.universe().user_count(),
        data.universe().item_count(),
        start.elapsed()
    );
    let capped = data.apply_history_cap(230).unwrap();
    println!(
        "after cap: {} interactions, {} users, {} items",
        capped.len(),
        capped.universe().user_count(),
        capped.universe().item_count()
    );
    let split = split_holdout(&capped, 0.8, 42).unwrap();
    let stats = popularity_stats(&split.train, 0.8).unwrap();
    println!(
        "short head: {} of {} items; max phi {}",
        stats.short_head.len(),
        capped.universe().item_count(),
        stats.max_phi
    );
    let fingerprint = capped.fingerprint();
    let prepared = PreparedData {
        dataset_name: "synth".into(),
        split,
        catalog,
        stats,
        fingerprint,
        relevance_threshold: 0.0,
    };
    let users = prepared.split.train.active_users();
    for kind in [
        ModelKind::MostPop,
        ModelKind::Random,
        ModelKind::UserKnn,
        ModelKind::ItemKnn,
        ModelKind::Rp3Beta,
        ModelKind::EaseR,
        ModelKind::AttributeItemKnn,
        ModelKind::Vsm,
        ModelKind::AttributeUserKnn,
    ] {
        let t = std::time::Instant::now();
        let model = fit(kind, ModelParams::default(), &prepared.split.train, &prepared.catalog)
            .unwrap();
        let run = baseline_run(
            &model,
            &kind.to_string(),
            &users,
            50,
            true,
            &prepared,
            ExperimentKind::FreeTop50,
        )
        .unwrap();
        let report = evaluate_run(&run, &prepared, &[10], "probe").unwrap();
        println!(
            "{kind:<20} nDCG@10={:.5} HR@10={:.5} ACLT@10={:.4} ItemCov@10={:.0} ARP@10={:.2} ({:?})",
            report.get("nDCG@10").unwrap(),
            report.get("HR@10").unwrap(),
            report.get("ACLT@10").unwrap(),
            report.get("ItemCoverage@10").unwrap(),
            report.get("ARP@10").unwrap(),
            t.elapsed()
        );
    }
}
