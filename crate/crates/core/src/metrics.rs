//! Ranking, coverage, bias and list-similarity metrics.
//!
//! Conventions (fixed here, oracle-tested):
//! * Accuracy metrics (P/R/F1/HR/MAP/nDCG/EPC) average over "evaluated"
//!   users: those with a non-empty test relevance set. Exposure metrics
//!   (coverage, Gini, ACLT, ARP) account every recommended list, because
//!   they measure what the system shows, not held-out relevance.
//! * MAP normalizes AP@k by min(k, |rel|); nDCG uses binary gains with the
//!   ideal over min(k, |rel|).
//! * EPC weights per-rank novelty 1 - phi(i)/|U| by the discounted relevant
//!   mass at the same cutoff.
//! * Gini is reported as diversity = 1 - G over exposure counts of the FULL
//!   catalog (zeros included).
//! * PopREO is the population std/mean of per-group hit probabilities for
//!   the short-head and long-tail groups.
//! * Kendall's tau restricts both lists to their intersection; users with
//!   fewer than two common items contribute 0.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ItemId, PopularityStats, UserId};
use crate::run::RecommendationRun;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no user has a non-empty relevance set; nothing to evaluate")]
    NoEvaluableUsers,
    #[error("the {group} group has no test-relevant items; choose a different head_share")]
    EmptyPopularityGroup { group: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

/// One scalar metric outcome at a cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: String,
    pub cutoff: usize,
    pub value: f64,
    pub orientation: Orientation,
}

impl MetricValue {
    fn higher(name: &str, cutoff: usize, value: f64) -> Self {
        Self {
            name: name.into(),
            cutoff,
            value,
            orientation: Orientation::HigherBetter,
        }
    }

    fn lower(name: &str, cutoff: usize, value: f64) -> Self {
        Self {
            name: name.into(),
            cutoff,
            value,
            orientation: Orientation::LowerBetter,
        }
    }

    /// Column label, e.g. `nDCG@10`.
    pub fn label(&self) -> String {
        format!("{}@{}", self.name, self.cutoff)
    }
}

/// Everything a single-run metric needs besides the run itself.
pub struct EvalContext<'a> {
    /// Test relevance sets per user (may be empty for some users).
    pub relevance: &'a BTreeMap<UserId, BTreeSet<ItemId>>,
    pub stats: &'a PopularityStats,
    /// |I|: full catalog size.
    pub catalog_size: usize,
    /// |U|: train user count, the EPC novelty denominator.
    pub user_count: usize,
    pub cutoff: usize,
}

impl<'a> EvalContext<'a> {
    fn rel(&self, user: UserId) -> Option<&BTreeSet<ItemId>> {
        self.relevance.get(&user).filter(|r| !r.is_empty())
    }
}

fn disc(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

/// Averages `f` over users with a non-empty relevance set.
fn mean_over_evaluated(
    run: &RecommendationRun,
    ctx: &EvalContext,
    mut f: impl FnMut(UserId, &[ItemId], &BTreeSet<ItemId>) -> f64,
) -> Result<f64, MetricsError> {
    let mut total = 0.0;
    let mut count = 0usize;
    for (user, list) in &run.lists {
        let Some(rel) = ctx.rel(*user) else {
            continue;
        };
        let top: Vec<ItemId> = list.top_k(ctx.cutoff).collect();
        total += f(*user, &top, rel);
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::NoEvaluableUsers);
    }
    Ok(total / count as f64)
}

/// Precision, recall and F1 at the context cutoff.
pub fn precision_recall_f1_at_k(
    run: &RecommendationRun,
    ctx: &EvalContext,
) -> Result<[MetricValue; 3], MetricsError> {
    let mut p_total = 0.0;
    let mut r_total = 0.0;
    let mut f_total = 0.0;
    let mut count = 0usize;
    for (user, list) in &run.lists {
        let Some(rel) = ctx.rel(*user) else {
            continue;
        };
        let hits = list.top_k(ctx.cutoff).filter(|i| rel.contains(i)).count() as f64;
        let p = hits / ctx.cutoff as f64;
        let r = hits / rel.len() as f64;
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        p_total += p;
        r_total += r;
        f_total += f;
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::NoEvaluableUsers);
    }
    let n = count as f64;
    Ok([
        MetricValue::higher("Precision", ctx.cutoff, p_total / n),
        MetricValue::higher("Recall", ctx.cutoff, r_total / n),
        MetricValue::higher("F1", ctx.cutoff, f_total / n),
    ])
}

/// Fraction of evaluated users with at least one hit in the top k.
pub fn hit_ratio_at_k(run: &RecommendationRun, ctx: &EvalContext) -> Result<MetricValue, MetricsError> {
    let value = mean_over_evaluated(run, ctx, |_, top, rel| {
        if top.iter().any(|i| rel.contains(i)) { 1.0 } else { 0.0 }
    })?;
    Ok(MetricValue::higher("HR", ctx.cutoff, value))
}

/// AP@k = sum over relevant ranks r of P@r, normalized by min(k, |rel|).
pub fn map_at_k(run: &RecommendationRun, ctx: &EvalContext) -> Result<MetricValue, MetricsError> {
    let value = mean_over_evaluated(run, ctx, |_, top, rel| {
        let mut hits = 0usize;
        let mut ap = 0.0;
        for (rank, item) in top.iter().enumerate() {
            if rel.contains(item) {
                hits += 1;
                ap += hits as f64 / (rank + 1) as f64;
            }
        }
        ap / ctx.cutoff.min(rel.len()) as f64
    })?;
    Ok(MetricValue::higher("MAP", ctx.cutoff, value))
}

/// Binary-gain nDCG with the ideal DCG over min(k, |rel|) ranks.
pub fn ndcg_at_k(run: &RecommendationRun, ctx: &EvalContext) -> Result<MetricValue, MetricsError> {
    let value = mean_over_evaluated(run, ctx, |_, top, rel| {
        let dcg: f64 = top
            .iter()
            .enumerate()
            .filter(|(_, i)| rel.contains(i))
            .map(|(rank, _)| disc(rank + 1))
            .sum();
        let ideal: f64 = (1..=ctx.cutoff.min(rel.len())).map(disc).sum();
        if ideal > 0.0 { dcg / ideal } else { 0.0 }
    })?;
    Ok(MetricValue::higher("nDCG", ctx.cutoff, value))
}

/// Count of distinct items appearing in any user's top k.
pub fn item_coverage_at_k(run: &RecommendationRun, ctx: &EvalContext) -> MetricValue {
    let covered: BTreeSet<ItemId> = run
        .lists
        .values()
        .flat_map(|list| list.top_k(ctx.cutoff))
        .collect();
    MetricValue::higher("ItemCoverage", ctx.cutoff, covered.len() as f64)
}

/// 1 - Gini over per-item exposure counts (zeros included), so an even
/// exposure distribution scores 1.
pub fn gini_diversity_at_k(run: &RecommendationRun, ctx: &EvalContext) -> MetricValue {
    let mut counts = vec![0u64; ctx.catalog_size];
    for list in run.lists.values() {
        for item in list.top_k(ctx.cutoff) {
            counts[item.0 as usize] += 1;
        }
    }
    counts.sort_unstable();
    let n = ctx.catalog_size as f64;
    let total: u64 = counts.iter().sum();
    let gini = if total == 0 {
        0.0
    } else {
        let weighted: f64 = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (2.0 * (i + 1) as f64 - n - 1.0) * c as f64)
            .sum();
        weighted / (n * total as f64)
    };
    MetricValue::higher("Gini", ctx.cutoff, 1.0 - gini)
}

/// Expected popularity complement: per-rank novelty 1 - phi(i)/|U| weighted
/// by discounted relevance, normalized by the discounted relevant mass.
/// Users whose top-k holds no relevant item contribute 0.
pub fn epc_at_k(run: &RecommendationRun, ctx: &EvalContext) -> Result<MetricValue, MetricsError> {
    let value = mean_over_evaluated(run, ctx, |_, top, rel| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (rank, item) in top.iter().enumerate() {
            if rel.contains(item) {
                let novelty = 1.0 - f64::from(ctx.stats.phi(*item)) / ctx.user_count as f64;
                num += disc(rank + 1) * novelty;
                den += disc(rank + 1);
            }
        }
        if den > 0.0 { num / den } else { 0.0 }
    })?;
    Ok(MetricValue::higher("EPC", ctx.cutoff, value))
}

/// Average number of long-tail items per top-k list, over all lists.
pub fn aclt_at_k(run: &RecommendationRun, ctx: &EvalContext) -> MetricValue {
    let users = run.lists.len();
    let total: usize = run
        .lists
        .values()
        .map(|list| list.top_k(ctx.cutoff).filter(|i| ctx.stats.is_long_tail(*i)).count())
        .sum();
    let value = if users == 0 { 0.0 } else { total as f64 / users as f64 };
    MetricValue::higher("ACLT", ctx.cutoff, value)
}

/// Mean per-list average phi of the recommended items. A user with an empty
/// list contributes 0 but still counts in the denominator.
pub fn arp_at_k(run: &RecommendationRun, ctx: &EvalContext) -> MetricValue {
    let users = run.lists.len();
    let total: f64 = run
        .lists
        .values()
        .map(|list| {
            let top: Vec<ItemId> = list.top_k(ctx.cutoff).collect();
            if top.is_empty() {
                return 0.0;
            }
            top.iter().map(|i| f64::from(ctx.stats.phi(*i))).sum::<f64>() / top.len() as f64
        })
        .sum();
    let value = if users == 0 { 0.0 } else { total / users as f64 };
    MetricValue::lower("ARP", ctx.cutoff, value)
}

/// Ranking-based equal opportunity across the popularity groups:
/// std/mean (population) of per-group probabilities that a test-relevant
/// item is ranked into its user's top k.
pub fn pop_reo_at_k(run: &RecommendationRun, ctx: &EvalContext) -> Result<MetricValue, MetricsError> {
    let mut hit = [0u64; 2];
    let mut total = [0u64; 2];
    for (user, rel) in ctx.relevance {
        let Some(list) = run.lists.get(user) else {
            continue;
        };
        let top: BTreeSet<ItemId> = list.top_k(ctx.cutoff).collect();
        for item in rel {
            let group = usize::from(ctx.stats.is_long_tail(*item));
            total[group] += 1;
            if top.contains(item) {
                hit[group] += 1;
            }
        }
    }
    if total[0] == 0 {
        return Err(MetricsError::EmptyPopularityGroup { group: "short-head" });
    }
    if total[1] == 0 {
        return Err(MetricsError::EmptyPopularityGroup { group: "long-tail" });
    }
    let p = [
        hit[0] as f64 / total[0] as f64,
        hit[1] as f64 / total[1] as f64,
    ];
    let mean = (p[0] + p[1]) / 2.0;
    let std = (((p[0] - mean).powi(2) + (p[1] - mean).powi(2)) / 2.0).sqrt();
    let value = if mean > 0.0 { std / mean } else { 0.0 };
    Ok(MetricValue::lower("PopREO", ctx.cutoff, value))
}

/// Mean per-user Jaccard overlap of the two runs' top-k sets, over users
/// present in both runs. Users where both lists are empty are skipped.
pub fn jaccard_at_k(a: &RecommendationRun, b: &RecommendationRun, k: usize) -> MetricValue {
    let mut total = 0.0;
    let mut count = 0usize;
    for (user, list_a) in &a.lists {
        let Some(list_b) = b.lists.get(user) else {
            continue;
        };
        let set_a: BTreeSet<ItemId> = list_a.top_k(k).collect();
        let set_b: BTreeSet<ItemId> = list_b.top_k(k).collect();
        let union = set_a.union(&set_b).count();
        if union == 0 {
            continue;
        }
        let inter = set_a.intersection(&set_b).count();
        total += inter as f64 / union as f64;
        count += 1;
    }
    let value = if count == 0 { 0.0 } else { total / count as f64 };
    MetricValue::higher("Jaccard", k, value)
}

/// Kendall's tau over the intersection of the two top-k lists, averaged
/// per user; fewer than two common items contributes 0.
pub fn kendall_tau_at_k(a: &RecommendationRun, b: &RecommendationRun, k: usize) -> MetricValue {
    let mut total = 0.0;
    let mut count = 0usize;
    for (user, list_a) in &a.lists {
        let Some(list_b) = b.lists.get(user) else {
            continue;
        };
        let top_a: Vec<ItemId> = list_a.top_k(k).collect();
        let top_b: Vec<ItemId> = list_b.top_k(k).collect();
        let set_b: BTreeSet<ItemId> = top_b.iter().copied().collect();
        let common: Vec<ItemId> = top_a.iter().copied().filter(|i| set_b.contains(i)).collect();
        count += 1;
        let m = common.len();
        if m < 2 {
            continue;
        }
        let rank_b: BTreeMap<ItemId, usize> = top_b
            .iter()
            .enumerate()
            .map(|(rank, item)| (*item, rank))
            .collect();
        let mut concordant = 0i64;
        let mut discordant = 0i64;
        for x in 0..m {
            for y in (x + 1)..m {
                // common is ordered by list a; compare the pair's order in b.
                if rank_b[&common[x]] < rank_b[&common[y]] {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
        let pairs = (m * (m - 1) / 2) as f64;
        total += (concordant - discordant) as f64 / pairs;
    }
    let value = if count == 0 { 0.0 } else { total / count as f64 };
    MetricValue::higher("Kendall", k, value)
}

/// The full single-run battery at one cutoff, in report column order.
pub fn evaluate_single_cutoff(
    run: &RecommendationRun,
    ctx: &EvalContext,
) -> Result<Vec<MetricValue>, MetricsError> {
    let [p, r, f1] = precision_recall_f1_at_k(run, ctx)?;
    Ok(vec![
        ndcg_at_k(run, ctx)?,
        hit_ratio_at_k(run, ctx)?,
        map_at_k(run, ctx)?,
        p,
        r,
        f1,
        item_coverage_at_k(run, ctx),
        gini_diversity_at_k(run, ctx),
        epc_at_k(run, ctx)?,
        aclt_at_k(run, ctx),
        arp_at_k(run, ctx),
        pop_reo_at_k(run, ctx)?,
    ])
}
