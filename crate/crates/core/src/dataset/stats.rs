//! Popularity statistics and the cold-start user filter.

use std::collections::BTreeSet;

use super::{DatasetError, InteractionSet, ItemId, UserId};

/// Item popularity over a training set: phi(i) counts distinct train users
/// per item, and the catalog is partitioned into the short head (most popular
/// prefix covering `head_share` of all train interactions) and the long tail.
#[derive(Debug, Clone)]
pub struct PopularityStats {
    phi: Vec<u32>,
    pub max_phi: u32,
    pub short_head: BTreeSet<ItemId>,
    pub long_tail: BTreeSet<ItemId>,
    pub head_share: f64,
    user_counts: Vec<u32>,
}

impl PopularityStats {
    /// Distinct-train-user count for the item.
    pub fn phi(&self, item: ItemId) -> u32 {
        self.phi[item.0 as usize]
    }

    pub fn phi_all(&self) -> &[u32] {
        &self.phi
    }

    pub fn is_long_tail(&self, item: ItemId) -> bool {
        self.long_tail.contains(&item)
    }

    /// Train interaction count for the user.
    pub fn user_count(&self, user: UserId) -> u32 {
        self.user_counts[user.0 as usize]
    }

    /// Items sorted by descending phi, ties by item id ascending.
    pub fn items_by_popularity(&self) -> Vec<ItemId> {
        let mut items: Vec<ItemId> = (0..self.phi.len() as u32).map(ItemId).collect();
        items.sort_by_key(|i| (std::cmp::Reverse(self.phi(*i)), *i));
        items
    }
}

/// Computes phi and the short-head/long-tail partition: the short head is
/// the smallest prefix of items (by descending phi, ties by item id) whose
/// cumulative interaction count reaches `head_share` of all train
/// interactions.
pub fn popularity_stats(
    train: &InteractionSet,
    head_share: f64,
) -> Result<PopularityStats, DatasetError> {
    if !(head_share > 0.0 && head_share < 1.0) {
        return Err(DatasetError::InvalidHeadShare(head_share));
    }
    let universe = train.universe();
    let mut phi = vec![0u32; universe.item_count()];
    for user in universe.user_ids() {
        let mut seen = BTreeSet::new();
        for row in train.profile(user) {
            if seen.insert(row.item) {
                phi[row.item.0 as usize] += 1;
            }
        }
    }
    let user_counts: Vec<u32> = universe
        .user_ids()
        .map(|u| train.profile_len(u) as u32)
        .collect();

    let mut ranked: Vec<ItemId> = (0..phi.len() as u32).map(ItemId).collect();
    ranked.sort_by_key(|i| (std::cmp::Reverse(phi[i.0 as usize]), *i));
    let total: u64 = phi.iter().map(|&c| u64::from(c)).sum();
    let threshold = head_share * total as f64;
    let mut short_head = BTreeSet::new();
    let mut cumulative: u64 = 0;
    for item in &ranked {
        if cumulative as f64 >= threshold && !short_head.is_empty() {
            break;
        }
        short_head.insert(*item);
        cumulative += u64::from(phi[item.0 as usize]);
    }
    let long_tail: BTreeSet<ItemId> = ranked
        .iter()
        .filter(|i| !short_head.contains(i))
        .copied()
        .collect();
    let max_phi = phi.iter().copied().max().unwrap_or(0);
    Ok(PopularityStats {
        phi,
        max_phi,
        short_head,
        long_tail,
        head_share,
        user_counts,
    })
}

/// Quantile by linear interpolation over sorted values (the `numpy` default
/// convention): position `q * (n - 1)` interpolated between neighbours.
pub fn quantile_linear(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Users in the lower quartile by train interaction count: everyone whose
/// count is <= Q1, where Q1 interpolates linearly over the sorted counts.
pub fn cold_start_user_filter(train: &InteractionSet) -> Result<BTreeSet<UserId>, DatasetError> {
    let users: Vec<UserId> = train.active_users();
    if users.len() < 4 {
        return Err(DatasetError::TooFewUsers(users.len()));
    }
    let mut counts: Vec<f64> = users
        .iter()
        .map(|&u| train.profile_len(u) as f64)
        .collect();
    counts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q1 = quantile_linear(&counts, 0.25);
    Ok(users
        .into_iter()
        .filter(|&u| (train.profile_len(u) as f64) <= q1)
        .collect())
}
