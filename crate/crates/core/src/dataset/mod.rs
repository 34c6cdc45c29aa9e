//! Interaction data, item metadata, preprocessing, splits and popularity
//! statistics.
//!
//! All types here are immutable after construction and safe to share across
//! threads. Dense `u32` indices are assigned in lexicographic order of the
//! raw string identifiers, so "ties broken by id" comparisons reduce to
//! integer comparisons on the dense ids.

mod load;
mod split;
mod stats;

pub use load::{load_catalog, load_interactions, InteractionFormat};
pub use split::{split_holdout, Split};
pub use stats::{cold_start_user_filter, popularity_stats, quantile_linear, PopularityStats};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: String,
        line: u64,
        reason: String,
    },
    #[error("{path}: file contains no interactions")]
    EmptyFile { path: String },
    #[error("rating {rating} outside declared scale [{min}, {max}] at {path}:{line}")]
    RatingOutOfScale {
        rating: f64,
        min: f64,
        max: f64,
        path: String,
        line: u64,
    },
    #[error("history cap {cap} removed every user")]
    CapEmptiedDataset { cap: usize },
    #[error("split ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("head share must lie in (0, 1), got {0}")]
    InvalidHeadShare(f64),
    #[error("quartile filter needs at least 4 users, got {0}")]
    TooFewUsers(usize),
    #[error("unknown user id {0:?}")]
    UnknownUser(String),
    #[error("catalog entry for item {item:?} has an empty title ({path}:{line})")]
    EmptyTitle {
        item: String,
        path: String,
        line: u64,
    },
}

/// Dense user index, assigned in lexicographic order of raw ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserId(pub u32);

/// Dense item index, assigned in lexicographic order of raw ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub u32);

/// Bidirectional map between raw string ids and dense indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Index {
    ids: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl Index {
    /// Builds an index over the unique ids, sorted lexicographically.
    pub fn from_ids<I: IntoIterator<Item = String>>(ids: I) -> Self {
        let set: BTreeSet<String> = ids.into_iter().collect();
        let ids: Vec<String> = set.into_iter().collect();
        let lookup = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        Self { ids, lookup }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, raw: &str) -> Option<u32> {
        self.lookup.get(raw).copied()
    }

    pub fn raw(&self, dense: u32) -> &str {
        &self.ids[dense as usize]
    }

    pub fn raw_ids(&self) -> &[String] {
        &self.ids
    }
}

/// The user and item id spaces a dataset (and everything derived from it)
/// lives in. Shared by train/test splits so dense ids stay comparable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Universe {
    pub users: Index,
    pub items: Index,
}

impl Universe {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn user(&self, raw: &str) -> Option<UserId> {
        self.users.get(raw).map(UserId)
    }

    pub fn item(&self, raw: &str) -> Option<ItemId> {
        self.items.get(raw).map(ItemId)
    }

    pub fn user_raw(&self, u: UserId) -> &str {
        self.users.raw(u.0)
    }

    pub fn item_raw(&self, i: ItemId) -> &str {
        self.items.raw(i.0)
    }

    pub fn user_ids(&self) -> impl Iterator<Item = UserId> {
        (0..self.users.len() as u32).map(UserId)
    }

    pub fn item_ids(&self) -> impl Iterator<Item = ItemId> {
        (0..self.items.len() as u32).map(ItemId)
    }
}

/// Declared rating scale for explicit-feedback datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub user: UserId,
    pub item: ItemId,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

/// A deduplicated set of (user, item, rating, timestamp) records plus the id
/// universe they are expressed in.
#[derive(Debug, Clone)]
pub struct InteractionSet {
    universe: Arc<Universe>,
    interactions: Vec<Interaction>,
    /// Per-user indices into `interactions`, in profile order (timestamp
    /// ascending when timestamps exist, ingest order otherwise).
    profiles: Vec<Vec<usize>>,
    scale: Option<RatingScale>,
}

impl InteractionSet {
    /// Assembles a set from raw records. Duplicate (user, item) pairs are
    /// collapsed keeping the last by timestamp (ties and missing timestamps:
    /// last by record order).
    pub fn from_records(
        records: Vec<(String, String, f64, Option<i64>)>,
        scale: Option<RatingScale>,
    ) -> Self {
        let universe = Arc::new(Universe {
            users: Index::from_ids(records.iter().map(|r| r.0.clone())),
            items: Index::from_ids(records.iter().map(|r| r.1.clone())),
        });
        // Last-wins dedup: later records with a timestamp >= the kept one (or
        // no timestamps at all) replace the kept record.
        let mut kept: BTreeMap<(UserId, ItemId), Interaction> = BTreeMap::new();
        let mut order: BTreeMap<(UserId, ItemId), usize> = BTreeMap::new();
        for (pos, (user, item, rating, timestamp)) in records.iter().enumerate() {
            let user = universe.user(user).expect("id was just indexed");
            let item = universe.item(item).expect("id was just indexed");
            let row = Interaction {
                user,
                item,
                rating: *rating,
                timestamp: *timestamp,
            };
            let replace = match kept.get(&(user, item)) {
                None => true,
                Some(prev) => match (prev.timestamp, row.timestamp) {
                    (Some(a), Some(b)) => b >= a,
                    _ => true,
                },
            };
            if replace {
                kept.insert((user, item), row);
                order.insert((user, item), pos);
            }
        }
        let mut rows: Vec<(usize, Interaction)> = kept
            .into_iter()
            .map(|(key, row)| (order[&key], row))
            .collect();
        rows.sort_by_key(|(pos, _)| *pos);
        let interactions: Vec<Interaction> = rows.into_iter().map(|(_, row)| row).collect();
        Self::from_parts(universe, interactions, scale)
    }

    /// Wraps already-deduplicated interactions expressed in `universe`.
    pub fn from_parts(
        universe: Arc<Universe>,
        interactions: Vec<Interaction>,
        scale: Option<RatingScale>,
    ) -> Self {
        let mut profiles = vec![Vec::new(); universe.user_count()];
        for (idx, row) in interactions.iter().enumerate() {
            profiles[row.user.0 as usize].push(idx);
        }
        let has_timestamps = interactions.iter().any(|r| r.timestamp.is_some());
        if has_timestamps {
            for profile in &mut profiles {
                profile.sort_by_key(|&idx| (interactions[idx].timestamp, idx));
            }
        }
        Self {
            universe,
            interactions,
            profiles,
            scale,
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn scale(&self) -> Option<RatingScale> {
        self.scale
    }

    /// The user's interactions in profile order.
    pub fn profile(&self, user: UserId) -> impl Iterator<Item = &Interaction> {
        self.profiles[user.0 as usize]
            .iter()
            .map(move |&idx| &self.interactions[idx])
    }

    /// Indices into [`Self::interactions`] for the user's profile.
    pub fn profile_indices(&self, user: UserId) -> &[usize] {
        &self.profiles[user.0 as usize]
    }

    pub fn profile_len(&self, user: UserId) -> usize {
        self.profiles[user.0 as usize].len()
    }

    /// Users with at least one interaction, ascending.
    pub fn active_users(&self) -> Vec<UserId> {
        self.universe
            .user_ids()
            .filter(|&u| self.profile_len(u) > 0)
            .collect()
    }

    /// The set of items the user has interacted with.
    pub fn seen_items(&self, user: UserId) -> BTreeSet<ItemId> {
        self.profile(user).map(|r| r.item).collect()
    }

    /// Removes every user whose interaction count exceeds `cap`, then drops
    /// users and items left without interactions and compacts the universe.
    pub fn apply_history_cap(&self, cap: usize) -> Result<InteractionSet, DatasetError> {
        assert!(cap >= 1, "history cap must be at least 1");
        let keep: Vec<Interaction> = self
            .interactions
            .iter()
            .filter(|row| self.profile_len(row.user) <= cap)
            .copied()
            .collect();
        if keep.is_empty() {
            return Err(DatasetError::CapEmptiedDataset { cap });
        }
        Ok(self.reindexed(keep))
    }

    /// Drops users with fewer than `min_user` interactions and items with
    /// fewer than `min_item` distinct users, repeating until stable (an
    /// n-core style filter). Optional preprocessing ahead of the history cap.
    pub fn apply_core_filter(
        &self,
        min_user: usize,
        min_item: usize,
    ) -> Result<InteractionSet, DatasetError> {
        let mut rows: Vec<Interaction> = self.interactions.clone();
        loop {
            let mut user_counts: HashMap<UserId, usize> = HashMap::new();
            let mut item_counts: HashMap<ItemId, usize> = HashMap::new();
            for row in &rows {
                *user_counts.entry(row.user).or_default() += 1;
                *item_counts.entry(row.item).or_default() += 1;
            }
            let before = rows.len();
            rows.retain(|row| {
                user_counts[&row.user] >= min_user && item_counts[&row.item] >= min_item
            });
            if rows.len() == before {
                break;
            }
        }
        if rows.is_empty() {
            return Err(DatasetError::CapEmptiedDataset {
                cap: min_user.max(min_item),
            });
        }
        Ok(self.reindexed(rows))
    }

    /// Rebuilds the universe around the surviving rows.
    fn reindexed(&self, rows: Vec<Interaction>) -> InteractionSet {
        let records: Vec<(String, String, f64, Option<i64>)> = rows
            .iter()
            .map(|row| {
                (
                    self.universe.user_raw(row.user).to_string(),
                    self.universe.item_raw(row.item).to_string(),
                    row.rating,
                    row.timestamp,
                )
            })
            .collect();
        InteractionSet::from_records(records, self.scale)
    }

    /// SHA-256 over the canonical row serialization; identifies the
    /// post-preprocessing dataset in manifests and reports.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for user in self.universe.user_ids() {
            for row in self.profile(user) {
                hasher.update(self.universe.user_raw(row.user).as_bytes());
                hasher.update([0]);
                hasher.update(self.universe.item_raw(row.item).as_bytes());
                hasher.update([0]);
                hasher.update(row.rating.to_le_bytes());
                hasher.update(row.timestamp.unwrap_or(i64::MIN).to_le_bytes());
                hasher.update([0xff]);
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// Item metadata: a human-readable title and a feature list per item.
#[derive(Debug, Clone, Default)]
pub struct ItemCatalog {
    entries: BTreeMap<String, CatalogEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub title: String,
    pub features: Vec<String>,
}

impl ItemCatalog {
    pub fn new(entries: BTreeMap<String, CatalogEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, raw_item: &str) -> Option<&CatalogEntry> {
        self.entries.get(raw_item)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &CatalogEntry)> {
        self.entries.iter()
    }

    /// Title for a dense item id, falling back to the raw id when the
    /// catalog has no entry for it.
    pub fn title_of<'a>(&'a self, universe: &'a Universe, item: ItemId) -> &'a str {
        let raw = universe.item_raw(item);
        self.get(raw).map(|e| e.title.as_str()).unwrap_or(raw)
    }

    pub fn features_of(&self, universe: &Universe, item: ItemId) -> &[String] {
        let raw = universe.item_raw(item);
        self.get(raw).map(|e| e.features.as_slice()).unwrap_or(&[])
    }

    /// True if no item carries any feature; attribute-based models cannot
    /// be fitted on such a catalog.
    pub fn all_features_empty(&self) -> bool {
        self.entries.values().all(|e| e.features.is_empty())
    }
}
