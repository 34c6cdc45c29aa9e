//! The nine classical baselines behind one uniform fit/recommend contract.
//!
//! `fit` consumes a training set (always binarized for the collaborative
//! models) plus the item catalog and returns an immutable [`FittedModel`];
//! `recommend` ranks the whole eligible catalog for a user. Scores follow
//! the per-model formulas documented on each scorer.

mod ease;
mod knn;
mod rp3beta;
mod similarity;
mod simple;
mod tfidf;
mod vsm;

pub use ease::ease_r_fit;
pub use knn::{attribute_knn_scores, item_knn_scores, user_knn_scores, AttributeAxis};
pub use rp3beta::rp3beta_weights;
pub use similarity::SparseMatrix;
pub use simple::random_scores;
pub use tfidf::item_feature_matrix;
pub use vsm::vsm_scores;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{InteractionSet, ItemCatalog, ItemId, Universe, UserId};
use crate::run::RecommendationList;

#[derive(Debug, Error)]
pub enum RecommenderError {
    #[error("training set is empty")]
    EmptyTrain,
    #[error("{kind}: {reason}")]
    InvalidParams { kind: ModelKind, reason: String },
    #[error("{kind} needs item features but every catalog entry is featureless")]
    FeaturelessCatalog { kind: ModelKind },
    #[error("unknown user id {0:?}")]
    UnknownUser(String),
    #[error("item weight matrix contains non-finite values")]
    NonFiniteWeights,
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
}

/// The baseline roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Random,
    MostPop,
    UserKnn,
    ItemKnn,
    AttributeUserKnn,
    AttributeItemKnn,
    Rp3Beta,
    EaseR,
    Vsm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 9] = [
        ModelKind::Random,
        ModelKind::MostPop,
        ModelKind::UserKnn,
        ModelKind::ItemKnn,
        ModelKind::AttributeUserKnn,
        ModelKind::AttributeItemKnn,
        ModelKind::Rp3Beta,
        ModelKind::EaseR,
        ModelKind::Vsm,
    ];

    pub fn needs_features(self) -> bool {
        matches!(
            self,
            ModelKind::AttributeUserKnn | ModelKind::AttributeItemKnn | ModelKind::Vsm
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelKind::Random => "Random",
            ModelKind::MostPop => "MostPop",
            ModelKind::UserKnn => "UserKNN",
            ModelKind::ItemKnn => "ItemKNN",
            ModelKind::AttributeUserKnn => "AttributeUserKNN",
            ModelKind::AttributeItemKnn => "AttributeItemKNN",
            ModelKind::Rp3Beta => "RP3beta",
            ModelKind::EaseR => "EASER",
            ModelKind::Vsm => "VSM",
        };
        f.write_str(name)
    }
}

impl FromStr for ModelKind {
    type Err = RecommenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let canon: String = s.chars().filter(|c| c.is_alphanumeric()).collect();
        match canon.to_ascii_lowercase().as_str() {
            "random" => Ok(ModelKind::Random),
            "mostpop" | "mostpopular" => Ok(ModelKind::MostPop),
            "userknn" => Ok(ModelKind::UserKnn),
            "itemknn" => Ok(ModelKind::ItemKnn),
            "attributeuserknn" | "attruserknn" | "auserknn" => Ok(ModelKind::AttributeUserKnn),
            "attributeitemknn" | "attritemknn" | "aitemknn" => Ok(ModelKind::AttributeItemKnn),
            "rp3beta" | "rp3b" => Ok(ModelKind::Rp3Beta),
            "easer" | "ease" => Ok(ModelKind::EaseR),
            "vsm" => Ok(ModelKind::Vsm),
            _ => Err(RecommenderError::UnknownKind(s.to_string())),
        }
    }
}

/// Hyperparameters; unused fields are ignored by kinds that do not need them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub k_neighbors: usize,
    pub beta: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            k_neighbors: 50,
            beta: 0.6,
            lambda: 100.0,
            seed: 42,
        }
    }
}

enum Scorer {
    Random {
        seed: u64,
    },
    MostPop {
        phi: Vec<f64>,
    },
    /// Used by both interaction-based and attribute-based user KNN.
    UserNeighbors {
        neighbors: Vec<Vec<(u32, f64)>>,
        profiles: Vec<Vec<ItemId>>,
    },
    /// Used by both interaction-based and attribute-based item KNN:
    /// `incident[j]` lists the items i whose neighbourhood contains j.
    ItemNeighbors {
        incident: Vec<Vec<(u32, f64)>>,
        profiles: Vec<Vec<ItemId>>,
    },
    /// Dense item-item weight matrix consumed as profile-row sums
    /// (RP3beta random-walk weights and the EASE closed-form weights).
    ItemWeights {
        weights: Vec<f64>,
        n_items: usize,
        profiles: Vec<Vec<ItemId>>,
    },
    Vsm {
        item_vectors: SparseMatrix,
        profiles: Vec<Vec<ItemId>>,
    },
}

/// An immutable fitted model; `recommend` is a pure function of it.
pub struct FittedModel {
    kind: ModelKind,
    params: ModelParams,
    universe: Arc<Universe>,
    seen: Vec<BTreeSet<ItemId>>,
    scorer: Scorer,
}

/// Fits a model of the given kind on the training set.
pub fn fit(
    kind: ModelKind,
    params: ModelParams,
    train: &InteractionSet,
    catalog: &ItemCatalog,
) -> Result<FittedModel, RecommenderError> {
    if train.is_empty() {
        return Err(RecommenderError::EmptyTrain);
    }
    if kind.needs_features() && catalog.all_features_empty() {
        return Err(RecommenderError::FeaturelessCatalog { kind });
    }
    let needs_k = matches!(
        kind,
        ModelKind::UserKnn | ModelKind::ItemKnn | ModelKind::AttributeUserKnn
            | ModelKind::AttributeItemKnn
    );
    if needs_k && params.k_neighbors == 0 {
        return Err(RecommenderError::InvalidParams {
            kind,
            reason: "k_neighbors must be at least 1".into(),
        });
    }
    let universe = train.universe().clone();
    let profiles: Vec<Vec<ItemId>> = universe
        .user_ids()
        .map(|u| train.seen_items(u).into_iter().collect())
        .collect();
    let seen: Vec<BTreeSet<ItemId>> = profiles
        .iter()
        .map(|p| p.iter().copied().collect())
        .collect();

    let scorer = match kind {
        ModelKind::Random => Scorer::Random { seed: params.seed },
        ModelKind::MostPop => Scorer::MostPop {
            phi: knn::item_degrees(&profiles, universe.item_count())
                .into_iter()
                .map(f64::from)
                .collect(),
        },
        ModelKind::UserKnn => Scorer::UserNeighbors {
            neighbors: knn::user_neighbors(&profiles, universe.item_count(), params.k_neighbors),
            profiles,
        },
        ModelKind::ItemKnn => Scorer::ItemNeighbors {
            incident: knn::item_neighbor_incidence(
                &profiles,
                universe.item_count(),
                params.k_neighbors,
            ),
            profiles,
        },
        ModelKind::AttributeUserKnn => {
            let features = tfidf::item_feature_matrix(&universe, catalog);
            Scorer::UserNeighbors {
                neighbors: knn::attribute_user_neighbors(&profiles, &features, params.k_neighbors),
                profiles,
            }
        }
        ModelKind::AttributeItemKnn => {
            let features = tfidf::item_feature_matrix(&universe, catalog);
            Scorer::ItemNeighbors {
                incident: knn::incidence_from_neighbors(
                    features.cosine_top_k(params.k_neighbors),
                ),
                profiles,
            }
        }
        ModelKind::Rp3Beta => {
            if params.beta < 0.0 {
                return Err(RecommenderError::InvalidParams {
                    kind,
                    reason: format!("beta must be >= 0, got {}", params.beta),
                });
            }
            Scorer::ItemWeights {
                weights: rp3beta::rp3beta_weights(&profiles, universe.item_count(), params.beta),
                n_items: universe.item_count(),
                profiles,
            }
        }
        ModelKind::EaseR => {
            if params.lambda <= 0.0 {
                return Err(RecommenderError::InvalidParams {
                    kind,
                    reason: format!("lambda must be > 0, got {}", params.lambda),
                });
            }
            Scorer::ItemWeights {
                weights: ease::ease_r_fit(&profiles, universe.item_count(), params.lambda)?,
                n_items: universe.item_count(),
                profiles,
            }
        }
        ModelKind::Vsm => {
            let mut item_vectors = tfidf::item_feature_matrix(&universe, catalog);
            item_vectors.normalize_rows();
            Scorer::Vsm {
                item_vectors,
                profiles,
            }
        }
    };
    Ok(FittedModel {
        kind,
        params,
        universe,
        seen,
        scorer,
    })
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    /// Scores every item in the universe for the user.
    pub fn scores(&self, user: UserId) -> Vec<f64> {
        let n_items = self.universe.item_count();
        match &self.scorer {
            Scorer::Random { seed } => {
                simple::random_scores(*seed, self.universe.user_raw(user), n_items)
            }
            Scorer::MostPop { phi } => phi.clone(),
            Scorer::UserNeighbors {
                neighbors,
                profiles,
            } => {
                let mut scores = vec![0.0; n_items];
                for &(v, sim) in &neighbors[user.0 as usize] {
                    for &item in &profiles[v as usize] {
                        scores[item.0 as usize] += sim;
                    }
                }
                scores
            }
            Scorer::ItemNeighbors { incident, profiles } => {
                let mut scores = vec![0.0; n_items];
                for &item in &profiles[user.0 as usize] {
                    for &(i, sim) in &incident[item.0 as usize] {
                        scores[i as usize] += sim;
                    }
                }
                scores
            }
            Scorer::ItemWeights {
                weights,
                n_items,
                profiles,
            } => {
                let mut scores = vec![0.0; *n_items];
                for &item in &profiles[user.0 as usize] {
                    let row = &weights[item.0 as usize * n_items..(item.0 as usize + 1) * n_items];
                    for (s, w) in scores.iter_mut().zip(row) {
                        *s += w;
                    }
                }
                scores
            }
            Scorer::Vsm { item_vectors, profiles } => {
                vsm::vsm_scores(item_vectors, &profiles[user.0 as usize])
            }
        }
    }

    /// Top-`n` items by score. With `exclude_seen`, the user's train profile
    /// never appears; the list is shorter than `n` only when the eligible
    /// catalog is smaller.
    pub fn recommend(
        &self,
        user: UserId,
        n: usize,
        exclude_seen: bool,
    ) -> Result<RecommendationList, RecommenderError> {
        if user.0 as usize >= self.universe.user_count() {
            return Err(RecommenderError::UnknownUser(format!("#{}", user.0)));
        }
        let scores = self.scores(user);
        let seen = &self.seen[user.0 as usize];
        let scored: Vec<(ItemId, f64)> = scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| (ItemId(i as u32), s))
            .filter(|(i, _)| !exclude_seen || !seen.contains(i))
            .collect();
        Ok(RecommendationList::from_scores(user, scored).truncated(n))
    }

    /// Resolves a raw user id and recommends for it.
    pub fn recommend_raw(
        &self,
        raw_user: &str,
        n: usize,
        exclude_seen: bool,
    ) -> Result<RecommendationList, RecommenderError> {
        let user = self
            .universe
            .user(raw_user)
            .ok_or_else(|| RecommenderError::UnknownUser(raw_user.to_string()))?;
        self.recommend(user, n, exclude_seen)
    }
}
