//! Neighbourhood models: user/item KNN over binarized interactions and their
//! attribute-based variants over TF-IDF feature vectors.
//!
//! Scoring follows the plain similarity-weighted sum:
//! * user axis:  score(u, i) = sum over v in N_k(u) of cos(u, v) * x(v, i)
//! * item axis:  score(u, i) = sum over j in N_k(i) ∩ profile(u) of cos(i, j)
//!
//! Neighbourhoods keep the top-k rows by cosine similarity (positive only),
//! ties broken by id ascending.

use crate::dataset::{InteractionSet, ItemCatalog, ItemId, UserId};

use super::similarity::SparseMatrix;
use super::tfidf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeAxis {
    User,
    Item,
}

/// Distinct-user count per item over binarized profiles.
pub(crate) fn item_degrees(profiles: &[Vec<ItemId>], n_items: usize) -> Vec<u32> {
    let mut deg = vec![0u32; n_items];
    for profile in profiles {
        for item in profile {
            deg[item.0 as usize] += 1;
        }
    }
    deg
}

fn user_rows(profiles: &[Vec<ItemId>], n_items: usize) -> SparseMatrix {
    let rows = profiles
        .iter()
        .map(|p| p.iter().map(|i| (i.0, 1.0)).collect())
        .collect();
    SparseMatrix::new(rows, n_items)
}

fn item_rows(profiles: &[Vec<ItemId>], n_items: usize) -> SparseMatrix {
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_items];
    for (u, profile) in profiles.iter().enumerate() {
        for item in profile {
            rows[item.0 as usize].push((u as u32, 1.0));
        }
    }
    SparseMatrix::new(rows, profiles.len())
}

pub(crate) fn user_neighbors(
    profiles: &[Vec<ItemId>],
    n_items: usize,
    k: usize,
) -> Vec<Vec<(u32, f64)>> {
    user_rows(profiles, n_items).cosine_top_k(k)
}

pub(crate) fn attribute_user_neighbors(
    profiles: &[Vec<ItemId>],
    features: &SparseMatrix,
    k: usize,
) -> Vec<Vec<(u32, f64)>> {
    // User profile vector = sum of the TF-IDF vectors of the train items.
    let rows: Vec<Vec<(u32, f64)>> = profiles
        .iter()
        .map(|profile| {
            let mut acc: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
            for item in profile {
                for &(feat, w) in features.row(item.0 as usize) {
                    *acc.entry(feat).or_insert(0.0) += w;
                }
            }
            acc.into_iter().collect()
        })
        .collect();
    SparseMatrix::new(rows, features.n_cols()).cosine_top_k(k)
}

/// Inverts per-item neighbourhoods: `incident[j]` lists every item i with
/// j in N_k(i), carrying cos(i, j). Scoring then walks the user's profile.
pub(crate) fn incidence_from_neighbors(neighbors: Vec<Vec<(u32, f64)>>) -> Vec<Vec<(u32, f64)>> {
    let mut incident: Vec<Vec<(u32, f64)>> = vec![Vec::new(); neighbors.len()];
    for (i, row) in neighbors.iter().enumerate() {
        for &(j, sim) in row {
            incident[j as usize].push((i as u32, sim));
        }
    }
    incident
}

pub(crate) fn item_neighbor_incidence(
    profiles: &[Vec<ItemId>],
    n_items: usize,
    k: usize,
) -> Vec<Vec<(u32, f64)>> {
    incidence_from_neighbors(item_rows(profiles, n_items).cosine_top_k(k))
}

fn profiles_of(train: &InteractionSet) -> Vec<Vec<ItemId>> {
    train
        .universe()
        .user_ids()
        .map(|u| train.seen_items(u).into_iter().collect())
        .collect()
}

/// One-shot user-KNN score vector for a single user (fit-free entry point;
/// the fitted model precomputes the same neighbourhoods once).
pub fn user_knn_scores(train: &InteractionSet, user: UserId, k_neighbors: usize) -> Vec<f64> {
    assert!(k_neighbors >= 1);
    let profiles = profiles_of(train);
    let n_items = train.universe().item_count();
    let neighbors = user_neighbors(&profiles, n_items, k_neighbors);
    let mut scores = vec![0.0; n_items];
    for &(v, sim) in &neighbors[user.0 as usize] {
        for &item in &profiles[v as usize] {
            scores[item.0 as usize] += sim;
        }
    }
    scores
}

/// One-shot item-KNN score vector for a single user.
pub fn item_knn_scores(train: &InteractionSet, user: UserId, k_neighbors: usize) -> Vec<f64> {
    assert!(k_neighbors >= 1);
    let profiles = profiles_of(train);
    let n_items = train.universe().item_count();
    let incident = item_neighbor_incidence(&profiles, n_items, k_neighbors);
    let mut scores = vec![0.0; n_items];
    for &item in &profiles[user.0 as usize] {
        for &(i, sim) in &incident[item.0 as usize] {
            scores[i as usize] += sim;
        }
    }
    scores
}

/// One-shot attribute-KNN score vector: the user/item neighbourhood formula
/// with similarities taken over TF-IDF feature vectors.
pub fn attribute_knn_scores(
    train: &InteractionSet,
    catalog: &ItemCatalog,
    axis: AttributeAxis,
    user: UserId,
    k_neighbors: usize,
) -> Vec<f64> {
    assert!(k_neighbors >= 1);
    let profiles = profiles_of(train);
    let n_items = train.universe().item_count();
    let features = tfidf::item_feature_matrix(train.universe(), catalog);
    let mut scores = vec![0.0; n_items];
    match axis {
        AttributeAxis::User => {
            let neighbors = attribute_user_neighbors(&profiles, &features, k_neighbors);
            for &(v, sim) in &neighbors[user.0 as usize] {
                for &item in &profiles[v as usize] {
                    scores[item.0 as usize] += sim;
                }
            }
        }
        AttributeAxis::Item => {
            let incident = incidence_from_neighbors(features.cosine_top_k(k_neighbors));
            for &item in &profiles[user.0 as usize] {
                for &(i, sim) in &incident[item.0 as usize] {
                    scores[i as usize] += sim;
                }
            }
        }
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CatalogEntry, InteractionSet, ItemCatalog};
    use std::collections::BTreeMap;

    fn interactions(rows: &[(&str, &str)]) -> InteractionSet {
        InteractionSet::from_records(
            rows.iter()
                .map(|(u, i)| (u.to_string(), i.to_string(), 1.0, None))
                .collect(),
            None,
        )
    }

    #[test]
    fn user_knn_matches_hand_cosine() {
        // u1={A,B}, u2={A,C}, u3={D}: cos(u1,u2)=0.5, cos(u1,u3)=0
        let train = interactions(&[
            ("u1", "A"),
            ("u1", "B"),
            ("u2", "A"),
            ("u2", "C"),
            ("u3", "D"),
        ]);
        let u1 = train.universe().user("u1").unwrap();
        let scores = user_knn_scores(&train, u1, 2);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        assert!((scores[idx("C")] - 0.5).abs() < 1e-12);
        assert_eq!(scores[idx("D")], 0.0);
    }

    #[test]
    fn single_user_has_no_neighbors() {
        let train = interactions(&[("u1", "A"), ("u1", "B")]);
        let u1 = train.universe().user("u1").unwrap();
        let scores = user_knn_scores(&train, u1, 5);
        assert!(scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn duplicate_users_have_similarity_one() {
        let train = interactions(&[("u1", "A"), ("u1", "B"), ("u2", "A"), ("u2", "B")]);
        let u1 = train.universe().user("u1").unwrap();
        let scores = user_knn_scores(&train, u1, 1);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        assert!((scores[idx("A")] - 1.0).abs() < 1e-12);
        assert!((scores[idx("B")] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn item_knn_matches_hand_cosine() {
        // items A={u1,u2}, B={u1}, C={u2}: cos(A,B)=1/sqrt(2), cos(B,C)=0.
        // For u2 (profile {A,C}): score(B) = cos(B,A) = 0.7071...
        let train = interactions(&[("u1", "A"), ("u1", "B"), ("u2", "A"), ("u2", "C")]);
        let u2 = train.universe().user("u2").unwrap();
        let scores = item_knn_scores(&train, u2, 5);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        assert!((scores[idx("B")] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_items_score_zero() {
        let train = interactions(&[("u1", "A"), ("u2", "B")]);
        let u1 = train.universe().user("u1").unwrap();
        let scores = item_knn_scores(&train, u1, 5);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        assert_eq!(scores[idx("B")], 0.0);
    }

    fn genre_catalog(feats: &[(&str, &[&str])]) -> ItemCatalog {
        let entries: BTreeMap<String, CatalogEntry> = feats
            .iter()
            .map(|(id, fs)| {
                (
                    id.to_string(),
                    CatalogEntry {
                        title: format!("Title {id}"),
                        features: fs.iter().map(|f| f.to_string()).collect(),
                    },
                )
            })
            .collect();
        ItemCatalog::new(entries)
    }

    #[test]
    fn items_sharing_all_features_have_similarity_one() {
        // C exists so the shared features keep a positive idf.
        let train = interactions(&[("u1", "A"), ("u2", "B"), ("u3", "C")]);
        let catalog =
            genre_catalog(&[("A", &["x", "y"]), ("B", &["x", "y"]), ("C", &["z"])]);
        let u1 = train.universe().user("u1").unwrap();
        let scores = attribute_knn_scores(&train, &catalog, AttributeAxis::Item, u1, 5);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        // u1's profile is {A}; B's neighbourhood contains A with sim 1.
        assert!((scores[idx("B")] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_features_have_similarity_zero() {
        let train = interactions(&[("u1", "A"), ("u2", "B")]);
        let catalog = genre_catalog(&[("A", &["x"]), ("B", &["z"])]);
        let u1 = train.universe().user("u1").unwrap();
        let scores = attribute_knn_scores(&train, &catalog, AttributeAxis::Item, u1, 5);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        assert_eq!(scores[idx("B")], 0.0);
    }

    #[test]
    fn attribute_item_similarity_matches_hand_tfidf_cosine() {
        // Genres: A=[x,y], B=[x], C=[z]; idf = ln(3/df).
        // tfidf(A) = (ln(1.5), ln(3)), tfidf(B) = (ln(1.5),), tfidf(C) = (ln(3),)
        // sim(A,B) = ln(1.5)^2 / (|A| * ln(1.5))
        let train = interactions(&[("u1", "A"), ("u2", "B"), ("u3", "C")]);
        let catalog = genre_catalog(&[("A", &["x", "y"]), ("B", &["x"]), ("C", &["z"])]);
        let idf_x = (3.0f64 / 2.0).ln();
        let idf_y = 3.0f64.ln();
        let norm_a = (idf_x * idf_x + idf_y * idf_y).sqrt();
        let expected = idf_x * idf_x / (norm_a * idf_x);
        let u2 = train.universe().user("u2").unwrap();
        let scores = attribute_knn_scores(&train, &catalog, AttributeAxis::Item, u2, 5);
        let idx = |raw: &str| train.universe().item(raw).unwrap().0 as usize;
        // u2's profile is {B}; score(A) = sim(A,B).
        assert!((scores[idx("A")] - expected).abs() < 1e-12);
    }
}
