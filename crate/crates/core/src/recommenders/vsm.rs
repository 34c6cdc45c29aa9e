//! Vector space model over normalized TF-IDF item vectors.
//!
//! Item vectors are the L2-normalized TF-IDF rows; the user vector is the
//! L2-normalized sum of the train-item vectors; the score is their dot
//! product.

use std::collections::BTreeMap;

use crate::dataset::ItemId;

use super::similarity::SparseMatrix;

/// Scores every item for a user profile. `item_vectors` must already be
/// row-normalized. A featureless profile yields all-zero scores.
pub fn vsm_scores(item_vectors: &SparseMatrix, profile: &[ItemId]) -> Vec<f64> {
    let mut user_vec: BTreeMap<u32, f64> = BTreeMap::new();
    for item in profile {
        for &(feat, w) in item_vectors.row(item.0 as usize) {
            *user_vec.entry(feat).or_insert(0.0) += w;
        }
    }
    let norm: f64 = user_vec.values().map(|w| w * w).sum::<f64>().sqrt();
    let mut scores = vec![0.0; item_vectors.n_rows()];
    if norm == 0.0 {
        return scores;
    }
    let user_row: Vec<(u32, f64)> = user_vec.into_iter().map(|(f, w)| (f, w / norm)).collect();
    for (i, score) in scores.iter_mut().enumerate() {
        *score = SparseMatrix::dot_rows(&user_row, item_vectors.row(i));
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CatalogEntry, InteractionSet, ItemCatalog};
    use crate::recommenders::tfidf::item_feature_matrix;
    use std::collections::BTreeMap;

    fn fixture(feats: &[(&str, &[&str])]) -> (InteractionSet, ItemCatalog) {
        let records = feats
            .iter()
            .map(|(id, _)| ("u1".to_string(), id.to_string(), 1.0, None))
            .collect();
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
        (
            InteractionSet::from_records(records, None),
            ItemCatalog::new(entries),
        )
    }

    #[test]
    fn single_item_profile_scores_cosine_to_it() {
        let (train, catalog) =
            fixture(&[("A", &["x", "y"]), ("B", &["x"]), ("C", &["z"])]);
        let mut vectors = item_feature_matrix(train.universe(), &catalog);
        vectors.normalize_rows();
        let a = train.universe().item("A").unwrap();
        let scores = vsm_scores(&vectors, &[a]);
        for (i, &score) in scores.iter().enumerate() {
            let expected =
                SparseMatrix::dot_rows(vectors.row(a.0 as usize), vectors.row(i));
            assert!((score - expected).abs() < 1e-12);
        }
        assert!((scores[a.0 as usize] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn featureless_profile_scores_zero() {
        let (train, catalog) = fixture(&[("A", &[]), ("B", &["x"]), ("C", &["x", "z"])]);
        let mut vectors = item_feature_matrix(train.universe(), &catalog);
        vectors.normalize_rows();
        let a = train.universe().item("A").unwrap();
        let scores = vsm_scores(&vectors, &[a]);
        assert!(scores.iter().all(|&s| s == 0.0));
    }
}
