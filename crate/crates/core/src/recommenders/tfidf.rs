//! TF-IDF weighting of catalog features.

use std::collections::BTreeMap;

use crate::dataset::{ItemCatalog, Universe};

use super::similarity::SparseMatrix;

/// Item-by-feature TF-IDF weights: tf is the feature's occurrence count in
/// the item's feature list, idf = ln(N / df) over the item universe with
/// df >= 1. Items without catalog features get all-zero rows.
pub fn item_feature_matrix(universe: &Universe, catalog: &ItemCatalog) -> SparseMatrix {
    let mut vocab: BTreeMap<&str, u32> = BTreeMap::new();
    for item in universe.item_ids() {
        for feature in catalog.features_of(universe, item) {
            let next = vocab.len() as u32;
            vocab.entry(feature.as_str()).or_insert(next);
        }
    }
    let n_features = vocab.len();
    let mut df = vec![0u32; n_features];
    let mut tf_rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(universe.item_count());
    for item in universe.item_ids() {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for feature in catalog.features_of(universe, item) {
            *counts.entry(vocab[feature.as_str()]).or_insert(0.0) += 1.0;
        }
        for &feat in counts.keys() {
            df[feat as usize] += 1;
        }
        tf_rows.push(counts.into_iter().collect());
    }
    let n_items = universe.item_count() as f64;
    let rows = tf_rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(feat, tf)| (feat, tf * (n_items / f64::from(df[feat as usize])).ln()))
                .collect()
        })
        .collect();
    SparseMatrix::new(rows, n_features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CatalogEntry, InteractionSet, ItemCatalog};

    fn fixture() -> (InteractionSet, ItemCatalog) {
        let data = InteractionSet::from_records(
            vec![
                ("u1".into(), "A".into(), 1.0, None),
                ("u1".into(), "B".into(), 1.0, None),
                ("u1".into(), "C".into(), 1.0, None),
            ],
            None,
        );
        let entries = [
            ("A", vec!["x", "y"]),
            ("B", vec!["x"]),
            ("C", vec!["z"]),
        ]
        .into_iter()
        .map(|(id, feats)| {
            (
                id.to_string(),
                CatalogEntry {
                    title: id.to_string(),
                    features: feats.into_iter().map(String::from).collect(),
                },
            )
        })
        .collect();
        (data, ItemCatalog::new(entries))
    }

    #[test]
    fn weights_match_hand_tfidf() {
        let (data, catalog) = fixture();
        let m = item_feature_matrix(data.universe(), &catalog);
        // Features indexed in encounter order: x=0, y=1, z=2. df(x)=2, df(y)=1, df(z)=1.
        let idf_x = (3.0f64 / 2.0).ln();
        let idf_y = 3.0f64.ln();
        let row_a = m.row(0);
        assert_eq!(row_a.len(), 2);
        assert!((row_a[0].1 - idf_x).abs() < 1e-12);
        assert!((row_a[1].1 - idf_y).abs() < 1e-12);
    }

    #[test]
    fn ubiquitous_feature_gets_zero_idf() {
        let data = InteractionSet::from_records(
            vec![
                ("u1".into(), "A".into(), 1.0, None),
                ("u1".into(), "B".into(), 1.0, None),
            ],
            None,
        );
        let entries = [("A", vec!["pop"]), ("B", vec!["pop"])]
            .into_iter()
            .map(|(id, feats)| {
                (
                    id.to_string(),
                    CatalogEntry {
                        title: id.to_string(),
                        features: feats.into_iter().map(String::from).collect(),
                    },
                )
            })
            .collect();
        let m = item_feature_matrix(data.universe(), &ItemCatalog::new(entries));
        assert_eq!(m.row(0)[0].1, 0.0);
        assert_eq!(m.row(1)[0].1, 0.0);
    }
}
