//! Three-step random-walk item weights with a popularity penalty.
//!
//! With A the binary user-item matrix, P_ui its row-normalized form and
//! P_iu the row-normalized transpose, the walk matrix is W = P_iu * P_ui.
//! Each column j is then divided by phi(j)^beta; beta = 0 recovers the plain
//! three-step walk.

use crate::dataset::ItemId;

use super::knn::item_degrees;

/// Dense row-major item-item weight matrix.
pub fn rp3beta_weights(profiles: &[Vec<ItemId>], n_items: usize, beta: f64) -> Vec<f64> {
    assert!(beta >= 0.0);
    let deg_item = item_degrees(profiles, n_items);
    let mut weights = vec![0.0f64; n_items * n_items];
    for profile in profiles {
        if profile.is_empty() {
            continue;
        }
        let user_deg = profile.len() as f64;
        for &i in profile {
            // P_iu[i, u] = 1 / deg(i); P_ui[u, j] = 1 / deg(u)
            let from = 1.0 / f64::from(deg_item[i.0 as usize]);
            let row = &mut weights[i.0 as usize * n_items..(i.0 as usize + 1) * n_items];
            for &j in profile {
                row[j.0 as usize] += from / user_deg;
            }
        }
    }
    if beta > 0.0 {
        for j in 0..n_items {
            let phi = f64::from(deg_item[j]);
            if phi == 0.0 {
                continue;
            }
            let penalty = phi.powf(beta);
            for i in 0..n_items {
                weights[i * n_items + j] /= penalty;
            }
        }
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::InteractionSet;

    fn profiles_of(train: &InteractionSet) -> Vec<Vec<ItemId>> {
        train
            .universe()
            .user_ids()
            .map(|u| train.seen_items(u).into_iter().collect())
            .collect()
    }

    /// Dense oracle: explicit P_iu * P_ui product.
    fn dense_walk(train: &InteractionSet) -> Vec<f64> {
        let n_users = train.universe().user_count();
        let n_items = train.universe().item_count();
        let mut a = vec![vec![0.0f64; n_items]; n_users];
        for row in train.interactions() {
            a[row.user.0 as usize][row.item.0 as usize] = 1.0;
        }
        let mut p_ui = a.clone();
        for row in &mut p_ui {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        let mut p_iu = vec![vec![0.0f64; n_users]; n_items];
        for i in 0..n_items {
            for u in 0..n_users {
                p_iu[i][u] = a[u][i];
            }
        }
        for row in &mut p_iu {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        let mut w = vec![0.0f64; n_items * n_items];
        for i in 0..n_items {
            for j in 0..n_items {
                let mut acc = 0.0;
                for u in 0..n_users {
                    acc += p_iu[i][u] * p_ui[u][j];
                }
                w[i * n_items + j] = acc;
            }
        }
        w
    }

    #[test]
    fn beta_zero_equals_dense_product() {
        let train = InteractionSet::from_records(
            vec![
                ("u1".into(), "A".into(), 1.0, None),
                ("u1".into(), "B".into(), 1.0, None),
                ("u2".into(), "A".into(), 1.0, None),
                ("u2".into(), "C".into(), 1.0, None),
                ("u3".into(), "B".into(), 1.0, None),
                ("u3".into(), "C".into(), 1.0, None),
                ("u3".into(), "D".into(), 1.0, None),
            ],
            None,
        );
        let n_items = train.universe().item_count();
        let fast = rp3beta_weights(&profiles_of(&train), n_items, 0.0);
        let oracle = dense_walk(&train);
        for (a, b) in fast.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn single_user_single_item_walk_is_one() {
        let train =
            InteractionSet::from_records(vec![("u1".into(), "A".into(), 1.0, None)], None);
        let w = rp3beta_weights(&profiles_of(&train), 1, 0.0);
        assert!((w[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_penalizes_popular_columns() {
        // phi(A) = 3, phi(D) = 1
        let train = InteractionSet::from_records(
            vec![
                ("u1".into(), "A".into(), 1.0, None),
                ("u2".into(), "A".into(), 1.0, None),
                ("u3".into(), "A".into(), 1.0, None),
                ("u3".into(), "D".into(), 1.0, None),
            ],
            None,
        );
        let n = train.universe().item_count();
        let ia = train.universe().item("A").unwrap().0 as usize;
        let id = train.universe().item("D").unwrap().0 as usize;
        let profiles = profiles_of(&train);
        let flat = rp3beta_weights(&profiles, n, 0.0);
        let penalized = rp3beta_weights(&profiles, n, 1.0);
        let ratio_a = penalized[id * n + ia] / flat[id * n + ia];
        let ratio_d = penalized[ia * n + id] / flat[ia * n + id];
        assert!(ratio_a < ratio_d, "popular column must shrink more");
        assert!((ratio_a - 1.0 / 3.0).abs() < 1e-12);
        assert!((ratio_d - 1.0).abs() < 1e-12);
    }
}
