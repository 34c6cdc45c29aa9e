//! Closed-form linear item weights (shallow-autoencoder style).
//!
//! With X the binarized user-item matrix: G = X^T X + lambda*I, P = G^-1,
//! B_ij = -P_ij / P_jj for i != j and B_ii = 0. User scores are X * B.

use nalgebra::DMatrix;

use crate::dataset::ItemId;

use super::RecommenderError;

/// Dense row-major item-item weight matrix B.
pub fn ease_r_fit(
    profiles: &[Vec<ItemId>],
    n_items: usize,
    lambda: f64,
) -> Result<Vec<f64>, RecommenderError> {
    assert!(lambda > 0.0);
    // Gram matrix via co-occurrence counting over binarized profiles.
    let mut gram = DMatrix::<f64>::zeros(n_items, n_items);
    for profile in profiles {
        for &i in profile {
            for &j in profile {
                gram[(i.0 as usize, j.0 as usize)] += 1.0;
            }
        }
    }
    for d in 0..n_items {
        gram[(d, d)] += lambda;
    }
    // G is symmetric positive definite for lambda > 0.
    let inverse = gram
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(RecommenderError::NonFiniteWeights)?;
    let mut weights = vec![0.0f64; n_items * n_items];
    for i in 0..n_items {
        for j in 0..n_items {
            if i != j {
                weights[i * n_items + j] = -inverse[(i, j)] / inverse[(j, j)];
            }
        }
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(RecommenderError::NonFiniteWeights);
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(items: &[u32]) -> Vec<ItemId> {
        items.iter().map(|&i| ItemId(i)).collect()
    }

    #[test]
    fn two_by_two_matches_hand_inversion() {
        // X = [[1,1],[1,0]], lambda = 0.5:
        // G = [[2.5,1],[1,1.5]], P = (1/2.75)[[1.5,-1],[-1,2.5]]
        // B = [[0, 0.4],[2/3, 0]]
        let profiles = vec![p(&[0, 1]), p(&[0])];
        let b = ease_r_fit(&profiles, 2, 0.5).unwrap();
        assert!((b[0] - 0.0).abs() < 1e-12);
        assert!((b[1] - 0.4).abs() < 1e-12);
        assert!((b[2] - 2.0 / 3.0).abs() < 1e-12);
        assert!((b[3] - 0.0).abs() < 1e-12);
        // scores for user 1 with profile [1,1]: rows 0 and 1 summed
        let scores = [b[0] + b[2], b[1] + b[3]];
        assert!((scores[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((scores[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn identity_interactions_give_zero_weights() {
        // Each user saw exactly one distinct item: X^T X is diagonal,
        // so the inverse is diagonal and B vanishes.
        let profiles = vec![p(&[0]), p(&[1]), p(&[2])];
        let b = ease_r_fit(&profiles, 3, 1.0).unwrap();
        assert!(b.iter().all(|&w| w.abs() < 1e-12));
    }

    #[test]
    fn diagonal_is_exactly_zero() {
        let profiles = vec![p(&[0, 1, 2]), p(&[0, 2]), p(&[1, 2])];
        let n = 3;
        let b = ease_r_fit(&profiles, n, 2.0).unwrap();
        for d in 0..n {
            assert_eq!(b[d * n + d], 0.0);
        }
    }
}
