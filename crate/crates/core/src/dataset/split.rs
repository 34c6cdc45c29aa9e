//! Seeded per-user hold-out splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, InteractionSet};

/// A train/test partition sharing the parent universe.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: InteractionSet,
    pub test: InteractionSet,
    pub seed: u64,
    pub ratio: f64,
}

/// Per-user random hold-out: for each user, `ceil(ratio * n)` interactions go
/// to train and the remainder to test. A user whose test share rounds to zero
/// contributes no test rows (never the other way around), so every test user
/// always has a train profile. Deterministic for a fixed seed.
pub fn split_holdout(
    data: &InteractionSet,
    ratio: f64,
    seed: u64,
) -> Result<Split, DatasetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::InvalidRatio(ratio));
    }
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for user in data.universe().user_ids() {
        let rows: Vec<usize> = data.profile_indices(user).to_vec();
        if rows.is_empty() {
            continue;
        }
        let n_train = ((ratio * rows.len() as f64).ceil() as usize).min(rows.len());
        let mut rng = user_rng(seed, data.universe().user_raw(user));
        let mut shuffled = rows;
        shuffled.shuffle(&mut rng);
        let (train_part, test_part) = shuffled.split_at(n_train);
        let mut train_part = train_part.to_vec();
        let mut test_part = test_part.to_vec();
        // Restore ingest order inside each side so profile rendering stays
        // stable regardless of the shuffle.
        train_part.sort_unstable();
        test_part.sort_unstable();
        train_rows.extend(train_part);
        test_rows.extend(test_part);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    let universe = data.universe().clone();
    let pick = |idxs: &[usize]| {
        idxs.iter()
            .map(|&i| data.interactions()[i])
            .collect::<Vec<_>>()
    };
    Ok(Split {
        train: InteractionSet::from_parts(universe.clone(), pick(&train_rows), data.scale()),
        test: InteractionSet::from_parts(universe, pick(&test_rows), data.scale()),
        seed,
        ratio,
    })
}

/// One independent stream per (seed, raw user id), so a user's assignment
/// does not depend on which other users are present.
fn user_rng(seed: u64, raw_user: &str) -> ChaCha8Rng {
    // FNV-1a over the raw id, mixed with the split seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in raw_user.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn toy(users: &[(&str, usize)]) -> InteractionSet {
        let mut records = Vec::new();
        for (user, n) in users {
            for k in 0..*n {
                records.push((user.to_string(), format!("i{k:03}"), 1.0, Some(k as i64)));
            }
        }
        InteractionSet::from_records(records, None)
    }

    #[test]
    fn five_interactions_at_point_eight_gives_four_one() {
        let data = toy(&[("u1", 5)]);
        let split = split_holdout(&data, 0.8, 7).unwrap();
        assert_eq!(split.train.len(), 4);
        assert_eq!(split.test.len(), 1);
    }

    #[test]
    fn single_interaction_user_is_all_train() {
        let data = toy(&[("u1", 1)]);
        let split = split_holdout(&data, 0.8, 7).unwrap();
        assert_eq!(split.train.len(), 1);
        assert_eq!(split.test.len(), 0);
    }

    #[test]
    fn same_seed_gives_identical_membership() {
        let data = toy(&[("u1", 9), ("u2", 13), ("u3", 4)]);
        let a = split_holdout(&data, 0.8, 42).unwrap();
        let b = split_holdout(&data, 0.8, 42).unwrap();
        let rows = |s: &InteractionSet| {
            s.interactions()
                .iter()
                .map(|r| (r.user, r.item))
                .collect::<Vec<_>>()
        };
        assert_eq!(rows(&a.train), rows(&b.train));
        assert_eq!(rows(&a.test), rows(&b.test));
    }

    #[test]
    fn different_seeds_usually_differ() {
        let data = toy(&[("u1", 40)]);
        let a = split_holdout(&data, 0.5, 1).unwrap();
        let b = split_holdout(&data, 0.5, 2).unwrap();
        let rows = |s: &InteractionSet| {
            s.interactions()
                .iter()
                .map(|r| (r.user, r.item))
                .collect::<BTreeSet<_>>()
        };
        assert_ne!(rows(&a.train), rows(&b.train));
    }

    #[test]
    fn split_partitions_each_profile() {
        let data = toy(&[("u1", 7), ("u2", 3), ("u3", 1)]);
        let split = split_holdout(&data, 0.7, 11).unwrap();
        for user in data.universe().user_ids() {
            let full: BTreeSet<_> = data.profile(user).map(|r| r.item).collect();
            let train: BTreeSet<_> = split.train.profile(user).map(|r| r.item).collect();
            let test: BTreeSet<_> = split.test.profile(user).map(|r| r.item).collect();
            assert!(train.is_disjoint(&test));
            let union: BTreeSet<_> = train.union(&test).copied().collect();
            assert_eq!(union, full);
            assert!(!train.is_empty(), "every user keeps a train profile");
        }
    }

    #[test]
    fn invalid_ratio_is_rejected() {
        let data = toy(&[("u1", 3)]);
        assert!(matches!(
            split_holdout(&data, 1.0, 0),
            Err(DatasetError::InvalidRatio(_))
        ));
        assert!(matches!(
            split_holdout(&data, 0.0, 0),
            Err(DatasetError::InvalidRatio(_))
        ));
    }
}
