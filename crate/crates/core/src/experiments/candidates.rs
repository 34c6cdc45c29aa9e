//! Candidate list construction for the re-rank experiments.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{InteractionSet, ItemCatalog, ItemId, UserId};
use crate::recommenders::SparseMatrix;

/// Titles of the `n` most popular train items (distinct-user count
/// descending, ties by item id), identical for every user. Returns the full
/// catalog when it holds fewer than `n` items.
pub fn build_fixed_mostpop_candidates(
    train: &InteractionSet,
    catalog: &ItemCatalog,
    n: usize,
) -> (Vec<ItemId>, Vec<String>) {
    let universe = train.universe();
    let mut phi = vec![0u32; universe.item_count()];
    for user in universe.user_ids() {
        for item in train.seen_items(user) {
            phi[item.0 as usize] += 1;
        }
    }
    let mut ranked: Vec<ItemId> = universe.item_ids().collect();
    ranked.sort_by_key(|i| (std::cmp::Reverse(phi[i.0 as usize]), *i));
    ranked.truncate(n);
    let titles = ranked
        .iter()
        .map(|&i| catalog.title_of(universe, i).to_string())
        .collect();
    (ranked, titles)
}

fn rating_ranked_profile(train: &InteractionSet, user: UserId) -> Vec<ItemId> {
    let mut rows: Vec<(ItemId, f64)> = train
        .profile(user)
        .map(|r| (r.item, r.rating))
        .collect();
    rows.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    rows.into_iter().map(|(item, _)| item).collect()
}

fn shuffle_rng(seed: u64, raw_user: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in raw_user.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(seed.rotate_left(32) ^ h)
}

fn assemble_candidates(
    train: &InteractionSet,
    user: UserId,
    neighbors: &[(u32, f64)],
    n_neighbors: usize,
    per_neighbor: usize,
    seed: u64,
    exclude_seen: bool,
) -> Vec<ItemId> {
    let own: BTreeSet<ItemId> = if exclude_seen {
        train.seen_items(user)
    } else {
        BTreeSet::new()
    };
    let mut taken: Vec<ItemId> = Vec::new();
    let mut taken_set: BTreeSet<ItemId> = own.clone();
    for &(neighbor, _) in neighbors.iter().take(n_neighbors) {
        let mut new_from_neighbor = 0;
        for item in rating_ranked_profile(train, UserId(neighbor)) {
            if new_from_neighbor == per_neighbor {
                break;
            }
            if taken_set.insert(item) {
                taken.push(item);
                new_from_neighbor += 1;
            }
        }
    }
    let target = n_neighbors * per_neighbor;
    if taken.len() < target {
        log::warn!(
            "neighbor candidate pool for user {} holds {} items, target {}",
            train.universe().user_raw(user),
            taken.len(),
            target
        );
    }
    let mut rng = shuffle_rng(seed, train.universe().user_raw(user));
    taken.shuffle(&mut rng);
    taken
}

/// Per-user candidate list from the nearest neighbours' favourites: the
/// `per_neighbor` highest-rated items of each of the `n_neighbors` closest
/// users (cosine over binarized profiles, ties by user id), skipping items
/// already taken and digging deeper into the same neighbour's profile to
/// backfill. The assembled list is shuffled with a per-user stream of `seed`.
pub fn build_neighbor_candidates(
    train: &InteractionSet,
    user: UserId,
    n_neighbors: usize,
    per_neighbor: usize,
    seed: u64,
    exclude_seen: bool,
) -> Vec<ItemId> {
    let neighbors = user_cosine_neighbors(train, n_neighbors);
    assemble_candidates(
        train,
        user,
        &neighbors[user.0 as usize],
        n_neighbors,
        per_neighbor,
        seed,
        exclude_seen,
    )
}

/// Candidate lists for every active train user, computing neighbourhoods
/// once.
pub fn neighbor_candidates_all(
    train: &InteractionSet,
    n_neighbors: usize,
    per_neighbor: usize,
    seed: u64,
    exclude_seen: bool,
) -> BTreeMap<UserId, Vec<ItemId>> {
    let neighbors = user_cosine_neighbors(train, n_neighbors);
    train
        .active_users()
        .into_iter()
        .map(|user| {
            (
                user,
                assemble_candidates(
                    train,
                    user,
                    &neighbors[user.0 as usize],
                    n_neighbors,
                    per_neighbor,
                    seed,
                    exclude_seen,
                ),
            )
        })
        .collect()
}

fn user_cosine_neighbors(train: &InteractionSet, k: usize) -> Vec<Vec<(u32, f64)>> {
    let universe = train.universe();
    let rows: Vec<Vec<(u32, f64)>> = universe
        .user_ids()
        .map(|u| {
            train
                .seen_items(u)
                .into_iter()
                .map(|i| (i.0, 1.0))
                .collect()
        })
        .collect();
    SparseMatrix::new(rows, universe.item_count()).cosine_top_k(k)
}
