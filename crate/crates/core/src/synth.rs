//! Deterministic synthetic interaction data with MovieLens-like statistics:
//! a Zipf popularity skew, genre-clustered user preferences and 1-5 ratings.
//! Used by benchmarks and the acceptance suite, where the real rating files
//! cannot be redistributed.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{CatalogEntry, InteractionSet, ItemCatalog, RatingScale};

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub users: usize,
    pub items: usize,
    pub genres: usize,
    /// Popularity weight of the rank-r item is (r+1)^-zipf.
    pub zipf: f64,
    /// Multiplier applied to items in one of the user's preferred genres.
    pub affinity: f64,
    pub min_profile: usize,
    pub max_profile: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            users: 600,
            items: 1800,
            genres: 18,
            zipf: 0.75,
            affinity: 14.0,
            min_profile: 20,
            max_profile: 200,
            seed: 7,
        }
    }
}

const ADJECTIVES: [&str; 20] = [
    "Silent", "Crimson", "Golden", "Broken", "Hidden", "Electric", "Midnight", "Burning",
    "Frozen", "Savage", "Gentle", "Hollow", "Distant", "Velvet", "Iron", "Shining", "Lost",
    "Final", "Wild", "Quiet",
];

const NOUNS: [&str; 20] = [
    "Horizon", "Empire", "Garden", "Voyage", "Shadow", "Harbor", "Mirror", "Kingdom", "River",
    "Signal", "Carnival", "Fortress", "Meadow", "Engine", "Lantern", "Summit", "Archive",
    "Orchard", "Crossing", "Parade",
];

/// Generates the interaction set and catalog. Deterministic per spec.
pub fn generate(spec: &SynthSpec) -> (InteractionSet, ItemCatalog) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Item popularity ranks are a random permutation so ids carry no signal.
    let mut pop_rank: Vec<usize> = (0..spec.items).collect();
    use rand::seq::SliceRandom;
    pop_rank.shuffle(&mut rng);
    let weights: Vec<f64> = (0..spec.items)
        .map(|i| ((pop_rank[i] + 1) as f64).powf(-spec.zipf))
        .collect();

    // One or two genres per item.
    let item_genres: Vec<Vec<usize>> = (0..spec.items)
        .map(|_| {
            let first = rng.gen_range(0..spec.genres);
            if rng.gen_bool(0.3) {
                let second = rng.gen_range(0..spec.genres);
                if second == first {
                    vec![first]
                } else {
                    vec![first, second]
                }
            } else {
                vec![first]
            }
        })
        .collect();

    let entries = (0..spec.items)
        .map(|i| {
            let title = format!(
                "The {} {} {:04} ({})",
                ADJECTIVES[i % ADJECTIVES.len()],
                NOUNS[(i / ADJECTIVES.len()) % NOUNS.len()],
                i,
                1940 + (i % 80)
            );
            let features = item_genres[i].iter().map(|g| format!("Genre{g:02}")).collect();
            (
                format!("m{i:05}"),
                CatalogEntry { title, features },
            )
        })
        .collect();
    let catalog = ItemCatalog::new(entries);

    let mut records: Vec<(String, String, f64, Option<i64>)> = Vec::new();
    for u in 0..spec.users {
        let mut prefs: Vec<usize> = Vec::new();
        let n_prefs = rng.gen_range(2..=3);
        while prefs.len() < n_prefs {
            let g = rng.gen_range(0..spec.genres);
            if !prefs.contains(&g) {
                prefs.push(g);
            }
        }
        // Quadratic skew toward small profiles, like real rating data.
        let x: f64 = rng.gen_range(0.0..1.0);
        let span = (spec.max_profile - spec.min_profile) as f64;
        let profile_len = spec.min_profile + (span * x * x) as usize;

        let user_weights: Vec<f64> = (0..spec.items)
            .map(|i| {
                let liked = item_genres[i].iter().any(|g| prefs.contains(g));
                if liked {
                    weights[i] * spec.affinity
                } else {
                    weights[i]
                }
            })
            .collect();
        let dist = WeightedIndex::new(&user_weights).expect("positive weights");
        let mut seen = std::collections::BTreeSet::new();
        let mut t = 0i64;
        while seen.len() < profile_len.min(spec.items) {
            let item = dist.sample(&mut rng);
            if !seen.insert(item) {
                continue;
            }
            let liked = item_genres[item].iter().any(|g| prefs.contains(g));
            let base = if liked { 4.0 } else { 3.0 };
            let noise = f64::from(rng.gen_range(-1..=1i32));
            let rating = (base + noise).clamp(1.0, 5.0);
            records.push((format!("u{u:04}"), format!("m{item:05}"), rating, Some(t)));
            t += 1;
        }
    }
    let data = InteractionSet::from_records(
        records,
        Some(RatingScale { min: 1.0, max: 5.0 }),
    );
    (data, catalog)
}
