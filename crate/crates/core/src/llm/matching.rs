//! Fuzzy title-to-catalog matching via normalized Damerau-Levenshtein
//! distance (the unrestricted variant, allowing edits between transposed
//! characters), computed over casefolded, whitespace-collapsed strings.

use std::collections::HashMap;

use crate::dataset::{ItemCatalog, Universe};

/// Lowercases and collapses all whitespace runs to single spaces.
pub fn normalize_title(title: &str) -> String {
    title.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Unrestricted Damerau-Levenshtein distance over unicode scalar values.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let s: Vec<char> = a.chars().collect();
    let t: Vec<char> = b.chars().collect();
    let (n, m) = (s.len(), t.len());
    if n == 0 {
        return m;
    }
    if m == 0 {
        return n;
    }
    let inf = n + m;
    // d is (n+2) x (m+2) with a sentinel border row/column of `inf`.
    let w = m + 2;
    let mut d = vec![0usize; (n + 2) * w];
    let idx = |i: usize, j: usize| i * w + j;
    d[idx(0, 0)] = inf;
    for i in 0..=n {
        d[idx(i + 1, 1)] = i;
        d[idx(i + 1, 0)] = inf;
    }
    for j in 0..=m {
        d[idx(1, j + 1)] = j;
        d[idx(0, j + 1)] = inf;
    }
    let mut last_row: HashMap<char, usize> = HashMap::new();
    for i in 1..=n {
        let mut last_col = 0usize;
        for j in 1..=m {
            let row_of_match = last_row.get(&t[j - 1]).copied().unwrap_or(0);
            let col_of_match = last_col;
            let cost = if s[i - 1] == t[j - 1] { 0 } else { 1 };
            if cost == 0 {
                last_col = j;
            }
            let substitution = d[idx(i, j)] + cost;
            let insertion = d[idx(i + 1, j)] + 1;
            let deletion = d[idx(i, j + 1)] + 1;
            let transposition = d[idx(row_of_match, col_of_match)]
                + (i - row_of_match - 1)
                + 1
                + (j - col_of_match - 1);
            d[idx(i + 1, j + 1)] = substitution
                .min(insertion)
                .min(deletion)
                .min(transposition);
        }
        last_row.insert(s[i - 1], i);
    }
    d[idx(n + 1, m + 1)]
}

/// similarity(a, b) = 1 - DL(a, b) / max(|a|, |b|); 1.0 for two empty strings.
pub fn dl_similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - damerau_levenshtein(a, b) as f64 / max_len as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatchOutcome {
    /// Raw item id of the best catalog match plus its similarity.
    Matched { raw_id: String, similarity: f64 },
    /// Nothing reached the threshold; the best similarity seen is kept as
    /// hallucination evidence.
    Unmatched { best_similarity: f64 },
}

/// Catalog matcher with normalized titles precomputed. Ties on similarity
/// resolve to the smallest item id; an exact normalized match short-circuits
/// the scan.
pub struct TitleMatcher {
    /// (raw item id, normalized title, char length), in item id order.
    entries: Vec<(String, String, usize)>,
    exact: HashMap<String, usize>,
    threshold: f64,
}

impl TitleMatcher {
    pub fn new(universe: &Universe, catalog: &ItemCatalog, threshold: f64) -> Self {
        assert!(threshold > 0.0 && threshold <= 1.0);
        let mut entries = Vec::with_capacity(universe.item_count());
        let mut exact = HashMap::new();
        for item in universe.item_ids() {
            let raw_id = universe.item_raw(item).to_string();
            let normalized = normalize_title(catalog.title_of(universe, item));
            let chars = normalized.chars().count();
            exact.entry(normalized.clone()).or_insert(entries.len());
            entries.push((raw_id, normalized, chars));
        }
        Self {
            entries,
            exact,
            threshold,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn match_title(&self, title: &str) -> MatchOutcome {
        let needle = normalize_title(title);
        if let Some(&i) = self.exact.get(&needle) {
            return MatchOutcome::Matched {
                raw_id: self.entries[i].0.clone(),
                similarity: 1.0,
            };
        }
        let needle_len = needle.chars().count();
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, normalized, chars)) in self.entries.iter().enumerate() {
            // DL >= |length difference|, so similarity is bounded above.
            let max_len = needle_len.max(*chars);
            if max_len == 0 {
                continue;
            }
            let upper = 1.0 - needle_len.abs_diff(*chars) as f64 / max_len as f64;
            if let Some((_, best_sim)) = best {
                if upper <= best_sim {
                    continue;
                }
            }
            if upper < self.threshold {
                continue;
            }
            let sim = dl_similarity(&needle, normalized);
            let better = match best {
                None => true,
                Some((_, best_sim)) => sim > best_sim,
            };
            if better {
                best = Some((i, sim));
            }
        }
        match best {
            Some((i, sim)) if sim >= self.threshold => MatchOutcome::Matched {
                raw_id: self.entries[i].0.clone(),
                similarity: sim,
            },
            Some((_, sim)) => MatchOutcome::Unmatched {
                best_similarity: sim,
            },
            None => MatchOutcome::Unmatched {
                best_similarity: 0.0,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CatalogEntry, InteractionSet};
    use std::collections::BTreeMap;

    #[test]
    fn distance_handles_the_classic_cases() {
        assert_eq!(damerau_levenshtein("", ""), 0);
        assert_eq!(damerau_levenshtein("abc", ""), 3);
        assert_eq!(damerau_levenshtein("abc", "abc"), 0);
        assert_eq!(damerau_levenshtein("abc", "acb"), 1); // adjacent transposition
        assert_eq!(damerau_levenshtein("kitten", "sitting"), 3);
        // Unrestricted DL: "ca" -> "abc" is 2 (OSA would need 3).
        assert_eq!(damerau_levenshtein("ca", "abc"), 2);
    }

    #[test]
    fn transposition_counts_once() {
        assert_eq!(damerau_levenshtein("hte matrix", "the matrix"), 1);
        assert!((dl_similarity("hte matrix", "the matrix") - 0.9).abs() < 1e-12);
    }

    fn matcher(titles: &[(&str, &str)], threshold: f64) -> (InteractionSet, TitleMatcher) {
        let records = titles
            .iter()
            .map(|(id, _)| ("u1".to_string(), id.to_string(), 1.0, None))
            .collect();
        let data = InteractionSet::from_records(records, None);
        let entries: BTreeMap<String, CatalogEntry> = titles
            .iter()
            .map(|(id, title)| {
                (
                    id.to_string(),
                    CatalogEntry {
                        title: title.to_string(),
                        features: Vec::new(),
                    },
                )
            })
            .collect();
        let catalog = crate::dataset::ItemCatalog::new(entries);
        let m = TitleMatcher::new(data.universe(), &catalog, threshold);
        (data, m)
    }

    #[test]
    fn exact_title_matches_with_similarity_one() {
        let (_, m) = matcher(&[("i1", "The Matrix (1999)"), ("i2", "Inception (2010)")], 0.8);
        match m.match_title("The Matrix (1999)") {
            MatchOutcome::Matched { raw_id, similarity } => {
                assert_eq!(raw_id, "i1");
                assert_eq!(similarity, 1.0);
            }
            other => panic!("expected match, got {other:?}"),
        }
    }

    #[test]
    fn near_miss_with_missing_colon_still_matches() {
        let (_, m) = matcher(&[("i1", "Mad Max: Fury Road (2015)")], 0.8);
        match m.match_title("Mad Max Fury Road (2015)") {
            MatchOutcome::Matched { raw_id, similarity } => {
                assert_eq!(raw_id, "i1");
                // one deletion over 25 normalized chars
                assert!((similarity - (1.0 - 1.0 / 25.0)).abs() < 1e-12);
            }
            other => panic!("expected match, got {other:?}"),
        }
    }

    #[test]
    fn gibberish_is_unmatched() {
        let (_, m) = matcher(
            &[("i1", "The Matrix (1999)"), ("i2", "Inception (2010)")],
            0.8,
        );
        match m.match_title("Xyzzy Quux Saga") {
            MatchOutcome::Unmatched { best_similarity } => assert!(best_similarity < 0.8),
            other => panic!("expected hallucination, got {other:?}"),
        }
    }

    #[test]
    fn casefold_and_whitespace_are_ignored() {
        let (_, m) = matcher(&[("i1", "The  Matrix   (1999)")], 0.8);
        match m.match_title("the matrix (1999)") {
            MatchOutcome::Matched { similarity, .. } => assert_eq!(similarity, 1.0),
            other => panic!("expected match, got {other:?}"),
        }
    }

    #[test]
    fn similarity_ties_resolve_to_smallest_item_id() {
        // Both titles are one edit from the query and the same length.
        let (_, m) = matcher(&[("a1", "abcd"), ("a2", "abce")], 0.5);
        match m.match_title("abcf") {
            MatchOutcome::Matched { raw_id, .. } => assert_eq!(raw_id, "a1"),
            other => panic!("expected match, got {other:?}"),
        }
    }

    #[test]
    fn every_catalog_title_self_matches() {
        let (_, m) = matcher(
            &[("i1", "Alien (1979)"), ("i2", "Arrival (2016)"), ("i3", "Dune (2021)")],
            0.8,
        );
        for title in ["Alien (1979)", "Arrival (2016)", "Dune (2021)"] {
            match m.match_title(title) {
                MatchOutcome::Matched { similarity, .. } => assert_eq!(similarity, 1.0),
                other => panic!("{title}: expected self-match, got {other:?}"),
            }
        }
    }
}
