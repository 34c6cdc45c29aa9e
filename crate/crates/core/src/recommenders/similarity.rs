//! Sparse cosine similarity with top-k neighbour selection.

/// Row-sparse matrix: each row is a sorted `(column, weight)` list.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    rows: Vec<Vec<(u32, f64)>>,
    n_cols: usize,
}

impl SparseMatrix {
    pub fn new(mut rows: Vec<Vec<(u32, f64)>>, n_cols: usize) -> Self {
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
        }
        Self { rows, n_cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn norms(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt())
            .collect()
    }

    /// L2-normalizes every non-empty row in place.
    pub fn normalize_rows(&mut self) {
        for row in &mut self.rows {
            let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            if norm > 0.0 {
                for e in row.iter_mut() {
                    e.1 /= norm;
                }
            }
        }
    }

    pub fn dot_rows(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// For every row, the `k` most cosine-similar other rows with positive
    /// similarity, ordered by similarity descending then row id ascending.
    pub fn cosine_top_k(&self, k: usize) -> Vec<Vec<(u32, f64)>> {
        let norms = self.norms();
        // Inverted index: column -> (row, weight).
        let mut inverted: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                inverted[c as usize].push((r as u32, w));
            }
        }
        let mut neighbors = Vec::with_capacity(self.rows.len());
        let mut acc = vec![0.0f64; self.rows.len()];
        let mut touched: Vec<u32> = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                for &(other, w2) in &inverted[c as usize] {
                    if acc[other as usize] == 0.0 {
                        touched.push(other);
                    }
                    acc[other as usize] += w * w2;
                }
            }
            let mut sims: Vec<(u32, f64)> = Vec::with_capacity(touched.len());
            for &other in &touched {
                let dot = acc[other as usize];
                acc[other as usize] = 0.0;
                if other as usize == r || dot <= 0.0 {
                    continue;
                }
                let denom = norms[r] * norms[other as usize];
                if denom > 0.0 {
                    sims.push((other, dot / denom));
                }
            }
            touched.clear();
            sims.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.0.cmp(&b.0))
            });
            sims.truncate(k);
            neighbors.push(sims);
        }
        neighbors
    }
}
