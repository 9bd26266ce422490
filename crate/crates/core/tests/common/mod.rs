//! Brute-force reference implementations used as test oracles. Nothing in
//! here calls into the engine's similarity or prediction code.

#![allow(dead_code)]

use std::collections::HashMap;

use promptrec::data::{PromptId, RatingDataset};
use promptrec::engine::Provenance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cells of a dataset without duplicate pairs, ratings in integer hundredths.
pub struct CentsMatrix {
    pub n: usize,
    pub cells: HashMap<(usize, usize), i64>,
}

impl CentsMatrix {
    pub fn from_dataset(d: &RatingDataset) -> Self {
        let mut cells = HashMap::new();
        for r in &d.records {
            let cents = (r.rating * 100.0).round() as i64;
            let prev = cells.insert((r.context.index(), r.target.index()), cents);
            assert!(prev.is_none(), "oracle matrices must not contain duplicate pairs");
        }
        CentsMatrix { n: d.catalog.len(), cells }
    }

    pub fn get(&self, context: usize, target: usize) -> Option<f64> {
        self.cells.get(&(context, target)).map(|&c| c as f64 / 100.0)
    }

    /// Every context that rated both `a` and `b`, by scanning all contexts.
    pub fn co_raters(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&p| self.cells.contains_key(&(p, a)) && self.cells.contains_key(&(p, b)))
            .collect()
    }

    /// Pearson coefficient from exact integer moments:
    /// (nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²)).
    pub fn pearson(&self, a: usize, b: usize, min_support: usize) -> Option<f64> {
        let raters = self.co_raters(a, b);
        if raters.len() < min_support.max(2) {
            return None;
        }
        let n = raters.len() as i128;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
        for p in raters {
            let x = self.cells[&(p, a)] as i128;
            let y = self.cells[&(p, b)] as i128;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let vx = n * sxx - sx * sx;
        let vy = n * syy - sy * sy;
        if vx == 0 || vy == 0 {
            return None;
        }
        let num = (n * sxy - sx * sy) as f64;
        Some((num / ((vx as f64) * (vy as f64)).sqrt()).clamp(-1.0, 1.0))
    }

    /// [`Self::pearson`] rounded to the 1e-12 grid used for neighbor ordering.
    pub fn pearson_grid(&self, a: usize, b: usize, min_support: usize) -> Option<f64> {
        self.pearson(a, b, min_support).map(|s| (s * 1e12).round() / 1e12)
    }

    pub fn received_mean(&self, target: usize) -> Option<f64> {
        let vals: Vec<f64> = (0..self.n).filter_map(|p| self.get(p, target)).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    pub fn global_mean(&self) -> Option<f64> {
        if self.cells.is_empty() {
            None
        } else {
            Some(self.cells.values().map(|&c| c as f64 / 100.0).sum::<f64>() / self.cells.len() as f64)
        }
    }

    /// Exhaustive k-NN weighted-average prediction with the fallback ladder.
    /// Neighbors are ranked by similarity desc then index asc. Returns
    /// `(predicted, provenance, neighbor_count, ambiguous_cut)`, where the
    /// last flag marks a near-tie at the k-th neighbor.
    pub fn predict(&self, context: usize, target: usize, k: usize, min_support: usize) -> (f64, Provenance, usize, bool) {
        let mut neighbors: Vec<(usize, f64, f64)> = (0..self.n)
            .filter(|&j| j != target)
            .filter_map(|j| {
                let r = self.get(context, j)?;
                let s = self.pearson_grid(target, j, min_support)?;
                (s > 0.0).then_some((j, s, r))
            })
            .collect();
        neighbors.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        let ambiguous = neighbors.len() > k && neighbors[k - 1].1 != neighbors[k].1 && (neighbors[k - 1].1 - neighbors[k].1).abs() < 1e-9;
        neighbors.truncate(k);
        if !neighbors.is_empty() {
            let num: f64 = neighbors.iter().map(|(_, s, r)| s * r).sum();
            let den: f64 = neighbors.iter().map(|(_, s, _)| s).sum();
            return ((num / den).clamp(1.0, 5.0), Provenance::Knn, neighbors.len(), ambiguous);
        }
        match self.received_mean(target) {
            Some(m) => (m.clamp(1.0, 5.0), Provenance::ItemMean, 0, false),
            None => (self.global_mean().unwrap_or(3.0), Provenance::GlobalMean, 0, false),
        }
    }
}

/// A random dataset over `n` prompts where each directed pair is present
/// with probability `density`, ratings on a 0.01 grid in [1, 5].
pub fn random_dataset(rng: &mut impl Rng, n: usize, density: f64) -> RatingDataset {
    let mut d = RatingDataset::new();
    for c in 0..n {
        d.catalog.intern(&format!("prompt {c}"));
    }
    for c in 0..n {
        for t in 0..n {
            if c != t && rng.random_bool(density) {
                let rating = rng.random_range(100..=500) as f64 / 100.0;
                d.push(&format!("prompt {c}"), &format!("prompt {t}"), rating).unwrap();
            }
        }
    }
    d
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn id(i: usize) -> PromptId {
    PromptId(i as u32)
}
