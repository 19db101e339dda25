//! Random forest of Gini decision trees grown to purity.
//!
//! Each tree sees a bootstrap sample (stored as per-row draw counts) and, at
//! every node, scores `⌈√D⌉` features drawn without replacement. If all
//! drawn features are constant on the node, drawing continues until a
//! non-constant one turns up or the features run out. Candidate thresholds
//! are midpoints between consecutive distinct values; rows go left when
//! `x ≤ threshold`. Entries absent from the sparse row count as zero.
//!
//! Tree `t` draws from `ChaCha8Rng::seed_from_u64(tree_seed(seed, t))`, so
//! the forest is identical whether trees are built serially or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::{check_binary_labels, check_width};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
    /// Features scored per node; `None` means `⌈√D⌉`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 150,
            seed: 42,
            max_features: None,
            bootstrap: true,
        }
    }
}

/// Flat node arrays. Node 0 is the root; a node is a leaf when
/// `left[node] == 0`. `counts` holds the bootstrap-weighted class counts of
/// the training rows that reached each node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub feature: Vec<u32>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub counts: Vec<[u32; 2]>,
}

impl DecisionTree {
    pub fn n_nodes(&self) -> usize {
        self.counts.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.left.iter().filter(|&&l| l == 0).count()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.left[node] == 0
    }

    fn push_leaf(&mut self, counts: [u32; 2]) -> usize {
        self.feature.push(0);
        self.threshold.push(0.0);
        self.left.push(0);
        self.right.push(0);
        self.counts.push(counts);
        self.counts.len() - 1
    }

    pub fn max_depth(&self) -> usize {
        let mut depth = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((node, d)) = stack.pop() {
            depth = depth.max(d);
            if !self.is_leaf(node) {
                stack.push((self.left[node] as usize, d + 1));
                stack.push((self.right[node] as usize, d + 1));
            }
        }
        depth
    }

    /// Index of the leaf reached by row `i`.
    pub fn leaf_for(&self, x: &CsrMatrix, i: usize) -> usize {
        let mut node = 0;
        while !self.is_leaf(node) {
            let v = x.get(i, self.feature[node] as usize);
            node = if v <= self.threshold[node] {
                self.left[node]
            } else {
                self.right[node]
            } as usize;
        }
        node
    }

    /// Class frequencies of the leaf reached by row `i`.
    pub fn leaf_proba(&self, x: &CsrMatrix, i: usize) -> [f64; 2] {
        let [a, b] = self.counts[self.leaf_for(x, i)];
        let total = (a + b) as f64;
        [a as f64 / total, b as f64 / total]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_features: usize,
    pub params: ForestParams,
    pub trees: Vec<DecisionTree>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of tree `index`: `splitmix64(seed ^ splitmix64(index))`.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Column-major copy of the training matrix, used to find a feature's
/// nonzero entries inside large nodes without scanning every row.
struct Columns {
    offsets: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
}

impl Columns {
    fn new(x: &CsrMatrix) -> Self {
        let mut offsets = vec![0usize; x.n_cols() + 1];
        for &c in x.col_indices() {
            offsets[c + 1] += 1;
        }
        for j in 0..x.n_cols() {
            offsets[j + 1] += offsets[j];
        }
        let mut next = offsets.clone();
        let mut rows = vec![0u32; x.nnz()];
        let mut values = vec![0.0; x.nnz()];
        for i in 0..x.n_rows() {
            let (cols, vals) = x.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                rows[next[c]] = i as u32;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        Self {
            offsets,
            rows,
            values,
        }
    }

    fn nnz(&self, j: usize) -> usize {
        self.offsets[j + 1] - self.offsets[j]
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let (lo, hi) = (self.offsets[j], self.offsets[j + 1]);
        self.rows[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    /// `Σ_side (n_0² + n_1²) / n_side`; larger means lower weighted Gini.
    score: f64,
    feature: usize,
    threshold: f64,
}

struct TreeBuilder<'a> {
    x: &'a CsrMatrix,
    columns: &'a Columns,
    y: &'a [u8],
    weight: Vec<u32>,
    mark: Vec<u32>,
    stamp: u32,
    features: Vec<u32>,
    max_features: usize,
    rng: ChaCha8Rng,
    entries: Vec<(f64, u8, u32)>,
}

impl TreeBuilder<'_> {
    fn class_counts(&self, samples: &[u32]) -> [u32; 2] {
        let mut c = [0u32; 2];
        for &s in samples {
            c[self.y[s as usize] as usize] += self.weight[s as usize];
        }
        c
    }

    fn grow(mut self) -> DecisionTree {
        let mut samples: Vec<u32> = (0..self.y.len() as u32)
            .filter(|&i| self.weight[i as usize] > 0)
            .collect();
        let mut tree = DecisionTree::default();
        let root = tree.push_leaf(self.class_counts(&samples));
        let mut stack = vec![(root, 0usize, samples.len())];
        let mut scratch = Vec::new();
        while let Some((node, start, end)) = stack.pop() {
            let counts = tree.counts[node];
            if counts[0] == 0 || counts[1] == 0 {
                continue;
            }
            let Some(split) = self.best_split(&samples[start..end], counts) else {
                continue;
            };
            scratch.clear();
            let (mut left, mut right): (Vec<u32>, Vec<u32>) = samples[start..end]
                .iter()
                .partition(|&&s| self.x.get(s as usize, split.feature) <= split.threshold);
            let mid = start + left.len();
            scratch.append(&mut left);
            scratch.append(&mut right);
            samples[start..end].copy_from_slice(&scratch);

            let l = tree.push_leaf(self.class_counts(&samples[start..mid]));
            let r = tree.push_leaf(self.class_counts(&samples[mid..end]));
            tree.feature[node] = split.feature as u32;
            tree.threshold[node] = split.threshold;
            tree.left[node] = l as u32;
            tree.right[node] = r as u32;
            stack.push((r, mid, end));
            stack.push((l, start, mid));
        }
        tree
    }

    fn best_split(&mut self, samples: &[u32], counts: [u32; 2]) -> Option<Split> {
        self.stamp += 1;
        for &s in samples {
            self.mark[s as usize] = self.stamp;
        }
        let d = self.features.len();
        let mut best: Option<Split> = None;
        let mut visited = 0;
        while visited < d && (visited < self.max_features || best.is_none()) {
            let pick = self.rng.gen_range(visited..d);
            self.features.swap(visited, pick);
            let f = self.features[visited] as usize;
            visited += 1;
            if let Some(s) = self.evaluate(f, samples, counts) {
                let better = match best {
                    None => true,
                    Some(b) => s.score > b.score || (s.score == b.score && s.feature < b.feature),
                };
                if better {
                    best = Some(s);
                }
            }
        }
        best
    }

    /// Best threshold on feature `f`, or `None` when the feature is constant
    /// over the node.
    fn evaluate(&mut self, f: usize, samples: &[u32], counts: [u32; 2]) -> Option<Split> {
        self.entries.clear();
        if self.columns.nnz(f) <= samples.len().saturating_mul(8) {
            for (row, v) in self.columns.column(f) {
                let r = row as usize;
                if self.mark[r] == self.stamp {
                    self.entries.push((v, self.y[r], self.weight[r]));
                }
            }
        } else {
            for &s in samples {
                let v = self.x.get(s as usize, f);
                if v != 0.0 {
                    self.entries
                        .push((v, self.y[s as usize], self.weight[s as usize]));
                }
            }
        }
        let mut zero = [counts[0] as f64, counts[1] as f64];
        for &(_, c, w) in &self.entries {
            zero[c as usize] -= w as f64;
        }
        let has_zero = zero[0] + zero[1] > 0.0;
        self.entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        // Walk the distinct values in ascending order, zero group included.
        let mut groups: Vec<(f64, [f64; 2])> = Vec::new();
        let mut zero_done = !has_zero;
        let push = |groups: &mut Vec<(f64, [f64; 2])>, v: f64, c: [f64; 2]| match groups.last_mut()
        {
            Some((last, acc)) if *last == v => {
                acc[0] += c[0];
                acc[1] += c[1];
            }
            _ => groups.push((v, c)),
        };
        for &(v, c, w) in &self.entries {
            if !zero_done && v > 0.0 {
                push(&mut groups, 0.0, zero);
                zero_done = true;
            }
            let mut cc = [0.0; 2];
            cc[c as usize] = w as f64;
            push(&mut groups, v, cc);
        }
        if !zero_done {
            push(&mut groups, 0.0, zero);
        }
        if groups.len() < 2 {
            return None;
        }

        let total = [counts[0] as f64, counts[1] as f64];
        let mut left = [0.0; 2];
        let mut best: Option<(f64, usize)> = None;
        for (k, group) in groups[..groups.len() - 1].iter().enumerate() {
            left[0] += group.1[0];
            left[1] += group.1[1];
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = left[0] + left[1];
            let nr = right[0] + right[1];
            let score = (left[0] * left[0] + left[1] * left[1]) / nl
                + (right[0] * right[0] + right[1] * right[1]) / nr;
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, k));
            }
        }
        let (score, k) = best?;
        let (lo, hi) = (groups[k].0, groups[k + 1].0);
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi || threshold < lo {
            threshold = lo;
        }
        Some(Split {
            score,
            feature: f,
            threshold,
        })
    }
}

fn build_tree(x: &CsrMatrix, columns: &Columns, y: &[u8], params: &ForestParams, index: usize) -> DecisionTree {
    let n = y.len();
    let d = x.n_cols();
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, index));
    let mut weight = vec![0u32; n];
    if params.bootstrap {
        for _ in 0..n {
            weight[rng.gen_range(0..n)] += 1;
        }
    } else {
        weight.fill(1);
    }
    let max_features = params
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    TreeBuilder {
        x,
        columns,
        y,
        weight,
        mark: vec![0; n],
        stamp: 0,
        features: (0..d as u32).collect(),
        max_features,
        rng,
        entries: Vec::new(),
    }
    .grow()
}

pub fn train_random_forest(x: &CsrMatrix, y: &[u8], params: &ForestParams) -> Result<ForestModel> {
    check_binary_labels(x, y)?;
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("a forest needs at least one tree".into()));
    }
    if x.n_rows() > u32::MAX as usize || x.n_cols() > u32::MAX as usize {
        return Err(Error::Shape("forest training supports at most 2^32 rows and columns".into()));
    }
    let columns = Columns::new(x);
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| build_tree(x, &columns, y, params, t))
        .collect();
    Ok(ForestModel {
        n_features: x.n_cols(),
        params: *params,
        trees,
    })
}

impl ForestModel {
    /// Mean of the per-tree leaf class frequencies.
    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<[f64; 2]>> {
        check_width(x, self.n_features)?;
        let k = self.trees.len() as f64;
        Ok((0..x.n_rows())
            .into_par_iter()
            .map(|i| {
                let mut acc = [0.0; 2];
                for tree in &self.trees {
                    let p = tree.leaf_proba(x, i);
                    acc[0] += p[0];
                    acc[1] += p[1];
                }
                [acc[0] / k, acc[1] / k]
            })
            .collect())
    }

    /// Majority class; ties go to class 0.
    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|[a, b]| u8::from(b > a))
            .collect())
    }
}
