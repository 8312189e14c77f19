//! CART regression trees and bagged random forests.
//!
//! Splits maximise the reduction in squared error. Each split considers a
//! random subset of `max_features` predictors. Trees are built in parallel;
//! each tree owns an RNG derived from its index and predictions are averaged
//! in tree-index order, so a forest is a pure function of its seed.

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;

use crate::scalar::{total_cmp, Scalar};
use crate::seed::{rng_from, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node<T> {
    Leaf(T),
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<T> {
    nodes: Vec<Node<T>>,
}

/// Row-major design matrix view.
#[derive(Clone, Copy)]
pub struct Design<'a, T> {
    pub data: &'a [T],
    pub n_cols: usize,
}

impl<T: Scalar> Design<'_, T> {
    #[inline]
    fn at(&self, row: usize, col: usize) -> T {
        self.data[row * self.n_cols + col]
    }
}

struct Builder<'a, T> {
    x: Design<'a, T>,
    y: &'a [T],
    params: TreeParams,
    rng: Rng,
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Builder<'_, T> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let n = rows.len();
        let sum: T = rows.iter().map(|&r| self.y[r]).sum();
        let mean = sum / T::from_count(n);
        self.nodes.push(Node::Leaf(mean));

        if depth >= self.params.max_depth || n < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(rows, sum) else {
            return id;
        };
        // Partition rows in place: left = x <= threshold.
        let mut split = 0;
        for i in 0..n {
            if self.x.at(rows[i], feature) <= threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, rows: &[usize], total: T) -> Option<(usize, T)> {
        let n = rows.len();
        let p = self.x.n_cols;
        let k = self.params.max_features.clamp(1, p);
        let min_leaf = self.params.min_leaf.max(1);
        let parent = total * total / T::from_count(n);

        let mut best: Option<(T, usize, T)> = None;
        let mut pairs: Vec<(T, T)> = Vec::with_capacity(n);
        let mut candidates: Vec<usize> = index::sample(&mut self.rng, p, k).into_vec();
        candidates.sort_unstable();
        for feature in candidates {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x.at(r, feature), self.y[r])));
            pairs.sort_by(|a, b| total_cmp(&a.0, &b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            let mut left_sum = T::zero();
            for i in 1..n {
                left_sum = left_sum + pairs[i - 1].1;
                if i < min_leaf || n - i < min_leaf || pairs[i - 1].0 == pairs[i].0 {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / T::from_count(i)
                    + right_sum * right_sum / T::from_count(n - i)
                    - parent;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    let lo = pairs[i - 1].0;
                    let hi = pairs[i].0;
                    let mut thr = lo + (hi - lo) / T::lit(2.0);
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((gain, feature, thr));
                }
            }
        }
        best.filter(|(g, _, _)| *g > T::zero())
            .map(|(_, f, t)| (f, t))
    }
}

impl<T: Scalar> RegressionTree<T> {
    /// Fits a tree on the listed rows of `x` (rows may repeat).
    pub fn fit(x: Design<'_, T>, y: &[T], rows: &[usize], params: TreeParams, rng: Rng) -> Self {
        assert!(!rows.is_empty(), "tree needs at least one row");
        let mut b = Builder {
            x,
            y,
            params,
            rng,
            nodes: Vec::new(),
        };
        let mut rows = rows.to_vec();
        b.build(&mut rows, 0);
        RegressionTree { nodes: b.nodes }
    }

    pub fn predict(&self, row: &[T]) -> T {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest<T> {
    trees: Vec<RegressionTree<T>>,
}

impl<T: Scalar> RandomForest<T> {
    /// Bagged forest; tree `i` draws its bootstrap and split candidates from
    /// `rng_from(seed, [stream..., i])`.
    pub fn fit(x: Design<'_, T>, y: &[T], params: ForestParams, seed: u64, stream: &[u64]) -> Self {
        let n = y.len();
        assert!(n > 0, "forest needs at least one row");
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut parts = stream.to_vec();
                parts.push(t as u64);
                let mut rng = rng_from(seed, &parts);
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                RegressionTree::fit(x, y, &rows, params.tree, rng)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn predict(&self, row: &[T]) -> T {
        let sum = self
            .trees
            .iter()
            .fold(T::zero(), |acc, t| acc + t.predict(row));
        sum / T::from_count(self.trees.len())
    }

    pub fn trees(&self) -> &[RegressionTree<T>] {
        &self.trees
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn params(max_features: usize) -> TreeParams {
        TreeParams {
            max_depth: 10,
            min_leaf: 3,
            max_features,
        }
    }

    #[test]
    fn tree_learns_step() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 50.0 { 1.0 } else { 5.0 }).collect();
        let rows: Vec<usize> = (0..100).collect();
        let tree = RegressionTree::fit(Design { data: &x, n_cols: 1 }, &y, &rows, params(1), Rng::seed_from_u64(0));
        assert_eq!(tree.predict(&[10.0]), 1.0);
        assert_eq!(tree.predict(&[80.0]), 5.0);
        assert_eq!(tree.n_nodes(), 3);
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let rows: Vec<usize> = (0..20).collect();
        let tree = RegressionTree::fit(Design { data: &x, n_cols: 1 }, &[3.0; 20], &rows, params(1), Rng::seed_from_u64(0));
        assert_eq!(tree.n_nodes(), 1);
        assert_eq!(tree.predict(&[100.0]), 3.0);
    }

    #[test]
    fn min_leaf_respected() {
        let x: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let y = [0.0, 0.0, 0.0, 0.0, 10.0];
        let rows: Vec<usize> = (0..5).collect();
        let tree = RegressionTree::fit(Design { data: &x, n_cols: 1 }, &y, &rows, params(1), Rng::seed_from_u64(0));
        assert_eq!(tree.n_nodes(), 1);
    }

    #[test]
    fn forest_is_deterministic() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64).collect();
        let y: Vec<f64> = (0..150).map(|i| x[2 * i] - 0.5 * x[2 * i + 1]).collect();
        let p = ForestParams { n_trees: 12, tree: params(1) };
        let a = RandomForest::fit(Design { data: &x, n_cols: 2 }, &y, p, 7, &[1, 2]);
        let b = RandomForest::fit(Design { data: &x, n_cols: 2 }, &y, p, 7, &[1, 2]);
        assert_eq!(a, b);
        let c = RandomForest::fit(Design { data: &x, n_cols: 2 }, &y, p, 8, &[1, 2]);
        assert_ne!(a, c);
    }
}
