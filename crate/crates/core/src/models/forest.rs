//! Regression forest of CART trees.
//!
//! Each tree is grown on a bootstrap resample. At every node `mtry` candidate
//! features are drawn without replacement; for each, all midpoints between
//! consecutive distinct sorted values are scored by the reduction in squared
//! error. Growth stops when a split would leave a child with fewer than
//! `min_leaf` samples or the node's targets are constant. There is no depth
//! limit. Leaves predict the mean of their samples.

use rand::Rng;
use rayon::prelude::*;

use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    pub min_leaf: usize,
    pub mtry: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    /// Total squared-error reduction credited to each feature.
    importance: Vec<f64>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf(_) => None,
        })
    }

    pub fn fit<R: Rng>(x: &Matrix, y: &[f64], rows: Vec<usize>, min_leaf: usize, mtry: usize, rng: &mut R) -> Self {
        let k = x.cols();
        let mtry = mtry.clamp(1, k);
        let min_leaf = min_leaf.max(1);
        let mut tree = RegressionTree {
            nodes: vec![Node::Leaf(0.0)],
            importance: vec![0.0; k],
        };
        let mut features: Vec<usize> = (0..k).collect();
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(rows.len());
        let mut stack = vec![(0usize, rows)];

        while let Some((slot, idx)) = stack.pop() {
            let m = idx.len();
            let sum: f64 = idx.iter().map(|&r| y[r]).sum();
            let mean = sum / m as f64;
            let constant = idx.iter().all(|&r| y[r] == y[idx[0]]);
            if constant || m < 2 * min_leaf {
                tree.nodes[slot] = Node::Leaf(mean);
                continue;
            }

            // partial Fisher-Yates: the first mtry entries are the candidates
            for j in 0..mtry {
                let pick = rng.gen_range(j..k);
                features.swap(j, pick);
            }

            let parent_score = sum * sum / m as f64;
            let mut best: Option<(usize, f64, f64)> = None;
            for &f in &features[..mtry] {
                pairs.clear();
                pairs.extend(idx.iter().map(|&r| (x.get(r, f), y[r])));
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                let mut left_sum = 0.0;
                for p in 0..m - 1 {
                    left_sum += pairs[p].1;
                    let n_left = p + 1;
                    if n_left < min_leaf || m - n_left < min_leaf || pairs[p].0 == pairs[p + 1].0 {
                        continue;
                    }
                    let right_sum = sum - left_sum;
                    let score = left_sum * left_sum / n_left as f64
                        + right_sum * right_sum / (m - n_left) as f64;
                    if best.is_none_or(|(_, _, s)| score > s) {
                        let (lo, hi) = (pairs[p].0, pairs[p + 1].0);
                        let mid = lo + (hi - lo) / 2.0;
                        let threshold = if mid < hi { mid } else { lo };
                        best = Some((f, threshold, score));
                    }
                }
            }

            match best {
                Some((feature, threshold, score)) if score - parent_score > 0.0 => {
                    tree.importance[feature] += score - parent_score;
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        idx.into_iter().partition(|&r| x.get(r, feature) <= threshold);
                    let left = tree.nodes.len();
                    tree.nodes.push(Node::Leaf(0.0));
                    tree.nodes.push(Node::Leaf(0.0));
                    tree.nodes[slot] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right: left + 1,
                    };
                    stack.push((left + 1, r));
                    stack.push((left, l));
                }
                _ => tree.nodes[slot] = Node::Leaf(mean),
            }
        }
        tree
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<RegressionTree>,
    k: usize,
}

impl RandomForest {
    /// Tree `t` draws from stream `t` of the seeded generator, so the forest
    /// is identical whether trees are grown serially or in parallel.
    pub fn fit(x: &Matrix, y: &[f64], params: ForestParams) -> Self {
        let n = x.rows();
        let trees = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::seeded_stream(params.seed, t as u64);
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                RegressionTree::fit(x, y, rows, params.min_leaf, params.mtry, &mut rng)
            })
            .collect();
        RandomForest { trees, k: x.cols() }
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Impurity decrease per feature summed over all trees and normalised to
    /// sum to one. All zeros when no tree ever split.
    pub fn feature_importance(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.k];
        for tree in &self.trees {
            for (t, v) in total.iter_mut().zip(tree.importance()) {
                *t += v;
            }
        }
        let s: f64 = total.iter().sum();
        if s > 0.0 {
            total.iter_mut().for_each(|v| *v /= s);
        }
        total
    }
}
