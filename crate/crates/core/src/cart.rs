//! Least-squares regression trees with cost-complexity pruning.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Observations;
use crate::error::{Error, Result};
use crate::report::{rmse, TrainReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        prediction: f64,
        sample_count: usize,
        #[serde(default)]
        sse: f64,
    },
    /// `mean`, `sse` and `sample_count` describe the node's own training targets.
    Internal {
        split_variable: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        mean: f64,
        sse: f64,
        sample_count: usize,
    },
}

impl TreeNode {
    pub fn leaf(prediction: f64) -> Self {
        TreeNode::Leaf {
            prediction,
            sample_count: 0,
            sse: 0.0,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    /// Values `<= threshold` go left.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { prediction, .. } => return *prediction,
                TreeNode::Internal {
                    split_variable,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*split_variable] <= *threshold { left } else { right },
            }
        }
    }

    pub fn predict_all(&self, data: &Observations) -> Vec<f64> {
        data.x.iter().map(|x| self.predict(x)).collect()
    }

    pub fn terminal_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.terminal_count() + right.terminal_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn sample_count(&self) -> usize {
        match self {
            TreeNode::Leaf { sample_count, .. } | TreeNode::Internal { sample_count, .. } => *sample_count,
        }
    }

    /// Training SSE of the node as a single leaf.
    pub fn node_sse(&self) -> f64 {
        match self {
            TreeNode::Leaf { sse, .. } | TreeNode::Internal { sse, .. } => *sse,
        }
    }

    /// Training SSE summed over the subtree's leaves.
    pub fn subtree_sse(&self) -> f64 {
        match self {
            TreeNode::Leaf { sse, .. } => *sse,
            TreeNode::Internal { left, right, .. } => left.subtree_sse() + right.subtree_sse(),
        }
    }

    fn collapse(&mut self) {
        if let TreeNode::Internal {
            mean, sse, sample_count, ..
        } = *self
        {
            *self = TreeNode::Leaf {
                prediction: mean,
                sample_count,
                sse,
            };
        }
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        match self {
            TreeNode::Leaf { prediction, .. } if prediction.is_finite() => Ok(()),
            TreeNode::Leaf { .. } => Err(Error::invalid("non-finite leaf prediction")),
            TreeNode::Internal {
                split_variable,
                threshold,
                left,
                right,
                ..
            } => {
                if *split_variable >= input_dim || !threshold.is_finite() {
                    return Err(Error::invalid(format!("bad split on variable {split_variable}")));
                }
                left.validate(input_dim)?;
                right.validate(input_dim)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub variable: usize,
    pub threshold: f64,
    /// Left SSE + right SSE.
    pub sse: f64,
}

/// Mean, SSE and count, summed in sorted order so the result ignores sample order.
fn mean_sse(y: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let mut v: Vec<f64> = y.collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = v.iter().sum::<f64>() / n as f64;
    (m, v.iter().map(|x| (x - m) * (x - m)).sum(), n)
}

/// Best SSE-reducing split of the samples `idx`, if any respects `min_leaf`.
///
/// Scans variables in order and thresholds ascending, keeping the first strict
/// minimum, so ties go to the lowest variable and then the lowest threshold.
pub fn best_split(data: &Observations, idx: &[usize], min_leaf: usize) -> Option<Split> {
    let n = idx.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let (mean, _, _) = mean_sse(idx.iter().map(|&i| data.y[i]));
    let mut order = idx.to_vec();
    let mut best: Option<Split> = None;
    let mut pre1 = vec![0.0; n + 1];
    let mut pre2 = vec![0.0; n + 1];
    for v in 0..data.dim() {
        order.sort_by(|&a, &b| data.x[a][v].total_cmp(&data.x[b][v]).then(data.y[a].total_cmp(&data.y[b])));
        for (k, &i) in order.iter().enumerate() {
            let c = data.y[i] - mean;
            pre1[k + 1] = pre1[k] + c;
            pre2[k + 1] = pre2[k] + c * c;
        }
        for k in min_leaf.max(1)..=n - min_leaf.max(1) {
            let (lo, hi) = (data.x[order[k - 1]][v], data.x[order[k]][v]);
            if lo == hi {
                continue;
            }
            let (nl, nr) = (k as f64, (n - k) as f64);
            let sl = pre2[k] - pre1[k] * pre1[k] / nl;
            let (r1, r2) = (pre1[n] - pre1[k], pre2[n] - pre2[k]);
            let sr = r2 - r1 * r1 / nr;
            let total = sl.max(0.0) + sr.max(0.0);
            if best.is_none_or(|b| total < b.sse) {
                let mid = 0.5 * (lo + hi);
                best = Some(Split {
                    variable: v,
                    // adjacent floats can round the midpoint up onto `hi`
                    threshold: if mid < hi { mid } else { lo },
                    sse: total,
                });
            }
        }
    }
    best
}

/// Greedy recursive partitioning.
pub fn grow(data: &Observations, min_leaf: usize) -> Result<TreeNode> {
    if data.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    if min_leaf == 0 {
        return Err(Error::invalid("min_leaf must be >= 1"));
    }
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(grow_node(data, &idx, min_leaf))
}

fn grow_node(data: &Observations, idx: &[usize], min_leaf: usize) -> TreeNode {
    let (mean, sse, n) = mean_sse(idx.iter().map(|&i| data.y[i]));
    let leaf = TreeNode::Leaf {
        prediction: mean,
        sample_count: n,
        sse,
    };
    if sse == 0.0 {
        return leaf;
    }
    let Some(split) = best_split(data, idx, min_leaf).filter(|s| s.sse < sse) else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| data.x[i][split.variable] <= split.threshold);
    TreeNode::Internal {
        split_variable: split.variable,
        threshold: split.threshold,
        left: Box::new(grow_node(data, &l, min_leaf)),
        right: Box::new(grow_node(data, &r, min_leaf)),
        mean,
        sse,
        sample_count: n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneEntry {
    pub alpha: f64,
    pub tree: TreeNode,
    pub terminal_count: usize,
    /// Cross-validated mean squared error.
    pub cv_cost: f64,
}

/// Nested subtrees, full tree first, root-only last.
pub type PrunedSequence = Vec<PruneEntry>;

/// Minimum weakest-link value `(R(t) − R(T_t)) / (|T_t| − 1)` over internal nodes.
fn weakest_link(node: &TreeNode) -> Option<f64> {
    match node {
        TreeNode::Leaf { .. } => None,
        TreeNode::Internal { left, right, sse, .. } => {
            let g = (sse - node.subtree_sse()) / (node.terminal_count() - 1) as f64;
            [Some(g), weakest_link(left), weakest_link(right)].into_iter().flatten().reduce(f64::min)
        }
    }
}

/// Collapses every internal node whose link value is at most `alpha`, bottom-up.
fn prune_at(node: &mut TreeNode, alpha: f64) {
    if let TreeNode::Internal { left, right, .. } = node {
        prune_at(left, alpha);
        prune_at(right, alpha);
        let g = (node.node_sse() - node.subtree_sse()) / (node.terminal_count() - 1) as f64;
        if g <= alpha {
            node.collapse();
        }
    }
}

/// Weakest-link pruning without cross-validation; `cv_cost` is left NaN.
pub fn cost_complexity_path(tree: &TreeNode) -> Vec<(f64, TreeNode)> {
    let mut seq = vec![(0.0, tree.clone())];
    let mut current = tree.clone();
    while let Some(g) = weakest_link(&current) {
        let alpha = g.max(seq.last().map_or(0.0, |s| s.0));
        let cutoff = alpha + 1e-12 * alpha.abs().max(1e-300);
        prune_at(&mut current, cutoff);
        match seq.last_mut() {
            Some(last) if alpha <= last.0 => last.1 = current.clone(),
            _ => seq.push((alpha, current.clone())),
        }
    }
    seq
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CartConfig {
    pub min_leaf: usize,
    pub folds: usize,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig { min_leaf: 5, folds: 10 }
    }
}

/// Pruning sequence with each subtree's cost estimated by seeded k-fold cross-validation.
///
/// Fold trees are pruned at the geometric mean of consecutive alphas.
pub fn prune_sequence(tree: &TreeNode, data: &Observations, config: &CartConfig, seed: u64) -> Result<PrunedSequence> {
    if config.folds < 2 || config.folds > data.len() {
        return Err(Error::invalid(format!("folds must be in [2, {}]", data.len())));
    }
    let path = cost_complexity_path(tree);
    let probes: Vec<f64> = (0..path.len())
        .map(|j| match path.get(j + 1) {
            Some(next) => (path[j].0 * next.0).sqrt(),
            None => f64::INFINITY,
        })
        .collect();

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut sq_err = vec![0.0; path.len()];
    for k in 0..config.folds {
        let (held, kept): (Vec<(usize, usize)>, Vec<(usize, usize)>) = order.iter().copied().enumerate().partition(|(p, _)| p % config.folds == k);
        let kept: Vec<usize> = kept.into_iter().map(|(_, i)| i).collect();
        let held = data.subset(&held.into_iter().map(|(_, i)| i).collect::<Vec<_>>());
        let fold_path = cost_complexity_path(&grow(&data.subset(&kept), config.min_leaf)?);
        for (j, &a) in probes.iter().enumerate() {
            let t = &fold_path.iter().rev().find(|(fa, _)| *fa <= a).unwrap_or(&fold_path[0]).1;
            sq_err[j] += held.iter().map(|(x, y)| (t.predict(x) - y).powi(2)).sum::<f64>();
        }
    }
    let n = data.len() as f64;
    Ok(path
        .into_iter()
        .zip(sq_err)
        .map(|((alpha, tree), e)| PruneEntry {
            alpha,
            terminal_count: tree.terminal_count(),
            tree,
            cv_cost: e / n,
        })
        .collect())
}

/// Minimum-cost subtree; ties go to fewer terminal nodes.
pub fn select_min_cost(seq: &[PruneEntry]) -> Result<&PruneEntry> {
    seq.iter()
        .min_by(|a, b| a.cv_cost.total_cmp(&b.cv_cost).then(a.terminal_count.cmp(&b.terminal_count)))
        .ok_or_else(|| Error::invalid("empty pruning sequence"))
}

/// `terminal_nodes,relative_error,alpha` rows; relative error is cv_cost over the root-only cost.
pub fn relative_error_csv(seq: &[PruneEntry]) -> String {
    let root = seq.last().map_or(f64::NAN, |e| e.cv_cost);
    let mut s = String::from("terminal_nodes,relative_error,alpha\n");
    for e in seq {
        let _ = writeln!(s, "{},{},{}", e.terminal_count, e.cv_cost / root, e.alpha);
    }
    s
}

/// Grow, prune by cross-validation and keep the minimum-cost subtree.
pub fn cart_train(train: &Observations, test: &Observations, config: &CartConfig, seed: u64) -> Result<(TreeNode, PrunedSequence, TrainReport)> {
    let start = Instant::now();
    let full = grow(train, config.min_leaf)?;
    let seq = prune_sequence(&full, train, config, seed)?;
    let tree = select_min_cost(&seq)?.tree.clone();
    let mut report = TrainReport::new(seed);
    report.final_train_rmse = rmse(&tree.predict_all(train), &train.y);
    report.final_test_rmse = if test.is_empty() {
        f64::NAN
    } else {
        rmse(&tree.predict_all(test), &test.y)
    };
    report.terminal_count = Some(tree.terminal_count());
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((tree, seq, report))
}
