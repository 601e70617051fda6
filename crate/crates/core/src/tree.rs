//! Fixed-α binary decision trees grown with the same criterion as the
//! chain. α = 1 uses the limit form (information gain), α = 2 ranks splits
//! like weighted Gini.

use serde::{Deserialize, Serialize};

use crate::chain::smoothed_score;
use crate::criterion::{argmax_first, split_score};
use crate::dataset::{
    tabulate_candidates, BoundPredicate, Dataset, FeatureSpec, LabelInfo, Record, SplitPredicate,
    DEFAULT_MAX_THRESHOLDS,
};
use crate::error::{AcdcError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// α ≥ 1; exactly 1 selects the limit criterion.
    pub alpha: f64,
    pub max_depth: usize,
    /// Minimum rows on each side of a split.
    pub min_leaf: u64,
    pub max_thresholds: usize,
}

impl TreeConfig {
    pub fn new(alpha: f64, max_depth: usize) -> Self {
        TreeConfig {
            alpha,
            max_depth,
            min_leaf: 1,
            max_thresholds: DEFAULT_MAX_THRESHOLDS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 1.0 {
            return Err(AcdcError::InvalidArgument(format!(
                "tree alpha must be finite and at least 1, got {}",
                self.alpha
            )));
        }
        if self.min_leaf == 0 || self.max_thresholds == 0 {
            return Err(AcdcError::InvalidArgument(
                "min_leaf and max_thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        count: u64,
        positives: u64,
        score: f64,
    },
    Internal {
        predicate: SplitPredicate,
        count: u64,
        positives: u64,
        /// Rows where the predicate is false or the cell is missing.
        left: Box<TreeNode>,
        /// Rows where the predicate holds.
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn count(&self) -> u64 {
        match self {
            TreeNode::Leaf { count, .. } | TreeNode::Internal { count, .. } => *count,
        }
    }

    pub fn positives(&self) -> u64 {
        match self {
            TreeNode::Leaf { positives, .. } | TreeNode::Internal { positives, .. } => *positives,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMeta {
    pub rows: u64,
    pub positives: u64,
    pub label: Option<LabelInfo>,
    pub features: Vec<FeatureSpec>,
    pub config: TreeConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTree {
    pub root: TreeNode,
    pub training_meta: TreeMeta,
}

/// One leaf with the conjunction of conditions on its path. Leaves are
/// numbered depth-first, false branch first, starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafInfo {
    pub index: usize,
    pub count: u64,
    pub positives: u64,
    pub score: f64,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeScored {
    pub score: f64,
    pub leaf: usize,
    pub rule: String,
}

pub fn train_tree(dataset: &Dataset, config: &TreeConfig) -> Result<AlphaTree> {
    config.validate()?;
    let labels = dataset.labels()?;
    let n = dataset.row_count() as u64;
    if n == 0 {
        return Err(AcdcError::EmptyDataset);
    }
    let positives = labels.iter().filter(|&&y| y == 1).count() as u64;
    if positives == 0 || positives == n {
        return Err(AcdcError::SingleClass);
    }
    let root = grow(dataset, labels, dataset.all_rows(), 0, config)?;
    Ok(AlphaTree {
        root,
        training_meta: TreeMeta {
            rows: n,
            positives,
            label: dataset.label_info().cloned(),
            features: dataset.feature_specs(),
            config: config.clone(),
        },
    })
}

fn grow(
    dataset: &Dataset,
    labels: &[u8],
    rows: Vec<usize>,
    depth: usize,
    config: &TreeConfig,
) -> Result<TreeNode> {
    let count = rows.len() as u64;
    let positives = rows.iter().filter(|&&r| labels[r] == 1).count() as u64;
    let leaf = TreeNode::Leaf {
        count,
        positives,
        score: smoothed_score(positives, count),
    };
    if depth >= config.max_depth
        || positives == 0
        || positives == count
        || count < 2 * config.min_leaf
    {
        return Ok(leaf);
    }
    let candidates: Vec<_> = tabulate_candidates(dataset, &rows, config.max_thresholds)?
        .into_iter()
        .filter(|(_, s)| s.n_true() >= config.min_leaf && s.n_false() >= config.min_leaf)
        .collect();
    let scores = candidates
        .iter()
        .map(|(_, s)| split_score(s, config.alpha))
        .collect::<Result<Vec<f64>>>()?;
    let Some((best, _)) = argmax_first(scores) else {
        return Ok(leaf);
    };
    let predicate = candidates[best].0.clone();
    let bound = predicate.bind(dataset)?;
    let (right_rows, left_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&r| bound.eval(dataset, r));
    Ok(TreeNode::Internal {
        predicate,
        count,
        positives,
        left: Box::new(grow(dataset, labels, left_rows, depth + 1, config)?),
        right: Box::new(grow(dataset, labels, right_rows, depth + 1, config)?),
    })
}

impl AlphaTree {
    pub fn leaves(&self) -> Vec<LeafInfo> {
        fn walk(node: &TreeNode, path: &mut Vec<String>, out: &mut Vec<LeafInfo>) {
            match node {
                TreeNode::Leaf {
                    count,
                    positives,
                    score,
                } => out.push(LeafInfo {
                    index: out.len(),
                    count: *count,
                    positives: *positives,
                    score: *score,
                    rule: if path.is_empty() {
                        "TRUE".into()
                    } else {
                        path.join(" AND ")
                    },
                }),
                TreeNode::Internal {
                    predicate,
                    left,
                    right,
                    ..
                } => {
                    path.push(format!("NOT({predicate})"));
                    walk(left, path, out);
                    path.pop();
                    path.push(predicate.to_string());
                    walk(right, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Smoothed leaf ratio for a feature record; missing cells take the
    /// false branch.
    pub fn score(&self, record: &Record) -> TreeScored {
        let leaves = self.leaves();
        let idx = self.route(|p| p.eval_record(record));
        let leaf = &leaves[idx];
        TreeScored {
            score: leaf.score,
            leaf: idx,
            rule: leaf.rule.clone(),
        }
    }

    fn route(&self, mut eval: impl FnMut(&SplitPredicate) -> bool) -> usize {
        // leaf index = number of leaves left of the reached leaf
        fn leaf_count(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Internal { left, right, .. } => leaf_count(left) + leaf_count(right),
            }
        }
        let mut node = &self.root;
        let mut offset = 0;
        loop {
            match node {
                TreeNode::Leaf { .. } => return offset,
                TreeNode::Internal {
                    predicate,
                    left,
                    right,
                    ..
                } => {
                    if eval(predicate) {
                        offset += leaf_count(left);
                        node = right;
                    } else {
                        node = left;
                    }
                }
            }
        }
    }

    pub fn score_dataset(&self, dataset: &Dataset) -> Result<Vec<TreeScored>> {
        let leaves = self.leaves();
        let mut bound: Vec<(SplitPredicate, BoundPredicate)> = Vec::new();
        fn collect(
            n: &TreeNode,
            ds: &Dataset,
            out: &mut Vec<(SplitPredicate, BoundPredicate)>,
        ) -> Result<()> {
            if let TreeNode::Internal {
                predicate,
                left,
                right,
                ..
            } = n
            {
                out.push((predicate.clone(), predicate.bind(ds)?));
                collect(left, ds, out)?;
                collect(right, ds, out)?;
            }
            Ok(())
        }
        collect(&self.root, dataset, &mut bound)?;
        Ok((0..dataset.row_count())
            .map(|r| {
                let idx = self.route(|p| {
                    bound
                        .iter()
                        .find(|(q, _)| q == p)
                        .is_some_and(|(_, b)| b.eval(dataset, r))
                });
                let leaf = &leaves[idx];
                TreeScored {
                    score: leaf.score,
                    leaf: idx,
                    rule: leaf.rule.clone(),
                }
            })
            .collect())
    }
}
