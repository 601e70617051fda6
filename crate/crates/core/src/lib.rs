//! α-carving decision chains for class-imbalanced binary data.
//!
//! A decision chain is an ordered list of rules applied one after another.
//! Each rule carves a low-risk, majority-class subset off the data that is
//! still in play, so the positive ratio of the terminal groups increases
//! along the chain. The split at each stage maximizes an α-divergence
//! criterion whose α is re-solved per stage from the node's class balance
//! and a user-chosen velocity ν.
//!
//! ```
//! use acdc_core::{generate_synthetic, train_chain, ChainConfig};
//!
//! let data = generate_synthetic(2000, 4, 4, 0.05, 7).unwrap();
//! let chain = train_chain(&data, &ChainConfig::new(1.0)).unwrap();
//! for group in chain.terminal_groups() {
//!     println!("{:>6}  {:.4}  {}", group.count, group.score, group.rule);
//! }
//! ```
//!
//! Modules:
//! * [`dataset`]: columns, labels, CSV I/O, candidate splits, synthetic data
//! * [`criterion`]: α-zooming factor and the split criteria
//! * [`carving`]: per-stage α from the carving equation
//! * [`chain`]: chain training, feasibility and scoring
//! * [`tree`]: fixed-α baseline trees
//! * [`metrics`]: ROC, AUROC, lift, rule annotation, export
//! * [`model`]: versioned model documents

pub mod carving;
pub mod chain;
pub mod criterion;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod tree;

pub use carving::{
    az_factor_slope, omega_y, solve_alpha, CarvingConfig, CarvingSolution, SolutionKind,
};
pub use chain::{
    feasible_splits, smoothed_score, train_chain, train_chain_traced, CarveCondition, ChainConfig,
    ChainStage, DecisionChain, FeasibleSplit, PreviousCarve, ScoredRow, StopReason, Terminal,
    TerminalGroup,
};
pub use criterion::{
    acdc_divergence, az_factor, criterion_limit_alpha1, select_split, weighted_gini,
    CriterionValue, Decomposition,
};
pub use dataset::{
    candidate_splits, generate_synthetic, load_csv, load_csv_with, tabulate, tabulate_candidates,
    CsvOptions, Dataset, FeatureColumn, FeatureKind, FeatureSpec, Record, Relation, SplitPredicate,
    SplitStats, Value,
};
pub use error::{AcdcError, Result};
pub use metrics::{
    annotate_chain_curve, concordance_auc, lift_chart, roc_curve, AnnotatedPoint, CurveKind,
    EvaluationCurve,
};
pub use model::{Model, ModelKind, MODEL_FORMAT};
pub use tree::{train_tree, AlphaTree, TreeConfig, TreeNode};
