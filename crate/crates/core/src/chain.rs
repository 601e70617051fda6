//! Decision chains: training, feasibility filtering and scoring.
//!
//! A chain is a one-sided tree. Each stage carves the lower-risk side of
//! a split off the remaining rows as a terminal group; whatever is left
//! after the last stage is the final group. Terminal positive ratios are
//! nondecreasing along the chain (the monotonic risk condition).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::carving::{omega_from_counts, solve_alpha, CarvingConfig, SolutionKind};
use crate::criterion::{acdc_divergence, argmax_first};
use crate::dataset::{
    tabulate_candidates, BoundPredicate, Dataset, FeatureSpec, LabelInfo, Record, SplitPredicate,
    SplitStats, DEFAULT_MAX_THRESHOLDS,
};
use crate::error::{AcdcError, Result};

/// Training stops once the dominant class ratio is this close to ½.
pub const BALANCE_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub max_stages: usize,
    pub min_carve_fraction: f64,
    pub min_carve_count: u64,
    pub max_thresholds: usize,
    /// Carving parameters, including the velocity ν.
    pub carving: CarvingConfig,
}

impl ChainConfig {
    pub fn new(nu: f64) -> Self {
        ChainConfig {
            max_stages: 4,
            min_carve_fraction: 0.01,
            min_carve_count: 5,
            max_thresholds: DEFAULT_MAX_THRESHOLDS,
            carving: CarvingConfig::new(nu),
        }
    }

    pub fn nu(&self) -> f64 {
        self.carving.nu
    }

    pub fn validate(&self) -> Result<()> {
        self.carving.validate()?;
        let bad = |m: &str| Err(AcdcError::InvalidArgument(m.to_string()));
        if self.max_stages == 0 {
            return bad("max_stages must be at least 1");
        }
        if !(self.min_carve_fraction > 0.0 && self.min_carve_fraction < 1.0) {
            return bad("min_carve_fraction must lie in (0, 1)");
        }
        if self.min_carve_count == 0 {
            return bad("min_carve_count must be positive");
        }
        if self.max_thresholds == 0 {
            return bad("max_thresholds must be positive");
        }
        Ok(())
    }
}

/// Laplace-smoothed risk score `(positives + 1) / (count + 2)`.
pub fn smoothed_score(positives: u64, count: u64) -> f64 {
    (positives + 1) as f64 / (count + 2) as f64
}

/// The side of a split a stage carves off: the predicate holds
/// (`carved_when = true`) or fails (`false`, which includes missing cells).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarveCondition {
    pub predicate: SplitPredicate,
    pub carved_when: bool,
}

impl CarveCondition {
    pub fn holds(&self, record: &Record) -> bool {
        self.predicate.eval_record(record) == self.carved_when
    }

    pub fn negated(&self) -> CarveCondition {
        CarveCondition {
            predicate: self.predicate.clone(),
            carved_when: !self.carved_when,
        }
    }
}

impl fmt::Display for CarveCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.carved_when {
            write!(f, "{}", self.predicate)
        } else {
            write!(f, "NOT({})", self.predicate)
        }
    }
}

/// One carved link of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStage {
    /// 1-based position in the chain.
    pub stage_index: usize,
    pub predicate: SplitPredicate,
    pub carved_when: bool,
    pub carved_count: u64,
    pub carved_positive: u64,
    /// Smoothed positive ratio of the carved rows.
    pub score: f64,
    pub alpha_used: f64,
    pub alpha_kind: SolutionKind,
    /// Dominant class ratio of the node this stage split.
    pub omega_y: f64,
    /// ACDC criterion value of the chosen split at `alpha_used`.
    pub criterion: f64,
}

impl ChainStage {
    pub fn condition(&self) -> CarveCondition {
        CarveCondition {
            predicate: self.predicate.clone(),
            carved_when: self.carved_when,
        }
    }

    pub fn raw_ratio(&self) -> f64 {
        self.carved_positive as f64 / self.carved_count as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub rows: u64,
    pub positives: u64,
    pub label: Option<LabelInfo>,
    pub features: Vec<FeatureSpec>,
    pub config: ChainConfig,
}

/// A trained decision chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionChain {
    pub stages: Vec<ChainStage>,
    pub final_count: u64,
    pub final_positive: u64,
    pub final_score: f64,
    pub nu: f64,
    pub training_meta: TrainingMeta,
}

/// Terminal group a row falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    /// 1-based stage index.
    Stage(usize),
    Final,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Stage(i) => write!(f, "{i}"),
            Terminal::Final => f.write_str("final"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredRow {
    pub score: f64,
    pub terminal: Terminal,
    pub rule_trace: String,
}

/// Summary of one terminal group as recorded at training time.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalGroup {
    pub terminal: Terminal,
    pub count: u64,
    pub positives: u64,
    pub score: f64,
    pub rule: String,
}

fn conjunction(conds: impl IntoIterator<Item = CarveCondition>) -> String {
    let parts: Vec<String> = conds.into_iter().map(|c| c.to_string()).collect();
    if parts.is_empty() {
        "TRUE".to_string()
    } else {
        parts.join(" AND ")
    }
}

impl DecisionChain {
    pub fn conditions(&self) -> Vec<CarveCondition> {
        self.stages.iter().map(ChainStage::condition).collect()
    }

    /// Conjunctive rule that routes a row to `terminal`.
    pub fn terminal_rule(&self, terminal: Terminal) -> String {
        let conds = self.conditions();
        match terminal {
            Terminal::Stage(j) => conjunction(
                conds[..j - 1]
                    .iter()
                    .map(CarveCondition::negated)
                    .chain(std::iter::once(conds[j - 1].clone())),
            ),
            Terminal::Final => conjunction(conds.iter().map(CarveCondition::negated)),
        }
    }

    pub fn terminal_score(&self, terminal: Terminal) -> f64 {
        match terminal {
            Terminal::Stage(j) => self.stages[j - 1].score,
            Terminal::Final => self.final_score,
        }
    }

    /// Stage groups in chain order followed by the final group.
    pub fn terminal_groups(&self) -> Vec<TerminalGroup> {
        let mut out: Vec<TerminalGroup> = self
            .stages
            .iter()
            .map(|s| TerminalGroup {
                terminal: Terminal::Stage(s.stage_index),
                count: s.carved_count,
                positives: s.carved_positive,
                score: s.score,
                rule: self.terminal_rule(Terminal::Stage(s.stage_index)),
            })
            .collect();
        out.push(TerminalGroup {
            terminal: Terminal::Final,
            count: self.final_count,
            positives: self.final_positive,
            score: self.final_score,
            rule: self.terminal_rule(Terminal::Final),
        });
        out
    }

    fn scored(&self, terminal: Terminal) -> ScoredRow {
        ScoredRow {
            score: self.terminal_score(terminal),
            terminal,
            rule_trace: self.terminal_rule(terminal),
        }
    }

    /// Scores one feature record: the first stage whose carve condition
    /// holds decides; otherwise the final node does.
    pub fn score(&self, record: &Record) -> ScoredRow {
        let terminal = self
            .stages
            .iter()
            .find(|s| s.condition().holds(record))
            .map_or(Terminal::Final, |s| Terminal::Stage(s.stage_index));
        self.scored(terminal)
    }

    /// Terminal of every row of `dataset`.
    pub fn route_dataset(&self, dataset: &Dataset) -> Result<Vec<Terminal>> {
        let bound: Vec<(BoundPredicate, bool, usize)> = self
            .stages
            .iter()
            .map(|s| Ok((s.predicate.bind(dataset)?, s.carved_when, s.stage_index)))
            .collect::<Result<_>>()?;
        Ok((0..dataset.row_count())
            .map(|r| {
                bound
                    .iter()
                    .find(|(p, when, _)| p.eval(dataset, r) == *when)
                    .map_or(Terminal::Final, |(_, _, i)| Terminal::Stage(*i))
            })
            .collect())
    }

    pub fn score_dataset(&self, dataset: &Dataset) -> Result<Vec<ScoredRow>> {
        let groups: Vec<ScoredRow> = (1..=self.stages.len())
            .map(Terminal::Stage)
            .chain(std::iter::once(Terminal::Final))
            .map(|t| self.scored(t))
            .collect();
        Ok(self
            .route_dataset(dataset)?
            .into_iter()
            .map(|t| match t {
                Terminal::Stage(j) => groups[j - 1].clone(),
                Terminal::Final => groups[self.stages.len()].clone(),
            })
            .collect())
    }

    /// Checks the structural invariants of a chain, e.g. after loading one
    /// from disk.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AcdcError::MalformedModel(m));
        let mut total = self.final_count;
        let mut prev: Option<(u64, u64)> = None;
        for (i, s) in self.stages.iter().enumerate() {
            if s.stage_index != i + 1 {
                return bad(format!("stage {} has index {}", i + 1, s.stage_index));
            }
            if s.carved_positive > s.carved_count || s.carved_count == 0 {
                return bad(format!("stage {} has inconsistent counts", s.stage_index));
            }
            if let Some((pp, pn)) = prev {
                if (s.carved_positive as u128) * (pn as u128)
                    < (pp as u128) * (s.carved_count as u128)
                {
                    return bad(format!(
                        "stage {} breaks the monotonic risk condition",
                        s.stage_index
                    ));
                }
            }
            prev = Some((s.carved_positive, s.carved_count));
            total += s.carved_count;
        }
        if self.final_positive > self.final_count {
            return bad("final node has inconsistent counts".into());
        }
        if let Some((pp, pn)) = prev {
            if (self.final_positive as u128) * (pn as u128)
                < (pp as u128) * (self.final_count as u128)
            {
                return bad("final node breaks the monotonic risk condition".into());
            }
        }
        if total != self.training_meta.rows {
            return bad(format!(
                "terminal counts sum to {total}, training rows {}",
                self.training_meta.rows
            ));
        }
        Ok(())
    }
}

/// Counts of the previously carved stage, for the feasibility filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreviousCarve {
    pub positives: u64,
    pub count: u64,
}

/// A candidate that passed the feasibility filter.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSplit {
    /// Position in the candidate list it came from.
    pub index: usize,
    pub predicate: SplitPredicate,
    pub stats: SplitStats,
    pub carved_when: bool,
}

impl FeasibleSplit {
    /// (positives, count) of the carved side.
    pub fn carved(&self) -> (u64, u64) {
        self.stats.side(self.carved_when)
    }

    /// (positives, count) of the side that stays in the chain.
    pub fn remaining(&self) -> (u64, u64) {
        self.stats.side(!self.carved_when)
    }
}

/// Predicate outcome of the side with the lower raw positive ratio;
/// equal ratios pick the predicate-true side.
pub fn carve_side(stats: &SplitStats) -> bool {
    let (tp, tn) = stats.side(true);
    let (fp, fn_) = stats.side(false);
    // tp/tn <= fp/fn_
    (tp as u128) * (fn_ as u128) <= (fp as u128) * (tn as u128)
}

#[inline]
fn ratio_le(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.0 as u128) * (b.1 as u128) <= (b.0 as u128) * (a.1 as u128)
}

#[inline]
fn smoothed_lt(a: (u64, u64), b: (u64, u64)) -> bool {
    ((a.0 + 1) as u128) * ((b.1 + 2) as u128) < ((b.0 + 1) as u128) * ((a.1 + 2) as u128)
}

/// Keeps the candidates that can be carved without breaking the monotonic
/// risk condition. With the carved side taken as the lower-ratio side, a
/// candidate is feasible when
///
/// * (a) its carved ratio is at most the remaining side's ratio, and its
///   smoothed score is strictly below the remaining side's;
/// * (b) its carved ratio is at least the previous stage's carved ratio,
///   and its smoothed score strictly above the previous stage's score
///   (skipped at the first stage);
/// * (c) the carved side holds at least
///   `max(min_carve_count, min_carve_fraction · node rows)` rows;
/// * (d) the remaining side is nonempty.
pub fn feasible_splits(
    candidates: &[(SplitPredicate, SplitStats)],
    prev: Option<PreviousCarve>,
    config: &ChainConfig,
) -> Vec<FeasibleSplit> {
    candidates
        .iter()
        .enumerate()
        .filter_map(|(index, (predicate, stats))| {
            let carved_when = carve_side(stats);
            let carved = stats.side(carved_when);
            let remaining = stats.side(!carved_when);
            let node = stats.total();
            let ok_a = ratio_le(carved, remaining) && smoothed_lt(carved, remaining);
            let ok_b = prev.is_none_or(|p| {
                let p = (p.positives, p.count);
                ratio_le(p, carved) && smoothed_lt(p, carved)
            });
            let ok_c = carved.1 >= config.min_carve_count
                && carved.1 as f64 >= config.min_carve_fraction * node as f64;
            let ok_d = remaining.1 > 0;
            (ok_a && ok_b && ok_c && ok_d).then(|| FeasibleSplit {
                index,
                predicate: predicate.clone(),
                stats: *stats,
                carved_when,
            })
        })
        .collect()
}

/// Why training stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxStages,
    TooFewRows,
    Balanced,
    Pure,
    NoFeasibleSplit,
}

/// Trains a decision chain on every row of `dataset`.
pub fn train_chain(dataset: &Dataset, config: &ChainConfig) -> Result<DecisionChain> {
    train_chain_traced(dataset, config).map(|(c, _)| c)
}

/// As [`train_chain`], also reporting why growth stopped.
pub fn train_chain_traced(
    dataset: &Dataset,
    config: &ChainConfig,
) -> Result<(DecisionChain, StopReason)> {
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

    let mut remaining = dataset.all_rows();
    let mut stages: Vec<ChainStage> = Vec::new();
    let mut prev: Option<PreviousCarve> = None;
    let stop = loop {
        if stages.len() >= config.max_stages {
            break StopReason::MaxStages;
        }
        let node = remaining.len() as u64;
        if node < 2 * config.min_carve_count {
            break StopReason::TooFewRows;
        }
        let node_pos = remaining.iter().filter(|&&r| labels[r] == 1).count() as u64;
        let omega = omega_from_counts(node_pos, node);
        if omega >= 1.0 {
            break StopReason::Pure;
        }
        if omega <= 0.5 + BALANCE_EPSILON {
            break StopReason::Balanced;
        }
        let solution = solve_alpha(omega, &config.carving)?;
        let candidates = tabulate_candidates(dataset, &remaining, config.max_thresholds)?;
        let feasible = feasible_splits(&candidates, prev, config);
        let scores = feasible
            .iter()
            .map(|f| acdc_divergence(&f.stats, solution.alpha).map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?;
        let Some((best, criterion)) = argmax_first(scores) else {
            break StopReason::NoFeasibleSplit;
        };
        let chosen = &feasible[best];

        let bound = chosen.predicate.bind(dataset)?;
        let (carved_rows, kept): (Vec<usize>, Vec<usize>) = remaining
            .iter()
            .partition(|&&r| bound.eval(dataset, r) == chosen.carved_when);
        let (carved_positive, carved_count) = chosen.carved();
        debug_assert_eq!(carved_rows.len() as u64, carved_count);

        stages.push(ChainStage {
            stage_index: stages.len() + 1,
            predicate: chosen.predicate.clone(),
            carved_when: chosen.carved_when,
            carved_count,
            carved_positive,
            score: smoothed_score(carved_positive, carved_count),
            alpha_used: solution.alpha,
            alpha_kind: solution.kind,
            omega_y: omega,
            criterion,
        });
        prev = Some(PreviousCarve {
            positives: carved_positive,
            count: carved_count,
        });
        remaining = kept;
    };

    let final_count = remaining.len() as u64;
    let final_positive = remaining.iter().filter(|&&r| labels[r] == 1).count() as u64;
    let chain = DecisionChain {
        stages,
        final_count,
        final_positive,
        final_score: smoothed_score(final_positive, final_count),
        nu: config.nu(),
        training_meta: TrainingMeta {
            rows: n,
            positives,
            label: dataset.label_info().cloned(),
            features: dataset.feature_specs(),
            config: config.clone(),
        },
    };
    Ok((chain, stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, FeatureColumn, Value};

    fn separable() -> Dataset {
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 4 == 0)).collect();
        let x = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| Some(f64::from(y) * 10.0 + i as f64 * 0.01))
            .collect();
        Dataset::new(vec![FeatureColumn::numeric("x", x).unwrap()], labels).unwrap()
    }

    #[test]
    fn perfectly_separable_single_stage() {
        let ds = separable();
        let (chain, stop) = train_chain_traced(&ds, &ChainConfig::new(1.0)).unwrap();
        assert_eq!(chain.stages.len(), 1);
        assert_eq!(stop, StopReason::Pure);
        let s = &chain.stages[0];
        assert_eq!((s.carved_positive, s.carved_count), (0, 30));
        assert_eq!(s.score, 1.0 / 32.0);
        assert_eq!((chain.final_positive, chain.final_count), (10, 10));
        assert_eq!(chain.final_score, 11.0 / 12.0);
        chain.validate().unwrap();
    }

    #[test]
    fn single_class_rejected() {
        let x = FeatureColumn::numeric("x", (0..10).map(|i| Some(i as f64)).collect()).unwrap();
        let ds = Dataset::new(vec![x], vec![0; 10]).unwrap();
        assert!(matches!(
            train_chain(&ds, &ChainConfig::new(1.0)),
            Err(AcdcError::SingleClass)
        ));
    }

    #[test]
    fn feasibility_rules() {
        let cfg = ChainConfig::new(1.0);
        let cands = vec![
            // pure-negative carve of 20 rows: feasible
            (
                SplitPredicate::less_eq("a", 0.0),
                SplitStats::new(0, 20, 10, 70),
            ),
            // lower side carries 5/10 positives vs 5/90: lower side is the
            // false side, which is fine
            (
                SplitPredicate::less_eq("b", 0.0),
                SplitStats::new(5, 5, 5, 85),
            ),
            // carved side too small (3 < 5)
            (
                SplitPredicate::less_eq("c", 0.0),
                SplitStats::new(0, 3, 10, 87),
            ),
        ];
        let f = feasible_splits(&cands, None, &cfg);
        let idx: Vec<usize> = f.iter().map(|s| s.index).collect();
        assert_eq!(idx, vec![0, 1]);
        assert!(f[0].carved_when);
        assert!(!f[1].carved_when);

        // previous carve at ratio 0.1 rejects a pure carve now
        let prev = Some(PreviousCarve {
            positives: 2,
            count: 20,
        });
        let f = feasible_splits(&cands, prev, &cfg);
        assert!(f.iter().all(|s| s.index != 0));
    }

    #[test]
    fn scoring_first_match_and_fall_through() {
        let ds = separable();
        let chain = train_chain(&ds, &ChainConfig::new(1.0)).unwrap();
        let mut rec = Record::new();
        rec.insert("x".into(), Value::Number(0.0));
        let s = chain.score(&rec);
        assert_eq!(s.terminal, Terminal::Stage(1));
        assert_eq!(s.score, chain.stages[0].score);
        rec.insert("x".into(), Value::Number(100.0));
        let s = chain.score(&rec);
        assert_eq!(s.terminal, Terminal::Final);
        assert_eq!(s.score, chain.final_score);
        assert!(s.rule_trace.starts_with("NOT(") || s.rule_trace.contains("x"));
        // missing feature follows the missing routing
        let empty = Record::new();
        let s = chain.score(&empty);
        let expected = if chain.stages[0].carved_when {
            Terminal::Final
        } else {
            Terminal::Stage(1)
        };
        assert_eq!(s.terminal, expected);
    }

    #[test]
    fn rule_texts() {
        let mut chain = train_chain(&separable(), &ChainConfig::new(1.0)).unwrap();
        let mut extra = chain.stages[0].clone();
        extra.stage_index = 2;
        extra.predicate = SplitPredicate::equals("c", "a");
        extra.carved_when = false;
        chain.stages.push(extra);
        let p1 = chain.stages[0].predicate.to_string();
        assert_eq!(chain.terminal_rule(Terminal::Stage(1)), p1);
        assert_eq!(
            chain.terminal_rule(Terminal::Stage(2)),
            format!("NOT({p1}) AND NOT(c = a)")
        );
        assert_eq!(
            chain.terminal_rule(Terminal::Final),
            format!("NOT({p1}) AND c = a")
        );
    }

    #[test]
    fn synthetic_chain_invariants() {
        let ds = generate_synthetic(2000, 4, 4, 0.05, 3).unwrap();
        let chain = train_chain(&ds, &ChainConfig::new(1.0)).unwrap();
        assert!(!chain.stages.is_empty() && chain.stages.len() <= 4);
        chain.validate().unwrap();
        let scores: Vec<f64> = chain.terminal_groups().iter().map(|g| g.score).collect();
        assert!(scores.windows(2).all(|w| w[0] < w[1]), "{scores:?}");
    }

    #[test]
    fn config_validation() {
        let mut c = ChainConfig::new(1.0);
        c.max_stages = 0;
        assert!(c.validate().is_err());
        let c = ChainConfig::new(-1.0);
        assert!(c.validate().is_err());
    }
}
