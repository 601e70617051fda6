//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use acdc_core::model::{deserialize, serialize};
use acdc_core::*;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every internal node of a tree with the rows that reach it.
fn tree_nodes<'a>(
    node: &'a TreeNode,
    ds: &Dataset,
    rows: Vec<usize>,
    out: &mut Vec<(&'a SplitPredicate, Vec<usize>)>,
) {
    if let TreeNode::Internal {
        predicate,
        left,
        right,
        ..
    } = node
    {
        let bound = predicate.bind(ds).unwrap();
        let (t, f): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| bound.eval(ds, r));
        out.push((predicate, rows));
        tree_nodes(left, ds, f, out);
        tree_nodes(right, ds, t, out);
    }
}

/// Rows in play before each stage, and the candidate set each stage chose
/// from (the feasible splits).
fn chain_stage_sets(chain: &DecisionChain, ds: &Dataset) -> Vec<Vec<(SplitPredicate, SplitStats)>> {
    let cfg = &chain.training_meta.config;
    let mut remaining = ds.all_rows();
    let mut prev = None;
    let mut out = Vec::new();
    for s in &chain.stages {
        let cands = tabulate_candidates(ds, &remaining, cfg.max_thresholds).unwrap();
        let feasible = feasible_splits(&cands, prev, cfg);
        out.push(
            feasible
                .into_iter()
                .map(|f| (f.predicate, f.stats))
                .collect(),
        );
        let bound = s.predicate.bind(ds).unwrap();
        remaining.retain(|&r| bound.eval(ds, r) != s.carved_when);
        prev = Some(PreviousCarve {
            positives: s.carved_positive,
            count: s.carved_count,
        });
    }
    out
}

/// Checks, for each random dataset, that the fixed-α tree's splits and the
/// α-selected split over every chain stage's candidate set agree with an
/// oracle argbest on `oracle` values.
fn equivalence_suite(
    alpha: f64,
    oracle: impl Fn(&SplitStats) -> f64,
    minimize: bool,
    mut extra: impl FnMut(&SplitStats) -> std::result::Result<(), String>,
) -> std::result::Result<(usize, usize), String> {
    let pick = |stats: &[&SplitStats]| {
        let vals: Vec<f64> = stats.iter().map(|s| oracle(s)).collect();
        if minimize {
            argmin_first(&vals, 1e-12)
        } else {
            argmax_first(&vals, 1e-12)
        }
    };
    let (mut nodes, mut stages) = (0, 0);
    for seed in 0..200 {
        let ds = random_dataset(seed, 200, 10);
        let tree =
            train_tree(&ds, &TreeConfig::new(alpha, 4)).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut internal = Vec::new();
        tree_nodes(&tree.root, &ds, ds.all_rows(), &mut internal);
        for (pred, rows) in internal {
            let cands =
                tabulate_candidates(&ds, &rows, tree.training_meta.config.max_thresholds).unwrap();
            let live: Vec<&SplitStats> = cands
                .iter()
                .map(|(_, s)| s)
                .filter(|s| !s.is_degenerate())
                .collect();
            let preds: Vec<&SplitPredicate> = cands
                .iter()
                .filter(|(_, s)| !s.is_degenerate())
                .map(|(p, _)| p)
                .collect();
            for s in &live {
                extra(s)?;
            }
            let want = preds[pick(&live).unwrap()];
            ensure(want == pred, || {
                format!("seed {seed}: tree split {pred}, oracle {want}")
            })?;
            nodes += 1;
        }

        let Ok(chain) = train_chain(&ds, &ChainConfig::new(1.0)) else {
            continue;
        };
        for (j, set) in chain_stage_sets(&chain, &ds).into_iter().enumerate() {
            let stats: Vec<&SplitStats> = set.iter().map(|(_, s)| s).collect();
            let want = &set[pick(&stats).unwrap()].0;
            let got = if alpha == 1.0 {
                let vals: Vec<f64> = stats
                    .iter()
                    .map(|s| criterion_limit_alpha1(s).unwrap())
                    .collect();
                set[acdc_core::criterion::argmax_first(vals).unwrap().0]
                    .0
                    .clone()
            } else {
                select_split(&set, alpha).unwrap().0
            };
            ensure(&got == want, || {
                format!("seed {seed} stage {}: {got} vs oracle {want}", j + 1)
            })?;
            stages += 1;
        }
    }
    Ok((nodes, stages))
}

fn c1_gini() -> Outcome {
    let start = Instant::now();
    let gini = |s: &SplitStats| gini_oracle(s.n11, s.n10, s.n01, s.n00);
    let (nodes, stages) = equivalence_suite(2.0, gini, true, |_| Ok(()))?;
    let took = start.elapsed();
    ensure(nodes > 0 && stages > 0, || {
        "suite exercised no nodes".into()
    })?;
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!(
        "200 datasets, {nodes} tree nodes, {stages} chain stages, {:.2}s",
        took.as_secs_f64()
    ))
}

fn c2_info_gain() -> Outcome {
    let gain = |s: &SplitStats| info_gain_oracle(s.n11, s.n10, s.n01, s.n00);
    let mut worst = 0.0_f64;
    let (nodes, stages) = equivalence_suite(1.0, gain, false, |s| {
        let limit = criterion_limit_alpha1(s).unwrap();
        let near = acdc_divergence(s, 1.0 + 1e-6).unwrap().value;
        worst = worst.max((limit - near).abs());
        ensure(worst < 1e-4, || format!("{s:?}: limit {limit} vs {near}"))
    })?;
    Ok(format!(
        "{nodes} tree nodes, {stages} chain stages; max |limit - D(1+1e-6)| = {worst:.2e}"
    ))
}

fn c3_solver() -> Outcome {
    let g = |omega: f64, a: f64| a * (omega.powf(a - 1.0) - (1.0 - omega).powf(a - 1.0));
    let nus = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let (mut roots, mut worst) = (0, 0.0_f64);
    for i in 1..50 {
        let omega = 0.5 + 0.01 * i as f64;
        let mut prev_alpha = f64::INFINITY;
        for nu in nus {
            let cfg = CarvingConfig::new(nu);
            let s = solve_alpha(omega, &cfg).map_err(|e| format!("ω={omega} ν={nu}: {e}"))?;
            if s.kind != SolutionKind::ExactRoot {
                continue;
            }
            roots += 1;
            let r = (g(omega, s.alpha) - nu).abs();
            worst = worst.max(r);
            ensure(r <= 1e-12, || format!("ω={omega} ν={nu}: residual {r:e}"))?;
            // largest root: the slope stays below ν all the way up to α_max
            for k in 1..=64 {
                let a = s.alpha + (cfg.alpha_max - s.alpha) * k as f64 / 64.0;
                ensure(g(omega, a) < nu, || {
                    format!("ω={omega} ν={nu}: larger root near {a}")
                })?;
            }
            // ν-direction: a larger velocity gives a smaller α
            ensure(s.alpha < prev_alpha, || {
                format!("ω={omega}: α not decreasing in ν at {nu}")
            })?;
            prev_alpha = s.alpha;
        }
    }
    let a75 = solve_alpha(0.75, &CarvingConfig::new(1.0)).unwrap().alpha;
    let a90 = solve_alpha(0.9, &CarvingConfig::new(1.0)).unwrap().alpha;
    ensure((a75 - 8.41).abs() <= 0.05, || {
        format!("solve_alpha(0.75, 1) = {a75}")
    })?;
    ensure((a90 - 34.7).abs() <= 0.1, || {
        format!("solve_alpha(0.9, 1) = {a90}")
    })?;
    Ok(format!(
        "{roots} exact roots, max residual {worst:.1e}; α(0.75)={a75:.4}, α(0.9)={a90:.4}"
    ))
}

fn synthetic_runs() -> Vec<(Dataset, DecisionChain)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..50u64)
        .map(|seed| {
            let rows = rng.random_range(1500..5000);
            let rate = rng.random_range(0.02..0.2);
            let nu = [0.5, 1.0, 2.0][seed as usize % 3];
            let ds = generate_synthetic(
                rows,
                rng.random_range(2..8),
                rng.random_range(0..8),
                rate,
                seed,
            )
            .unwrap();
            let chain = train_chain(&ds, &ChainConfig::new(nu)).unwrap();
            (ds, chain)
        })
        .collect()
}

fn c4_monotonic(runs: &[(Dataset, DecisionChain)]) -> Outcome {
    for (i, (_, c)) in runs.iter().enumerate() {
        let ratios: Vec<f64> = c
            .stages
            .iter()
            .map(|s| s.carved_positive as f64 / s.carved_count as f64)
            .collect();
        ensure(ratios.windows(2).all(|w| w[0] <= w[1]), || {
            format!("run {i}: carved ratios {ratios:?}")
        })?;
        let last = ratios.last().copied().unwrap_or(0.0);
        let fin = c.final_positive as f64 / c.final_count as f64;
        ensure(fin >= last, || {
            format!("run {i}: final ratio {fin} < {last}")
        })?;
    }
    let stages: usize = runs.iter().map(|(_, c)| c.stages.len()).sum();
    Ok(format!("50/50 chains monotone ({stages} stages)"))
}

fn c5_alpha_decay(runs: &[(Dataset, DecisionChain)]) -> Outcome {
    let mut qualifying = 0;
    for (i, (_, c)) in runs.iter().enumerate() {
        let (mut n, mut p) = (c.training_meta.rows, c.training_meta.positives);
        let mut stays_minority = true;
        for s in &c.stages {
            stays_minority &= p as f64 / n as f64 <= 0.5;
            n -= s.carved_count;
            p -= s.carved_positive;
        }
        if !stays_minority || c.stages.len() < 2 {
            continue;
        }
        qualifying += 1;
        let alphas: Vec<f64> = c.stages.iter().map(|s| s.alpha_used).collect();
        ensure(alphas.windows(2).all(|w| w[1] <= w[0]), || {
            format!("run {i}: α {alphas:?}")
        })?;
    }
    ensure(qualifying > 0, || "no qualifying runs".into())?;
    Ok(format!(
        "{qualifying}/{qualifying} qualifying runs have nonincreasing α"
    ))
}

fn c6_comparability() -> Outcome {
    let ds = generate_synthetic(10000, 10, 10, 0.05, 42).unwrap();
    let (train, test) = ds.split_holdout(0.3, 42).unwrap();
    let start = Instant::now();
    let chain = train_chain(&train, &ChainConfig::new(1.0)).unwrap();
    let chain_auc = annotate_chain_curve(&chain, &test).unwrap().auroc.unwrap();
    let tree = train_tree(&train, &TreeConfig::new(2.0, 3)).unwrap();
    let tree_scores: Vec<f64> = tree
        .score_dataset(&test)
        .unwrap()
        .iter()
        .map(|s| s.score)
        .collect();
    let tree_auc = roc_curve(&tree_scores, test.labels().unwrap())
        .unwrap()
        .auroc
        .unwrap();
    let took = start.elapsed();
    ensure(chain.stages.len() <= 4, || "more than 4 stages".into())?;
    ensure(chain_auc >= 0.9 * tree_auc, || {
        format!("ACDC {chain_auc:.4} vs tree {tree_auc:.4}")
    })?;
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!(
        "holdout AUROC ACDC {chain_auc:.4} vs α=2 depth-3 tree {tree_auc:.4} (ratio {:.3}), {:.2}s",
        chain_auc / tree_auc,
        took.as_secs_f64()
    ))
}

/// `f <= t`, `f = l`, or either wrapped in `NOT(...)`, over known features.
fn well_formed_atom(atom: &str, ds: &Dataset) -> bool {
    let inner = atom
        .strip_prefix("NOT(")
        .and_then(|a| a.strip_suffix(')'))
        .unwrap_or(atom);
    if let Some((f, t)) = inner.split_once(" <= ") {
        ds.column(f)
            .is_some_and(|c| c.kind() == FeatureKind::Numeric)
            && t.parse::<f64>().is_ok_and(f64::is_finite)
    } else if let Some((f, l)) = inner.split_once(" = ") {
        ds.column(f)
            .is_some_and(|c| c.kind() == FeatureKind::Categorical)
            && !l.is_empty()
    } else {
        false
    }
}

fn c7_annotated_curves() -> Outcome {
    let mut total_points = 0;
    for seed in 0..10 {
        let ds = generate_synthetic(3000, 5, 5, 0.05, 100 + seed).unwrap();
        let mut cfg = ChainConfig::new(1.0);
        cfg.max_stages = 1 + seed as usize % 4;
        let chain = train_chain(&ds, &cfg).unwrap();
        let k = chain.stages.len();
        let roc = annotate_chain_curve(&chain, &ds).unwrap();
        let interior = &roc.points[1..roc.points.len() - 1];
        ensure(interior.len() == k + 1, || {
            format!("seed {seed}: {} interior points for k={k}", interior.len())
        })?;
        for p in interior {
            let rule = p
                .rule
                .as_deref()
                .ok_or_else(|| format!("seed {seed}: point without rule"))?;
            let atoms: Vec<&str> = rule.split(" AND ").collect();
            ensure(atoms.iter().all(|a| well_formed_atom(a, &ds)), || {
                format!("seed {seed}: bad rule {rule}")
            })?;
            ensure(!atoms.is_empty() && atoms.len() <= k, || {
                format!("seed {seed}: {rule}")
            })?;
        }
        let scores: Vec<f64> = chain
            .score_dataset(&ds)
            .unwrap()
            .iter()
            .map(|s| s.score)
            .collect();
        let conc = concordance_auc(&scores, ds.labels().unwrap()).unwrap();
        let trap = roc.auroc.unwrap();
        ensure((trap - conc).abs() <= 1e-10, || {
            format!("seed {seed}: {trap} vs {conc}")
        })?;
        total_points += interior.len();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..200 {
        let n = rng.random_range(2..400);
        let levels = rng.random_range(1..30);
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 / levels as f64)
            .collect();
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.3))).collect();
        labels[0] = 1;
        labels[1] = 0;
        let trap = roc_curve(&scores, &labels).unwrap().auroc.unwrap();
        let conc = concordance_auc(&scores, &labels).unwrap();
        ensure((trap - conc).abs() <= 1e-10, || {
            format!("trial {trial}: {trap} vs {conc}")
        })?;
    }
    Ok(format!(
        "10 chains, {total_points} annotated points, all well-formed; trapezoid = concordance on 210 curves"
    ))
}

fn c8_determinism() -> Outcome {
    let ds = generate_synthetic(5000, 6, 6, 0.05, 9).unwrap();
    ensure(
        ds == generate_synthetic(5000, 6, 6, 0.05, 9).unwrap(),
        || "generator not reproducible".into(),
    )?;
    let chain_bytes = serialize(&train_chain(&ds, &ChainConfig::new(1.0)).unwrap().into()).unwrap();
    let again = serialize(&train_chain(&ds, &ChainConfig::new(1.0)).unwrap().into()).unwrap();
    ensure(chain_bytes == again, || {
        "chain bytes differ between runs".into()
    })?;
    let tree_bytes = serialize(&train_tree(&ds, &TreeConfig::new(2.0, 3)).unwrap().into()).unwrap();
    let again = serialize(&train_tree(&ds, &TreeConfig::new(2.0, 3)).unwrap().into()).unwrap();
    ensure(tree_bytes == again, || {
        "tree bytes differ between runs".into()
    })?;

    let chain = train_chain(&ds, &ChainConfig::new(1.0)).unwrap();
    let Model::Chain(loaded) = deserialize(&chain_bytes).unwrap() else {
        return Err("chain came back as a tree".into());
    };
    let direct = chain.score_dataset(&ds).unwrap();
    let via = loaded.score_dataset(&ds).unwrap();
    ensure(
        direct
            .iter()
            .zip(&via)
            .all(|(a, b)| a.score.to_bits() == b.score.to_bits() && a == b),
        || "chain scores differ after round trip".into(),
    )?;
    let tree = train_tree(&ds, &TreeConfig::new(2.0, 3)).unwrap();
    let Model::Tree(loaded) = deserialize(&tree_bytes).unwrap() else {
        return Err("tree came back as a chain".into());
    };
    let direct = tree.score_dataset(&ds).unwrap();
    let via = loaded.score_dataset(&ds).unwrap();
    ensure(
        direct
            .iter()
            .zip(&via)
            .all(|(a, b)| a.score.to_bits() == b.score.to_bits()),
        || "tree scores differ after round trip".into(),
    )?;
    Ok(format!(
        "byte-identical chain ({} B) and tree ({} B); bit-identical scores on {} rows",
        chain_bytes.len(),
        tree_bytes.len(),
        ds.row_count()
    ))
}

fn main() -> ExitCode {
    let runs = synthetic_runs();
    let results: Vec<(&str, Outcome)> = vec![
        ("C1 Gini equivalence at alpha = 2", c1_gini()),
        (
            "C2 information-gain equivalence at alpha -> 1",
            c2_info_gain(),
        ),
        ("C3 carving solver", c3_solver()),
        ("C4 monotonic risk condition", c4_monotonic(&runs)),
        ("C5 alpha decay", c5_alpha_decay(&runs)),
        (
            "C6 comparability with the alpha-tree baseline",
            c6_comparability(),
        ),
        ("C7 rule-annotated curves", c7_annotated_curves()),
        ("C8 determinism and round trip", c8_determinism()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
