use std::collections::HashMap;
use std::fs;
use std::path::Path;

use acdc_core::chain::{ChainStage, TrainingMeta};
use acdc_core::dataset::write_csv;
use acdc_core::metrics::{
    annotate_chain_lift, annotate_tree_curve, annotate_tree_lift, render_svg, write_curve_csv,
};
use acdc_core::model::{deserialize, serialize};
use acdc_core::{
    annotate_chain_curve, generate_synthetic, load_csv_with, train_chain_traced, train_tree,
    ChainConfig, CsvOptions, Dataset, EvaluationCurve, FeatureSpec, Model, TreeConfig,
};
use anyhow::{Context, Result};
use serde_json::json;

use crate::args::{DataArgs, EvalArgs, InspectArgs, ScoreArgs, SynthArgs, TrainArgs, TreeArgs};
use crate::output::{self, check_output, write_atomic, write_manifest};

fn load_labeled(args: &DataArgs) -> Result<Dataset> {
    let opts = CsvOptions {
        label_column: Some(args.label.clone()),
        missing_token: args.missing_token.clone(),
        positive_label: args.positive_label.clone(),
        kinds: HashMap::new(),
    };
    load_csv_with(&args.data, &opts).with_context(|| format!("loading {}", args.data.display()))
}

fn load_model(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).with_context(|| format!("reading model {}", path.display()))?;
    deserialize(&bytes).with_context(|| format!("loading model {}", path.display()))
}

struct ModelInfo<'a> {
    features: &'a [FeatureSpec],
    label: Option<&'a acdc_core::dataset::LabelInfo>,
}

fn model_info(model: &Model) -> ModelInfo<'_> {
    match model {
        Model::Chain(c) => ModelInfo {
            features: &c.training_meta.features,
            label: c.training_meta.label.as_ref(),
        },
        Model::Tree(t) => ModelInfo {
            features: &t.training_meta.features,
            label: t.training_meta.label.as_ref(),
        },
    }
}

/// Reads data for an existing model: the model's feature kinds are forced
/// so that e.g. an all-integer categorical column stays categorical.
fn load_for_model(
    model: &Model,
    data: &Path,
    label: Option<String>,
    positive_label: Option<String>,
    missing_token: &str,
) -> Result<Dataset> {
    let info = model_info(model);
    let kinds = info
        .features
        .iter()
        .map(|f| (f.name.clone(), f.kind))
        .collect();
    let positive_label = positive_label.or_else(|| {
        info.label
            .filter(|l| label.as_deref().is_none_or(|c| c == l.column))
            .and_then(|l| l.positive_value.clone())
    });
    let opts = CsvOptions {
        label_column: label,
        missing_token: missing_token.to_string(),
        positive_label,
        kinds,
    };
    load_csv_with(data, &opts).with_context(|| format!("loading {}", data.display()))
}

fn stage_json(s: &ChainStage) -> serde_json::Value {
    json!({
        "stage": s.stage_index,
        "alpha": s.alpha_used,
        "alpha_kind": s.alpha_kind,
        "omega_y": s.omega_y,
        "condition": s.condition().to_string(),
        "carved_count": s.carved_count,
        "carved_positive": s.carved_positive,
        "score": s.score,
        "criterion": s.criterion,
    })
}

pub fn train(args: &TrainArgs) -> Result<()> {
    check_output(&args.out)?;
    let mut config = ChainConfig::new(args.nu);
    config.max_stages = args.max_stages;
    config.min_carve_fraction = args.min_carve_fraction;
    config.min_carve_count = args.min_carve_count;
    config.max_thresholds = args.max_thresholds;
    config.validate()?;

    let data = load_labeled(&args.data)?;
    let (chain, stop) = train_chain_traced(&data, &config)?;
    let bytes = serialize(&chain.clone().into())?;
    write_atomic(&args.out, &bytes)?;

    print!("{}", output::stage_table(&chain));
    println!("{}", output::omega_trajectory(&chain));
    println!("stopped: {stop:?}");
    println!("model written to {}", args.out.display());

    let TrainingMeta {
        rows, positives, ..
    } = chain.training_meta;
    write_manifest(
        &args.out,
        &json!({
            "command": "train",
            "data": args.data.data.display().to_string(),
            "model": args.out.display().to_string(),
            "config": config,
            "rows": rows,
            "positives": positives,
            "stages": chain.stages.iter().map(stage_json).collect::<Vec<_>>(),
            "omega_y": chain.stages.iter().map(|s| s.omega_y).collect::<Vec<_>>(),
            "final": {"count": chain.final_count, "positive": chain.final_positive, "score": chain.final_score},
            "stop_reason": format!("{stop:?}"),
        }),
    )
}

pub fn tree(args: &TreeArgs) -> Result<()> {
    check_output(&args.out)?;
    let config = TreeConfig {
        alpha: args.alpha,
        max_depth: args.depth,
        min_leaf: args.min_leaf,
        max_thresholds: args.max_thresholds,
    };
    config.validate()?;
    let data = load_labeled(&args.data)?;
    let tree = train_tree(&data, &config)?;
    write_atomic(&args.out, &serialize(&tree.clone().into())?)?;

    print!("{}", output::leaf_table(&tree));
    println!("model written to {}", args.out.display());

    let leaves: Vec<_> = tree
        .leaves()
        .into_iter()
        .map(|l| json!({"leaf": l.index, "count": l.count, "positive": l.positives, "score": l.score, "rule": l.rule}))
        .collect();
    write_manifest(
        &args.out,
        &json!({
            "command": "tree",
            "data": args.data.data.display().to_string(),
            "model": args.out.display().to_string(),
            "config": config,
            "depth": tree.root.depth(),
            "leaves": leaves,
        }),
    )
}

pub fn score(args: &ScoreArgs) -> Result<()> {
    check_output(&args.out)?;
    let model = load_model(&args.model)?;
    let data = load_for_model(&model, &args.data, None, None, &args.missing_token)?;
    let rows: Vec<(f64, String, String)> = match &model {
        Model::Chain(c) => c
            .score_dataset(&data)?
            .into_iter()
            .map(|s| (s.score, s.terminal.to_string(), s.rule_trace))
            .collect(),
        Model::Tree(t) => t
            .score_dataset(&data)?
            .into_iter()
            .map(|s| (s.score, format!("leaf{}", s.leaf), s.rule))
            .collect(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row_id", "score", "terminal", "rule_trace"])?;
    for (i, (score, terminal, rule)) in rows.iter().enumerate() {
        w.write_record([
            i.to_string(),
            score.to_string(),
            terminal.clone(),
            rule.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    write_atomic(&args.out, &bytes)?;

    let mut groups: Vec<(String, usize)> = Vec::new();
    for (_, t, _) in &rows {
        match groups.iter_mut().find(|(g, _)| g == t) {
            Some((_, n)) => *n += 1,
            None => groups.push((t.clone(), 1)),
        }
    }
    println!("scored {} rows into {}", rows.len(), args.out.display());
    write_manifest(
        &args.out,
        &json!({
            "command": "score",
            "model": args.model.display().to_string(),
            "data": args.data.display().to_string(),
            "scores": args.out.display().to_string(),
            "rows": rows.len(),
            "terminal_counts": groups.into_iter().map(|(k, n)| (k, json!(n))).collect::<serde_json::Map<_, _>>(),
        }),
    )
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    for p in [&args.roc, &args.lift, &args.svg].into_iter().flatten() {
        check_output(p)?;
    }
    let model = load_model(&args.model)?;
    let label = args
        .label
        .clone()
        .or_else(|| model_info(&model).label.map(|l| l.column.clone()))
        .unwrap_or_else(|| "label".into());
    let data = load_for_model(
        &model,
        &args.data,
        Some(label),
        args.positive_label.clone(),
        &args.missing_token,
    )?;
    let (roc, lift): (EvaluationCurve, EvaluationCurve) = match &model {
        Model::Chain(c) => (
            annotate_chain_curve(c, &data)?,
            annotate_chain_lift(c, &data, args.bins)?,
        ),
        Model::Tree(t) => (
            annotate_tree_curve(t, &data)?,
            annotate_tree_lift(t, &data, args.bins)?,
        ),
    };
    let auroc = roc.auroc.expect("ROC curves carry their area");
    println!("AUROC: {auroc:.6}");

    let mut written = Vec::new();
    if let Some(p) = &args.roc {
        let mut buf = Vec::new();
        write_curve_csv(&[&roc], &mut buf)?;
        write_atomic(p, &buf)?;
        written.push(p);
    }
    if let Some(p) = &args.lift {
        let mut buf = Vec::new();
        write_curve_csv(&[&lift], &mut buf)?;
        write_atomic(p, &buf)?;
        written.push(p);
    }
    if let Some(p) = &args.svg {
        write_atomic(
            p,
            render_svg(&roc, &format!("ROC (AUROC {auroc:.4})")).as_bytes(),
        )?;
        written.push(p);
    }
    if let Some(first) = written.first() {
        write_manifest(
            first,
            &json!({
                "command": "eval",
                "model": args.model.display().to_string(),
                "data": args.data.display().to_string(),
                "rows": data.row_count(),
                "auroc": auroc,
                "roc_points": roc.points.len(),
                "outputs": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            }),
        )?;
    }
    Ok(())
}

pub fn inspect(args: &InspectArgs) -> Result<()> {
    match load_model(&args.model)? {
        Model::Chain(c) => print!("{}", output::chain_pyramid(&c)),
        Model::Tree(t) => print!("{}", output::tree_pyramid(&t)),
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    check_output(&args.out)?;
    let data = generate_synthetic(
        args.rows,
        args.informative,
        args.noise,
        args.positive_rate,
        args.seed,
    )?;
    let mut buf = Vec::new();
    write_csv(&data, &mut buf, "NA")?;
    write_atomic(&args.out, &buf)?;
    let positives = data.positives()?;
    println!(
        "wrote {} rows ({} positive) with {} features to {}",
        data.row_count(),
        positives,
        data.columns().len(),
        args.out.display()
    );
    write_manifest(
        &args.out,
        &json!({
            "command": "synth",
            "rows": args.rows,
            "informative": args.informative,
            "noise": args.noise,
            "positive_rate": args.positive_rate,
            "seed": args.seed,
            "positives": positives,
            "out": args.out.display().to_string(),
        }),
    )
}
