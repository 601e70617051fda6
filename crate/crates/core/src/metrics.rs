//! ROC curves, AUROC, cumulative lift charts and rule annotation of curve
//! points, plus CSV and SVG export.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain::DecisionChain;
use crate::dataset::Dataset;
use crate::error::{AcdcError, Result};
use crate::tree::AlphaTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Roc,
    Lift,
}

impl std::fmt::Display for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurveKind::Roc => "roc",
            CurveKind::Lift => "lift",
        })
    }
}

/// A curve point. For ROC `x` is the false positive rate and `y` the true
/// positive rate; for lift `x` is the population fraction and `y` the
/// cumulative lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedPoint {
    pub x: f64,
    pub y: f64,
    /// Score cutoff: rows scoring at or above it are flagged.
    pub threshold: f64,
    pub rule: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationCurve {
    pub kind: CurveKind,
    pub points: Vec<AnnotatedPoint>,
    pub auroc: Option<f64>,
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<(u64, u64)> {
    if scores.len() != labels.len() {
        return Err(AcdcError::InvalidArgument(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(AcdcError::InvalidArgument(format!("non-finite score {s}")));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(AcdcError::SingleClass);
    }
    Ok((pos, neg))
}

/// Trapezoidal area under a polyline.
pub fn trapezoid_area(points: &[AnnotatedPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].x - w[0].x) * (w[0].y + w[1].y) / 2.0)
        .sum()
}

/// ROC curve with one point per distinct score, plus the (0,0) and (1,1)
/// endpoints. AUROC is the trapezoidal area.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<EvaluationCurve> {
    roc_curve_annotated(scores, labels, &[])
}

/// As [`roc_curve`]; interior points whose threshold equals an annotation's
/// score carry that annotation's rule text.
pub fn roc_curve_annotated(
    scores: &[f64],
    labels: &[u8],
    annotations: &[(f64, String)],
) -> Result<EvaluationCurve> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![AnnotatedPoint {
        x: 0.0,
        y: 0.0,
        threshold: f64::INFINITY,
        rule: None,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let rule = annotations
            .iter()
            .find(|(s, _)| *s == t)
            .map(|(_, r)| r.clone());
        points.push(AnnotatedPoint {
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
            threshold: t,
            rule,
        });
    }
    points.push(AnnotatedPoint {
        x: 1.0,
        y: 1.0,
        threshold: f64::NEG_INFINITY,
        rule: None,
    });
    let auroc = trapezoid_area(&points);
    Ok(EvaluationCurve {
        kind: CurveKind::Roc,
        points,
        auroc: Some(auroc),
    })
}

/// AUROC as the Mann-Whitney statistic with mid-ranks for ties, i.e. the
/// probability that a random positive outscores a random negative with
/// ties counted as one half.
pub fn concordance_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share the mid-rank
        let mid = (i + 1 + j) as f64 / 2.0;
        let tied_pos = order[i..j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum += mid * tied_pos as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Cumulative lift at `n_bins` equally spaced population fractions. Rows
/// are ranked by descending score, ties kept in input order.
pub fn lift_chart(scores: &[f64], labels: &[u8], n_bins: usize) -> Result<EvaluationCurve> {
    lift_chart_with_rules(scores, labels, n_bins, None)
}

/// As [`lift_chart`], annotating each point with the rule of the last row
/// inside its cut.
pub fn lift_chart_with_rules(
    scores: &[f64],
    labels: &[u8],
    n_bins: usize,
    row_rules: Option<&[String]>,
) -> Result<EvaluationCurve> {
    let (pos, _) = check_inputs(scores, labels)?;
    if n_bins == 0 {
        return Err(AcdcError::InvalidArgument(
            "n_bins must be at least 1".into(),
        ));
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps input order among ties
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut cum_pos = vec![0u64; n + 1];
    for (k, &r) in order.iter().enumerate() {
        cum_pos[k + 1] = cum_pos[k] + u64::from(labels[r] == 1);
    }
    let mut points = Vec::with_capacity(n_bins);
    let mut last_cut = 0;
    for j in 1..=n_bins {
        let cut = (j * n + n_bins / 2) / n_bins;
        if cut == 0 || cut == last_cut {
            continue;
        }
        last_cut = cut;
        let row = order[cut - 1];
        // (cum_pos / cut) / (pos / n), kept as one division
        let lift = (cum_pos[cut] as f64 * n as f64) / (cut as f64 * pos as f64);
        points.push(AnnotatedPoint {
            x: cut as f64 / n as f64,
            y: lift,
            threshold: scores[row],
            rule: row_rules.map(|r| r[row].clone()),
        });
    }
    Ok(EvaluationCurve {
        kind: CurveKind::Lift,
        points,
        auroc: None,
    })
}

/// Groups `(score, rule)` pairs by score; rules sharing a score are joined
/// with `OR`.
fn score_annotations(pairs: impl IntoIterator<Item = (f64, String)>) -> Vec<(f64, String)> {
    let mut out: Vec<(f64, String)> = Vec::new();
    for (s, r) in pairs {
        match out.iter_mut().find(|(t, _)| *t == s) {
            Some((_, existing)) => {
                existing.push_str(" OR ");
                existing.push_str(&r);
            }
            None => out.push((s, r)),
        }
    }
    out
}

/// ROC curve of a chain on a labeled dataset; each interior point carries
/// the conjunctive rule of the terminal group whose score is its
/// threshold.
pub fn annotate_chain_curve(chain: &DecisionChain, dataset: &Dataset) -> Result<EvaluationCurve> {
    let labels = dataset.labels()?;
    let scored = chain.score_dataset(dataset)?;
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let groups = chain.terminal_groups();
    let notes = score_annotations(groups.into_iter().map(|g| (g.score, g.rule)));
    roc_curve_annotated(&scores, labels, &notes)
}

pub fn annotate_chain_lift(
    chain: &DecisionChain,
    dataset: &Dataset,
    n_bins: usize,
) -> Result<EvaluationCurve> {
    let labels = dataset.labels()?;
    let scored = chain.score_dataset(dataset)?;
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let rules: Vec<String> = scored.into_iter().map(|s| s.rule_trace).collect();
    lift_chart_with_rules(&scores, labels, n_bins, Some(&rules))
}

pub fn annotate_tree_curve(tree: &AlphaTree, dataset: &Dataset) -> Result<EvaluationCurve> {
    let labels = dataset.labels()?;
    let scores: Vec<f64> = tree
        .score_dataset(dataset)?
        .iter()
        .map(|s| s.score)
        .collect();
    let notes = score_annotations(tree.leaves().into_iter().map(|l| (l.score, l.rule)));
    roc_curve_annotated(&scores, labels, &notes)
}

pub fn annotate_tree_lift(
    tree: &AlphaTree,
    dataset: &Dataset,
    n_bins: usize,
) -> Result<EvaluationCurve> {
    let labels = dataset.labels()?;
    let scored = tree.score_dataset(dataset)?;
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let rules: Vec<String> = scored.into_iter().map(|s| s.rule).collect();
    lift_chart_with_rules(&scores, labels, n_bins, Some(&rules))
}

/// Writes curves as CSV with columns `kind,x,y,threshold,rule`.
pub fn write_curve_csv<W: Write>(curves: &[&EvaluationCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "x", "y", "threshold", "rule"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.kind.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.threshold.to_string(),
                p.rule.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(|e| AcdcError::io("<curve csv>", e))?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders one curve as a standalone SVG document; annotated points are
/// labelled with their rule text.
pub fn render_svg(curve: &EvaluationCurve, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let (x_max, y_max) = match curve.kind {
        CurveKind::Roc => (1.0, 1.0),
        CurveKind::Lift => (
            1.0,
            curve
                .points
                .iter()
                .map(|p| p.y)
                .fold(1.0_f64, f64::max)
                .ceil(),
        ),
    };
    let px = |x: f64| M + x / x_max * (W - 2.0 * M);
    let py = |y: f64| H - M - y / y_max * (H - 2.0 * M);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        M / 2.0,
        xml_escape(title)
    ));
    s.push_str(&format!(
        "  <rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    let (x_label, y_label) = match curve.kind {
        CurveKind::Roc => ("false positive rate", "true positive rate"),
        CurveKind::Lift => ("population fraction", "cumulative lift"),
    };
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n",
        W / 2.0,
        H - M / 3.0
    ));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{y_label}</text>\n",
        M / 3.0,
        H / 2.0,
        M / 3.0,
        H / 2.0
    ));
    if curve.kind == CurveKind::Roc {
        s.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n",
            px(0.0),
            py(0.0),
            px(1.0),
            py(1.0)
        ));
    }
    let pts: Vec<String> = curve
        .points
        .iter()
        .map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y)))
        .collect();
    s.push_str(&format!(
        "  <polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"{}\"/>\n",
        pts.join(" ")
    ));
    for p in &curve.points {
        if let Some(rule) = &p.rule {
            let rule = xml_escape(rule);
            s.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#c0392b\"><title>{rule}</title></circle>\n",
                px(p.x),
                py(p.y)
            ));
            s.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\">{rule}</text>\n",
                px(p.x) + 6.0,
                py(p.y) + 12.0
            ));
        }
    }
    if let Some(auc) = curve.auroc {
        s.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">AUROC = {auc:.4}</text>\n",
            W - M - 8.0,
            H - M - 8.0
        ));
    }
    s.push_str("</svg>\n");
    s
}
