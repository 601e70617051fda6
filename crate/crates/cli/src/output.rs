use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use acdc_core::tree::AlphaTree;
use acdc_core::DecisionChain;
use anyhow::{Context, Result};

/// Fails early when the directory an output goes into does not exist.
pub fn check_output(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        if !dir.is_dir() {
            return Err(io::Error::new(
                io::ErrorKind::NotFound,
                "directory does not exist",
            ))
            .with_context(|| format!("cannot write {}", path.display()));
        }
    }
    Ok(())
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest.json");
    PathBuf::from(p)
}

pub fn write_manifest(out: &Path, manifest: &serde_json::Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    write_atomic(&manifest_path(out), &bytes)
}

pub fn stage_table(chain: &DecisionChain) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5}  {:>9}  {:<12}  {:<32}  {:>8}  {:>9}  {:>8}",
        "stage", "alpha", "kind", "predicate", "carved", "positive", "score"
    );
    for st in &chain.stages {
        let _ = writeln!(
            s,
            "{:>5}  {:>9.4}  {:<12}  {:<32}  {:>8}  {:>9}  {:>8.5}",
            st.stage_index,
            st.alpha_used,
            st.alpha_kind.to_string(),
            st.condition().to_string(),
            st.carved_count,
            st.carved_positive,
            st.score
        );
    }
    let _ = writeln!(
        s,
        "{:>5}  {:>9}  {:<12}  {:<32}  {:>8}  {:>9}  {:>8.5}",
        "final", "", "", "", chain.final_count, chain.final_positive, chain.final_score
    );
    s
}

pub fn omega_trajectory(chain: &DecisionChain) -> String {
    let parts: Vec<String> = chain
        .stages
        .iter()
        .map(|s| format!("{:.4}", s.omega_y))
        .collect();
    format!(
        "omega_y: {}",
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join(" -> ")
        }
    )
}

pub fn leaf_table(tree: &AlphaTree) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4}  {:>8}  {:>9}  {:>8}  rule",
        "leaf", "count", "positive", "score"
    );
    for l in tree.leaves() {
        let _ = writeln!(
            s,
            "{:>4}  {:>8}  {:>9}  {:>8.5}  {}",
            l.index, l.count, l.positives, l.score, l.rule
        );
    }
    s
}

fn pct(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

/// One line per stage, lowest risk first, each indented one step further;
/// the final node comes last.
pub fn chain_pyramid(chain: &DecisionChain) -> String {
    let total = chain.training_meta.rows;
    let mut s = String::new();
    for (i, st) in chain.stages.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}{}  carved {:.1}%  risk {:.4}",
            "  ".repeat(i),
            st.condition(),
            pct(st.carved_count, total),
            st.score
        );
    }
    let _ = writeln!(
        s,
        "{}otherwise  remaining {:.1}%  risk {:.4}",
        "  ".repeat(chain.stages.len()),
        pct(chain.final_count, total),
        chain.final_score
    );
    s
}

/// Tree leaves in the same layout, sorted by risk.
pub fn tree_pyramid(tree: &AlphaTree) -> String {
    let total = tree.training_meta.rows;
    let mut leaves = tree.leaves();
    leaves.sort_by(|a, b| a.score.total_cmp(&b.score));
    let mut s = String::new();
    for (i, l) in leaves.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}{}  carved {:.1}%  risk {:.4}",
            "  ".repeat(i),
            l.rule,
            pct(l.count, total),
            l.score
        );
    }
    s
}
