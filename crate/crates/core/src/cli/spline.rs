use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{csv_table, write_json, Grid};
use crate::divdiff::{spline_to_piecewise, NodeMultiset, PiecewisePolynomial, SplineKind};
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct SplineSummary {
    pub kind: SplineKind,
    pub nodes: Vec<f64>,
    pub degree: usize,
    /// `∫` over the breakpoint span; `1/(n−1)` for a basic spline on `n` nodes.
    pub integral: f64,
    pub piecewise: PiecewisePolynomial,
}

pub fn spline_summary(nodes: &[f64], kind: SplineKind) -> Result<SplineSummary> {
    let set = NodeMultiset::new(nodes)?;
    let piecewise = spline_to_piecewise(&set, kind)?;
    // the cumulative kernel has a left tail of 1, so integrate the pieces only
    let integral = piecewise.with_tails(0.0, 0.0).integral()?;
    Ok(SplineSummary { kind, nodes: set.nodes().to_vec(), degree: kind.degree(set.len()), integral, piecewise })
}

/// CSV of `t, value` samples.
pub fn spline_samples_csv(summary: &SplineSummary, grid: &Grid) -> String {
    let rows: Vec<Vec<f64>> = grid.points().into_iter().map(|t| vec![t, summary.piecewise.evaluate(t)]).collect();
    csv_table(&["t".to_string(), "value".to_string()], &rows)
}

/// CSV of pieces: `start, end, c0, …, c_d` in the local variable `t − start`.
pub fn spline_pieces_csv(summary: &SplineSummary) -> String {
    let pw = &summary.piecewise;
    let width = summary.degree + 1;
    let mut header = vec!["start".to_string(), "end".to_string()];
    header.extend((0..width).map(|i| format!("c{i}")));
    let rows: Vec<Vec<f64>> = pw
        .pieces()
        .iter()
        .zip(pw.breakpoints().windows(2))
        .map(|(p, w)| {
            let mut row = vec![w[0], w[1]];
            row.extend((0..width).map(|i| p.get(i).copied().unwrap_or(0.0)));
            row
        })
        .collect();
    csv_table(&header, &rows)
}

/// Writes `spline.json`, `spline_pieces.csv` and, with a grid,
/// `spline_samples.csv` into `out`.
pub fn cmd_spline(nodes: &[f64], kind: SplineKind, grid: Option<&Grid>, out: &Path) -> Result<(SplineSummary, Vec<PathBuf>)> {
    let summary = spline_summary(nodes, kind)?;
    std::fs::create_dir_all(out)?;
    let mut written = vec![out.join("spline.json"), out.join("spline_pieces.csv")];
    write_json(&written[0], &summary)?;
    std::fs::write(&written[1], spline_pieces_csv(&summary))?;
    if let Some(grid) = grid {
        let path = out.join("spline_samples.csv");
        std::fs::write(&path, spline_samples_csv(&summary, grid))?;
        written.push(path);
    }
    Ok((summary, written))
}
