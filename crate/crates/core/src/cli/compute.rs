use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{csv_table, write_json, Grid, JobConfig, OutputFormat};
use crate::divdiff::factorial;
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::perturbation::Perturbation;
use crate::ssf::{ssf_sequence, SsfDensity};

/// Contents of `densities.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub order: usize,
    pub densities: Vec<SsfDensity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassRecord {
    pub order: usize,
    pub mass: f64,
    /// `trace(V^k)/k!`.
    pub target: f64,
    pub abs_error: f64,
}

/// Paths written by [`cmd_compute`].
#[derive(Debug, Clone)]
pub struct ComputeOutput {
    pub densities: PathBuf,
    pub samples: Option<PathBuf>,
    pub masses: PathBuf,
}

pub fn mass_records(v: &HermitianOperator, densities: &[SsfDensity]) -> Vec<MassRecord> {
    densities
        .iter()
        .map(|s| {
            let target = v.trace_power(s.order as u32) / factorial(s.order);
            MassRecord { order: s.order, mass: s.mass, target, abs_error: (s.mass - target).abs() }
        })
        .collect()
}

/// Rows `t, η₁(t), …, η_p(t)`.
pub fn sample_rows(densities: &[SsfDensity], grid: &Grid) -> Vec<Vec<f64>> {
    grid.points()
        .into_iter()
        .map(|t| std::iter::once(t).chain(densities.iter().map(|s| s.density.evaluate(t))).collect())
        .collect()
}

pub fn sample_header(densities: &[SsfDensity]) -> Vec<String> {
    std::iter::once("t".to_string()).chain(densities.iter().map(|s| format!("eta_{}", s.order))).collect()
}

pub fn read_densities(path: &Path) -> Result<DensityFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Writes `densities.json`, `samples.{csv,json}` when a grid is given, and
/// `masses.{csv,json}` into `config.out`.
pub fn cmd_compute(config: &JobConfig) -> Result<ComputeOutput> {
    config.validate()?;
    let (h0, v) = config.load_pair()?;
    let pert = Perturbation::new(h0, v)?;
    let densities = ssf_sequence(&pert, config.order)?;
    std::fs::create_dir_all(&config.out)?;

    let densities_path = config.out.join("densities.json");
    let file = DensityFile { order: config.order, densities };
    write_json(&densities_path, &file)?;

    let ext = match config.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let samples = match &config.grid {
        Some(grid) => {
            let path = config.out.join(format!("samples.{ext}"));
            let header = sample_header(&file.densities);
            let rows = sample_rows(&file.densities, grid);
            match config.format {
                OutputFormat::Csv => std::fs::write(&path, csv_table(&header, &rows))?,
                OutputFormat::Json => write_json(&path, &serde_json::json!({ "columns": header, "rows": rows }))?,
            }
            Some(path)
        }
        None => None,
    };

    let masses = mass_records(pert.v(), &file.densities);
    let masses_path = config.out.join(format!("masses.{ext}"));
    match config.format {
        OutputFormat::Csv => {
            let header = ["order", "mass", "target", "abs_error"].map(String::from);
            let rows: Vec<Vec<f64>> = masses.iter().map(|m| vec![m.order as f64, m.mass, m.target, m.abs_error]).collect();
            std::fs::write(&masses_path, csv_table(&header, &rows))?;
        }
        OutputFormat::Json => write_json(&masses_path, &masses)?,
    }
    Ok(ComputeOutput { densities: densities_path, samples, masses: masses_path })
}
