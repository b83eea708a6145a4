//! Cartesian parameter sweeps with deterministic, declaration-ordered
//! output.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use hblab_core::bounds;
use hblab_core::counting;
use hblab_core::evolution::{self, EvolveOptions};
use hblab_core::io::ScheduleSpec;
use hblab_core::operators::SearchInstance;

use crate::commands::{write_csv, write_json};
use crate::{require_file, RunError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// "count", "evolve", "gapscan", or "bounds".
    pub command: String,
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    /// Scaled times for "evolve" (ignored when `c_values` is given).
    #[serde(default)]
    pub tau_values: Vec<f64>,
    /// Success-window constants: for "evolve", tau is derived per instance
    /// as C(1-E_F)/(|E_F| delta2).
    #[serde(default)]
    pub c_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    /// "full" | "reduced" | "double_step" (evolve only; default reduced).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Gap-scan grid points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn gus_instance(n: usize, m: usize) -> Result<SearchInstance, RunError> {
    let marked: Vec<usize> = (0..m).collect();
    Ok(SearchInstance::gus(n, &marked)?)
}

struct Point {
    index: usize,
    n: usize,
    m: usize,
    tau: Option<f64>,
    c: Option<f64>,
}

pub fn run(config_path: &Path, out: &Path) -> Result<(), RunError> {
    require_file(config_path)?;
    let text = std::fs::read_to_string(config_path)?;
    let config: SweepConfig = serde_json::from_str(&text)?;
    if config.n_values.is_empty() || config.m_values.is_empty() {
        return Err(RunError::Config("empty N or m range".into()));
    }

    // Declaration-ordered Cartesian point list.
    let mut points = Vec::new();
    let mut index = 0;
    for &n in &config.n_values {
        for &m in &config.m_values {
            let taus: Vec<(Option<f64>, Option<f64>)> = if config.command == "evolve" {
                if !config.c_values.is_empty() {
                    config.c_values.iter().map(|&c| (None, Some(c))).collect()
                } else if !config.tau_values.is_empty() {
                    config.tau_values.iter().map(|&t| (Some(t), None)).collect()
                } else {
                    return Err(RunError::Config(
                        "evolve sweep needs tau_values or c_values".into(),
                    ));
                }
            } else {
                vec![(None, None)]
            };
            for (tau, c) in taus {
                points.push(Point {
                    index,
                    n,
                    m,
                    tau,
                    c,
                });
                index += 1;
            }
        }
    }

    let results: Result<Vec<(usize, Vec<f64>, serde_json::Value)>, RunError> = points
        .par_iter()
        .map(|p| run_point(&config, p).map(|(row, value)| (p.index, row, value)))
        .collect();
    let mut results = results?;
    results.sort_by_key(|(i, _, _)| *i);

    let header = match config.command.as_str() {
        "count" => "n,m,p,L,total_runtime,estimate_delta2_squared,exact_delta2_squared,abs_error",
        "evolve" => "n,m,tau,c,success_amplitude,survival,range_overlap,norm_drift",
        "gapscan" => "n,m,min_gap,min_location",
        "bounds" => "n,m,tau_lower,tau_upper_lo,tau_upper_hi,lower_to_upper_ratio",
        other => {
            return Err(RunError::Config(format!(
                "unknown sweep command {other:?}"
            )))
        }
    };
    let rows: Vec<Vec<f64>> = results.iter().map(|(_, row, _)| row.clone()).collect();
    write_csv(out, "sweep.csv", header, &rows)?;
    for (i, _, value) in &results {
        write_json(out, &format!("point_{i:04}.json"), value)?;
    }
    write_json(out, "sweep_config.json", &config)?;
    Ok(())
}

fn run_point(config: &SweepConfig, p: &Point) -> Result<(Vec<f64>, serde_json::Value), RunError> {
    let inst = gus_instance(p.n, p.m)?;
    match config.command.as_str() {
        "count" => {
            let plan = counting::make_plan(p.n, inst.g_final())?;
            let r = counting::estimate_overlap(&inst, &plan, None)?;
            let row = vec![
                p.n as f64,
                p.m as f64,
                plan.p,
                plan.l as f64,
                plan.total_runtime,
                r.estimate_delta2_squared,
                r.exact_delta2_squared,
                r.abs_error,
            ];
            Ok((row, serde_json::to_value(&r)?))
        }
        "evolve" => {
            let tau = match (p.tau, p.c) {
                (Some(t), _) => t,
                (None, Some(c)) => bounds::tau_upper_time(&inst, c)?,
                _ => unreachable!(),
            };
            let mode = config.mode.as_deref().unwrap_or("reduced");
            let sched = config
                .schedule
                .clone()
                .unwrap_or_else(|| ScheduleSpec {
                    kind: "double_step".into(),
                    e_f: Some(inst.e_final()),
                    points: None,
                })
                .build()?;
            let r = match mode {
                "full" => evolution::evolve_full(&inst, &sched, tau, &EvolveOptions::default())?,
                "reduced" => {
                    evolution::evolve_reduced(&inst, &sched, tau, &EvolveOptions::default())?
                }
                "double_step" => evolution::evolve_double_step(&inst, tau)?,
                other => {
                    return Err(RunError::Config(format!("unknown sweep mode {other:?}")))
                }
            };
            let row = vec![
                p.n as f64,
                p.m as f64,
                tau,
                p.c.unwrap_or(f64::NAN),
                r.success_amplitude,
                r.survival,
                r.range_overlap,
                r.norm_drift,
            ];
            let record = hblab_core::io::EvolutionRecord::new(mode, &r);
            Ok((row, serde_json::to_value(&record)?))
        }
        "gapscan" => {
            let sched = config
                .schedule
                .clone()
                .unwrap_or_else(ScheduleSpec::linear)
                .build()?;
            let grid = config.grid.unwrap_or(65);
            let profile = hblab_core::spectral::gap_profile(&inst, &sched, grid)?;
            let row = vec![
                p.n as f64,
                p.m as f64,
                profile.min_gap,
                profile.min_location,
            ];
            Ok((
                row,
                json!({
                    "n": p.n,
                    "m": p.m,
                    "min_gap": profile.min_gap,
                    "min_location": profile.min_location,
                }),
            ))
        }
        "bounds" => {
            let report = bounds::bound_report(&inst, None)?;
            let (lo, hi) = report.tau_upper_interval.unwrap_or((f64::NAN, f64::NAN));
            let row = vec![
                p.n as f64,
                p.m as f64,
                report.tau_lower.unwrap_or(f64::NAN),
                lo,
                hi,
                report.lower_to_upper_ratio.unwrap_or(f64::NAN),
            ];
            Ok((row, serde_json::to_value(&report)?))
        }
        other => Err(RunError::Config(format!(
            "unknown sweep command {other:?}"
        ))),
    }
}
