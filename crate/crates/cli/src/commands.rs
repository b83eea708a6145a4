//! Implementations of the single-run verbs.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use hblab_core::bounds::{self, RunLog};
use hblab_core::counting;
use hblab_core::evolution::{self, EvolveOptions};
use hblab_core::io::{format_f64, EvolutionRecord, EvolveRequest, InstanceSpec, ScheduleSpec};
use hblab_core::operators::SearchInstance;
use hblab_core::schedules::{linear_schedule, Schedule};
use hblab_core::spectral;

use crate::{require_file, RunError};

pub(crate) fn load_instance(path: &Path, seed: Option<u64>) -> Result<SearchInstance, RunError> {
    require_file(path)?;
    let mut spec = InstanceSpec::from_path(path)?;
    if seed.is_some() {
        spec.seed = seed;
    }
    Ok(spec.build()?)
}

pub(crate) fn load_schedule(path: &Path) -> Result<Schedule, RunError> {
    require_file(path)?;
    Ok(ScheduleSpec::from_path(path)?.build()?)
}

pub(crate) fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), RunError> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text + "\n")?;
    println!("wrote {}", path.display());
    Ok(())
}

pub(crate) fn write_csv(
    out: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<f64>],
) -> Result<(), RunError> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    let mut file = fs::File::create(&path)?;
    writeln!(file, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        writeln!(file, "{}", line.join(","))?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

pub fn build(instance: &Path, seed: Option<u64>, out: &Path) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let o = inst.overlaps;
    let summary = json!({
        "dim": inst.dim,
        "rank_final": inst.rank_final,
        "m1": inst.m1(),
        "e_initial": inst.e_initial(),
        "e_final": inst.e_final(),
        "g_initial": inst.g_initial(),
        "g_final": inst.g_final(),
        "delta1": o.delta1,
        "delta2": o.delta2,
        "delta3": o.delta3,
        "delta4": o.delta4,
        "delta": o.delta,
        "generic_diagnostic": inst.generic_diagnostic(),
        "calibration_initial": inst.calibration_initial,
        "calibration_final": inst.calibration_final,
    });
    if inst.calibration_initial.rescaled || inst.calibration_final.rescaled {
        eprintln!("warning: operators were rescaled to unit norm at assembly");
    }
    write_json(out, "instance_summary.json", &summary)
}

/// Run an evolution described by a JSON request file.
pub fn evolve_request(
    request: &Path,
    tol: Option<f64>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), RunError> {
    require_file(request)?;
    let req = EvolveRequest::from_path(request)?;
    let base = request.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mode = req.mode.clone().unwrap_or_else(|| "full".into());
    evolve(
        &resolve(&req.instance),
        &resolve(&req.schedule),
        Some(req.tau),
        None,
        req.steps,
        tol,
        &mode,
        seed,
        out,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn evolve(
    instance: &Path,
    schedule: &Path,
    tau: Option<f64>,
    c: Option<f64>,
    steps: Option<usize>,
    tol: Option<f64>,
    mode: &str,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let sched = load_schedule(schedule)?;
    let tau = match (tau, c) {
        (Some(t), None) => t,
        (None, Some(c)) => bounds::tau_upper_time(&inst, c)?,
        (None, None) => {
            return Err(RunError::Config(
                "evolve needs --tau or --c".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let opts = EvolveOptions {
        steps,
        tolerance: tol,
        ..EvolveOptions::default()
    };
    let result = match mode {
        "full" => evolution::evolve_full(&inst, &sched, tau, &opts)?,
        "reduced" => evolution::evolve_reduced(&inst, &sched, tau, &opts)?,
        "double_step" => evolution::evolve_double_step(&inst, tau)?,
        other => {
            return Err(RunError::Config(format!(
                "unknown mode {other:?} (full | reduced | double_step)"
            )))
        }
    };
    if result.degraded {
        eprintln!(
            "warning: step-doubling estimate {:?} above tolerance; increase --steps or set --tol",
            result.error_estimate
        );
    }
    let record = EvolutionRecord::new(mode, &result);
    println!(
        "tau={tau} success_amplitude={:.6} survival={:.6}",
        record.success_amplitude, record.survival
    );
    write_json(out, "evolution.json", &record)
}

pub fn count(
    instance: &Path,
    seed: Option<u64>,
    gf: Option<f64>,
    ef_perturb: Option<f64>,
    out: &Path,
) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let g_final = gf.unwrap_or_else(|| inst.g_final());
    let plan = counting::make_plan(inst.dim, g_final)?;
    let result = counting::estimate_overlap(&inst, &plan, ef_perturb)?;
    println!(
        "estimate_delta2 = {:.8} (exact {:.8}, |err| = {:.3e}, runtime {})",
        result.estimate_delta2,
        result.exact_delta2_squared.sqrt(),
        result.abs_error,
        plan.total_runtime
    );
    write_json(out, "counting.json", &result)
}

pub fn gapscan(
    instance: &Path,
    seed: Option<u64>,
    schedule: Option<&Path>,
    grid: usize,
    out: &Path,
) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let sched = match schedule {
        Some(p) => load_schedule(p)?,
        None => linear_schedule(),
    };
    let profile = spectral::gap_profile(&inst, &sched, grid)?;
    let rows: Vec<Vec<f64>> = profile
        .samples
        .iter()
        .map(|s| vec![s.s, s.lambda1, s.lambda2, s.gap])
        .collect();
    write_csv(out, "gapscan.csv", "s,lambda1,lambda2,gap", &rows)?;
    let summary = json!({
        "min_gap": profile.min_gap,
        "min_location": profile.min_location,
        "grid_points": profile.grid_points,
        "schedule": sched.kind_name(),
    });
    println!(
        "min gap {} at s = {}",
        format_f64(profile.min_gap),
        format_f64(profile.min_location)
    );
    write_json(out, "gapscan_summary.json", &summary)
}

pub fn krein(
    instance: &Path,
    seed: Option<u64>,
    with_dense: bool,
    grid: usize,
    out: &Path,
) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let dense = if with_dense {
        Some(spectral::gap_profile(&inst, &linear_schedule(), grid)?)
    } else {
        None
    };
    let report = spectral::certify_gap_bound(&inst, dense.as_ref())?;
    if !report.hypothesis_ok {
        eprintln!(
            "warning: hypothesis g_I > 10 delta4 fails ({} <= {}); report is advisory",
            report.g_initial,
            10.0 * report.delta4
        );
    }
    println!(
        "certified: {} (bound 10*delta4 = {}, numeric = {:?}, crossings = {:?})",
        report.certified,
        format_f64(report.certified_bound),
        report.certified_numeric,
        report.crossing_times
    );
    write_json(out, "krein.json", &report)
}

pub fn bounds(
    instance: &Path,
    seed: Option<u64>,
    schedule: Option<&Path>,
    out: &Path,
) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let sched = schedule.map(load_schedule).transpose()?;
    let report = bounds::bound_report(&inst, sched.as_ref())?;
    println!(
        "tau_lower = {:?}, tau_upper(C=1/3..2/3) = {:?}, tau_robust = {:?}",
        report.tau_lower, report.tau_upper_interval, report.tau_robust
    );
    write_json(out, "bounds.json", &report)
}

/// dist(ψ, Range P_F) = sqrt(1 - ‖P_F ψ‖²) for a unit state.
fn dist_to_range(success_amplitude: f64) -> f64 {
    (1.0 - success_amplitude * success_amplitude).max(0.0).sqrt()
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, RunError> {
    let grid: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let grid = grid.map_err(|e| RunError::Config(format!("bad tau grid {raw:?}: {e}")))?;
    if grid.is_empty() {
        return Err(RunError::Config("empty tau grid".into()));
    }
    Ok(grid)
}

pub fn verify(
    instance: &Path,
    seed: Option<u64>,
    thm: &str,
    schedules: &[std::path::PathBuf],
    tau_grid: &str,
    out: &Path,
) -> Result<(), RunError> {
    let inst = load_instance(instance, seed)?;
    let grid = parse_grid(tau_grid)?;
    let scheds: Vec<Schedule> = if schedules.is_empty() {
        vec![linear_schedule()]
    } else {
        schedules
            .iter()
            .map(|p| load_schedule(p))
            .collect::<Result<_, _>>()?
    };
    match thm {
        "1" => {
            let mut log = RunLog::new();
            let report = bounds::verify_thm1(&inst, &scheds, &grid, &mut log)?;
            for outcome in &report.outcomes {
                let rows: Vec<Vec<f64>> = outcome
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.tau,
                            r.success_amplitude,
                            r.survival,
                            dist_to_range(r.success_amplitude),
                        ]
                    })
                    .collect();
                write_csv(
                    out,
                    &format!("verify_thm1_{}.csv", outcome.schedule),
                    "tau,success_amplitude,survival,dist_range",
                    &rows,
                )?;
            }
            let ratio_rows: Vec<Vec<f64>> = report
                .outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.tau_star.unwrap_or(f64::NAN),
                        o.ratio_to_lower.unwrap_or(f64::NAN),
                    ]
                })
                .collect();
            write_csv(
                out,
                "verify_thm1_thresholds.csv",
                "tau_star,tau_star_over_tau_lower",
                &ratio_rows,
            )?;
            write_json(out, "verify_thm1.json", &report)?;
            let violations = log.thm1_violations();
            if !violations.is_empty() {
                return Err(RunError::Numerical(format!(
                    "lower-bound implication violated by {} runs",
                    violations.len()
                )));
            }
            println!("thm1 sound: {}", report.sound);
        }
        "5" => {
            let sched = scheds.first().unwrap();
            let mut log = RunLog::new();
            let report = bounds::verify_thm5(&inst, sched, &grid, &mut log)?;
            if report.threshold_unsatisfiable {
                eprintln!(
                    "warning: survival threshold {} > 1; the robust bound's conclusion is vacuous at this size",
                    report.survival_threshold
                );
            }
            let rows: Vec<Vec<f64>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.tau,
                        r.success_amplitude,
                        r.survival,
                        dist_to_range(r.success_amplitude),
                    ]
                })
                .collect();
            write_csv(
                out,
                &format!("verify_thm5_{}.csv", sched.kind_name()),
                "tau,success_amplitude,survival,dist_range",
                &rows,
            )?;
            write_json(out, "verify_thm5.json", &report)?;
            println!("thm5 tau_star = {:?}", report.tau_star);
        }
        "adi" => {
            let report = bounds::adiabatic_error_scan(&inst, &scheds, &grid, 1e-6)?;
            let mut rows = Vec::new();
            for r in &report.rows {
                rows.push(vec![r.tau, r.dist, r.steps as f64]);
            }
            write_csv(out, "verify_adiabatic.csv", "tau,dist,steps", &rows)?;
            write_json(out, "verify_adiabatic.json", &report)?;
            println!("slopes: {:?}", report.slopes);
        }
        other => {
            return Err(RunError::Config(format!(
                "unknown theorem {other:?} (1 | 5 | adi)"
            )))
        }
    }
    Ok(())
}

/// Merge the JSON records under `dir` into one summary plus plot-ready
/// two-column files.
pub fn report(dir: &Path, out: &Path) -> Result<(), RunError> {
    if !dir.is_dir() {
        return Err(RunError::Config(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut entries: Vec<(String, serde_json::Value)> = Vec::new();
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    names.sort();
    for path in &names {
        let text = fs::read_to_string(path)?;
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
            entries.push((
                path.file_name().unwrap().to_string_lossy().to_string(),
                value,
            ));
        }
    }
    if entries.is_empty() {
        return Err(RunError::Config(format!(
            "no JSON artifacts found in {}",
            dir.display()
        )));
    }
    fs::create_dir_all(out)?;

    // Machine-readable merge.
    let merged: serde_json::Map<String, serde_json::Value> =
        entries.iter().cloned().collect();
    write_json(out, "summary.json", &serde_json::Value::Object(merged))?;

    // Human-readable table.
    let mut table = String::new();
    for (name, value) in &entries {
        table.push_str(&format!("== {name}\n"));
        match value {
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    if v.is_number() || v.is_boolean() || v.is_string() {
                        table.push_str(&format!("  {k:<28} {v}\n"));
                    }
                }
            }
            other => table.push_str(&format!("  {other}\n")),
        }
    }
    fs::write(out.join("table.txt"), table)?;
    println!("wrote {}", out.join("table.txt").display());

    // Plot-ready two-column extracts from known record shapes.
    for (name, value) in &entries {
        if let Some(samples) = value.get("samples").and_then(|v| v.as_array()) {
            // gap profile: s vs gap
            let rows: Vec<Vec<f64>> = samples
                .iter()
                .filter_map(|s| {
                    Some(vec![
                        s.get("s")?.as_f64()?,
                        s.get("gap")?.as_f64()?,
                    ])
                })
                .collect();
            if !rows.is_empty() {
                let stem = name.trim_end_matches(".json");
                write_csv(out, &format!("{stem}_gap_curve.csv"), "s,gap", &rows)?;
            }
        }
        if let Some(rows_v) = value.get("rows").and_then(|v| v.as_array()) {
            // thm5 rows: tau vs range overlap, or error-scan rows
            let rows: Vec<Vec<f64>> = rows_v
                .iter()
                .filter_map(|r| {
                    if let Some(arr) = r.as_array() {
                        let a = arr.first()?.as_f64()?;
                        let b = arr.last()?.as_f64()?;
                        Some(vec![a, b])
                    } else {
                        let tau = r.get("tau")?.as_f64()?;
                        let d = r.get("dist")?.as_f64()?;
                        Some(vec![tau, d])
                    }
                })
                .collect();
            if !rows.is_empty() {
                let stem = name.trim_end_matches(".json");
                write_csv(out, &format!("{stem}_curve.csv"), "x,y", &rows)?;
            }
        }
    }
    Ok(())
}
