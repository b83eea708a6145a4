//! Closed-form runtime bounds and the experiment harnesses that verify
//! them against actual evolutions.
//!
//! * τ₋ = (1 - 5δ₂)/(5δ₁): no schedule whatsoever reaches success 1/5
//!   below it (valid for δ₂ < 1/5).
//! * τ₊ = C(1 - E_F)/(|E_F| δ₂), C ∈ [1/3, 2/3]: the double-step schedule
//!   reaches success 1/5 at this time.
//! * τ_r = const·κ/(-ε² ln ε) with ε = 10³(m+1)δ: below it a κ-controlled
//!   schedule cannot move the state off ψ_I appreciably (vacuous once
//!   ε ≥ 1).
//!
//! Every evolution routed through the harness is recorded in a [`RunLog`];
//! the log asserts globally that success ≥ 1/5 implies τ ≥ τ₋ - 1e-9.

use crate::error::Error;
use crate::evolution::{self, EvolveOptions};
use crate::numeric;
use crate::operators::SearchInstance;
use crate::schedules::{robustness_profile, RobustnessProfile, Schedule, PROFILE_GRID};
use crate::spectral::gap_profile;
use crate::{Result, GAMMA};

/// Theorem-1 lower bound τ₋ = (1 - 5δ₂)/(5δ₁); requires δ₂ < 1/5.
pub fn tau_lower_bound(instance: &SearchInstance) -> Result<f64> {
    let d1 = instance.overlaps.delta1;
    let d2 = instance.overlaps.delta2;
    if d2 >= GAMMA {
        return Err(Error::BoundInapplicable {
            reason: format!("delta2 = {d2} >= 1/5; the lower bound's proviso fails"),
        });
    }
    Ok((1.0 - 5.0 * d2) / (5.0 * d1))
}

/// Theorem-2 running time τ₊ = C(1 - E_F)/(|E_F| δ₂) for C ∈ [1/3, 2/3].
pub fn tau_upper_time(instance: &SearchInstance, c: f64) -> Result<f64> {
    if !(1.0 / 3.0..=2.0 / 3.0).contains(&c) {
        return Err(Error::BoundInapplicable {
            reason: format!("C = {c} outside [1/3, 2/3]"),
        });
    }
    let d2 = instance.overlaps.delta2;
    if d2 <= 0.0 {
        return Err(Error::BoundInapplicable {
            reason: "delta2 = 0: psi_I has no overlap with the final ground space".into(),
        });
    }
    let e_f = instance.e_final();
    Ok(c * (1.0 - e_f) / (e_f.abs() * d2))
}

/// Inputs for the robust lower bound.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RobustBoundInputs {
    pub kappa: f64,
    /// δ = ‖Q_I Q_F‖.
    pub delta: f64,
    pub m: usize,
    /// ε = 10³ (m+1) δ, the proof's working parameter.
    pub epsilon: f64,
    /// Survival threshold 2√6/5 + 2δ from the bound's conclusion.
    pub threshold: f64,
}

impl RobustBoundInputs {
    pub fn new(instance: &SearchInstance, profile: &RobustnessProfile) -> Self {
        let delta = instance.overlaps.delta;
        let m = instance.rank_final;
        let epsilon = 1e3 * (m as f64 + 1.0) * delta;
        RobustBoundInputs {
            kappa: profile.kappa,
            delta,
            m,
            epsilon,
            threshold: 2.0 * 6f64.sqrt() / 5.0 + 2.0 * delta,
        }
    }
}

/// Robust lower bound: `constant · κ / (-ε² ln ε)`, or vacuous when ε ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum RobustBound {
    Value(f64),
    /// ε ≥ 1: the logarithm is nonnegative and the bound says nothing.
    Vacuous { epsilon: f64 },
}

pub fn tau_robust_bound(inputs: &RobustBoundInputs, constant: f64) -> Result<RobustBound> {
    if inputs.kappa <= 0.0 {
        return Err(Error::BoundInapplicable {
            reason: "kappa = 0: no control floor on the schedule derivative".into(),
        });
    }
    if inputs.delta <= 0.0 {
        return Err(Error::BoundInapplicable {
            reason: "delta = 0".into(),
        });
    }
    let eps = inputs.epsilon;
    if eps >= 1.0 {
        return Ok(RobustBound::Vacuous { epsilon: eps });
    }
    Ok(RobustBound::Value(
        constant * inputs.kappa / (eps * eps * (-eps.ln())),
    ))
}

/// Hypothesis flags attached to a bound report.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HypothesisFlags {
    /// δ₂ < 1/5 (Theorem-1 proviso).
    pub delta2_below_gamma: bool,
    /// δ₃ ln N / g_F: the upper-bound construction wants this O(1).
    pub delta3_log_ratio: f64,
    pub e_initial_is_minus_one: bool,
    /// ε < 1 for the robust bound.
    pub epsilon_below_one: bool,
}

/// Snapshot of every closed-form bound for one instance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
    pub delta: f64,
    pub e_final: f64,
    pub kappa: Option<f64>,
    pub tau_lower: Option<f64>,
    /// [τ₊ at C = 1/3, τ₊ at C = 2/3].
    pub tau_upper_interval: Option<(f64, f64)>,
    pub tau_robust: Option<RobustBound>,
    /// τ₋ / τ₊(C = 1/2); O(1) for generic instances with m = O(1).
    pub lower_to_upper_ratio: Option<f64>,
    pub flags: HypothesisFlags,
    /// ‖Q_F ψ_I‖ √(N/m): 1 for the generic calibration.
    pub generic_diagnostic: f64,
    /// ln N / γ² with γ = 1/5: repetitions to push failure odds to O(1/N).
    pub repetition_count: f64,
}

/// Evaluate every bound for an instance; `schedule` supplies κ for the
/// robust branch (skipped if `None`).
pub fn bound_report(instance: &SearchInstance, schedule: Option<&Schedule>) -> Result<BoundReport> {
    let o = instance.overlaps;
    let n = instance.dim;
    let profile = match schedule {
        Some(s) => Some(robustness_profile(s, PROFILE_GRID)?),
        None => None,
    };
    let tau_lower = tau_lower_bound(instance).ok();
    let tau_upper_interval = match (
        tau_upper_time(instance, 1.0 / 3.0),
        tau_upper_time(instance, 2.0 / 3.0),
    ) {
        (Ok(a), Ok(b)) => Some((a, b)),
        _ => None,
    };
    let (kappa, tau_robust, eps_ok) = match &profile {
        Some(p) => {
            let inputs = RobustBoundInputs::new(instance, p);
            let bound = tau_robust_bound(&inputs, 1.0).ok();
            (Some(p.kappa), bound, inputs.epsilon < 1.0)
        }
        None => (None, None, false),
    };
    let lower_to_upper_ratio = match (tau_lower, tau_upper_time(instance, 0.5)) {
        (Some(lo), Ok(up)) => Some(lo / up),
        _ => None,
    };
    Ok(BoundReport {
        n,
        m: instance.rank_final,
        delta1: o.delta1,
        delta2: o.delta2,
        delta3: o.delta3,
        delta4: o.delta4,
        delta: o.delta,
        e_final: instance.e_final(),
        kappa,
        tau_lower,
        tau_upper_interval,
        tau_robust,
        lower_to_upper_ratio,
        flags: HypothesisFlags {
            delta2_below_gamma: o.delta2 < GAMMA,
            delta3_log_ratio: o.delta3 * (n as f64).ln() / instance.g_final(),
            e_initial_is_minus_one: (instance.e_initial() + 1.0).abs() < 1e-10,
            epsilon_below_one: eps_ok,
        },
        generic_diagnostic: instance.generic_diagnostic(),
        repetition_count: (n as f64).ln() / (GAMMA * GAMMA),
    })
}

/// One recorded evolution, for the global Theorem-1 soundness audit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunRecord {
    pub n: usize,
    pub m: usize,
    pub schedule: String,
    pub tau: f64,
    pub success_amplitude: f64,
    pub survival: f64,
    pub range_overlap: f64,
    pub tau_lower: Option<f64>,
}

/// Ledger of every evolution executed through the verification harness.
#[derive(Debug, Default)]
pub struct RunLog {
    records: Vec<RunRecord>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: RunRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    /// success ≥ 1/5 ⟹ τ ≥ τ₋ - 1e-9, over every recorded run.
    pub fn thm1_violations(&self) -> Vec<&RunRecord> {
        self.records
            .iter()
            .filter(|r| {
                r.success_amplitude >= GAMMA
                    && r.tau_lower.map(|lo| r.tau < lo - 1e-9).unwrap_or(false)
            })
            .collect()
    }
}

fn run_and_log(
    instance: &SearchInstance,
    schedule: &Schedule,
    tau: f64,
    options: &EvolveOptions,
    log: &mut RunLog,
) -> Result<evolution::EvolutionResult> {
    // Reduced integration whenever the invariant subspace exists; the
    // full-space route is exercised separately by the equivalence suite.
    let result = if instance.spectral_initial.rank(instance.degeneracy_tol()) == 1 {
        evolution::evolve_reduced(instance, schedule, tau, options)?
    } else {
        evolution::evolve_full(instance, schedule, tau, options)?
    };
    log.push(RunRecord {
        n: instance.dim,
        m: instance.rank_final,
        schedule: schedule.kind_name().to_string(),
        tau,
        success_amplitude: result.success_amplitude,
        survival: result.survival,
        range_overlap: result.range_overlap,
        tau_lower: tau_lower_bound(instance).ok(),
    });
    Ok(result)
}

/// One evolution on a verification grid.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct VerifyRow {
    pub tau: f64,
    pub success_amplitude: f64,
    pub survival: f64,
    pub range_overlap: f64,
}

/// Per-schedule outcome of the Theorem-1 verification.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Thm1ScheduleOutcome {
    pub schedule: String,
    /// Rows on the sub-threshold grid.
    pub rows: Vec<VerifyRow>,
    pub all_below_gamma: bool,
    /// First τ reaching success 1/5 (bisection to 1% relative), if found
    /// below the search ceiling.
    pub tau_star: Option<f64>,
    /// τ*/τ₋ ≥ 1 whenever τ* was found.
    pub ratio_to_lower: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Thm1Report {
    pub tau_lower: f64,
    pub outcomes: Vec<Thm1ScheduleOutcome>,
    pub sound: bool,
}

/// Evolve every schedule on every sub-τ₋ grid point (expect success < 1/5
/// everywhere), then locate the empirical threshold τ* per schedule.
pub fn verify_thm1(
    instance: &SearchInstance,
    schedules: &[Schedule],
    tau_grid: &[f64],
    log: &mut RunLog,
) -> Result<Thm1Report> {
    let tau_lower = tau_lower_bound(instance)?;
    let mut outcomes = Vec::new();
    let mut sound = true;
    for schedule in schedules {
        let mut rows = Vec::new();
        let mut all_below = true;
        for &tau in tau_grid {
            let r = run_and_log(instance, schedule, tau, &EvolveOptions::default(), log)?;
            if tau < tau_lower && r.success_amplitude >= GAMMA {
                all_below = false;
                sound = false;
            }
            rows.push(VerifyRow {
                tau,
                success_amplitude: r.success_amplitude,
                survival: r.survival,
                range_overlap: r.range_overlap,
            });
        }
        // Empirical first crossing of the success threshold.
        let ceiling = 64.0 * tau_upper_time(instance, 0.5)?;
        let mut probe_err: Option<Error> = None;
        let tau_star = numeric::first_crossing(
            |tau| {
                match run_and_log(instance, schedule, tau, &EvolveOptions::default(), log) {
                    Ok(r) => r.success_amplitude,
                    Err(e) => {
                        probe_err = Some(e);
                        f64::NAN
                    }
                }
            },
            GAMMA,
            tau_lower.max(1e-3) * 0.5,
            1.5,
            ceiling,
            0.01,
        );
        if let Some(e) = probe_err {
            return Err(e);
        }
        let ratio = tau_star.map(|t| t / tau_lower);
        if let Some(r) = ratio {
            if r < 1.0 - 1e-9 {
                sound = false;
            }
        }
        outcomes.push(Thm1ScheduleOutcome {
            schedule: schedule.kind_name().to_string(),
            rows,
            all_below_gamma: all_below,
            tau_star,
            ratio_to_lower: ratio,
        });
    }
    Ok(Thm1Report {
        tau_lower,
        outcomes,
        sound,
    })
}

/// Point-wise record of the Theorem-5 verification.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Thm5Report {
    pub kappa: f64,
    pub epsilon: f64,
    pub survival_threshold: f64,
    /// The conclusion |⟨ψ_I|ψ⟩| > 2√6/5 + 2δ is unsatisfiable once the
    /// threshold exceeds 1 (δ ≥ ~0.0101); flagged, not asserted.
    pub threshold_unsatisfiable: bool,
    pub rows: Vec<VerifyRow>,
    /// Smallest grid-or-bisection τ with range overlap ≥ 1/5.
    pub tau_star: Option<f64>,
    pub robust_bound: Option<RobustBound>,
}

/// Record survival and range overlap across a τ grid for a differentiable
/// schedule with κ > 0, and locate the empirical threshold.
pub fn verify_thm5(
    instance: &SearchInstance,
    schedule: &Schedule,
    tau_grid: &[f64],
    log: &mut RunLog,
) -> Result<Thm5Report> {
    if (instance.e_initial() + 1.0).abs() > 1e-10 {
        return Err(Error::BoundInapplicable {
            reason: format!("E_I = {} != -1", instance.e_initial()),
        });
    }
    let profile = robustness_profile(schedule, PROFILE_GRID)?;
    if profile.kappa <= 0.0 {
        return Err(Error::BoundInapplicable {
            reason: "schedule has kappa = 0 on J (jump schedules rejected)".into(),
        });
    }
    let inputs = RobustBoundInputs::new(instance, &profile);
    let mut rows = Vec::new();
    for &tau in tau_grid {
        let r = run_and_log(instance, schedule, tau, &EvolveOptions::default(), log)?;
        rows.push(VerifyRow {
            tau,
            success_amplitude: r.success_amplitude,
            survival: r.survival,
            range_overlap: r.range_overlap,
        });
    }
    let tau_star = empirical_threshold(instance, schedule, log)?;
    Ok(Thm5Report {
        kappa: profile.kappa,
        epsilon: inputs.epsilon,
        survival_threshold: inputs.threshold,
        threshold_unsatisfiable: inputs.threshold >= 1.0,
        rows,
        tau_star,
        robust_bound: tau_robust_bound(&inputs, 1.0).ok(),
    })
}

/// First τ at which the range overlap reaches 1/5, by geometric scan and
/// bisection to 1% relative.
pub fn empirical_threshold(
    instance: &SearchInstance,
    schedule: &Schedule,
    log: &mut RunLog,
) -> Result<Option<f64>> {
    let ceiling = 1e6;
    let mut probe_err: Option<Error> = None;
    let star = numeric::first_crossing(
        |tau| match run_and_log(instance, schedule, tau, &EvolveOptions::default(), log) {
            Ok(r) => r.range_overlap,
            Err(e) => {
                probe_err = Some(e);
                f64::NAN
            }
        },
        GAMMA,
        0.5,
        1.5,
        ceiling,
        0.01,
    );
    if let Some(e) = probe_err {
        return Err(e);
    }
    Ok(star)
}

/// log-log scaling fit of thresholds against instance size.
pub fn threshold_scaling_fit(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t).collect();
    numeric::loglog_slope(&xs, &ys)
}

/// One row of the adiabatic error scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ErrorScanRow {
    pub schedule: String,
    pub tau: f64,
    /// dist(ψ_τ(1), Range P_F).
    pub dist: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ErrorScanReport {
    pub rows: Vec<ErrorScanRow>,
    /// Fitted log-log slope of dist vs τ per schedule.
    pub slopes: Vec<(String, f64)>,
}

/// Tabulate dist(ψ_τ(1), Range P_F) against τ for each schedule and fit
/// the decay slope. The integrator is sized from the requested tolerance so
/// discretization error stays below the measured distances.
pub fn adiabatic_error_scan(
    instance: &SearchInstance,
    schedules: &[Schedule],
    tau_grid: &[f64],
    tolerance: f64,
) -> Result<ErrorScanReport> {
    // Gapped-path precondition.
    let check = gap_profile(instance, &schedules[0], 33)?;
    if check.min_gap <= 0.0 {
        return Err(Error::BoundInapplicable {
            reason: "interpolation path closes the gap".into(),
        });
    }
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for schedule in schedules {
        let mut pts = Vec::new();
        for &tau in tau_grid {
            let opts = EvolveOptions::with_tolerance(tolerance).no_validation();
            let r = if instance.spectral_initial.rank(instance.degeneracy_tol()) == 1 {
                evolution::evolve_reduced(instance, schedule, tau, &opts)?
            } else {
                evolution::evolve_full(instance, schedule, tau, &opts)?
            };
            let dist = (1.0 - r.range_overlap.powi(2)).max(0.0).sqrt();
            rows.push(ErrorScanRow {
                schedule: schedule.kind_name().to_string(),
                tau,
                dist,
                steps: r.step_count,
            });
            pts.push((tau, dist.max(1e-300)));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        slopes.push((
            schedule.kind_name().to_string(),
            numeric::loglog_slope(&xs, &ys),
        ));
    }
    Ok(ErrorScanReport { rows, slopes })
}
