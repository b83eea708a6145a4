//! Propagators for the scaled Schrödinger equation
//! `i ψ̇_τ(s) = τ H(s) ψ_τ(s)`, `ψ_τ(0) = ψ_I`.
//!
//! Three routes, cross-checked against each other in the test suite:
//!
//! * [`evolve_double_step`] — exact eigendecomposition of the plateau
//!   generator `E_F P_I + H_F` in the (m+1)-dimensional invariant subspace;
//! * [`evolve_full`] — exponential midpoint stepping in the full
//!   N-dimensional space (each step applies the exact unitary of the
//!   midpoint Hamiltonian, so norm preservation is a per-step invariant);
//! * [`evolve_reduced`] — the same stepper in the invariant subspace
//!   spanned by Range(H_F) and ψ_I, which the dynamics never leaves when
//!   H_I is rank one.
//!
//! All reported quantities are moduli; the global dynamical phase
//! `e^{i f_τ(s)}` that relates ψ_τ to its phase-stripped companion is never
//! materialized, and shifting both operators by a multiple of the identity
//! changes none of the outputs.

use ndarray::prelude::*;

use crate::error::Error;
use crate::linalg::{self, C64};
use crate::operators::SearchInstance;
use crate::schedules::Schedule;
use crate::Result;

/// State 2-norm threshold for accepting a step-doubling error estimate.
pub const STEP_DOUBLING_TOL: f64 = 1e-9;

/// Orthonormal basis of the invariant subspace Y = Range(H_F) + span{ψ_I}.
///
/// The first m columns are H_F-eigenvectors with nonzero eigenvalue; the
/// last column is the normalized component of ψ_I orthogonal to Range(H_F).
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    /// N×(m+1) orthonormal columns.
    pub vectors: Array2<C64>,
    /// H_F eigenvalue carried by each of the first m columns.
    pub labels: Vec<f64>,
    /// Rank of H_F.
    pub m: usize,
}

impl ReducedBasis {
    /// Coordinates of a full-space vector in this basis.
    pub fn project(&self, v: &Array1<C64>) -> Array1<C64> {
        linalg::conj_t(&self.vectors.view()).dot(v)
    }

    /// Full-space vector from coordinates.
    pub fn lift(&self, coords: &Array1<C64>) -> Array1<C64> {
        self.vectors.dot(coords)
    }
}

/// Build the reduced basis for a rank-one initial Hamiltonian.
pub fn build_reduced_basis(instance: &SearchInstance) -> Result<ReducedBasis> {
    let tol = instance.degeneracy_tol();
    let rank_i = instance.spectral_initial.rank(tol);
    if rank_i != 1 {
        return Err(Error::RankOneRequired { rank: rank_i });
    }
    let delta3 = instance.overlaps.delta3;
    if delta3 >= 1.0 - 1e-12 {
        return Err(Error::PsiInFinalRange);
    }
    let range = instance.spectral_final.range_basis(tol)?;
    let labels = instance.spectral_final.range_labels(tol);
    let m = labels.len();
    let n = instance.dim;

    // e_{m+1} = (1 - Q_F) ψ_I / ‖(1 - Q_F) ψ_I‖.
    let psi = &instance.psi_initial;
    let coords = linalg::conj_t(&range.view()).dot(psi);
    let mut tail = psi - &range.dot(&coords);
    let nrm = linalg::norm2_c(&tail);
    tail.mapv_inplace(|z| z / nrm);

    let mut vectors = Array2::<C64>::zeros((n, m + 1));
    vectors.slice_mut(s![.., ..m]).assign(&range);
    vectors.column_mut(m).assign(&tail);
    Ok(ReducedBasis { vectors, labels, m })
}

/// Final state and its phase-invariant observables.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: Array1<C64>,
    /// ‖P_F ψ_τ(1)‖²
    pub success_probability: f64,
    /// ‖P_F ψ_τ(1)‖
    pub success_amplitude: f64,
    /// |⟨ψ_I | ψ_τ(1)⟩|
    pub survival: f64,
    /// ‖Q_F ψ_τ(1)‖
    pub range_overlap: f64,
    pub tau: f64,
    pub step_count: usize,
    pub norm_drift: f64,
    /// Step-doubling distance between the base and refined solutions, when
    /// validation ran.
    pub error_estimate: Option<f64>,
    /// Set when validation ran and the estimate exceeded the tolerance.
    pub degraded: bool,
}

/// Integration controls for the midpoint stepper.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Step count; `None` selects max(64, ⌈8τ⌉) or the tolerance-derived
    /// count when `tolerance` is set.
    pub steps: Option<usize>,
    /// Target global state error used to size the step count.
    pub tolerance: Option<f64>,
    /// Run the step-doubling check (doubles the work).
    pub validate: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            steps: None,
            tolerance: None,
            validate: true,
        }
    }
}

impl EvolveOptions {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps: Some(steps),
            ..Self::default()
        }
    }

    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            tolerance: Some(tol),
            ..Self::default()
        }
    }

    pub fn no_validation(mut self) -> Self {
        self.validate = false;
        self
    }

    fn resolve_steps(&self, schedule: &Schedule, tau: f64) -> usize {
        if let Some(s) = self.steps {
            return s.max(1);
        }
        let floor = 64usize.max((8.0 * tau).ceil() as usize);
        match self.tolerance {
            None => floor,
            Some(tol) => {
                // Midpoint (second-order Magnus) global error is bounded by
                // h² τ² ‖[Ḣ, H]‖ / 12 up to lower-order terms, and
                // ‖[Ḣ, H]‖ ≤ 2 sup|ḟ| ‖H_F - H_I‖ ‖H‖ ≤ 4 sup|ḟ| for
                // calibrated operators.
                let sup_fdot = sup_derivative(schedule);
                let c = 4.0 * sup_fdot;
                let steps = tau * (c / (12.0 * tol)).sqrt();
                floor.max(steps.ceil() as usize)
            }
        }
    }
}

fn sup_derivative(schedule: &Schedule) -> f64 {
    let mut sup: f64 = 0.0;
    for i in 0..=2048 {
        let s = i as f64 / 2048.0;
        sup = sup.max(schedule.derivative(s));
    }
    sup.max(1e-3)
}

fn observables(
    instance: &SearchInstance,
    state: Array1<C64>,
    tau: f64,
    step_count: usize,
    error_estimate: Option<f64>,
) -> EvolutionResult {
    let tol = instance.degeneracy_tol();
    let weights = instance.spectral_final.weights(&state);
    let success_probability = weights[0];
    let range_sq: f64 = instance
        .spectral_final
        .clusters()
        .iter()
        .zip(weights.iter())
        .filter(|(c, _)| c.value.abs() > tol)
        .map(|(_, w)| w)
        .sum();
    let survival = linalg::inner_c(&instance.psi_initial, &state).norm();
    let norm_drift = (linalg::norm2_c(&state) - 1.0).abs();
    let degraded = error_estimate
        .map(|e| e > STEP_DOUBLING_TOL)
        .unwrap_or(false);
    EvolutionResult {
        success_probability,
        success_amplitude: success_probability.sqrt(),
        survival,
        range_overlap: range_sq.sqrt(),
        tau,
        step_count,
        norm_drift,
        error_estimate,
        degraded,
        final_state: state,
    }
}

/// ψ_τ(1) = e^{-iατ(E_F P_I + H_F)} ψ_I for the double-step schedule with
/// the instance's own plateau α = 1/(1 - E_F), computed exactly in the
/// reduced basis. The endpoint jumps carry no evolution time, and for a
/// calibrated rank-one H_I the plateau Hamiltonian equals
/// α(E_F P_I + H_F) exactly, with no leftover phase.
pub fn evolve_double_step(instance: &SearchInstance, tau: f64) -> Result<EvolutionResult> {
    if tau < 0.0 {
        return Err(Error::BadSpec {
            reason: format!("tau must be nonnegative, got {tau}"),
        });
    }
    let basis = build_reduced_basis(instance)?;
    let e_f = instance.e_final();
    let alpha = 1.0 / (1.0 - e_f);
    let dim = basis.m + 1;

    // E_F P_I + H_F in the basis: P_I = c c† for the rank-one H_I.
    let c = basis.project(&instance.psi_initial);
    let mut gen = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            gen[[i, j]] = C64::new(e_f, 0.0) * c[i] * c[j].conj();
        }
    }
    for (i, &l) in basis.labels.iter().enumerate() {
        gen[[i, i]] += C64::new(l, 0.0);
    }

    let (vals, vecs) = linalg::eigh(&gen.view())?;
    let coords = linalg::conj_t(&vecs.view()).dot(&c);
    let rotated = Array1::from_shape_fn(dim, |i| {
        coords[i] * C64::new(0.0, -alpha * tau * vals[i]).exp()
    });
    let out_coords = vecs.dot(&rotated);
    let state = basis.lift(&out_coords);
    Ok(observables(instance, state, tau, 1, None))
}

/// Midpoint propagation of `y0` under (1-f(s))·a_i + f(s)·a_f. Real
/// operator pairs take a real-arithmetic path (two real matvecs per Taylor
/// term instead of one complex).
fn propagate_blocks(
    a_initial: &Array2<C64>,
    a_final: &Array2<C64>,
    schedule: &Schedule,
    tau: f64,
    steps: usize,
    y0: &Array1<C64>,
    norm_hint: f64,
) -> Array1<C64> {
    let h = 1.0 / steps as f64;
    let dim = y0.len();
    if linalg::is_effectively_real(&a_initial.view()) && linalg::is_effectively_real(&a_final.view())
    {
        let ai = a_initial.mapv(|z| z.re);
        let af = a_final.mapv(|z| z.re);
        let mut re = y0.mapv(|z| z.re);
        let mut im = y0.mapv(|z| z.im);
        let mut mid = Array2::<f64>::zeros((dim, dim));
        for k in 0..steps {
            let s_mid = (k as f64 + 0.5) * h;
            let f = schedule.value(s_mid);
            ndarray::Zip::from(&mut mid)
                .and(&ai)
                .and(&af)
                .for_each(|m, &a, &b| *m = (1.0 - f) * a + f * b);
            let out = linalg::expi_apply_real(&mid.view(), &re, &im, tau * h, norm_hint);
            re = out.0;
            im = out.1;
        }
        return Array1::from_shape_fn(dim, |i| C64::new(re[i], im[i]));
    }
    let mut y = y0.clone();
    let mut mid = Array2::<C64>::zeros((dim, dim));
    for k in 0..steps {
        let s_mid = (k as f64 + 0.5) * h;
        let f = schedule.value(s_mid);
        let (ca, cb) = (C64::new(1.0 - f, 0.0), C64::new(f, 0.0));
        ndarray::Zip::from(&mut mid)
            .and(a_initial)
            .and(a_final)
            .for_each(|m, &ai, &af| *m = ca * ai + cb * af);
        y = linalg::expi_apply(&mid.view(), &y, tau * h, Some(norm_hint));
    }
    y
}

/// Exact propagation under the constant plateau Hamiltonian of a
/// double-step schedule, by eigendecomposition of (1-α)·a_i + α·a_f.
fn propagate_plateau(
    a_initial: &Array2<C64>,
    a_final: &Array2<C64>,
    alpha: f64,
    tau: f64,
    y0: &Array1<C64>,
) -> Result<Array1<C64>> {
    let (ca, cb) = (C64::new(1.0 - alpha, 0.0), C64::new(alpha, 0.0));
    let plateau = a_initial.mapv(|z| z * ca) + a_final.mapv(|z| z * cb);
    let (vals, vecs) = linalg::eigh(&plateau.view())?;
    let coords = linalg::conj_t(&vecs.view()).dot(y0);
    let rotated = Array1::from_shape_fn(y0.len(), |i| {
        coords[i] * C64::new(0.0, -tau * vals[i]).exp()
    });
    Ok(vecs.dot(&rotated))
}

fn run_stepper(
    a_initial: &Array2<C64>,
    a_final: &Array2<C64>,
    schedule: &Schedule,
    tau: f64,
    options: &EvolveOptions,
    y0: &Array1<C64>,
    norm_hint: f64,
) -> Result<(Array1<C64>, usize, Option<f64>)> {
    if let Some(alpha) = schedule.plateau() {
        // Three exact segments; the endpoint segments have zero duration.
        let y = propagate_plateau(a_initial, a_final, alpha, tau, y0)?;
        return Ok((y, 1, Some(0.0)));
    }
    let steps = options.resolve_steps(schedule, tau);
    let y = propagate_blocks(a_initial, a_final, schedule, tau, steps, y0, norm_hint);
    if options.validate {
        let fine = propagate_blocks(a_initial, a_final, schedule, tau, steps * 2, y0, norm_hint);
        let diff = linalg::norm2_c(&(&fine - &y));
        Ok((fine, steps * 2, Some(diff)))
    } else {
        Ok((y, steps, None))
    }
}

/// Integrate the initial-value problem in the full N-dimensional space.
pub fn evolve_full(
    instance: &SearchInstance,
    schedule: &Schedule,
    tau: f64,
    options: &EvolveOptions,
) -> Result<EvolutionResult> {
    if tau < 0.0 {
        return Err(Error::BadSpec {
            reason: format!("tau must be nonnegative, got {tau}"),
        });
    }
    let hint = instance
        .spectral_initial
        .norm()
        .max(instance.spectral_final.norm())
        * 1.000001;
    let (state, steps, est) = run_stepper(
        instance.h_initial.matrix(),
        instance.h_final.matrix(),
        schedule,
        tau,
        options,
        &instance.psi_initial,
        hint,
    )?;
    Ok(observables(instance, state, tau, steps, est))
}

/// Integrate in the invariant subspace (rank-one H_I only); agrees with
/// [`evolve_full`] on every reported modulus.
pub fn evolve_reduced(
    instance: &SearchInstance,
    schedule: &Schedule,
    tau: f64,
    options: &EvolveOptions,
) -> Result<EvolutionResult> {
    if tau < 0.0 {
        return Err(Error::BadSpec {
            reason: format!("tau must be nonnegative, got {tau}"),
        });
    }
    let basis = build_reduced_basis(instance)?;
    let w = &basis.vectors;
    let a_initial = {
        let hw = instance.h_initial.matrix().dot(w);
        linalg::conj_t(&w.view()).dot(&hw)
    };
    let a_final = {
        let hw = instance.h_final.matrix().dot(w);
        linalg::conj_t(&w.view()).dot(&hw)
    };
    let c = basis.project(&instance.psi_initial);
    let hint = instance
        .spectral_initial
        .norm()
        .max(instance.spectral_final.norm())
        * 1.000001;
    let (coords, steps, est) = run_stepper(&a_initial, &a_final, schedule, tau, options, &c, hint)?;
    let state = basis.lift(&coords);
    Ok(observables(instance, state, tau, steps, est))
}

/// Survival amplitude ⟨ψ_I| e^{it(H_F - E_F)} |ψ_I⟩, evaluated spectrally
/// as Σ_i ‖P_i ψ_I‖² e^{it(E_i - E_F)} over the distinct eigenvalues of
/// H_F.
pub fn survival_amplitude(instance: &SearchInstance, t: f64) -> C64 {
    instance
        .survival_spectrum()
        .iter()
        .map(|&(omega, w)| C64::new(0.0, t * omega).exp() * w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_general_lowrank_final, build_uniform_initial, SearchInstance};
    use crate::schedules;
    use approx::assert_relative_eq;

    #[test]
    fn reduced_basis_small_gus() {
        let inst = SearchInstance::gus(4, &[3]).unwrap();
        let basis = build_reduced_basis(&inst).unwrap();
        assert_eq!(basis.m, 1);
        // e1 = marked basis vector
        assert_relative_eq!(basis.vectors[[3, 0]].norm(), 1.0, epsilon = 1e-12);
        // e2 uniform on the unmarked coordinates
        let amp = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert_relative_eq!(basis.vectors[[i, 1]].norm(), amp, epsilon = 1e-12);
        }
        assert_relative_eq!(basis.vectors[[3, 1]].norm(), 0.0, epsilon = 1e-12);
        // ψ_I lies in Y
        let coords = basis.project(&inst.psi_initial);
        assert_relative_eq!(linalg::norm2_c(&coords), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_basis_distance_bound() {
        let inst = SearchInstance::gus(16, &[0, 1, 2, 3]).unwrap();
        let basis = build_reduced_basis(&inst).unwrap();
        let d3 = inst.overlaps.delta3;
        assert_relative_eq!(d3, 0.5, epsilon = 1e-12);
        let e_last = basis.vectors.column(basis.m).to_owned();
        let diff = &e_last - &inst.psi_initial;
        let dist_sq = diff.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let bound = d3.powi(2) + d3.powi(4);
        assert!(dist_sq <= bound + 1e-12, "{dist_sq} > {bound}");
        // exact value 2 - 2 sqrt(1 - δ₃²)
        assert_relative_eq!(
            dist_sq,
            2.0 - 2.0 * (1.0 - d3 * d3).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn reduced_basis_rejects_higher_rank_initial() {
        // H_I with spectrum {-1, -0.5, 0...}: rank 2, ground still unique.
        let n = 8;
        let (_, psi) = build_uniform_initial(n).unwrap();
        let mut e = Array1::<C64>::zeros(n);
        e[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        e[1] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut hi_m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                hi_m[[i, j]] =
                    -psi[i] * psi[j].conj() - C64::new(0.5, 0.0) * e[i] * e[j].conj();
            }
        }
        let h_i = crate::operators::HermitianOperator::new(hi_m).unwrap();
        let h_f = crate::operators::build_grover_final(n, &[4]).unwrap();
        let inst = crate::operators::assemble_instance(h_i, h_f).unwrap();
        assert!(matches!(
            build_reduced_basis(&inst),
            Err(Error::RankOneRequired { rank: 2 })
        ));
        assert!(evolve_reduced(
            &inst,
            &schedules::linear_schedule(),
            1.0,
            &EvolveOptions::default()
        )
        .is_err());
        // The full-space route still works for such instances.
        let r = evolve_full(
            &inst,
            &schedules::linear_schedule(),
            1.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert!(r.norm_drift < 1e-10);
    }

    #[test]
    fn reduced_basis_rejects_psi_in_range() {
        // H_F of rank 2 whose range contains ψ_I (N = 4).
        let n = 4;
        let (_, psi) = build_uniform_initial(n).unwrap();
        let other = {
            let mut v = Array1::<C64>::zeros(n);
            v[0] = C64::new(0.5, 0.0);
            v[1] = C64::new(0.5, 0.0);
            v[2] = C64::new(-0.5, 0.0);
            v[3] = C64::new(-0.5, 0.0);
            v
        };
        let h_f = build_general_lowrank_final(n, &[(-1.0, psi), (-0.5, other)]).unwrap();
        let inst = SearchInstance::with_uniform_initial(h_f).unwrap();
        assert_relative_eq!(inst.overlaps.delta3, 1.0, epsilon = 1e-12);
        assert!(matches!(
            build_reduced_basis(&inst),
            Err(Error::PsiInFinalRange)
        ));
    }

    #[test]
    fn double_step_zero_time_identity() {
        let inst = SearchInstance::gus(16, &[5]).unwrap();
        let r = evolve_double_step(&inst, 0.0).unwrap();
        assert_relative_eq!(r.survival, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.success_amplitude, inst.overlaps.delta2, epsilon = 1e-12);
    }

    /// Closed two-level rotation: for m=1 GUS with E_F = -1,
    /// ‖P_F ψ_τ(1)‖ = sqrt(δ₂² cos²θ + sin²θ) with θ = τ δ₂ / 2.
    fn two_level_success(delta2: f64, tau: f64) -> f64 {
        let theta = 0.5 * tau * delta2;
        (delta2 * delta2 * theta.cos().powi(2) + theta.sin().powi(2)).sqrt()
    }

    #[test]
    fn double_step_matches_two_level_formula() {
        let inst = SearchInstance::gus(256, &[77]).unwrap();
        let d2 = inst.overlaps.delta2;
        for &tau in &[0.5, 2.0, 8.0, 25.0] {
            let r = evolve_double_step(&inst, tau).unwrap();
            assert_relative_eq!(
                r.success_amplitude,
                two_level_success(d2, tau),
                epsilon = 1e-12
            );
            assert!(r.norm_drift < 1e-12);
        }
    }

    #[test]
    fn double_step_theorem2_window() {
        // τ₊ = C(1-E_F)/(|E_F| δ₂) with C = 1/2 ⇒ success ≥ 1/5.
        let inst = SearchInstance::gus(64, &[9]).unwrap();
        let d2 = inst.overlaps.delta2;
        assert_relative_eq!(d2, 0.125, epsilon = 1e-14);
        let tau = 2.0 * 0.5 / d2;
        assert_relative_eq!(tau, 8.0, epsilon = 1e-12);
        let r = evolve_double_step(&inst, tau).unwrap();
        assert!(r.success_amplitude >= 0.2);
        assert_relative_eq!(
            r.success_amplitude,
            two_level_success(d2, 8.0),
            epsilon = 1e-12
        );
        // 10-point sweep over C ∈ [1/3, 2/3]
        for i in 0..10 {
            let c = 1.0 / 3.0 + (i as f64) * (1.0 / 3.0) / 9.0;
            let r = evolve_double_step(&inst, 2.0 * c / d2).unwrap();
            assert!(
                r.success_amplitude >= 0.2,
                "C = {c}: {}",
                r.success_amplitude
            );
        }
    }

    #[test]
    fn full_matches_double_step_exactly() {
        let inst = SearchInstance::gus(32, &[4, 19]).unwrap();
        let sched = schedules::double_step_schedule(inst.e_final()).unwrap();
        for &tau in &[1.0, 7.5] {
            let a = evolve_double_step(&inst, tau).unwrap();
            let b = evolve_full(&inst, &sched, tau, &EvolveOptions::default()).unwrap();
            assert!(
                (a.success_probability - b.success_probability).abs() < 1e-8,
                "tau={tau}: {} vs {}",
                a.success_probability,
                b.success_probability
            );
            assert!((a.survival - b.survival).abs() < 1e-8);
        }
    }

    #[test]
    fn full_zero_time_is_identity() {
        let inst = SearchInstance::gus(4, &[1]).unwrap();
        let r = evolve_full(
            &inst,
            &schedules::linear_schedule(),
            0.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        let diff = &r.final_state - &inst.psi_initial;
        assert!(linalg::norm2_c(&diff) < 1e-12);
    }

    #[test]
    fn reduced_zero_time_survival() {
        let inst = SearchInstance::gus(64, &[0]).unwrap();
        let r = evolve_reduced(
            &inst,
            &schedules::linear_schedule(),
            0.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.survival, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_matches_full_linear() {
        let inst = SearchInstance::gus(48, &[3, 17, 30]).unwrap();
        let sched = schedules::linear_schedule();
        let tau = 12.0;
        let a = evolve_full(&inst, &sched, tau, &EvolveOptions::default()).unwrap();
        let b = evolve_reduced(&inst, &sched, tau, &EvolveOptions::default()).unwrap();
        assert!((a.success_probability - b.success_probability).abs() < 1e-9);
        assert!((a.survival - b.survival).abs() < 1e-9);
        assert!((a.range_overlap - b.range_overlap).abs() < 1e-9);
        assert!(a.norm_drift < 1e-10 && b.norm_drift < 1e-10);
    }

    #[test]
    fn reduced_double_step_matches_closed_formula() {
        let inst = SearchInstance::gus(256, &[100]).unwrap();
        let sched = schedules::double_step_schedule(inst.e_final()).unwrap();
        let tau = 8.0;
        let r = evolve_reduced(&inst, &sched, tau, &EvolveOptions::default()).unwrap();
        assert_relative_eq!(
            r.success_amplitude,
            two_level_success(inst.overlaps.delta2, tau),
            epsilon = 1e-10
        );
    }

    #[test]
    fn adiabatic_error_decreases_with_tau() {
        let inst = SearchInstance::gus(16, &[6]).unwrap();
        let sched = schedules::smooth_bump_schedule();
        let dist = |tau: f64, steps: usize| {
            let r = evolve_reduced(
                &inst,
                &sched,
                tau,
                &EvolveOptions::with_steps(steps).no_validation(),
            )
            .unwrap();
            (1.0 - r.success_probability).max(0.0).sqrt()
        };
        let d2 = dist(100.0, 8_000);
        let d3 = dist(1_000.0, 80_000);
        assert!(d3 < d2, "dist(1e3)={d3} !< dist(1e2)={d2}");
    }

    #[test]
    fn survival_amplitude_two_weights() {
        let inst = SearchInstance::gus(4, &[2]).unwrap();
        for &t in &[0.0, 0.7, 3.1, 12.0] {
            let c = survival_amplitude(&inst, t);
            let expect = C64::new(0.25, 0.0) + C64::new(0.0, t).exp() * 0.75;
            assert!((c - expect).norm() < 1e-12);
        }
        assert!((survival_amplitude(&inst, 0.0) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn survival_amplitude_large_gus() {
        let marked: Vec<usize> = (0..16).collect();
        let inst = SearchInstance::gus(1024, &marked).unwrap();
        let c = survival_amplitude(&inst, std::f64::consts::PI);
        let expect = 1.0 / 64.0 - 63.0 / 64.0;
        assert!((c - C64::new(expect, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_shift_leaves_moduli_invariant() {
        // Shifting both operators by c·I multiplies ψ_τ by a global phase.
        let inst = SearchInstance::gus(12, &[2]).unwrap();
        let shift = C64::new(0.17, 0.0);
        let eye = Array2::<C64>::eye(12);
        let hi = crate::operators::HermitianOperator::new(
            inst.h_initial.matrix() + &eye.mapv(|z| z * shift),
        )
        .unwrap();
        let hf = crate::operators::HermitianOperator::new(
            inst.h_final.matrix() + &eye.mapv(|z| z * shift),
        )
        .unwrap();
        let sched = schedules::linear_schedule();
        let tau = 9.0;
        let opts = EvolveOptions::with_steps(4096).no_validation();
        let base = evolve_full(&inst, &sched, tau, &opts).unwrap();
        // Propagate the shifted pair directly with the same stepper.
        let shifted = propagate_blocks(
            hi.matrix(),
            hf.matrix(),
            &sched,
            tau,
            4096,
            &inst.psi_initial,
            1.2,
        );
        let weights = inst.spectral_final.weights(&shifted);
        assert!(
            (weights[0].sqrt() - base.success_amplitude).abs() < 1e-9,
            "success amplitude moved under identity shift"
        );
        let surv = linalg::inner_c(&inst.psi_initial, &shifted).norm();
        assert!((surv - base.survival).abs() < 1e-9);
    }

    #[test]
    fn two_level_first_maximum_location() {
        // First maximum of the success amplitude vs τ matches the analytic
        // rotation period within 1%.
        let inst = SearchInstance::gus(64, &[33]).unwrap();
        let d2 = inst.overlaps.delta2;
        let predicted = std::f64::consts::PI / d2; // θ = ατ δ₂ reaches π/2
        let mut best = (0.0, 0.0);
        let mut tau = predicted * 0.5;
        while tau < predicted * 1.5 {
            let r = evolve_double_step(&inst, tau).unwrap();
            if r.success_amplitude > best.1 {
                best = (tau, r.success_amplitude);
            }
            tau += predicted * 0.001;
        }
        assert!(
            (best.0 - predicted).abs() / predicted < 0.01,
            "first max at {} vs predicted {predicted}",
            best.0
        );
    }

    #[test]
    fn step_doubling_flags_coarse_runs() {
        let inst = SearchInstance::gus(16, &[1]).unwrap();
        let sched = schedules::smooth_bump_schedule();
        // Deliberately coarse: default steps at τ = 200 leave an error well
        // above the acceptance ladder.
        let r = evolve_reduced(&inst, &sched, 200.0, &EvolveOptions::default()).unwrap();
        assert!(r.error_estimate.is_some());
        assert!(r.degraded, "estimate {:?}", r.error_estimate);
        // And a tolerance-sized run clears the ladder.
        let fine =
            evolve_reduced(&inst, &sched, 200.0, &EvolveOptions::with_tolerance(1e-10)).unwrap();
        assert!(!fine.degraded, "estimate {:?}", fine.error_estimate);
    }
}
