//! Hermitian operators, spectral data, and search-instance assembly.
//!
//! A search instance pairs a calibrated initial Hamiltonian `H_I` (ground
//! state ψ_I, ground energy E_I) with a low-rank final Hamiltonian `H_F`
//! (rank m, negative ground energy E_F), and carries the overlap parameters
//!
//! * δ₁ = ‖H_F ψ_I‖, δ₂ = ‖P_F ψ_I‖, δ₃ = ‖Q_F ψ_I‖,
//! * δ₄ = ‖P_I Q_F‖, δ = ‖Q_I Q_F‖,
//!
//! where `P` are ground projections and `Q` range projections. Both
//! operators are rescaled to unit operator norm at assembly (with a
//! diagnostic) and `E_F ≥ 0` is rejected: flipping the sign of both
//! operators is a caller responsibility.

use ndarray::prelude::*;

use crate::error::Error;
use crate::linalg::{self, C64};
use crate::Result;

/// Default tolerance for clustering near-degenerate eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Calibration tolerance on ‖H‖ = 1.
pub const CALIBRATION_TOL: f64 = 1e-10;

/// A dense Hermitian matrix in dimensionless energy units.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: Array2<C64>,
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity (elementwise, 1e-12).
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c {
            return Err(Error::NotSquare { rows: r, cols: c });
        }
        let max_dev = linalg::hermitian_deviation(&matrix.view());
        if max_dev > linalg::HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                max_dev,
                tol: linalg::HERMITICITY_TOL,
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn view(&self) -> ArrayView2<'_, C64> {
        self.matrix.view()
    }

    /// Operator norm (largest eigenvalue magnitude).
    pub fn operator_norm(&self) -> Result<f64> {
        linalg::hermitian_norm(&self.matrix.view())
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.matrix.dot(v)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.mapv(|z| z * factor),
        }
    }
}

/// One distinct eigenvalue with an orthonormal basis of its eigenspace.
///
/// `basis` is `None` only for a cluster constructed analytically as the
/// complement of all the others (a huge kernel); anything that needs its
/// action goes through completeness identities instead.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
    pub basis: Option<Array2<C64>>,
}

/// Distinct eigenvalues (ascending) with orthogonal spectral projections.
#[derive(Debug, Clone)]
pub struct SpectralData {
    dim: usize,
    clusters: Vec<EigenCluster>,
}

impl SpectralData {
    /// Dense spectral decomposition with eigenvalues clustered into distinct
    /// values separated by more than `degeneracy_tol`.
    pub fn from_operator(op: &HermitianOperator, degeneracy_tol: f64) -> Result<Self> {
        let (vals, vecs) = linalg::eigh(&op.view())?;
        let n = op.dim();
        let mut clusters = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || vals[i] - vals[i - 1] > degeneracy_tol {
                let mult = i - start;
                let value = vals.slice(s![start..i]).sum() / mult as f64;
                let basis = vecs.slice(s![.., start..i]).to_owned();
                clusters.push(EigenCluster {
                    value,
                    multiplicity: mult,
                    basis: Some(basis),
                });
                start = i;
            }
        }
        Ok(Self { dim: n, clusters })
    }

    /// Assemble from known eigenvalue clusters; exactly one cluster may have
    /// an implicit (complement) basis.
    pub fn from_clusters(dim: usize, clusters: Vec<EigenCluster>) -> Result<Self> {
        let implicit = clusters.iter().filter(|c| c.basis.is_none()).count();
        if implicit > 1 {
            return Err(Error::BadSpec {
                reason: "at most one implicit eigencluster is supported".into(),
            });
        }
        let total: usize = clusters.iter().map(|c| c.multiplicity).sum();
        if total != dim {
            return Err(Error::BadSpec {
                reason: format!("cluster multiplicities sum to {total}, dim is {dim}"),
            });
        }
        let mut sorted = clusters;
        sorted.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
        Ok(Self { dim, clusters: sorted })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn clusters(&self) -> &[EigenCluster] {
        &self.clusters
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    pub fn ground_energy(&self) -> f64 {
        self.clusters[0].value
    }

    pub fn ground(&self) -> &EigenCluster {
        &self.clusters[0]
    }

    /// E₂ - E₁ over distinct eigenvalues.
    pub fn first_gap(&self) -> f64 {
        if self.clusters.len() < 2 {
            0.0
        } else {
            self.clusters[1].value - self.clusters[0].value
        }
    }

    /// Operator norm from the spectrum.
    pub fn norm(&self) -> f64 {
        self.clusters
            .iter()
            .fold(0.0f64, |m, c| m.max(c.value.abs()))
    }

    /// Index of the zero-eigenvalue cluster, if any.
    pub fn zero_cluster(&self, tol: f64) -> Option<usize> {
        self.clusters.iter().position(|c| c.value.abs() <= tol)
    }

    /// Rank of the operator = dim minus kernel multiplicity.
    pub fn rank(&self, tol: f64) -> usize {
        self.dim
            - self
                .zero_cluster(tol)
                .map(|i| self.clusters[i].multiplicity)
                .unwrap_or(0)
    }

    /// ‖P_i v‖² for every cluster, implicit clusters via completeness.
    pub fn weights(&self, v: &Array1<C64>) -> Vec<f64> {
        let total = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut out = vec![0.0; self.clusters.len()];
        let mut explicit_sum = 0.0;
        let mut implicit_idx = None;
        for (i, c) in self.clusters.iter().enumerate() {
            match &c.basis {
                Some(b) => {
                    let coeffs = linalg::conj_t(&b.view()).dot(v);
                    let w = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>();
                    out[i] = w;
                    explicit_sum += w;
                }
                None => implicit_idx = Some(i),
            }
        }
        if let Some(i) = implicit_idx {
            out[i] = (total - explicit_sum).max(0.0);
        }
        out
    }

    /// Apply the spectral projection of cluster `i` (explicit basis only).
    pub fn project(&self, i: usize, v: &Array1<C64>) -> Result<Array1<C64>> {
        match &self.clusters[i].basis {
            Some(b) => {
                let coeffs = linalg::conj_t(&b.view()).dot(v);
                Ok(b.dot(&coeffs))
            }
            None => {
                // complement of all explicit clusters
                let mut acc = v.clone();
                for c in &self.clusters {
                    if let Some(b) = &c.basis {
                        let coeffs = linalg::conj_t(&b.view()).dot(v);
                        acc -= &b.dot(&coeffs);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// ‖P_ground v‖.
    pub fn ground_overlap(&self, v: &Array1<C64>) -> f64 {
        self.weights(v)[0].sqrt()
    }

    /// Orthonormal basis of the operator range (all nonzero clusters).
    /// Errors if a nonzero cluster is implicit.
    pub fn range_basis(&self, tol: f64) -> Result<Array2<C64>> {
        let cols: usize = self
            .clusters
            .iter()
            .filter(|c| c.value.abs() > tol)
            .map(|c| c.multiplicity)
            .sum();
        let mut out = Array2::<C64>::zeros((self.dim, cols));
        let mut at = 0;
        for c in &self.clusters {
            if c.value.abs() <= tol {
                continue;
            }
            let b = c.basis.as_ref().ok_or_else(|| Error::BadSpec {
                reason: "nonzero eigencluster stored implicitly".into(),
            })?;
            out.slice_mut(s![.., at..at + c.multiplicity]).assign(b);
            at += c.multiplicity;
        }
        Ok(out)
    }

    /// Eigenvalue labels matching the columns of [`Self::range_basis`].
    pub fn range_labels(&self, tol: f64) -> Vec<f64> {
        let mut labels = Vec::new();
        for c in &self.clusters {
            if c.value.abs() > tol {
                labels.extend(std::iter::repeat_n(c.value, c.multiplicity));
            }
        }
        labels
    }

    /// Dense projector matrix of cluster `i` (tests and small dims).
    pub fn projector_matrix(&self, i: usize) -> Result<Array2<C64>> {
        match &self.clusters[i].basis {
            Some(b) => Ok(b.dot(&linalg::conj_t(&b.view()))),
            None => {
                let mut acc = Array2::<C64>::eye(self.dim);
                for c in &self.clusters {
                    if let Some(b) = &c.basis {
                        acc -= &b.dot(&linalg::conj_t(&b.view()));
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Σ E_i P_i, for reassembly checks.
    pub fn reassemble(&self) -> Result<Array2<C64>> {
        let mut acc = Array2::<C64>::zeros((self.dim, self.dim));
        for i in 0..self.clusters.len() {
            let p = self.projector_matrix(i)?;
            acc.scaled_add(C64::new(self.clusters[i].value, 0.0), &p);
        }
        Ok(acc)
    }
}

/// Spectral decomposition with distinct-value clustering.
///
/// The input must be Hermitian within the elementwise tolerance checked by
/// [`HermitianOperator::new`].
pub fn spectral_decompose(op: &HermitianOperator, degeneracy_tol: f64) -> Result<SpectralData> {
    SpectralData::from_operator(op, degeneracy_tol)
}

/// The overlap parameters between ψ_I and the spectral objects of H_F.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Overlaps {
    /// ‖H_F ψ_I‖
    pub delta1: f64,
    /// ‖P_F ψ_I‖
    pub delta2: f64,
    /// ‖Q_F ψ_I‖
    pub delta3: f64,
    /// ‖P_I Q_F‖
    pub delta4: f64,
    /// ‖Q_I Q_F‖
    pub delta: f64,
}

/// Calibration diagnostic attached when an operator had to be rescaled to
/// unit norm at assembly.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Calibration {
    pub rescaled: bool,
    pub original_norm: f64,
}

/// An assembled search instance: operators, spectral data, overlaps.
#[derive(Debug, Clone)]
pub struct SearchInstance {
    pub dim: usize,
    pub h_initial: HermitianOperator,
    pub h_final: HermitianOperator,
    pub rank_final: usize,
    pub spectral_initial: SpectralData,
    pub spectral_final: SpectralData,
    pub overlaps: Overlaps,
    pub psi_initial: Array1<C64>,
    pub calibration_initial: Calibration,
    pub calibration_final: Calibration,
    /// (E_i^f - E_F, ‖P_i ψ_I‖²) per distinct eigenvalue of H_F, for the
    /// survival amplitude.
    survival_spectrum: Vec<(f64, f64)>,
    degeneracy_tol: f64,
}

impl SearchInstance {
    pub fn e_initial(&self) -> f64 {
        self.spectral_initial.ground_energy()
    }

    pub fn e_final(&self) -> f64 {
        self.spectral_final.ground_energy()
    }

    /// g_I = E₂ⁱ - E_I.
    pub fn g_initial(&self) -> f64 {
        self.spectral_initial.first_gap()
    }

    /// g_F = E₂ᶠ - E₁ᶠ.
    pub fn g_final(&self) -> f64 {
        self.spectral_final.first_gap()
    }

    /// Rank of P_F (final ground multiplicity m₁).
    pub fn m1(&self) -> usize {
        self.spectral_final.ground().multiplicity
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn survival_spectrum(&self) -> &[(f64, f64)] {
        &self.survival_spectrum
    }

    /// ‖Q_F ψ_I‖·√(N/m): equals 1 exactly for a uniform ground state over a
    /// GUS marked space, the calibration behind the "generic H_I" notion.
    pub fn generic_diagnostic(&self) -> f64 {
        self.overlaps.delta3 * (self.dim as f64 / self.rank_final as f64).sqrt()
    }
}

/// H_F = -Σ_{x ∈ marked} |x⟩⟨x| for the generalized unstructured search.
pub fn build_grover_final(dim: usize, marked: &[usize]) -> Result<HermitianOperator> {
    if marked.is_empty() {
        return Err(Error::EmptyMarkedSet);
    }
    let mut uniq: Vec<usize> = marked.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    if let Some(&bad) = uniq.iter().find(|&&i| i >= dim) {
        return Err(Error::MarkedIndexOutOfRange { index: bad, dim });
    }
    if uniq.len() >= dim {
        return Err(Error::MarkedSetFull {
            marked: uniq.len(),
            dim,
        });
    }
    let mut m = Array2::<C64>::zeros((dim, dim));
    for &i in &uniq {
        m[[i, i]] = C64::new(-1.0, 0.0);
    }
    HermitianOperator::new(m)
}

/// H_I = -|ψ_I⟩⟨ψ_I| with the uniform ψ_I; returns the operator and ψ_I.
pub fn build_uniform_initial(dim: usize) -> Result<(HermitianOperator, Array1<C64>)> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let amp = 1.0 / (dim as f64).sqrt();
    let psi = Array1::from_elem(dim, C64::new(amp, 0.0));
    let mut m = Array2::<C64>::zeros((dim, dim));
    let v = -amp * amp;
    m.fill(C64::new(v, 0.0));
    Ok((HermitianOperator::new(m)?, psi))
}

/// H_F = Σ λ_k |v_k⟩⟨v_k| from explicit eigenpairs. The spectrum is rescaled
/// so that max |λ| = 1; the smallest eigenvalue must be negative and the
/// vectors orthonormal to 1e-10.
pub fn build_general_lowrank_final(
    dim: usize,
    eigenpairs: &[(f64, Array1<C64>)],
) -> Result<HermitianOperator> {
    if eigenpairs.is_empty() || eigenpairs.iter().all(|(l, _)| *l == 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    for (_, v) in eigenpairs {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { len: v.len(), dim });
        }
    }
    let mut max_dev: f64 = 0.0;
    for (i, (_, vi)) in eigenpairs.iter().enumerate() {
        for (j, (_, vj)) in eigenpairs.iter().enumerate() {
            let g = linalg::inner_c(vi, vj);
            let expect = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((g - C64::new(expect, 0.0)).norm());
        }
    }
    if max_dev > 1e-10 {
        return Err(Error::NotOrthonormal { max_dev });
    }
    let max_abs = eigenpairs.iter().fold(0.0f64, |m, (l, _)| m.max(l.abs()));
    let min_val = eigenpairs
        .iter()
        .fold(f64::INFINITY, |m, (l, _)| m.min(*l / max_abs));
    if min_val >= 0.0 {
        return Err(Error::GroundNotNegative { value: min_val });
    }
    let mut m = Array2::<C64>::zeros((dim, dim));
    for (l, v) in eigenpairs {
        let lam = C64::new(l / max_abs, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] += lam * v[i] * v[j].conj();
            }
        }
    }
    HermitianOperator::new(m)
}

/// (1 - f)·H_I + f·H_F for f ∈ [0, 1].
pub fn interpolate(instance: &SearchInstance, f_value: f64) -> Result<HermitianOperator> {
    interpolate_pair(&instance.h_initial, &instance.h_final, f_value)
}

/// Schedule-value interpolation of two bare operators.
pub fn interpolate_pair(
    h_initial: &HermitianOperator,
    h_final: &HermitianOperator,
    f_value: f64,
) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&f_value) {
        return Err(Error::InterpolationOutOfRange { value: f_value });
    }
    let a = C64::new(1.0 - f_value, 0.0);
    let b = C64::new(f_value, 0.0);
    let m = h_initial.matrix().mapv(|z| z * a) + h_final.matrix().mapv(|z| z * b);
    HermitianOperator::new(m)
}

fn calibrate(
    op: HermitianOperator,
    spectral: SpectralData,
) -> (HermitianOperator, SpectralData, Calibration) {
    let norm = spectral.norm();
    if (norm - 1.0).abs() <= CALIBRATION_TOL {
        return (
            op,
            spectral,
            Calibration {
                rescaled: false,
                original_norm: norm,
            },
        );
    }
    let factor = 1.0 / norm;
    let mut clusters = spectral.clusters.clone();
    for c in &mut clusters {
        c.value *= factor;
    }
    (
        op.scaled(factor),
        SpectralData {
            dim: spectral.dim,
            clusters,
        },
        Calibration {
            rescaled: true,
            original_norm: norm,
        },
    )
}

/// Assemble a search instance from bare operators via dense spectral
/// decompositions. Operators with ‖H‖ ≠ 1 are rescaled (recorded in the
/// calibration diagnostics); E_F ≥ 0 is rejected.
pub fn assemble_instance(
    h_initial: HermitianOperator,
    h_final: HermitianOperator,
) -> Result<SearchInstance> {
    assemble_instance_with(h_initial, h_final, DEGENERACY_TOL)
}

pub fn assemble_instance_with(
    h_initial: HermitianOperator,
    h_final: HermitianOperator,
    degeneracy_tol: f64,
) -> Result<SearchInstance> {
    if h_initial.dim() != h_final.dim() {
        return Err(Error::DimensionMismatch {
            len: h_final.dim(),
            dim: h_initial.dim(),
        });
    }
    let spec_i = SpectralData::from_operator(&h_initial, degeneracy_tol)?;
    let spec_f = SpectralData::from_operator(&h_final, degeneracy_tol)?;
    assemble_from_parts(h_initial, spec_i, h_final, spec_f, degeneracy_tol)
}

fn assemble_from_parts(
    h_initial: HermitianOperator,
    spec_i: SpectralData,
    h_final: HermitianOperator,
    spec_f: SpectralData,
    degeneracy_tol: f64,
) -> Result<SearchInstance> {
    let dim = h_initial.dim();
    let (h_initial, spec_i, cal_i) = calibrate(h_initial, spec_i);
    let (h_final, spec_f, cal_f) = calibrate(h_final, spec_f);

    let e_f = spec_f.ground_energy();
    if e_f >= 0.0 {
        return Err(Error::FinalGroundNotNegative { e_f });
    }

    // ψ_I: any unit vector of the initial ground cluster. For degenerate
    // initial ground spaces the first basis column is taken.
    let psi = match &spec_i.ground().basis {
        Some(b) => b.column(0).to_owned(),
        None => {
            return Err(Error::BadSpec {
                reason: "initial ground cluster must have an explicit basis".into(),
            })
        }
    };
    let resid = {
        let hv = h_initial.apply(&psi);
        let ev = psi.mapv(|z| z * spec_i.ground_energy());
        linalg::norm2_c(&(&hv - &ev))
    };
    if resid > 1e-10 {
        return Err(Error::BadSpec {
            reason: format!("psi_I fails the ground-state residual check: {resid:.3e}"),
        });
    }

    let rank_final = spec_f.rank(degeneracy_tol);

    let delta1 = linalg::norm2_c(&h_final.apply(&psi));
    let wts_f = spec_f.weights(&psi);
    let delta2 = wts_f[0].sqrt();
    let range_f = spec_f.range_basis(degeneracy_tol)?;
    let delta3 = {
        let coords = linalg::conj_t(&range_f.view()).dot(&psi);
        coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    // ‖P_I Q_F‖ = σ_max(V_I† V_F) for orthonormal column blocks.
    let vi = spec_i.ground().basis.as_ref().unwrap();
    let cross_pi = linalg::conj_t(&vi.view()).dot(&range_f);
    let delta4 = linalg::sigma_max(&cross_pi.view())?;
    // ‖Q_I Q_F‖ over the range of H_I.
    let range_i = spec_i.range_basis(degeneracy_tol)?;
    let cross_qi = linalg::conj_t(&range_i.view()).dot(&range_f);
    let delta = linalg::sigma_max(&cross_qi.view())?;

    // Consistency of the overlap chain (see module docs): δ₂ ≤ δ₃, δ₁ ≤ δ₃.
    let tol = 1e-10;
    if delta2 > delta3 + tol || delta1 > delta3 + tol || delta3 > 1.0 + tol {
        return Err(Error::BadSpec {
            reason: format!(
                "overlap ordering violated: d1={delta1} d2={delta2} d3={delta3}"
            ),
        });
    }

    let survival_spectrum: Vec<(f64, f64)> = spec_f
        .eigenvalues()
        .iter()
        .zip(wts_f.iter())
        .map(|(e, w)| (e - e_f, *w))
        .collect();

    Ok(SearchInstance {
        dim,
        h_initial,
        h_final,
        rank_final,
        spectral_initial: spec_i,
        spectral_final: spec_f,
        overlaps: Overlaps {
            delta1,
            delta2,
            delta3,
            delta4,
            delta,
        },
        psi_initial: psi,
        calibration_initial: cal_i,
        calibration_final: cal_f,
        survival_spectrum,
        degeneracy_tol,
    })
}

impl SearchInstance {
    /// Uniform-initial GUS instance with analytic spectral data. Avoids the
    /// dense eigensolves of [`assemble_instance`]; the two paths are checked
    /// against each other in the test suite.
    pub fn gus(dim: usize, marked: &[usize]) -> Result<Self> {
        let (h_i, psi) = build_uniform_initial(dim)?;
        let h_f = build_grover_final(dim, marked)?;
        let mut uniq: Vec<usize> = marked.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let m = uniq.len();

        let psi_mat = {
            let mut b = Array2::<C64>::zeros((dim, 1));
            b.column_mut(0).assign(&psi);
            b
        };
        let spec_i = SpectralData::from_clusters(
            dim,
            vec![
                EigenCluster {
                    value: -1.0,
                    multiplicity: 1,
                    basis: Some(psi_mat),
                },
                EigenCluster {
                    value: 0.0,
                    multiplicity: dim - 1,
                    basis: None,
                },
            ],
        )?;
        let mut marked_basis = Array2::<C64>::zeros((dim, m));
        for (col, &idx) in uniq.iter().enumerate() {
            marked_basis[[idx, col]] = C64::new(1.0, 0.0);
        }
        let spec_f = SpectralData::from_clusters(
            dim,
            vec![
                EigenCluster {
                    value: -1.0,
                    multiplicity: m,
                    basis: Some(marked_basis),
                },
                EigenCluster {
                    value: 0.0,
                    multiplicity: dim - m,
                    basis: None,
                },
            ],
        )?;
        assemble_from_parts(h_i, spec_i, h_f, spec_f, DEGENERACY_TOL)
    }

    /// Rank-one uniform initial paired with an arbitrary low-rank final
    /// operator, assembled via dense decomposition of H_F only.
    pub fn with_uniform_initial(h_final: HermitianOperator) -> Result<Self> {
        let dim = h_final.dim();
        let (h_i, psi) = build_uniform_initial(dim)?;
        let psi_mat = {
            let mut b = Array2::<C64>::zeros((dim, 1));
            b.column_mut(0).assign(&psi);
            b
        };
        let spec_i = SpectralData::from_clusters(
            dim,
            vec![
                EigenCluster {
                    value: -1.0,
                    multiplicity: 1,
                    basis: Some(psi_mat),
                },
                EigenCluster {
                    value: 0.0,
                    multiplicity: dim - 1,
                    basis: None,
                },
            ],
        )?;
        let spec_f = SpectralData::from_operator(&h_final, DEGENERACY_TOL)?;
        assemble_from_parts(h_i, spec_i, h_final, spec_f, DEGENERACY_TOL)
    }
}
