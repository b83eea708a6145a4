//! Gap profiles along the interpolation path and the Krein-formula gap
//! certificate.
//!
//! The gap profile samples the two lowest distinct eigenvalues of
//! `H(s) = (1-f(s)) H_I + f(s) H_F` on a grid and refines the minimum by
//! golden section. Small dimensions use full dense eigensolves; large ones
//! use Lanczos on the dense matrix for the bottom of the spectrum.
//!
//! The certificate works on the m×m compressed resolvent
//! `K(E) = Q_F (H_I - E)^{-1} Q_F`, evaluated spectrally from the instance
//! data as `Σ_i M_i / (E_i - E)` with `M_i = V_F† P_i V_F`. Eigenvalues of
//! `H_I + t H_F` away from σ(H_I) are the roots of
//! `det(K⁻¹(E) + t H_F) = 0`; the located object here is the equivalent
//! `h(E) = det(I + t K(E) H_F)`, which is real for real E and stays smooth
//! across the zeros of K where K⁻¹ blows up. Root existence on either side
//! of E_I is the content of the gap bound g ≤ 10 δ₄.

use ndarray::prelude::*;

use crate::error::Error;
use crate::linalg::{self, C64};
use crate::numeric;
use crate::operators::SearchInstance;
use crate::schedules::Schedule;
use crate::Result;

/// Krein parameter map t = s/(1-s).
pub fn s_to_t(s: f64) -> f64 {
    s / (1.0 - s)
}

/// Inverse map s = t/(1+t).
pub fn t_to_s(t: f64) -> f64 {
    t / (1.0 + t)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GapSample {
    pub s: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
}

/// Sampled eigenvalue curves and the located minimum gap.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GapProfile {
    pub samples: Vec<GapSample>,
    pub min_gap: f64,
    pub min_location: f64,
    pub grid_points: usize,
    /// Width of the final golden-section bracket in s.
    pub refine_tol: f64,
}

/// Distance from the lowest eigenvalue to the nearest distinct one above,
/// given ascending eigenvalues.
fn distinct_gap(vals: &[f64], cluster_tol: f64) -> (f64, f64, f64) {
    let lambda1 = vals[0];
    for &v in &vals[1..] {
        if v - lambda1 > cluster_tol {
            return (lambda1, v, v - lambda1);
        }
    }
    (lambda1, lambda1, 0.0)
}

fn gap_at(
    instance: &SearchInstance,
    schedule: &Schedule,
    s: f64,
    cluster_tol: f64,
) -> Result<(f64, f64, f64)> {
    let f = schedule.value(s);
    let (ca, cb) = (C64::new(1.0 - f, 0.0), C64::new(f, 0.0));
    let h = instance.h_initial.matrix().mapv(|z| z * ca)
        + instance.h_final.matrix().mapv(|z| z * cb);
    let vals = linalg::lowest_eigenvalues(&h.view(), 6, 1e-11)?;
    Ok(distinct_gap(&vals, cluster_tol))
}

/// Eigensolve H(s) on a uniform grid and golden-section refine around the
/// coarse minimum (default target 1e-6 in s).
pub fn gap_profile(
    instance: &SearchInstance,
    schedule: &Schedule,
    grid_points: usize,
) -> Result<GapProfile> {
    gap_profile_with(instance, schedule, grid_points, 1e-6)
}

pub fn gap_profile_with(
    instance: &SearchInstance,
    schedule: &Schedule,
    grid_points: usize,
    refine_tol: f64,
) -> Result<GapProfile> {
    if grid_points < 16 {
        return Err(Error::GridTooCoarse {
            got: grid_points,
            min: 16,
        });
    }
    let cluster_tol = instance.degeneracy_tol();
    let mut samples = Vec::with_capacity(grid_points);
    let mut min_idx = 0;
    for i in 0..grid_points {
        let s = i as f64 / (grid_points - 1) as f64;
        let (l1, l2, gap) = gap_at(instance, schedule, s, cluster_tol)?;
        samples.push(GapSample {
            s,
            lambda1: l1,
            lambda2: l2,
            gap,
        });
        if gap < samples[min_idx].gap {
            min_idx = i;
        }
    }
    let lo = if min_idx == 0 { 0.0 } else { samples[min_idx - 1].s };
    let hi = if min_idx + 1 == grid_points {
        1.0
    } else {
        samples[min_idx + 1].s
    };
    let mut failure: Option<Error> = None;
    let (s_min, g_min) = numeric::golden_section_min(
        |s| match gap_at(instance, schedule, s, cluster_tol) {
            Ok((_, _, g)) => g,
            Err(e) => {
                failure = Some(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        refine_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (min_gap, min_location) = if g_min <= samples[min_idx].gap {
        (g_min, s_min)
    } else {
        (samples[min_idx].gap, samples[min_idx].s)
    };
    Ok(GapProfile {
        samples,
        min_gap,
        min_location,
        grid_points,
        refine_tol,
    })
}

/// The compressed resolvent K(E) and its decomposition, cached per
/// instance.
pub struct KreinOperator<'a> {
    instance: &'a SearchInstance,
    /// H_F eigenvalues on the range basis (length m).
    labels: Vec<f64>,
    /// (E_i of H_I, M_i = V_F† P_i V_F).
    blocks: Vec<(f64, Array2<C64>)>,
    ground_idx: usize,
    m: usize,
}

impl<'a> KreinOperator<'a> {
    pub fn new(instance: &'a SearchInstance) -> Result<Self> {
        let tol = instance.degeneracy_tol();
        let v_f = instance.spectral_final.range_basis(tol)?;
        let labels = instance.spectral_final.range_labels(tol);
        let m = labels.len();
        let clusters = instance.spectral_initial.clusters();
        let mut blocks = Vec::with_capacity(clusters.len());
        let mut implicit: Option<usize> = None;
        for (i, c) in clusters.iter().enumerate() {
            match &c.basis {
                Some(b) => {
                    let g = linalg::conj_t(&b.view()).dot(&v_f);
                    let block = linalg::conj_t(&g.view()).dot(&g);
                    blocks.push((c.value, block));
                }
                None => {
                    implicit = Some(i);
                    blocks.push((c.value, Array2::zeros((m, m))));
                }
            }
        }
        if let Some(idx) = implicit {
            let mut acc = Array2::<C64>::eye(m);
            for (i, (_, b)) in blocks.iter().enumerate() {
                if i != idx {
                    acc -= b;
                }
            }
            blocks[idx].1 = acc;
        }
        Ok(Self {
            instance,
            labels,
            blocks,
            ground_idx: 0,
            m,
        })
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    fn pole_distance(&self, e: f64) -> f64 {
        self.blocks
            .iter()
            .map(|(ei, _)| (ei - e).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// K(E) = Σ_i M_i / (E_i - E).
    pub fn k_at(&self, e: f64) -> Result<Array2<C64>> {
        let dist = self.pole_distance(e);
        if dist <= 1e-10 {
            return Err(Error::ResolventPole { e, dist });
        }
        let mut acc = Array2::<C64>::zeros((self.m, self.m));
        for (ei, block) in &self.blocks {
            acc.scaled_add(C64::new(1.0 / (ei - e), 0.0), block);
        }
        Ok(acc)
    }

    /// K̂(E): the ground-cluster term removed.
    pub fn k_hat_at(&self, e: f64) -> Result<Array2<C64>> {
        let dist = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.ground_idx)
            .map(|(_, (ei, _))| (ei - e).abs())
            .fold(f64::INFINITY, f64::min);
        if dist <= 1e-10 {
            return Err(Error::ResolventPole { e, dist });
        }
        let mut acc = Array2::<C64>::zeros((self.m, self.m));
        for (i, (ei, block)) in self.blocks.iter().enumerate() {
            if i != self.ground_idx {
                acc.scaled_add(C64::new(1.0 / (ei - e), 0.0), block);
            }
        }
        Ok(acc)
    }

    /// D = M_ground / δ₄² (positive semidefinite, ‖D‖ ≤ 1).
    pub fn d_matrix(&self) -> Array2<C64> {
        let d4 = self.instance.overlaps.delta4;
        self.blocks[self.ground_idx]
            .1
            .mapv(|z| z / C64::new(d4 * d4, 0.0))
    }

    /// H_F restricted to its range, diag(labels).
    pub fn hf_range(&self) -> Array2<C64> {
        Array2::from_diag(
            &self
                .labels
                .iter()
                .map(|&l| C64::new(l, 0.0))
                .collect::<Array1<C64>>(),
        )
    }

    /// h(E) = det(I + t K(E) H_F), real for real E; its roots in E are the
    /// eigenvalues of H_I + t H_F away from σ(H_I).
    pub fn char_det(&self, t: f64, e: f64) -> Result<f64> {
        let k = self.k_at(e)?;
        let mut w = Array2::<C64>::eye(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                // (t K H_F)_{ij} = t K_{ij} label_j
                w[[i, j]] += k[[i, j]] * C64::new(t * self.labels[j], 0.0);
            }
        }
        let det = det_complex(&w);
        debug_assert!(
            det.im.abs() <= 1e-8 * (1.0 + det.re.abs()),
            "char_det imaginary residual {}",
            det.im
        );
        Ok(det.re)
    }

    /// Number of negative eigenvalues of K⁻¹(E) + t H_F (the inertia used
    /// by the signature argument).
    pub fn negative_inertia(&self, t: f64, e: f64) -> Result<usize> {
        let k = self.k_at(e)?;
        let (vals, vecs) = linalg::eigh(&k.view())?;
        if vals.iter().any(|v| v.abs() < 1e-14) {
            return Err(Error::Linalg(format!("K({e}) numerically singular")));
        }
        let inv_diag = Array2::from_diag(
            &vals
                .iter()
                .map(|&v| C64::new(1.0 / v, 0.0))
                .collect::<Array1<C64>>(),
        );
        let k_inv = vecs.dot(&inv_diag).dot(&linalg::conj_t(&vecs.view()));
        let w = &k_inv + &self.hf_range().mapv(|z| z * C64::new(t, 0.0));
        let wvals = linalg::eigvalsh(&w.view())?;
        Ok(wvals.iter().filter(|&&v| v < 0.0).count())
    }
}

/// Determinant of a small complex matrix by partial-pivot elimination.
fn det_complex(a: &Array2<C64>) -> C64 {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[[col, col]].norm();
        for r in col + 1..n {
            let v = m[[r, col]].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in 0..n {
                let tmp = m[[col, c]];
                m[[col, c]] = m[[pivot, c]];
                m[[pivot, c]] = tmp;
            }
            det = -det;
        }
        let p = m[[col, col]];
        det *= p;
        for r in col + 1..n {
            let factor = m[[r, col]] / p;
            for c in col..n {
                let sub = factor * m[[col, c]];
                m[[r, c]] -= sub;
            }
        }
    }
    det
}

/// K(E) as an m×m matrix on an orthonormal basis of Range H_F.
pub fn krein_k(instance: &SearchInstance, e: f64) -> Result<Array2<C64>> {
    KreinOperator::new(instance)?.k_at(e)
}

/// The decomposition K(E) = K̂(E) + δ₄² D/(E_I - E), valid in the strip
/// |E - E_I| ≤ g_I/2 with E ≠ E_I.
pub fn decompose_k(instance: &SearchInstance, e: f64) -> Result<(Array2<C64>, Array2<C64>)> {
    let e_i = instance.e_initial();
    let g_i = instance.g_initial();
    if (e - e_i).abs() > g_i / 2.0 + 1e-12 {
        return Err(Error::OutsideStrip { e });
    }
    if (e - e_i).abs() <= 1e-10 {
        return Err(Error::ResolventPole {
            e,
            dist: (e - e_i).abs(),
        });
    }
    let ctx = KreinOperator::new(instance)?;
    Ok((ctx.k_hat_at(e)?, ctx.d_matrix()))
}

/// Crossing times t_j = -1/λ_j over the negative eigenvalues λ_j of
/// A^{1/2} H_F A^{1/2} with A = K̂(E_I); ascending, with their count m₊.
pub fn crossing_times(instance: &SearchInstance) -> Result<(Vec<f64>, usize)> {
    let ctx = KreinOperator::new(instance)?;
    crossing_times_ctx(&ctx)
}

fn crossing_times_ctx(ctx: &KreinOperator<'_>) -> Result<(Vec<f64>, usize)> {
    let e_i = ctx.instance.e_initial();
    let a = ctx.k_hat_at(e_i)?;
    let (vals, vecs) = linalg::eigh(&a.view())?;
    if vals[0] <= 1e-12 {
        return Err(Error::NotPositiveDefinite { min_eig: vals[0] });
    }
    let sqrt_diag = Array2::from_diag(
        &vals
            .iter()
            .map(|&v| C64::new(v.sqrt(), 0.0))
            .collect::<Array1<C64>>(),
    );
    let a_sqrt = vecs.dot(&sqrt_diag).dot(&linalg::conj_t(&vecs.view()));
    let s = a_sqrt.dot(&ctx.hf_range()).dot(&a_sqrt);
    let svals = linalg::eigvalsh(&s.view())?;
    let mut times: Vec<f64> = svals
        .iter()
        .filter(|&&v| v < 0.0)
        .map(|&v| -1.0 / v)
        .collect();
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let m_plus = times.len();
    Ok((times, m_plus))
}

/// Root evidence for one crossing time.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CrossingEvidence {
    pub t: f64,
    /// s = t/(1+t).
    pub s: f64,
    /// Root of det(K⁻¹(E) + t H_F) located in [E_I - β, E_I).
    pub root_below: Option<f64>,
    /// Root located in (E_I, E_I + β].
    pub root_above: Option<f64>,
    /// (root_above - root_below)/(1 + t): an upper bound for the minimal
    /// gap of H(s) contributed by this crossing.
    pub gap_bound: Option<f64>,
    /// Negative-eigenvalue counts of K⁻¹(E)+tH_F at E_I-β and E_I+0: the
    /// signature chain behind the root existence argument.
    pub inertia_below_far: usize,
    pub inertia_above_near: usize,
}

/// The Theorem-4-style certificate report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KreinReport {
    /// Eigenvalues of A = K̂(E_I) (the m×m compressed reduced resolvent).
    pub a_eigenvalues: Vec<f64>,
    pub crossing_times: Vec<f64>,
    pub m_plus: usize,
    pub beta: f64,
    pub delta4: f64,
    pub g_initial: f64,
    /// g_I > 10 δ₄; certification is only asserted when true.
    pub hypothesis_ok: bool,
    /// β < 5 δ₄ (the constant claimed by the bound's proof; recorded, not
    /// assumed).
    pub beta_within_5_delta4: bool,
    /// The advertised envelope 10 δ₄.
    pub certified_bound: f64,
    /// min_j (root_above - root_below)/(1+t_j): the sharpest numeric bound
    /// the located roots support.
    pub certified_numeric: Option<f64>,
    pub bracketing: Vec<CrossingEvidence>,
    /// True when the hypothesis holds, every crossing produced both roots,
    /// and the numeric bound is within the advertised envelope.
    pub certified: bool,
    /// Dense minimum gap used for the cross-check, when supplied.
    pub dense_min_gap: Option<f64>,
}

/// β = 2 (δ₄² / (4/(4+g_I)² - δ₄²))^{1/2}.
pub fn beta_parameter(instance: &SearchInstance) -> f64 {
    let d4 = instance.overlaps.delta4;
    let g_i = instance.g_initial();
    let denom = 4.0 / (4.0 + g_i).powi(2) - d4 * d4;
    2.0 * (d4 * d4 / denom).sqrt()
}

fn locate_root(
    ctx: &KreinOperator<'_>,
    t: f64,
    lo: f64,
    hi: f64,
    scan: usize,
) -> Result<Option<f64>> {
    let mut prev_e = lo;
    let mut prev_h = ctx.char_det(t, prev_e)?;
    if prev_h == 0.0 {
        return Ok(Some(prev_e));
    }
    for i in 1..=scan {
        let e = lo + (hi - lo) * i as f64 / scan as f64;
        let h = ctx.char_det(t, e)?;
        if h == 0.0 {
            return Ok(Some(e));
        }
        if (h < 0.0) != (prev_h < 0.0) {
            let mut failure: Option<Error> = None;
            let root = numeric::bisect_root(
                |x| match ctx.char_det(t, x) {
                    Ok(v) => v,
                    Err(err) => {
                        failure = Some(err);
                        0.0
                    }
                },
                prev_e,
                e,
                1e-10,
            );
            if let Some(err) = failure {
                return Err(err);
            }
            return Ok(Some(root));
        }
        prev_e = e;
        prev_h = h;
    }
    Ok(None)
}

/// Certify the minimal-gap upper bound g ≤ 10 δ₄ by locating, for every
/// crossing time, roots of the Krein condition on both sides of E_I within
/// β. Hypothesis failure (g_I ≤ 10 δ₄) demotes the report to advisory: all
/// quantities are still computed, nothing is asserted.
pub fn certify_gap_bound(
    instance: &SearchInstance,
    dense: Option<&GapProfile>,
) -> Result<KreinReport> {
    let ctx = KreinOperator::new(instance)?;
    let d4 = instance.overlaps.delta4;
    let g_i = instance.g_initial();
    let e_i = instance.e_initial();
    let beta = beta_parameter(instance);
    let hypothesis_ok = g_i > 10.0 * d4;
    let (times, m_plus) = crossing_times_ctx(&ctx)?;
    let a_eigenvalues = {
        let a = ctx.k_hat_at(e_i)?;
        linalg::eigvalsh(&a.view())?.to_vec()
    };

    let eta = 1e-7 * g_i;
    let mut bracketing = Vec::with_capacity(times.len());
    let mut certified_numeric: Option<f64> = None;
    let mut all_bracketed = true;
    for &t in &times {
        let root_below = locate_root(&ctx, t, e_i - beta, e_i - eta, 64)?;
        let root_above = locate_root(&ctx, t, e_i + eta, e_i + beta, 256)?;
        let gap_bound = match (root_below, root_above) {
            (Some(lo), Some(hi)) => Some((hi - lo) / (1.0 + t)),
            _ => None,
        };
        if let Some(g) = gap_bound {
            certified_numeric = Some(certified_numeric.map_or(g, |c: f64| c.min(g)));
        } else {
            all_bracketed = false;
        }
        bracketing.push(CrossingEvidence {
            t,
            s: t_to_s(t),
            root_below,
            root_above,
            gap_bound,
            inertia_below_far: ctx.negative_inertia(t, e_i - beta)?,
            inertia_above_near: ctx.negative_inertia(t, e_i + eta)?,
        });
    }

    let certified_bound = 10.0 * d4;
    let certified = hypothesis_ok
        && all_bracketed
        && !times.is_empty()
        && certified_numeric.is_some_and(|c| c <= certified_bound + 1e-12);
    Ok(KreinReport {
        a_eigenvalues,
        crossing_times: times,
        m_plus,
        beta,
        delta4: d4,
        g_initial: g_i,
        hypothesis_ok,
        beta_within_5_delta4: beta < 5.0 * d4,
        certified_bound,
        certified_numeric,
        bracketing,
        certified,
        dense_min_gap: dense.map(|p| p.min_gap),
    })
}
