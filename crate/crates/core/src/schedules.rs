//! Interpolation schedules f(s) and their robustness profile.
//!
//! Four kinds: the linear baseline, the discontinuous double-step used by
//! the explicit search algorithm (jump to the plateau α = 1/(1-E_F), hold,
//! jump to 1), the C^∞ bump schedule whose derivative is
//! α e^{1/(s(s-1))} on (0,1), and user-supplied piecewise-linear tables.
//!
//! The robustness profile extracts, on a grid, the point a where f first
//! reaches 1/3, the onset b of terminal concavity, the interval J, and the
//! control floor κ with ḟ ≥ κ on J.

use crate::error::Error;
use crate::numeric;
use crate::Result;

/// Grid used for profile extraction and monotonicity validation.
pub const PROFILE_GRID: usize = 10_000;

/// Slack for the concavity relation 1 - f(t) ≤ ḟ(t)(1 - t).
pub const CONCAVITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum Schedule {
    Linear,
    /// f = α on (0,1) with α = 1/(1 - E_F); jumps carry no evolution time.
    DoubleStep { alpha: f64, e_f: f64 },
    SmoothBump(SmoothBump),
    Table(PiecewiseTable),
}

/// f(s) = s.
pub fn linear_schedule() -> Schedule {
    Schedule::Linear
}

/// Double-step schedule for a final ground energy E_F ∈ [-1, 0).
pub fn double_step_schedule(e_f: f64) -> Result<Schedule> {
    if !(-1.0..0.0).contains(&e_f) {
        return Err(Error::InvalidFinalGround { e_f });
    }
    Ok(Schedule::DoubleStep {
        alpha: 1.0 / (1.0 - e_f),
        e_f,
    })
}

/// C^∞ bump schedule, normalized so f(1) = 1.
pub fn smooth_bump_schedule() -> Schedule {
    Schedule::SmoothBump(SmoothBump::new())
}

/// Piecewise-linear interpolation of user breakpoints; monotonicity and the
/// endpoint constraints f(0)=0, f(1)=1 are validated at load.
pub fn piecewise_table(points: Vec<(f64, f64)>) -> Result<Schedule> {
    PiecewiseTable::new(points).map(Schedule::Table)
}

impl Schedule {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Schedule::Linear => s.clamp(0.0, 1.0),
            Schedule::DoubleStep { alpha, .. } => {
                if s <= 0.0 {
                    0.0
                } else if s >= 1.0 {
                    1.0
                } else {
                    *alpha
                }
            }
            Schedule::SmoothBump(b) => b.value(s),
            Schedule::Table(t) => t.value(s),
        }
    }

    /// ḟ(s). For the double-step this is 0 in the interior; the jumps at
    /// s = 0, 1 are not differentiable points and carry no weight.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Schedule::Linear => 1.0,
            Schedule::DoubleStep { .. } => 0.0,
            Schedule::SmoothBump(b) => b.derivative(s),
            Schedule::Table(t) => t.derivative(s),
        }
    }

    /// Whether ḟ exists everywhere relevant (false only for the jump
    /// schedule).
    pub fn differentiable(&self) -> bool {
        !matches!(self, Schedule::DoubleStep { .. })
    }

    /// Continuously differentiable on [0,1]; tables have kinks.
    pub fn is_c1(&self) -> bool {
        matches!(self, Schedule::Linear | Schedule::SmoothBump(_))
    }

    /// Plateau value for the double-step, if that is this schedule's kind.
    pub fn plateau(&self) -> Option<f64> {
        match self {
            Schedule::DoubleStep { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::DoubleStep { .. } => "double_step",
            Schedule::SmoothBump(_) => "smooth_bump",
            Schedule::Table(_) => "table",
        }
    }
}

/// f(t) = ∫₀ᵗ α e^{1/(s(s-1))} ds with α fixing f(1) = 1.
///
/// The integral is evaluated by composite 8-point Gauss–Legendre panels with
/// cached prefix sums; construction verifies the normalization constant
/// against a doubled panel count to 1e-12 relative.
#[derive(Debug, Clone)]
pub struct SmoothBump {
    alpha: f64,
    panels: usize,
    prefix: Vec<f64>,
}

fn bump_density(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (1.0 / (s * (s - 1.0))).exp()
    }
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_650,
    0.183_434_642_495_650,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn gl_panel(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

impl SmoothBump {
    pub fn new() -> Self {
        let build = |panels: usize| -> (Vec<f64>, f64) {
            let h = 1.0 / panels as f64;
            let mut prefix = Vec::with_capacity(panels + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for k in 0..panels {
                acc += gl_panel(bump_density, k as f64 * h, (k + 1) as f64 * h);
                prefix.push(acc);
            }
            (prefix, acc)
        };
        let panels = 1024;
        let (prefix, total) = build(panels);
        let (_, total2) = build(2 * panels);
        debug_assert!(
            (total - total2).abs() <= 1e-12 * total,
            "bump normalization not converged: {total} vs {total2}"
        );
        SmoothBump {
            alpha: 1.0 / total,
            panels,
            prefix,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let h = 1.0 / self.panels as f64;
        let k = ((s / h).floor() as usize).min(self.panels - 1);
        let base = self.prefix[k];
        let tail = gl_panel(bump_density, k as f64 * h, s);
        (self.alpha * (base + tail)).clamp(0.0, 1.0)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.alpha * bump_density(s)
    }
}

impl Default for SmoothBump {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
pub struct PiecewiseTable {
    points: Vec<(f64, f64)>,
}

impl PiecewiseTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::BadScheduleTable {
                reason: "need at least two breakpoints".into(),
            });
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first.0.abs() > 1e-12 || first.1.abs() > 1e-12 {
            return Err(Error::BadScheduleTable {
                reason: format!("first breakpoint must be (0,0), got {first:?}"),
            });
        }
        if (last.0 - 1.0).abs() > 1e-12 || (last.1 - 1.0).abs() > 1e-12 {
            return Err(Error::BadScheduleTable {
                reason: format!("last breakpoint must be (1,1), got {last:?}"),
            });
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::BadScheduleTable {
                    reason: "abscissae must be strictly increasing".into(),
                });
            }
            if w[1].1 < w[0].1 - 1e-12 {
                return Err(Error::BadScheduleTable {
                    reason: format!("table not monotone at s = {}", w[1].0),
                });
            }
        }
        Ok(Self { points })
    }

    fn segment(&self, s: f64) -> usize {
        match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let i = self.segment(s);
        let (s0, f0) = self.points[i];
        let (s1, f1) = self.points[i + 1];
        f0 + (f1 - f0) * (s - s0) / (s1 - s0)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let i = self.segment(s.clamp(0.0, 1.0 - 1e-15));
        let (s0, f0) = self.points[i];
        let (s1, f1) = self.points[i + 1];
        (f1 - f0) / (s1 - s0)
    }
}

/// The derived robustness quantities of a schedule.
///
/// `kappa` is a certified control floor for ḟ on J: the smaller of the
/// sampled infimum of ḟ over J and the monotone-convexity bound f(a)/b
/// (= (1/3)/b, exact for schedules convex up to b). Both are lower bounds
/// wherever the respective hypothesis holds, and their minimum reproduces
/// the worked values: 1 for the linear schedule, 2/3 for the smooth bump,
/// 0 for the double step.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RobustnessProfile {
    /// First point with f(a) = 1/3 (grid + bisection refinement).
    pub a: f64,
    /// Onset of terminal concavity (grid second differences; 1.0 when the
    /// tail never turns concave).
    pub b: f64,
    /// The interval J: [a, b] for C¹ schedules (clamped to [a, a] when
    /// b < a), [a, 1] otherwise.
    pub j_lo: f64,
    pub j_hi: f64,
    /// Control floor on ḟ over J.
    pub kappa: f64,
    /// Whether the C¹ branch of the J definition applied.
    pub c1_branch: bool,
    /// Set when no terminal concave segment exists (convex tail).
    pub no_concave_tail: bool,
}

/// Extract a, b, J and κ on a `grid`-point sample (default
/// [`PROFILE_GRID`]), with bisection refinement of `a` to 1e-8.
pub fn robustness_profile(schedule: &Schedule, grid: usize) -> Result<RobustnessProfile> {
    if grid < 16 {
        return Err(Error::GridTooCoarse { got: grid, min: 16 });
    }
    let h = 1.0 / grid as f64;
    let fs: Vec<f64> = (0..=grid).map(|i| schedule.value(i as f64 * h)).collect();

    // Monotonicity validation on the sample grid.
    for w in fs.windows(2) {
        if w[1] < w[0] - 1e-10 {
            return Err(Error::BadScheduleTable {
                reason: "schedule not monotone on the sample grid".into(),
            });
        }
    }

    // a = min{s : f(s) = 1/3}.
    let third = 1.0 / 3.0;
    let ia = fs
        .iter()
        .position(|&f| f >= third)
        .ok_or_else(|| Error::BadScheduleTable {
            reason: "f never reaches 1/3".into(),
        })?;
    let a = if ia == 0 {
        0.0
    } else if schedule.differentiable() {
        numeric::bisect_root(
            |s| schedule.value(s) - third,
            (ia - 1) as f64 * h,
            ia as f64 * h,
            1e-8,
        )
    } else {
        // Jump schedules cross 1/3 discontinuously; report the grid point.
        ia as f64 * h
    };

    // b from the last positive second difference.
    let pos_tol = 1e-12;
    let mut last_convex: Option<usize> = None;
    for i in 1..grid {
        let dd = fs[i + 1] - 2.0 * fs[i] + fs[i - 1];
        if dd > pos_tol {
            last_convex = Some(i);
        }
    }
    // A "concave tail" shorter than a few grid cells is not resolvable and
    // marks a schedule that is convex all the way to the end (the grid-based
    // convention for the open-ended b definition).
    let tail_floor = grid.saturating_sub(16);
    let (raw_b, no_concave_tail) = match last_convex {
        None => (0.0, false),
        Some(i) if i >= tail_floor => (1.0, true),
        Some(i) => ((i + 1) as f64 * h, false),
    };

    let c1_branch = schedule.is_c1();
    let (j_lo, j_hi, b) = if c1_branch {
        let b = if raw_b < a { a } else { raw_b };
        (a, b, b)
    } else {
        (a, 1.0, raw_b.max(a))
    };

    // Sampled infimum of the derivative over J (interior sample to stay off
    // jump points).
    let samples = 2001;
    let mut inf_deriv = f64::INFINITY;
    for i in 0..samples {
        let s = j_lo + (j_hi - j_lo) * (i as f64 + 0.5) / samples as f64;
        inf_deriv = inf_deriv.min(schedule.derivative(s));
    }
    if j_hi <= j_lo {
        inf_deriv = schedule.derivative(j_lo);
    }
    let kappa = if c1_branch {
        let convexity_floor = third / b.max(third);
        inf_deriv.min(convexity_floor).max(0.0)
    } else {
        inf_deriv.max(0.0)
    };

    Ok(RobustnessProfile {
        a,
        b,
        j_lo,
        j_hi,
        kappa,
        c1_branch,
        no_concave_tail,
    })
}

/// One violation of the terminal concavity relation.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConcavityViolation {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConcavityReport {
    /// Start of the checked interval: b when a terminal concave segment
    /// exists, otherwise a (convex-tail schedules are checked past a, where
    /// the relation is the one the robust bound relies on).
    pub checked_from: f64,
    pub samples: usize,
    pub violations: Vec<ConcavityViolation>,
    pub passed: bool,
}

/// Check 1 - f(t) ≤ ḟ(t)(1 - t) + slack on `samples` points of the terminal
/// interval. Violations are reported with locations, never raised.
pub fn verify_concavity_relation(schedule: &Schedule, samples: usize) -> Result<ConcavityReport> {
    if !schedule.differentiable() {
        return Err(Error::NotDifferentiable {
            reason: "concavity relation needs pointwise derivatives".into(),
        });
    }
    let profile = robustness_profile(schedule, PROFILE_GRID)?;
    let start = if profile.no_concave_tail {
        profile.a
    } else {
        profile.b
    };
    let mut violations = Vec::new();
    for i in 0..samples {
        let t = start + (1.0 - start) * (i as f64 + 0.5) / samples as f64;
        let lhs = 1.0 - schedule.value(t);
        let rhs = schedule.derivative(t) * (1.0 - t);
        if lhs > rhs + CONCAVITY_SLACK {
            violations.push(ConcavityViolation { t, lhs, rhs });
        }
    }
    Ok(ConcavityReport {
        checked_from: start,
        samples,
        passed: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_values() {
        let f = linear_schedule();
        assert_eq!(f.value(0.5), 0.5);
        assert_eq!(f.derivative(0.25), 1.0);
    }

    #[test]
    fn linear_profile_clamps_to_singleton() {
        let p = robustness_profile(&linear_schedule(), PROFILE_GRID).unwrap();
        assert_relative_eq!(p.a, 1.0 / 3.0, epsilon = 1e-7);
        assert_relative_eq!(p.b, p.a);
        assert_relative_eq!(p.kappa, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn double_step_plateau() {
        let f = double_step_schedule(-1.0).unwrap();
        assert_eq!(f.plateau(), Some(0.5));
        assert_eq!(f.value(0.73), 0.5);
        assert_eq!(f.value(0.0), 0.0);
        assert_eq!(f.value(1.0), 1.0);
        let f2 = double_step_schedule(-0.5).unwrap();
        assert_relative_eq!(f2.plateau().unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(double_step_schedule(0.0).is_err());
        assert!(double_step_schedule(0.3).is_err());
    }

    #[test]
    fn double_step_plateau_identity() {
        // (1 - alpha) = -E_F * alpha: the algebra that turns the plateau
        // Hamiltonian into alpha (E_F P_I + H_F) for rank-one H_I.
        for &e_f in &[-1.0, -0.7, -0.25, -0.05] {
            let alpha = match double_step_schedule(e_f).unwrap() {
                Schedule::DoubleStep { alpha, .. } => alpha,
                _ => unreachable!(),
            };
            assert!(((1.0 - alpha) - (-e_f) * alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn double_step_profile_branch() {
        let p = robustness_profile(&double_step_schedule(-1.0).unwrap(), PROFILE_GRID).unwrap();
        assert!(!p.c1_branch);
        assert_eq!(p.j_hi, 1.0);
        assert_eq!(p.kappa, 0.0);
    }

    #[test]
    fn bump_normalization_and_inflection() {
        let f = smooth_bump_schedule();
        assert!((f.value(1.0) - 1.0).abs() < 1e-8);
        assert!((f.value(0.5) - 0.5).abs() < 1e-10); // symmetric density
        let p = robustness_profile(&f, PROFILE_GRID).unwrap();
        assert_relative_eq!(p.b, 0.5, max_relative = 0.02);
        assert_relative_eq!(p.kappa, 2.0 / 3.0, max_relative = 0.02);
        // a = f^{-1}(1/3), located independently by quadrature + bisection
        // of the density integral: 0.434551 (frozen).
        assert_relative_eq!(p.a, 0.434_550_6, epsilon = 5e-6);
        assert!((f.value(p.a) - 1.0 / 3.0).abs() < 1e-7);
        assert!(p.a > 0.0 && p.a < 0.5);
    }

    #[test]
    fn bump_derivative_matches_finite_differences() {
        let f = smooth_bump_schedule();
        let h = 1e-5;
        for i in 1..100 {
            let s = i as f64 / 100.0;
            if s < 2.0 * h || s > 1.0 - 2.0 * h {
                continue;
            }
            let fd = (f.value(s + h) - f.value(s - h)) / (2.0 * h);
            let an = f.derivative(s);
            if an.abs() > 1e-6 {
                assert_relative_eq!(fd, an, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn concavity_relation_reports() {
        let bump = smooth_bump_schedule();
        assert!(verify_concavity_relation(&bump, 1000).unwrap().passed);
        let lin = linear_schedule();
        assert!(verify_concavity_relation(&lin, 500).unwrap().passed);
        // Convex tail f(s) = s^2 rendered as a fine table: at t = 0.9,
        // 1 - 0.81 = 0.19 > 1.8 * 0.1 = 0.18.
        let pts: Vec<(f64, f64)> = (0..=1000)
            .map(|i| {
                let s = i as f64 / 1000.0;
                (s, s * s)
            })
            .collect();
        let sq = piecewise_table(pts).unwrap();
        let report = verify_concavity_relation(&sq, 2000).unwrap();
        assert!(!report.passed);
        assert!(report
            .violations
            .iter()
            .any(|v| (v.t - 0.9).abs() < 0.05 && v.lhs > v.rhs));
    }

    #[test]
    fn monotonicity_on_grid() {
        for sched in [
            linear_schedule(),
            double_step_schedule(-0.4).unwrap(),
            smooth_bump_schedule(),
            piecewise_table(vec![(0.0, 0.0), (0.3, 0.6), (1.0, 1.0)]).unwrap(),
        ] {
            let mut prev = -1.0;
            for i in 0..=1000 {
                let s = i as f64 / 1000.0;
                let v = sched.value(s);
                assert!(v >= prev - 1e-10, "{} not monotone at {s}", sched.kind_name());
                assert!((-1e-12..=1.0 + 1e-12).contains(&v));
                prev = v;
            }
            assert_eq!(sched.value(0.0), 0.0);
            assert_eq!(sched.value(1.0), 1.0);
        }
    }

    #[test]
    fn table_validation() {
        assert!(piecewise_table(vec![(0.0, 0.0)]).is_err());
        assert!(piecewise_table(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(piecewise_table(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 0.7)]).is_err());
        let t = piecewise_table(vec![(0.0, 0.0), (0.25, 0.5), (1.0, 1.0)]).unwrap();
        assert_relative_eq!(t.value(0.125), 0.25);
        assert_relative_eq!(t.derivative(0.1), 2.0);
        assert_relative_eq!(t.derivative(0.5), 2.0 / 3.0);
    }
}
