//! Scalar numerical helpers: 1-D minimization, root bracketing, fits.

/// Golden-section minimization of `f` on `[a, b]` to an interval of width
/// `tol`. Returns `(x_min, f_min)`. Assumes `f` is unimodal on the bracket;
/// on non-unimodal input it still returns a local minimum inside `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { (x1, f1) } else { (x2, f2) }
}

/// Bisection root of `f` on a bracket with `f(lo)` and `f(hi)` of opposite
/// sign, to `tol` in the argument. Returns the midpoint of the final bracket.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    debug_assert!(
        flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0),
        "bisect_root needs a sign change"
    );
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Locate the first upward crossing of `level` by the monotone-scan value
/// `f(x)`: geometric coarse scan from `x0` by factor `step` up to `x_max`,
/// then bisection of the first bracketing interval to relative precision
/// `rel_tol`. Returns `None` if no crossing was found by `x_max`.
///
/// Rabi-type oscillations are handled by taking the first bracket found on
/// the coarse scan; the refined value is the first crossing inside it.
pub fn first_crossing<F: FnMut(f64) -> f64>(
    mut f: F,
    level: f64,
    x0: f64,
    step: f64,
    x_max: f64,
    rel_tol: f64,
) -> Option<f64> {
    assert!(step > 1.0 && x0 > 0.0);
    let mut lo = x0;
    let mut flo = f(lo);
    if flo >= level {
        return Some(lo);
    }
    let mut hi = lo;
    loop {
        hi *= step;
        if hi > x_max {
            return None;
        }
        let fhi = f(hi);
        if fhi >= level {
            break;
        }
        lo = hi;
        flo = fhi;
    }
    let _ = flo;
    // Refine within [lo, hi].
    while (hi - lo) / hi > rel_tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Least-squares slope and intercept of `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Log-log least-squares slope of `y ~ x^slope`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_finds_parabola_min() {
        // Localization of a smooth minimum is limited to ~sqrt(eps) by the
        // flatness of f near it, regardless of the bracket tolerance.
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert_relative_eq!(x, 0.3, epsilon = 1e-7);
        assert_relative_eq!(fx, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert_relative_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn first_crossing_monotone() {
        let t = first_crossing(|x| x * x, 4.0, 0.1, 2.0, 1e3, 1e-4).unwrap();
        assert_relative_eq!(t, 2.0, max_relative = 2e-4);
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let xs: Vec<f64> = (1..8).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.5)).collect();
        assert_relative_eq!(loglog_slope(&xs, &ys), 0.5, epsilon = 1e-12);
    }
}
