//! Small numerical helpers shared across modules.

/// Values above this magnitude mark a certificate as numerically suspect.
pub const OVERFLOW_WATERMARK: f64 = 1e300;

/// Relative comparison with an absolute floor at zero.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        return true;
    }
    (a - b).abs() <= tol * scale
}

/// Finds a root of `f` in `[lo, hi]` by bisection. The endpoints must bracket
/// a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `n` points geometrically spaced strictly between `lo` and `hi`.
pub fn geometric_interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n as f64 + 1.0));
    (1..=n).map(|k| lo * ratio.powi(k as i32)).collect()
}

/// Tracks whether any intermediate value crossed the overflow watermark.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct MagnitudeGuard {
    tripped: bool,
}

impl MagnitudeGuard {
    pub fn see(&mut self, x: f64) -> f64 {
        if !x.is_finite() || x.abs() > OVERFLOW_WATERMARK {
            self.tripped = true;
        }
        x
    }

    pub fn tripped(&self) -> bool {
        self.tripped
    }
}
