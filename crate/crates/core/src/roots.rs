//! Bracketed scalar root finding.

/// Outcome of a bracketed search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub root: f64,
    /// Final bracket, `lo <= root <= hi`.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Brent's method: bisection safeguarded secant and inverse quadratic
/// interpolation. `fa` and `fb` must have opposite signs (or one be zero).
///
/// Stops once the bracket is narrower than `xtol` (plus a few ulps of the
/// root), so the returned root is within `xtol` of a sign change.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64, max_iter: usize) -> Option<Bracketed>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Some(Bracketed { root: a, lo: a, hi: a, evaluations: 0 });
    }
    if fb == 0.0 {
        return Some(Bracketed { root: b, lo: b, hi: b, evaluations: 0 });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return None;
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for evaluations in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Some(Bracketed { root: b, lo, hi, evaluations });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    None
}

/// Plain bisection on a sign change, to bracket width `xtol`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, mut flo: f64, xtol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
