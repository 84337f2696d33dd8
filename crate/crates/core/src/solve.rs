//! Scalar root finding and minimisation.

/// Outcome of a bracketed scalar search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]`. Requires `f(lo)` and `f(hi)` of opposite sign
/// (or one of them zero); returns `None` otherwise.
///
/// Stops once the bracket is narrower than `xtol` or after `max_iter` halvings.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Option<Solution>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(Solution { x: lo, fx: flo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Some(Solution { x: hi, fx: fhi, iterations: 0 });
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    let mut iterations = 0;
    while hi - lo > xtol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        iterations += 1;
        if fmid == 0.0 {
            return Some(Solution { x: mid, fx: fmid, iterations });
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Some(Solution { x, fx: f(x), iterations })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
///
/// The endpoints are evaluated too, so a minimum sitting on the boundary
/// of the interval is returned as such.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Solution
where
    F: Fn(f64) -> f64,
{
    let (a0, b0) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > xtol && iterations < max_iter {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let mut best = if fc <= fd {
        Solution { x: c, fx: fc, iterations }
    } else {
        Solution { x: d, fx: fd, iterations }
    };
    for edge in [a0, b0] {
        let fe = f(edge);
        if fe < best.fx {
            best = Solution { x: edge, fx: fe, iterations };
        }
    }
    best
}
