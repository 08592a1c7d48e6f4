//! Small scalar numerics shared by the function, kernel and certificate layers:
//! composite Simpson quadrature, Brent minimization and bisection.

/// Composite Simpson rule on `[a, b]` with `panels` subintervals (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Simpson integration over `[a, b]` split at the interior `cuts`.
///
/// Panels are distributed proportionally to piece length, with at least two per piece.
pub fn simpson_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cuts: &[f64], panels: usize) -> f64 {
    let mut pts: Vec<f64> = Vec::with_capacity(cuts.len() + 2);
    pts.push(a);
    pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let len = b - a;
    pts.windows(2)
        .map(|w| {
            let share = ((w[1] - w[0]) / len * panels as f64).ceil() as usize;
            simpson(&f, w[0], w[1], share.max(2))
        })
        .sum()
}

/// Brent's method for a local minimum of `f` on `[a, b]`.
///
/// Successive parabolic interpolation with golden-section fallback; stops when the
/// bracket is narrower than `tol` (absolute, in the argument).
pub fn brent_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = tol * 0.5 + f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Bisection for a sign change of `f` on `[a, b]`. Returns `None` when the endpoints
/// do not bracket a root.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
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
        if hi - lo <= tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
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

/// Minimum of `f` over `[a, b]`: uniform scan with `samples` points followed by
/// Brent refinement around each local winner. Returns `(argmin, min)`.
pub fn scan_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize, tol: f64) -> (f64, f64) {
    let n = samples.max(3);
    let h = (b - a) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(a + i as f64 * h)).collect();
    let mut best = (a, vals[0]);
    for (i, &v) in vals.iter().enumerate() {
        if v < best.1 {
            best = (a + i as f64 * h, v);
        }
    }
    for i in 0..n {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { vals[i + 1] } else { f64::INFINITY };
        if vals[i] <= left && vals[i] <= right {
            let lo = a + i.saturating_sub(1) as f64 * h;
            let hi = a + (i + 1).min(n - 1) as f64 * h;
            let (x, fx) = brent_min(&f, lo, hi, tol);
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn split_handles_kinks() {
        let v = simpson_split(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 8);
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn brent_finds_parabola_vertex() {
        let (x, fx) = brent_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bisect_rejects_unbracketed() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn scan_min_includes_endpoints() {
        let (x, v) = scan_min(|x| x, 0.0, 1.0, 16, 1e-12);
        assert_eq!(x, 0.0);
        assert_eq!(v, 0.0);
    }
}
