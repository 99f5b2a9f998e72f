//! Scalar minimization and root bracketing.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
            return Ok((x, fx));
        }
        if fc < fd {
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
    }
    Err(Error::SearchNotConverged)
}

/// Grid scan followed by golden-section refinement around the best sample.
/// `f` may return `f64::INFINITY` for infeasible points.
pub fn scan_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, samples: usize, x_tol: f64) -> Result<(f64, f64)> {
    let n = samples.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..n {
        let v = f(lo + step * i as f64);
        if v < best.1 {
            best = (i, v);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::SearchNotConverged);
    }
    let (i, fi) = best;
    let a = lo + step * i.saturating_sub(1) as f64;
    let b = (lo + step * (i + 1) as f64).min(hi);
    let (x, fx) = golden_min(&mut f, a, b, x_tol)?;
    if fx <= fi {
        Ok((x, fx))
    } else {
        Ok((lo + step * i as f64, fi))
    }
}

/// Safeguarded Newton iteration for a decreasing or increasing function
/// with a sign change on `[lo, hi]`.
pub fn newton_bisect<F>(mut f: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketingFailure);
    }
    let rising = fhi > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::SearchNotConverged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn newton_bisect_cube_root() {
        let r = newton_bisect(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0).unwrap();
        assert!((r - 2.0_f64.cbrt()).abs() < 1e-15);
        assert_eq!(newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0), Err(Error::BracketingFailure));
    }
}
