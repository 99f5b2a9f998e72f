//! Two coupled lossy modes and their exceptional points.
//!
//! In the frame rotating at ω₁ the effective Hamiltonian is
//!
//! ```text
//! H = [ −iκ₁/2      g       ]
//!     [   g     δ − iκ₂/2  ]
//! ```
//!
//! with δ = ω₂ − ω₁. Its eigenvalues coalesce where the discriminant
//! (δ − i(κ₂ − κ₁)/2)² + 4g² vanishes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::ensure;
use crate::junction::csqrt;
use crate::linalg::fit_line;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    /// Angular frequency of the probed mode (rad/s).
    pub omega1: f64,
    /// Energy decay rate of the probed mode (1/s).
    pub kappa1: f64,
    /// Detuning ω₂ − ω₁ (rad/s).
    pub delta: f64,
    /// Energy decay rate of the second mode (1/s).
    pub kappa2: f64,
    /// Coupling (rad/s).
    pub g: f64,
}

impl TwoModeParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.kappa1 >= 0.0 && self.kappa1.is_finite(), "kappa1", "must be nonnegative")?;
        ensure(self.kappa2 >= 0.0 && self.kappa2.is_finite(), "kappa2", "must be nonnegative")?;
        ensure(self.g >= 0.0 && self.g.is_finite(), "g", "must be nonnegative")?;
        ensure(self.delta.is_finite() && self.omega1.is_finite(), "delta", "must be finite")
    }

    pub fn omega2(&self) -> f64 {
        self.omega1 + self.delta
    }

    fn diagonal(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(0.0, -0.5 * self.kappa1),
            Complex64::new(self.delta, -0.5 * self.kappa2),
        )
    }

    pub fn trace(&self) -> Complex64 {
        let (a, b) = self.diagonal();
        a + b
    }

    pub fn determinant(&self) -> Complex64 {
        let (a, b) = self.diagonal();
        a * b - self.g * self.g
    }

    /// (δ − i(κ₂ − κ₁)/2)² + 4g²; zero exactly at an exceptional point.
    pub fn discriminant(&self) -> Complex64 {
        let (a, b) = self.diagonal();
        let d = b - a;
        d * d + 4.0 * self.g * self.g
    }
}

/// Eigenvalues ordered by real part, then imaginary part, in the frame
/// rotating at ω₁.
pub fn eigenvalues(p: &TwoModeParams) -> [Complex64; 2] {
    let tr = p.trace();
    let root = csqrt(p.discriminant());
    // Take the larger root from the sum without cancellation and recover
    // the other from the determinant.
    let big = if (tr + root).norm() >= (tr - root).norm() {
        0.5 * (tr + root)
    } else {
        0.5 * (tr - root)
    };
    let small = if big.norm() == 0.0 {
        big
    } else {
        p.determinant() / big
    };
    let mut l = [big, small];
    l.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    l
}

/// |λ₊ − λ₋| = |√discriminant|.
pub fn separation(p: &TwoModeParams) -> f64 {
    csqrt(p.discriminant()).norm()
}

/// |⟨v₁|v₂⟩| of the normalized right eigenvectors; 1 at an exceptional point.
pub fn eigenvector_overlap(p: &TwoModeParams) -> f64 {
    let (a, _) = p.diagonal();
    let l = eigenvalues(p);
    let vec = |lam: Complex64| {
        // (H − λ) v = 0 with first row (a − λ) v₀ + g v₁ = 0.
        let v = [Complex64::new(p.g, 0.0), lam - a];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / n, v[1] / n]
    };
    if p.g == 0.0 {
        return if l[0] == l[1] { 1.0 } else { 0.0 };
    }
    let (u, v) = (vec(l[0]), vec(l[1]));
    (u[0].conj() * v[0] + u[1].conj() * v[1]).norm()
}

/// One exceptional point (δ*, κ₂*) at the template's κ₁ and g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpPoint {
    pub delta: f64,
    pub kappa2: f64,
    pub separation: f64,
    pub overlap: f64,
}

/// Exceptional points in the (δ, κ₂) plane, found by Newton iteration on
/// the real and imaginary parts of the discriminant from a grid of starts
/// covering |δ| ≤ 4g, 0 ≤ κ₂ ≤ κ₁ + 8g.
pub fn ep_locus(template: &TwoModeParams) -> Result<Vec<EpPoint>> {
    template.validate()?;
    let g = template.g;
    ensure(g > 0.0, "g", "must be positive")?;
    let k1 = template.kappa1;
    let mut found: Vec<EpPoint> = Vec::new();
    let starts = 9;
    for i in 0..starts {
        for j in 0..starts {
            let d0 = -4.0 * g + 8.0 * g * i as f64 / (starts - 1) as f64;
            let k0 = (k1 + 8.0 * g) * (j as f64 + 0.5) / starts as f64;
            let Some((delta, kappa2)) = newton_discriminant(template, d0, k0) else {
                continue;
            };
            if kappa2 < 0.0 || delta.abs() > 4.0 * g || kappa2 > k1 + 8.0 * g {
                continue;
            }
            let tol = 1e-9 * g;
            if found.iter().any(|p| (p.delta - delta).abs() < tol && (p.kappa2 - kappa2).abs() < tol) {
                continue;
            }
            let at = TwoModeParams { delta, kappa2, ..*template };
            found.push(EpPoint {
                delta,
                kappa2,
                separation: separation(&at),
                overlap: eigenvector_overlap(&at),
            });
        }
    }
    if found.is_empty() {
        return Err(Error::NoRootInBox);
    }
    found.sort_by(|a, b| a.kappa2.total_cmp(&b.kappa2).then(a.delta.total_cmp(&b.delta)));
    Ok(found)
}

fn newton_discriminant(p: &TwoModeParams, mut delta: f64, mut kappa2: f64) -> Option<(f64, f64)> {
    let g2 = p.g * p.g;
    for _ in 0..100 {
        let at = TwoModeParams { delta, kappa2, ..*p };
        let d = at.discriminant();
        if d.norm() <= 4.0 * f64::EPSILON * g2 {
            return Some((delta, kappa2));
        }
        // D = (δ − iκ)² + 4g² with κ = (κ₂ − κ₁)/2.
        let k = 0.5 * (kappa2 - p.kappa1);
        let (j11, j12) = (2.0 * delta, -k);
        let (j21, j22) = (-2.0 * k, -delta);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dd = (d.re * j22 - j12 * d.im) / det;
        let dk = (j11 * d.im - j21 * d.re) / det;
        let (nd, nk) = (delta - dd, kappa2 - dk);
        if (nd - delta).abs() <= 2.0 * f64::EPSILON * delta.abs().max(p.g)
            && (nk - kappa2).abs() <= 2.0 * f64::EPSILON * kappa2.abs().max(p.g)
        {
            return Some((nd, nk));
        }
        delta = nd;
        kappa2 = nk;
    }
    None
}

/// Exponent of the imaginary-part splitting against a κ₂ perturbation
/// ε ∈ [eps_lo, eps_hi], from a log-log line fit over `n` points.
pub fn splitting_exponent(at_ep: &TwoModeParams, eps_lo: f64, eps_hi: f64, n: usize) -> Result<f64> {
    ensure(eps_lo > 0.0 && eps_hi > eps_lo && n >= 2, "eps", "needs an increasing positive range")?;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let eps = eps_lo * (eps_hi / eps_lo).powf(i as f64 / (n - 1) as f64);
        let l = eigenvalues(&TwoModeParams {
            kappa2: at_ep.kappa2 + eps,
            ..*at_ep
        });
        xs.push(eps.ln());
        ys.push((l[0].im - l[1].im).abs().ln());
    }
    Ok(fit_line(&xs, &ys)?.slope)
}

/// SQUID-tuned second mode, ω₂(Φ) = ω₂,max √|cos(πΦ/Φ₀)|.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxMap {
    /// Flux values in units of Φ₀.
    pub phi_grid: Vec<f64>,
    pub omega2_max: f64,
}

impl FluxMap {
    pub fn omega2(&self, phi: f64) -> f64 {
        self.omega2_max * (PI * phi).cos().abs().sqrt()
    }
}

/// Notch-type transmission past mode 1, coupled to the feedline at rate
/// κ_ext (part of κ₁): S21 = 1 − i(κ_ext/2)[(ω − H)⁻¹]₁₁ with H in the
/// laboratory frame.
pub fn s21(p: &TwoModeParams, kappa_ext: f64, omega: f64) -> Complex64 {
    let z1 = Complex64::new(omega - p.omega1, 0.5 * p.kappa1);
    let z2 = Complex64::new(omega - p.omega2(), 0.5 * p.kappa2);
    let det = z1 * z2 - p.g * p.g;
    let g11 = z2 / det;
    Complex64::new(1.0, 0.0) - Complex64::new(0.0, 0.5 * kappa_ext) * g11
}

/// |S21| on the (Φ, ω) grid; rows follow `fm.phi_grid`, columns `probe`.
pub fn transmission_map(fm: &FluxMap, template: &TwoModeParams, kappa_ext: f64, probe: &[f64]) -> Result<Vec<Vec<f64>>> {
    template.validate()?;
    ensure(kappa_ext >= 0.0 && kappa_ext <= template.kappa1, "kappa_ext", "must lie in [0, kappa1]")?;
    ensure(fm.omega2_max > 0.0 && fm.omega2_max.is_finite(), "omega2_max", "must be positive")?;
    Ok(fm
        .phi_grid
        .iter()
        .map(|&phi| {
            let p = TwoModeParams {
                delta: fm.omega2(phi) - template.omega1,
                ..*template
            };
            probe.iter().map(|&w| s21(&p, kappa_ext, w).norm()).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64, kappa1: f64, kappa2: f64, g: f64) -> TwoModeParams {
        TwoModeParams {
            omega1: 0.0,
            kappa1,
            delta,
            kappa2,
            g,
        }
    }

    #[test]
    fn decoupled_modes() {
        let l = eigenvalues(&params(0.7, 0.2, 0.4, 0.0));
        assert!((l[0] - Complex64::new(0.0, -0.1)).norm() < 1e-15);
        assert!((l[1] - Complex64::new(0.7, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn coalescence_at_four_g() {
        let p = params(0.0, 0.0, 4.0, 1.0);
        let l = eigenvalues(&p);
        assert!((l[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((l[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((eigenvector_overlap(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_splitting_below_ep() {
        let k2 = 2.0;
        let l = eigenvalues(&params(0.0, 0.0, k2, 1.0));
        let expected = 2.0 * (1.0_f64 - k2 * k2 / 16.0).sqrt();
        assert!((l[1].re - l[0].re - expected).abs() < 1e-14);
    }

    #[test]
    fn locus_for_lossless_first_mode() {
        let pts = ep_locus(&params(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kappa2, 4.0);
        assert!(pts[0].delta.abs() < 1e-15);
    }

    #[test]
    fn critical_notch_dip() {
        let p = TwoModeParams {
            omega1: 10.0,
            kappa1: 0.2,
            delta: 1e6,
            kappa2: 0.1,
            g: 0.0,
        };
        assert!(s21(&p, 0.2, 10.0).norm() < 1e-12);
        assert!((s21(&p, 0.2, 1e3).norm() - 1.0).abs() < 1e-3);
    }
}
