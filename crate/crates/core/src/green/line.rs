//! Partial-Fourier ("line") route: integrating out k₂ in closed form gives
//!
//!   g(z; m, n) = (1/π) ∫₀^π cos(m k₁) λ(k₁)^|n| / s(k₁) dk₁,
//!
//! with A = 2 − z − cos k₁, s² = A² − 1, λ = A − s and the root |λ| < 1.
//! On the band (z = e + i0, 0 < e < 2) the k₁-range splits at k* = arccos(1−e):
//! below k* the k₂-waves propagate (λ = e^{iq}), above they are evanescent.
//! Square-root substitutions at k* make both pieces smooth.

use super::shell::chebyshev;
use crate::error::{Error, Result};
use crate::lattice::{Disp, BAND_TOP, VAN_HOVE};
use crate::quad::Quadrature;
use num_complex::Complex64;
use std::f64::consts::PI;

fn orders(xs: &[Disp]) -> (Vec<(usize, usize)>, usize, usize) {
    let abs: Vec<(usize, usize)> = xs.iter().map(|d| (d.m.unsigned_abs() as usize, d.n.unsigned_abs() as usize)).collect();
    let mmax = abs.iter().map(|p| p.0).max().unwrap_or(0);
    let nmax = abs.iter().map(|p| p.1).max().unwrap_or(0);
    (abs, mmax, nmax)
}

/// g₊(e; x) for 0 < e < 4, e ≠ 2, every displacement sharing the k₁ nodes.
pub fn boundary_line(e: f64, xs: &[Disp], tol: f64) -> Result<Vec<Complex64>> {
    if !(e > 0.0 && e < BAND_TOP) || e == VAN_HOVE {
        return Err(Error::domain("boundary value", format!("e = {e} must lie in (0, 2) ∪ (2, 4)")));
    }
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    if e > VAN_HOVE {
        // g₊(e) = (−1)^{1+m+n} conj g₊(4 − e)
        let mut g = boundary_lower(BAND_TOP - e, xs, tol)?;
        for (v, x) in g.iter_mut().zip(xs) {
            *v = -x.parity() * v.conj();
        }
        return Ok(g);
    }
    boundary_lower(e, xs, tol)
}

fn boundary_lower(e: f64, xs: &[Disp], tol: f64) -> Result<Vec<Complex64>> {
    let (abs, mmax, nmax) = orders(xs);
    let kstar = 2.0 * (0.5 * e).sqrt().asin();
    // π − k*, without cancellation near the van Hove point
    let gap = 2.0 * (0.5 * (VAN_HOVE - e)).sqrt().asin();
    // The relative floor stops refinement at rounding level when g is log-large near e = 2.
    let quad = Quadrature { abs_tol: tol, rel_tol: 1e-13, max_intervals: 20_000, parallel: false };

    let propagating = |v: f64| {
        let k1 = kstar * (1.0 - v * v);
        // 1 − a with a = 2 − e − cos k₁, free of cancellation near k*.
        // sin((k* + k₁)/2) = sin(gap + k*v²/2); use whichever argument is away from π
        let half_sum = if e <= 1.0 { 0.5 * (kstar + k1) } else { gap + 0.5 * kstar * v * v };
        let oma = 2.0 * half_sum.sin() * (0.5 * kstar * v * v).sin();
        let a = 1.0 - oma;
        // 1 + a = (2 − e) + 2 sin²(k₁/2): small near k₁ = 0 when e → 2
        let opa = (VAN_HOVE - e) + 2.0 * (0.5 * k1).sin().powi(2);
        let s = (oma * opa).sqrt();
        let phase = Complex64::from_polar(1.0, s.atan2(a));
        let base = Complex64::new(0.0, 2.0 * kstar * v / (PI * s));
        combine(k1, base, phase, &abs, mmax, nmax)
    };
    let evanescent = |w: f64| {
        let k1 = kstar + gap * w * w;
        let half_sum = if e <= 1.0 { 0.5 * (k1 + kstar) } else { gap * (1.0 - 0.5 * w * w) };
        let amo = 2.0 * half_sum.sin() * (0.5 * gap * w * w).sin();
        let r = (amo * (2.0 + amo)).sqrt();
        let lambda = 1.0 / (1.0 + amo + r);
        let base = Complex64::new(2.0 * gap * w / (PI * r), 0.0);
        combine(k1, base, Complex64::new(lambda, 0.0), &abs, mmax, nmax)
    };
    let a = quad.integrate(propagating, 0.0, 1.0, &[]).map_err(Error::from)?;
    let b = quad.integrate(evanescent, 0.0, 1.0, &[]).map_err(Error::from)?;
    Ok(a.value.iter().zip(&b.value).map(|(x, y)| x + y).collect())
}

fn combine(k1: f64, base: Complex64, ratio: Complex64, abs: &[(usize, usize)], mmax: usize, nmax: usize) -> Vec<Complex64> {
    let mut cm = vec![0.0; mmax + 1];
    chebyshev(k1, &mut cm);
    let mut pw = Vec::with_capacity(nmax + 1);
    let mut p = base;
    for _ in 0..=nmax {
        pw.push(p);
        p *= ratio;
    }
    abs.iter().map(|&(m, n)| pw[n] * cm[m]).collect()
}

/// g(z; x) for complex z off the band.
pub fn offband_line(z: Complex64, xs: &[Disp], tol: f64) -> Result<Vec<Complex64>> {
    if z.im == 0.0 {
        return Ok(offband_real(z.re, xs, tol)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect());
    }
    let (abs, mmax, nmax) = orders(xs);
    let quad = Quadrature { abs_tol: tol, rel_tol: 0.0, max_intervals: 20_000, parallel: false };
    let mut hints = Vec::new();
    for c in [1.0 - z.re, 3.0 - z.re] {
        if c > -1.0 && c < 1.0 {
            hints.push(c.acos());
        }
    }
    let f = |k1: f64| {
        let s2 = 2.0 * (0.5 * k1).sin().powi(2);
        let am1 = s2 - z;
        let ap1 = 2.0 + s2 - z;
        let a = 1.0 + s2 - z;
        let s0 = am1.sqrt() * ap1.sqrt();
        let (w, s) = if (a + s0).norm() >= (a - s0).norm() { (a + s0, s0) } else { (a - s0, -s0) };
        combine(k1, 1.0 / (PI * s), 1.0 / w, &abs, mmax, nmax)
    };
    Ok(quad.integrate(f, 0.0, PI, &hints).map_err(Error::from)?.value)
}

/// g(x; ·) for real x outside [0, 4]; real-valued.
pub fn offband_real(x: f64, xs: &[Disp], tol: f64) -> Result<Vec<f64>> {
    if (0.0..=BAND_TOP).contains(&x) || !x.is_finite() {
        return Err(Error::domain("off-band Green function", format!("real z = {x} lies on the band")));
    }
    if x > BAND_TOP {
        // g(z) = (−1)^{1+m+n} g(4 − z)
        let mut g = offband_real(BAND_TOP - x, xs, tol)?;
        for (v, d) in g.iter_mut().zip(xs) {
            *v *= -d.parity();
        }
        return Ok(g);
    }
    let (abs, mmax, nmax) = orders(xs);
    let quad = Quadrature { abs_tol: tol, rel_tol: 0.0, max_intervals: 20_000, parallel: false };
    let f = |k1: f64| {
        let s2 = 2.0 * (0.5 * k1).sin().powi(2);
        let am1 = s2 - x;
        let s = (am1 * (am1 + 2.0)).sqrt();
        let lambda = 1.0 / (1.0 + am1 + s);
        let mut cm = vec![0.0; mmax + 1];
        chebyshev(k1, &mut cm);
        let mut pw = Vec::with_capacity(nmax + 1);
        let mut p = 1.0 / (PI * s);
        for _ in 0..=nmax {
            pw.push(p);
            p *= lambda;
        }
        abs.iter().map(|&(m, n)| pw[n] * cm[m]).collect::<Vec<f64>>()
    };
    Ok(quad.integrate(f, 0.0, PI, &[]).map_err(Error::from)?.value)
}
