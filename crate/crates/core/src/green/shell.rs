//! Shell density P(e)₀,ₓ = (2π)⁻² ∫ J(e,θ) e^{−i k·x} dθ over the energy shell.
//!
//! The integrand is even about θ = 0 and θ = π/2, so the integral reduces to
//! (1/π²) ∫₀^{π/2} J cos(m k₁) cos(n k₂) dθ, which is real. The trapezoid rule
//! is spectrally accurate for it; near e = 2 the Jacobian peaks at the shell
//! vertices θ = 0, π/2, and the nodes are clustered there through the periodic
//! map θ = τ − c·sin(4τ)/4. Extremely close to e = 2 the peak is resolved by
//! adaptive Gauss–Kronrod in θ instead.

use crate::error::{Error, Result};
use crate::lattice::{Disp, EnergyShell, BAND_BOTTOM, BAND_TOP, VAN_HOVE};
use crate::quad::Quadrature;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

const START_POINTS: usize = 256;
/// Beyond this the vertex peak is too narrow for the trapezoid (e within ~1e−6 of 2)
/// and the θ-integral switches to adaptive Gauss–Kronrod.
const MAX_POINTS: usize = 1 << 14;
/// Stability threshold between successive trapezoid doublings (the spectral
/// convergence makes this nearly free compared with 1e−9).
pub const SHELL_TOL: f64 = 1e-12;

/// P(e)₀,ₓ for a single displacement.
pub fn shell_density(e: f64, x: Disp) -> Result<f64> {
    Ok(shell_density_many(e, &[x])?[0])
}

/// P(e)₀,ₓ for several displacements from one shared set of shell nodes.
pub fn shell_density_many(e: f64, xs: &[Disp]) -> Result<Vec<f64>> {
    if !(e > BAND_BOTTOM && e < BAND_TOP) || e == VAN_HOVE {
        return Err(Error::domain("shell_density", format!("e = {e} must lie in (0, 2) ∪ (2, 4)")));
    }
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    if e < VAN_HOVE {
        return quarter_trapezoid(e, xs);
    }
    // P(e)₀,ₓ = (−1)^{m+n} P(4−e)₀,ₓ; the shell is never integrated above 2.
    let mut p = quarter_trapezoid(BAND_TOP - e, xs)?;
    for (v, x) in p.iter_mut().zip(xs) {
        *v *= x.parity();
    }
    Ok(p)
}

fn quarter_trapezoid(e: f64, xs: &[Disp]) -> Result<Vec<f64>> {
    let shell = EnergyShell::new(e)?;
    let abs: Vec<(usize, usize)> = xs.iter().map(|d| (d.m.unsigned_abs() as usize, d.n.unsigned_abs() as usize)).collect();
    let mmax = abs.iter().map(|p| p.0).max().unwrap_or(0);
    let nmax = abs.iter().map(|p| p.1).max().unwrap_or(0);
    let clustering = (1.0 - (VAN_HOVE - e).sqrt()).max(0.0);

    let mut cm = vec![0.0; mmax + 1];
    let mut cn = vec![0.0; nmax + 1];
    let mut add_node = |tau: f64, weight: f64, acc: &mut [f64]| {
        let theta = tau - 0.25 * clustering * (4.0 * tau).sin();
        let dtheta = 1.0 - clustering * (4.0 * tau).cos();
        let p = shell.point(theta);
        chebyshev(p.k1, &mut cm);
        chebyshev(p.k2, &mut cn);
        let w = weight * p.jacobian * dtheta;
        for (a, &(m, n)) in acc.iter_mut().zip(&abs) {
            *a += w * cm[m] * cn[n];
        }
    };

    let mut sum = vec![0.0; xs.len()];
    let mut points = START_POINTS;
    for j in 0..=points {
        let w = if j == 0 || j == points { 0.5 } else { 1.0 };
        add_node(FRAC_PI_2 * j as f64 / points as f64, w, &mut sum);
    }
    let scale = 1.0 / (PI * PI);
    let mut prev: Vec<f64> = sum.iter().map(|s| s * FRAC_PI_2 / points as f64 * scale).collect();
    loop {
        let doubled = 2 * points;
        for j in (1..doubled).step_by(2) {
            add_node(FRAC_PI_2 * j as f64 / doubled as f64, 1.0, &mut sum);
        }
        points = doubled;
        let cur: Vec<f64> = sum.iter().map(|s| s * FRAC_PI_2 / points as f64 * scale).collect();
        let change = cur.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change <= SHELL_TOL {
            return Ok(cur);
        }
        if points >= MAX_POINTS {
            return adaptive_theta(&shell, &abs, mmax, nmax);
        }
        prev = cur;
    }
}

fn adaptive_theta(shell: &EnergyShell, abs: &[(usize, usize)], mmax: usize, nmax: usize) -> Result<Vec<f64>> {
    let quad = Quadrature { abs_tol: SHELL_TOL, rel_tol: 0.0, max_intervals: 20_000, parallel: false };
    let f = |theta: f64| {
        let p = shell.point(theta);
        let mut cm = vec![0.0; mmax + 1];
        let mut cn = vec![0.0; nmax + 1];
        chebyshev(p.k1, &mut cm);
        chebyshev(p.k2, &mut cn);
        abs.iter().map(|&(m, n)| p.jacobian * cm[m] * cn[n] / (PI * PI)).collect::<Vec<f64>>()
    };
    Ok(quad.integrate(f, 0.0, FRAC_PI_2, &[FRAC_PI_4]).map_err(Error::from)?.value)
}

/// cos(j k) for j = 0..out.len() by the Chebyshev recurrence.
pub(crate) fn chebyshev(k: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    let c = k.cos();
    out[1] = c;
    for j in 2..out.len() {
        out[j] = 2.0 * c * out[j - 1] - out[j - 2];
    }
}
