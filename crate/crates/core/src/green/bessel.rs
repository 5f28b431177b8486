//! Verification route: g(z; m, n) = i^{m+n+1} ∫₀^∞ e^{−it(2−z)} Jₘ(t) Jₙ(t) dt
//! for Im z > 0, extrapolated to the band by Richardson in ε = Im z.

use crate::error::{Error, Result};
use crate::lattice::Disp;
use crate::quad::gauss_legendre;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Above this argument J₀, J₁ come from the Hankel expansion and higher orders
/// from upward recurrence (stable while n < t).
const ASYMPTOTIC_FROM: f64 = 30.0;

/// J₀(t), …, J_{nmax}(t) for t ≥ 0.
pub fn bessel_j(nmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if t >= ASYMPTOTIC_FROM && (nmax as f64) < t {
        out[0] = hankel(0.0, t);
        if nmax >= 1 {
            out[1] = hankel(1.0, t);
        }
        for n in 1..nmax {
            out[n + 1] = 2.0 * n as f64 / t * out[n] - out[n - 1];
        }
        return out;
    }
    // Miller: downward recurrence from well above max(n, t), normalised by
    // J₀ + 2ΣJ₂ₖ = 1.
    let top = nmax.max(t as usize);
    let start = 2 * ((top + 20 + (40.0 * top as f64).sqrt() as usize) / 2);
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / t * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        let order = k - 1;
        if order <= nmax {
            out[order] = j;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Hankel asymptotic expansion of J_ν(t), summed until terms stop shrinking.
fn hankel(nu: f64, t: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (0.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * t);
        }
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let chi = t - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * t)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Damping ladder and extrapolation depth for [`boundary_bessel`].
#[derive(Debug, Clone, Copy)]
pub struct DampedLadder {
    pub eps0: f64,
    pub levels: usize,
}

impl Default for DampedLadder {
    fn default() -> Self {
        Self { eps0: 0.01, levels: 5 }
    }
}

/// Panel quadrature of the damped t-integral for every ε of the ladder at once.
/// The upper limit T is doubled until the last stretch changes nothing above 1e−14.
fn damped_integrals(e: f64, eps: &[f64], xs: &[Disp]) -> Vec<Vec<Complex64>> {
    let nmax = xs.iter().map(|d| d.m.unsigned_abs().max(d.n.unsigned_abs()) as usize).max().unwrap_or(0);
    let (gx, gw) = gauss_legendre(12);
    let width = 1.0;
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; eps.len()];
    let eps_min = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let mut t_lo = 0.0;
    let mut t_hi = 16.0 / eps_min;
    loop {
        let mut stretch = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; eps.len()];
        let panels = ((t_hi - t_lo) / width).ceil() as usize;
        let h = (t_hi - t_lo) / panels as f64;
        for p in 0..panels {
            let c = t_lo + (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                let t = c + 0.5 * h * x;
                let j = bessel_j(nmax, t);
                let osc = Complex64::from_polar(0.5 * h * w, -t * (2.0 - e));
                for (k, &ek) in eps.iter().enumerate() {
                    let base = osc * (-ek * t).exp();
                    for (i, d) in xs.iter().enumerate() {
                        stretch[k][i] += base * (j[d.m.unsigned_abs() as usize] * j[d.n.unsigned_abs() as usize]);
                    }
                }
            }
        }
        let change = stretch.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
        for (a, s) in acc.iter_mut().zip(&stretch) {
            for (a, s) in a.iter_mut().zip(s) {
                *a += s;
            }
        }
        if change < 1e-14 {
            break;
        }
        t_lo = t_hi;
        t_hi *= 2.0;
    }
    for row in acc.iter_mut() {
        for (v, d) in row.iter_mut().zip(xs) {
            *v *= Complex64::i().powu((d.m.unsigned_abs() + d.n.unsigned_abs() + 1) as u32);
        }
    }
    acc
}

/// g(e + iε; x) for ε > 0 through the damped Bessel integral.
pub fn green_damped(e: f64, eps: f64, xs: &[Disp]) -> Result<Vec<Complex64>> {
    if !(eps > 0.0) {
        return Err(Error::domain("damped Bessel route", format!("damping ε = {eps} must be positive")));
    }
    Ok(damped_integrals(e, &[eps], xs).remove(0))
}

/// g₊(e; x) from the ε-ladder εₖ = ε₀/2ᵏ, Richardson-extrapolated to ε → 0.
/// Returns the values and the magnitude of the last extrapolation correction.
pub fn boundary_bessel(e: f64, xs: &[Disp], ladder: DampedLadder) -> Result<(Vec<Complex64>, f64)> {
    if !(e > 0.0 && e < 4.0) || ladder.levels == 0 {
        return Err(Error::domain("damped Bessel route", format!("e = {e} outside the open band")));
    }
    let eps: Vec<f64> = (0..ladder.levels).map(|k| ladder.eps0 / 2f64.powi(k as i32)).collect();
    let rows = damped_integrals(e, &eps, xs);
    let mut out = Vec::with_capacity(xs.len());
    let mut correction = 0.0f64;
    for i in 0..xs.len() {
        let mut table: Vec<Complex64> = rows.iter().map(|r| r[i]).collect();
        let mut last = table[table.len() - 1];
        for j in 1..table.len() {
            let f = 2f64.powi(j as i32);
            for k in (j..table.len()).rev() {
                table[k] = (f * table[k] - table[k - 1]) / (f - 1.0);
            }
            let best = table[table.len() - 1];
            if j == table.len() - 1 {
                correction = correction.max((best - last).norm());
            }
            last = best;
        }
        out.push(table[table.len() - 1]);
    }
    Ok((out, correction))
}
