//! Stationary-phase asymptotics of g₊(e; x) for large |x| in direction φ.

use crate::error::{Error, Result};
use crate::lattice::{Disp, EnergyShell};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Stationary point of Φ(θ) = −K(e,θ) cos(φ − θ) and the quantities built on it.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticShell {
    pub energy: f64,
    pub phi: f64,
    pub theta_s: f64,
    /// K_s = K(e, θ_s)
    pub radius: f64,
    /// c(e, φ) = K_s cos(φ − θ_s): phase advance per unit distance.
    pub phase_speed: f64,
    /// ψ(e, φ) > 0, the curvature factor of the amplitude.
    pub psi: f64,
}

fn check(e: f64, phi: f64) -> Result<EnergyShell> {
    if !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(Error::domain("stationary phase", format!("φ = {phi} outside [0, π/2]")));
    }
    EnergyShell::new(e)
}

/// ∂_θΦ = −K'(θ) cos(φ−θ) − K sin(φ−θ), with K' from implicit differentiation of ω = e.
fn phase_slope(shell: &EnergyShell, phi: f64, theta: f64) -> f64 {
    let p = shell.point(theta);
    let (s, c) = theta.sin_cos();
    let (s1, s2) = (p.k1.sin(), p.k2.sin());
    let dk = p.radius * (s1 * s - s2 * c) / (s1 * c + s2 * s);
    -dk * (phi - theta).cos() - p.radius * (phi - theta).sin()
}

/// θ_s(e, φ) ∈ [0, π/2]; ∂_θΦ is ≤ 0 at θ = 0 and ≥ 0 at θ = π/2, so bisection brackets it.
pub fn stationary_angle(e: f64, phi: f64) -> Result<f64> {
    let shell = check(e, phi)?;
    if phi == 0.0 || phi == FRAC_PI_2 || phi == FRAC_PI_4 {
        return Ok(phi);
    }
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if phase_slope(&shell, phi, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl AsymptoticShell {
    pub fn new(e: f64, phi: f64) -> Result<Self> {
        let shell = check(e, phi)?;
        let theta_s = stationary_angle(e, phi)?;
        let p = shell.point(theta_s);
        let (k1, k2) = (p.k1, p.k2);
        let psi = k1.cos() * k2.sin() * phi.sin() + k2.cos() * k1.sin() * phi.cos();
        Ok(Self {
            energy: e,
            phi,
            theta_s,
            radius: p.radius,
            phase_speed: p.radius * (phi - theta_s).cos(),
            psi,
        })
    }
}

/// ψ(e, φ)
pub fn asymptotic_amplitude(e: f64, phi: f64) -> Result<f64> {
    Ok(AsymptoticShell::new(e, phi)?.psi)
}

/// Leading stationary-phase term e^{i(|x| c + π/4)} / √(2π|x|ψ) of g₊(e; x).
pub fn green_asymptotic(e: f64, x: Disp) -> Result<Complex64> {
    let a = x.abs();
    if a == Disp::ZERO {
        return Err(Error::domain("green_asymptotic", "x = 0 has no direction"));
    }
    let phi = (a.n as f64).atan2(a.m as f64);
    let shell = AsymptoticShell::new(e, phi)?;
    let r = x.norm();
    let amp = 1.0 / (2.0 * PI * r * shell.psi).sqrt();
    Ok(Complex64::from_polar(amp, r * shell.phase_speed + FRAC_PI_4))
}
