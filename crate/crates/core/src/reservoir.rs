//! Initial reservoir states: Fermi–Dirac occupation at (β, μ).

use crate::lattice::{BAND_BOTTOM, BAND_TOP};

/// One reservoir's inverse temperature and chemical potential. `beta` may be
/// `f64::INFINITY` (zero temperature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirState {
    pub beta: f64,
    pub mu: f64,
}

impl ReservoirState {
    pub const fn zero_temperature(mu: f64) -> Self {
        Self { beta: f64::INFINITY, mu }
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// f_{β,μ}(e) = (1 + e^{β(e−μ)})⁻¹; an exact step at β = ∞ with ½ at e = μ.
    pub fn fermi(&self, e: f64) -> f64 {
        fermi_weight(self, e)
    }

    /// Energies where the occupation can be nonzero, clipped to the band.
    pub fn support(&self) -> (f64, f64) {
        if self.is_zero_temperature() {
            (BAND_BOTTOM, self.mu.clamp(BAND_BOTTOM, BAND_TOP))
        } else {
            (BAND_BOTTOM, BAND_TOP)
        }
    }
}

pub fn fermi_weight(state: &ReservoirState, e: f64) -> f64 {
    let x = e - state.mu;
    if x == 0.0 {
        return 0.5;
    }
    if state.is_zero_temperature() {
        return if x < 0.0 { 1.0 } else { 0.0 };
    }
    let y = state.beta * x;
    if y > 0.0 {
        let t = (-y).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + y.exp())
    }
}
