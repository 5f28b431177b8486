//! Green's function g(z; x) = (2π)⁻² ∫ e^{−ik·x} / (ω(k) − z) dk of the
//! square-lattice Laplacian: off the band, boundary values g±(e; x) on it,
//! the shell density P(e) and the stationary-phase asymptotics.

pub mod asymptotic;
pub mod bessel;
pub mod line;
pub mod shell;

pub use asymptotic::{asymptotic_amplitude, green_asymptotic, stationary_angle, AsymptoticShell};
pub use bessel::{boundary_bessel, green_damped, DampedLadder};
pub use shell::{shell_density, shell_density_many};

use crate::error::{Error, Result};
use crate::lattice::{Disp, BAND_BOTTOM, BAND_TOP, VAN_HOVE};
use crate::quad::{principal_value, Quadrature};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Which side of the cut a boundary value is taken from: e ± i0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Accuracy knobs for Green-function evaluation.
#[derive(Debug, Clone, Copy)]
pub struct GreenOptions {
    /// Absolute tolerance of the k₁ (line route) or energy (PV route) quadrature.
    pub tol: f64,
    /// Minimal distance from the band for [`green_offband`].
    pub gap: f64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        Self { tol: 1e-12, gap: 1e-6 }
    }
}

/// g(z; x) for z off the band.
pub fn green_offband(z: Complex64, x: Disp) -> Result<Complex64> {
    Ok(green_offband_many(z, &[x], GreenOptions::default())?[0])
}

pub fn green_offband_many(z: Complex64, xs: &[Disp], opts: GreenOptions) -> Result<Vec<Complex64>> {
    let dist = if z.re < BAND_BOTTOM {
        z.norm()
    } else if z.re > BAND_TOP {
        (z - BAND_TOP).norm()
    } else {
        z.im.abs()
    };
    if !(dist >= opts.gap) {
        return Err(Error::domain(
            "green_offband",
            format!("z = {z} is within {} of the band; use green_boundary", opts.gap),
        ));
    }
    line::offband_line(z, xs, opts.tol)
}

/// g±(e; x) by the Sokhotski split PV∫₀⁴ P(t)₀,ₓ/(t − e) dt ± iπP(e)₀,ₓ.
pub fn green_boundary(e: f64, side: Side, x: Disp) -> Result<Complex64> {
    Ok(green_boundary_many(e, side, &[x], GreenOptions { tol: 1e-11, ..GreenOptions::default() })?[0])
}

pub fn green_boundary_many(e: f64, side: Side, xs: &[Disp], opts: GreenOptions) -> Result<Vec<Complex64>> {
    if !(e > BAND_BOTTOM && e < BAND_TOP) || e == VAN_HOVE {
        return Err(Error::domain("green_boundary", format!("e = {e} must lie in (0, 2) ∪ (2, 4)")));
    }
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let density = |t: f64| match shell_density_many(t, xs) {
        Ok(p) => p,
        Err(err) => {
            failure.lock().unwrap().get_or_insert(err);
            vec![f64::NAN; xs.len()]
        }
    };
    let quad = Quadrature { abs_tol: opts.tol, rel_tol: 0.0, max_intervals: 20_000, parallel: true };
    let pv = principal_value(&quad, density, e, BAND_BOTTOM, BAND_TOP, &[VAN_HOVE]);
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    let pv: Vec<f64> = pv?.value;
    let p = shell_density_many(e, xs)?;
    let sign = if side == Side::Plus { 1.0 } else { -1.0 };
    Ok(pv.iter().zip(&p).map(|(&re, &im)| Complex64::new(re, sign * PI * im)).collect())
}

/// Canonical key: g and P depend on x only through {|m|, |n|}.
pub fn canonical(x: Disp) -> Disp {
    let a = x.abs();
    if a.m <= a.n {
        a
    } else {
        Disp::new(a.n, a.m)
    }
}

/// Boundary values g₊(e; x) and shell densities P(e)₀,ₓ at one energy, for a
/// fixed set of displacements. Filled once, read-only afterwards.
#[derive(Debug, Clone)]
pub struct GreenTable {
    energy: f64,
    index: HashMap<Disp, usize>,
    g_plus: Vec<Complex64>,
    density: Vec<f64>,
}

impl GreenTable {
    /// In-band table; g₊ by the line route, P by shell integration.
    pub fn boundary(e: f64, xs: impl IntoIterator<Item = Disp>, tol: f64) -> Result<Self> {
        let mut keys: Vec<Disp> = xs.into_iter().map(canonical).collect();
        keys.sort();
        keys.dedup();
        let g_plus = line::boundary_line(e, &keys, tol)?;
        let density = shell_density_many(e, &keys)?;
        let index = keys.iter().enumerate().map(|(i, d)| (*d, i)).collect();
        Ok(Self { energy: e, index, g_plus, density })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn len(&self) -> usize {
        self.g_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_plus.is_empty()
    }

    fn slot(&self, x: Disp) -> usize {
        *self.index.get(&canonical(x)).unwrap_or_else(|| panic!("displacement {x:?} not in table"))
    }

    pub fn contains(&self, x: Disp) -> bool {
        self.index.contains_key(&canonical(x))
    }

    pub fn g(&self, side: Side, x: Disp) -> Complex64 {
        let v = self.g_plus[self.slot(x)];
        match side {
            Side::Plus => v,
            Side::Minus => v.conj(),
        }
    }

    pub fn density(&self, x: Disp) -> f64 {
        self.density[self.slot(x)]
    }
}
