//! The square lattice ℤ²: dispersion, displacements and the energy shell
//! {k : ω(k) = e} in polar form k = K(e,θ)(cos θ, sin θ).

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Lower band edge.
pub const BAND_BOTTOM: f64 = 0.0;
/// Upper band edge.
pub const BAND_TOP: f64 = 4.0;
/// Logarithmic van Hove point at the band centre.
pub const VAN_HOVE: f64 = 2.0;

/// ω(k) = 2 sin²(k₁/2) + 2 sin²(k₂/2); written this way it has no cancellation near k = 0.
pub fn dispersion(k1: f64, k2: f64) -> f64 {
    let (a, b) = ((0.5 * k1).sin(), (0.5 * k2).sin());
    2.0 * (a * a + b * b)
}

/// A lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x1: i64,
    pub x2: i64,
}

impl Site {
    pub const fn new(x1: i64, x2: i64) -> Self {
        Self { x1, x2 }
    }

    pub fn to(self, other: Site) -> Disp {
        Disp::new(other.x1 - self.x1, other.x2 - self.x2)
    }

    pub fn is_neighbour(self, other: Site) -> bool {
        (self.x1 - other.x1).abs() + (self.x2 - other.x2).abs() == 1
    }

    pub fn neighbours(self) -> [Site; 4] {
        let Site { x1, x2 } = self;
        [Site::new(x1 + 1, x2), Site::new(x1 - 1, x2), Site::new(x1, x2 + 1), Site::new(x1, x2 - 1)]
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

/// Lattice displacement x = (m, n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Disp {
    pub m: i64,
    pub n: i64,
}

impl Disp {
    pub const ZERO: Disp = Disp { m: 0, n: 0 };

    pub const fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }

    /// Representative under the reflections m → −m, n → −n.
    pub fn abs(self) -> Disp {
        Disp::new(self.m.abs(), self.n.abs())
    }

    /// (−1)^{m+n}
    pub fn parity(self) -> f64 {
        if (self.m + self.n).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn norm(self) -> f64 {
        ((self.m * self.m + self.n * self.n) as f64).sqrt()
    }
}

/// The level set ω(k) = e for 0 < e < 2, where it is a closed curve around k = 0.
#[derive(Debug, Clone, Copy)]
pub struct EnergyShell {
    e: f64,
}

/// A point of the shell along direction θ.
#[derive(Debug, Clone, Copy)]
pub struct ShellPoint {
    /// Radius K(e, θ).
    pub radius: f64,
    /// J(e, θ) = K ∂ₑK = K / (∂_K ω along the ray).
    pub jacobian: f64,
    pub k1: f64,
    pub k2: f64,
}

impl EnergyShell {
    pub fn new(e: f64) -> Result<Self> {
        if !(e > BAND_BOTTOM && e < VAN_HOVE) {
            return Err(Error::domain("energy shell", format!("e = {e} outside (0, 2); map e > 2 through 4 − e")));
        }
        Ok(Self { e })
    }

    pub fn energy(&self) -> f64 {
        self.e
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.point(theta).radius
    }

    pub fn jacobian(&self, theta: f64) -> f64 {
        self.point(theta).jacobian
    }

    pub fn point(&self, theta: f64) -> ShellPoint {
        let (s, c) = theta.sin_cos();
        let (ca, sa) = (c.abs(), s.abs());
        let k = solve_radius(self.e, ca, sa);
        // sin kᵢ = 2 sin(kᵢ/2) cos(kᵢ/2), with cos²(k₁/2) = (2 − e)/2 + sin²(k₂/2) read off
        // the shell equation: accurate even at the vertices k ≈ (π, 0) near e = 2,
        // where the root K itself is ill-conditioned.
        let (h1, h2) = ((0.5 * k * ca).sin(), (0.5 * k * sa).sin());
        let half_gap = 0.5 * (VAN_HOVE - self.e);
        let sin1 = 2.0 * h1 * (half_gap + h2 * h2).sqrt();
        let sin2 = 2.0 * h2 * (half_gap + h1 * h1).sqrt();
        let slope = ca * sin1 + sa * sin2;
        ShellPoint { radius: k, jacobian: k / slope, k1: k * c, k2: k * s }
    }
}

/// K on the ray (c, s) with c, s ≥ 0, plus ∂_K ω there. The root is bracketed
/// by the diamond |k₁| + |k₂| = π on which ω ≥ 2 > e.
fn solve_radius(e: f64, c: f64, s: f64) -> f64 {
    let f = |k: f64| dispersion(k * c, k * s) - e;
    let df = |k: f64| c * (k * c).sin() + s * (k * s).sin();
    let (mut lo, mut hi) = (0.0, PI / (c + s));
    // Small-e isotropic guess, clamped into the bracket.
    let mut k = (2.0 * e).sqrt().min(0.5 * (lo + hi));
    for _ in 0..200 {
        let fk = f(k);
        if fk == 0.0 {
            break;
        }
        if fk < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let d = df(k);
        let mut next = k - fk / d;
        if !(next > lo && next < hi) || d <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        let step = (next - k).abs();
        k = next;
        if step <= 1e-15 * k || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    k
}

/// K(e, θ): radius of the energy shell in direction θ.
pub fn shell_radius(e: f64, theta: f64) -> Result<f64> {
    Ok(EnergyShell::new(e)?.radius(theta))
}

/// J(e, θ) = K ∂ₑK.
pub fn shell_jacobian(e: f64, theta: f64) -> Result<f64> {
    Ok(EnergyShell::new(e)?.jacobian(theta))
}
