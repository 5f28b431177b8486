//! Stationary-state observables: equilibrium density, the interference
//! kernels m_tr/m_ref, channel densities and bond currents in reservoir 2,
//! the spectral current j(e) and the Landauer current J.
//!
//! Conventions: V₋(e,x) is the vector (g₋(e; x − s))_{s∈S₂} and V⁰(e,x) the
//! vector (P(e)ₓ,ₛ)_{s∈S₂}; (u, w) is antilinear in u. The lattice hopping is
//! −½, so on a nearest-neighbour bond j_{x,y} = −Im ρ(x,y), with
//! ρ(x,y) = ⟨a*_y aₓ⟩; j > 0 is flow from x to y.

mod fields;

pub use fields::{
    spectral_fields, stationary_fields, Bond, CurrentField, DensityField, FieldOptions, FieldRequest, StationaryFields, Window,
};

use crate::error::{Error, Result};
use crate::green::{shell_density, GreenTable, Side};
use crate::lattice::{Disp, Site, BAND_BOTTOM, BAND_TOP, VAN_HOVE};
use crate::quad::Quadrature;
use crate::reservoir::ReservoirState;
use crate::scattering::{q_from_table, BoundState, Junction, QMatrices, Reservoir};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Which contribution a field or current belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Sourced by reservoir 1's initial population.
    Transmitted,
    /// Sourced by reservoir 2's initial population.
    Reflected,
    /// Bound states of the coupled Hamiltonian.
    Point,
    Total,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Transmitted => "transmitted",
            Channel::Reflected => "reflected",
            Channel::Point => "point",
            Channel::Total => "total",
        }
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Collects the first error raised inside a quadrature closure.
struct Failure(Mutex<Option<Error>>);

impl Failure {
    fn new() -> Self {
        Self(Mutex::new(None))
    }

    fn record(&self, e: Error) {
        self.0.lock().unwrap().get_or_insert(e);
    }

    fn check(&self) -> Result<()> {
        match self.0.lock().unwrap().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Energy integral ∫ f over [lo, hi] with the van Hove point treated as a log singularity.
fn energy_integral<F>(f: F, lo: f64, hi: f64, hints: &[f64], tol: f64, width: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if hi <= lo {
        return Ok(vec![0.0; width]);
    }
    let failure = Failure::new();
    let g = |e: f64| match f(e) {
        Ok(v) => v,
        Err(err) => {
            failure.record(err);
            vec![0.0; width]
        }
    };
    let quad = Quadrature { abs_tol: tol, rel_tol: 0.0, max_intervals: 4000, parallel: true };
    let est = quad.integrate_graded(g, lo, hi, hints, &[VAN_HOVE]);
    failure.check()?;
    Ok(est.map_err(Error::from)?.value)
}

/// ρ_eq = ∫ f_{β,μ}(e) P(e)₀,₀ de: the initial density per site.
pub fn equilibrium_density(state: &ReservoirState) -> Result<f64> {
    let (lo, hi) = state.support();
    let v = energy_integral(|e| Ok(vec![state.fermi(e) * shell_density(e, Disp::ZERO)?]), lo, hi, &[state.mu], 1e-12, 1)?;
    Ok(v[0])
}

/// Q₊ blocks and shell densities at one energy, with the interference kernels
/// m_tr = Q₊⁽²¹⁾P|_{S₁×S₁}Q₋⁽¹²⁾ and m_ref = Q₊⁽²²⁾P|_{S₂×S₂}Q₋⁽²²⁾.
#[derive(Debug, Clone)]
pub struct InterferenceKernels {
    pub energy: f64,
    pub q_plus: QMatrices,
    /// P(e) on S₁×S₁ and S₂×S₂.
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    pub q22: DMatrix<Complex64>,
    pub m_tr: DMatrix<Complex64>,
    pub m_ref: DMatrix<Complex64>,
}

/// Interference kernels at energy e.
pub fn kernels(junction: &Junction, e: f64) -> Result<InterferenceKernels> {
    let table = GreenTable::boundary(e, junction.internal_displacements(), 1e-13)?;
    InterferenceKernels::from_table(junction, &table)
}

fn contact_block(sites: &[Site], table: &GreenTable) -> DMatrix<f64> {
    DMatrix::from_fn(sites.len(), sites.len(), |i, j| table.density(sites[i].to(sites[j])))
}

impl InterferenceKernels {
    /// Build from a table that contains the junction's internal displacements.
    pub fn from_table(junction: &Junction, table: &GreenTable) -> Result<Self> {
        let e = table.energy();
        if !(e > BAND_BOTTOM && e < BAND_TOP) {
            return Err(Error::domain("kernels", format!("energy {e} is not inside the band")));
        }
        let q_plus = q_from_table(junction, table, Side::Plus)?;
        let p1 = contact_block(junction.contacts(Reservoir::One), table);
        let p2 = contact_block(junction.contacts(Reservoir::Two), table);
        let q21 = q_plus.block(Reservoir::Two, Reservoir::One);
        let q22 = q_plus.block(Reservoir::Two, Reservoir::Two);
        let m_tr = &q21 * p1.map(c) * q21.adjoint();
        let m_ref = &q22 * p2.map(c) * q22.adjoint();
        Ok(Self { energy: e, q_plus, p1, p2, q22, m_tr, m_ref })
    }

    /// j(e) = 2π tr(m_tr P|_{S₂×S₂}).
    pub fn spectral_current(&self) -> f64 {
        2.0 * PI * (&self.m_tr * self.p2.map(c)).trace().re
    }
}

/// Kernels plus g₊ and P tables for a set of reservoir-2 sites at one energy.
pub struct EnergySlice<'a> {
    junction: &'a Junction,
    pub kernels: InterferenceKernels,
    table: GreenTable,
    p00: f64,
}

impl<'a> EnergySlice<'a> {
    pub fn new(junction: &'a Junction, e: f64, sites: &[Site]) -> Result<Self> {
        let s2 = junction.contacts(Reservoir::Two);
        let keys = junction
            .internal_displacements()
            .into_iter()
            .chain(sites.iter().flat_map(|x| s2.iter().map(move |s| s.to(*x))))
            .chain(std::iter::once(Disp::ZERO));
        let table = GreenTable::boundary(e, keys, 1e-12)?;
        let kernels = InterferenceKernels::from_table(junction, &table)?;
        let p00 = table.density(Disp::ZERO);
        Ok(Self { junction, kernels, table, p00 })
    }

    pub fn energy(&self) -> f64 {
        self.kernels.energy
    }

    /// V₋(e, x)
    pub fn v_minus(&self, x: Site) -> DVector<Complex64> {
        let s2 = self.junction.contacts(Reservoir::Two);
        DVector::from_iterator(s2.len(), s2.iter().map(|s| self.table.g(Side::Minus, s.to(x))))
    }

    /// V⁰(e, x)
    pub fn v_zero(&self, x: Site) -> DVector<Complex64> {
        let s2 = self.junction.contacts(Reservoir::Two);
        DVector::from_iterator(s2.len(), s2.iter().map(|s| c(self.table.density(s.to(x)))))
    }

    /// δ⁽¹⁾(e;x) = (V₋, m_tr V₋)
    pub fn delta_transmitted(&self, x: Site) -> f64 {
        let v = self.v_minus(x);
        v.dotc(&(&self.kernels.m_tr * &v)).re
    }

    /// δ⁽²⁾(e;x) = P(e)₀,₀ − 2Re(V₋, Q₊⁽²²⁾V⁰) + (V₋, m_ref V₋)
    pub fn delta_reflected(&self, x: Site) -> f64 {
        let v = self.v_minus(x);
        let v0 = self.v_zero(x);
        let k = &self.kernels;
        self.p00 - 2.0 * v.dotc(&(&k.q22 * &v0)).re + v.dotc(&(&k.m_ref * &v)).re
    }

    /// Transmitted spectral current −Im(V₋(x), m_tr V₋(y)).
    pub fn bond_transmitted(&self, x: Site, y: Site) -> f64 {
        // evaluate in one orientation so that j(x,y) = −j(y,x) holds bitwise
        if y < x {
            return -self.bond_transmitted(y, x);
        }
        let (vx, vy) = (self.v_minus(x), self.v_minus(y));
        -vx.dotc(&(&self.kernels.m_tr * vy)).im
    }

    /// Reflected spectral current
    /// Im(V₋(x), Q₊⁽²²⁾V⁰(y)) − Im(V₋(y), Q₊⁽²²⁾V⁰(x)) − Im(V₋(x), m_ref V₋(y)).
    pub fn bond_reflected(&self, x: Site, y: Site) -> f64 {
        if y < x {
            return -self.bond_reflected(y, x);
        }
        let (vx, vy) = (self.v_minus(x), self.v_minus(y));
        let (zx, zy) = (self.v_zero(x), self.v_zero(y));
        let k = &self.kernels;
        vx.dotc(&(&k.q22 * zy)).im - vy.dotc(&(&k.q22 * zx)).im - vx.dotc(&(&k.m_ref * vy)).im
    }
}

fn check_in_band(what: &'static str, e: f64) -> Result<()> {
    if e > BAND_BOTTOM && e < BAND_TOP && e != VAN_HOVE {
        Ok(())
    } else {
        Err(Error::domain(what, format!("energy {e} must lie in (0, 2) ∪ (2, 4)")))
    }
}

/// δ⁽¹⁾(e;x) for a site x of reservoir 2.
pub fn delta_transmitted(junction: &Junction, e: f64, x: Site) -> Result<f64> {
    check_in_band("delta_transmitted", e)?;
    Ok(EnergySlice::new(junction, e, &[x])?.delta_transmitted(x))
}

/// δ⁽²⁾(e;x) for a site x of reservoir 2.
pub fn delta_reflected(junction: &Junction, e: f64, x: Site) -> Result<f64> {
    check_in_band("delta_reflected", e)?;
    Ok(EnergySlice::new(junction, e, &[x])?.delta_reflected(x))
}

/// Spectral bond current on a reservoir-2 nearest-neighbour bond, per channel.
pub fn bond_current_spectral(junction: &Junction, e: f64, x: Site, y: Site, channel: Channel) -> Result<f64> {
    check_in_band("bond_current_spectral", e)?;
    if x == y {
        return Ok(0.0);
    }
    if !x.is_neighbour(y) {
        return Err(Error::domain("bond_current_spectral", format!("{x} and {y} are not nearest neighbours")));
    }
    let slice = EnergySlice::new(junction, e, &[x, y])?;
    match channel {
        Channel::Transmitted => Ok(slice.bond_transmitted(x, y)),
        Channel::Reflected => Ok(slice.bond_reflected(x, y)),
        Channel::Point => Ok(0.0),
        Channel::Total => Err(Error::domain("bond_current_spectral", "the spectral current is split by channel; total needs occupations")),
    }
}

/// j(e) = 2π tr(m_tr P|_{S₂×S₂}).
pub fn spectral_total_current(junction: &Junction, e: f64) -> Result<f64> {
    check_in_band("spectral_total_current", e)?;
    Ok(kernels(junction, e)?.spectral_current())
}

/// Energies where either reservoir can be occupied, and their Fermi levels as hints.
fn occupied_range(states: &[ReservoirState; 2]) -> (f64, f64, Vec<f64>) {
    let hi = states.iter().map(|s| s.support().1).fold(BAND_BOTTOM, f64::max);
    (BAND_BOTTOM, hi, states.iter().map(|s| s.mu).collect())
}

/// Landauer current out of reservoir 1: J = ∫ (f₁ − f₂)(e) j(e) de.
pub fn total_current(junction: &Junction, states: &[ReservoirState; 2]) -> Result<f64> {
    total_current_with_tol(junction, states, 1e-10)
}

pub fn total_current_with_tol(junction: &Junction, states: &[ReservoirState; 2], tol: f64) -> Result<f64> {
    if junction.is_decoupled() {
        return Ok(0.0);
    }
    let (lo, hi) = if states.iter().all(|s| s.is_zero_temperature()) {
        let (a, b) = (states[0].mu.clamp(BAND_BOTTOM, BAND_TOP), states[1].mu.clamp(BAND_BOTTOM, BAND_TOP));
        (a.min(b), a.max(b))
    } else {
        (BAND_BOTTOM, BAND_TOP)
    };
    if states[0] == states[1] || hi <= lo {
        return Ok(0.0);
    }
    let v = energy_integral(
        |e| {
            let w = states[0].fermi(e) - states[1].fermi(e);
            if w == 0.0 {
                return Ok(vec![0.0]);
            }
            Ok(vec![w * kernels(junction, e)?.spectral_current()])
        },
        lo,
        hi,
        &[states[0].mu, states[1].mu],
        tol,
        1,
    )?;
    Ok(v[0])
}

/// Matrix elements of the per-reservoir spectral two-point function
/// ρᵢ(e) = (1 − r⁰₊Q₊)Pᵢ(1 − Q₋r⁰₋) at one energy. Sites carry their reservoir.
pub struct TwoPoint<'a> {
    junction: &'a Junction,
    table: GreenTable,
    q_plus: QMatrices,
}

impl<'a> TwoPoint<'a> {
    pub fn new(junction: &'a Junction, e: f64, sites: &[(Reservoir, Site)]) -> Result<Self> {
        check_in_band("two_point", e)?;
        let mut keys = junction.internal_displacements();
        for &(r, x) in sites {
            for (rs, s) in junction.pi_sites() {
                if rs == r {
                    keys.push(s.to(x));
                }
            }
            for &(r2, y) in sites {
                if r2 == r {
                    keys.push(x.to(y));
                }
            }
        }
        let table = GreenTable::boundary(e, keys, 1e-13)?;
        let q_plus = q_from_table(junction, &table, Side::Plus)?;
        Ok(Self { junction, table, q_plus })
    }

    /// ρᵢ(x, y) with i the source reservoir.
    pub fn element(&self, source: Reservoir, x: (Reservoir, Site), y: (Reservoir, Site)) -> Complex64 {
        let pi = self.junction.pi_sites();
        let n = pi.len();
        let q = &self.q_plus.q;
        // ax(a) = Σ_s g₊(x − s)Q₊(s, a); by(b) = Σ_s Q₋(b, s) g₋(s − y), with Q₋ = Q₊†.
        let ax: Vec<Complex64> = (0..n)
            .map(|a| {
                (0..n)
                    .filter(|&s| pi[s].0 == x.0)
                    .map(|s| self.table.g(Side::Plus, pi[s].1.to(x.1)) * q[(s, a)])
                    .sum()
            })
            .collect();
        let by: Vec<Complex64> = (0..n)
            .map(|b| {
                (0..n)
                    .filter(|&s| pi[s].0 == y.0)
                    .map(|s| q[(s, b)].conj() * self.table.g(Side::Minus, pi[s].1.to(y.1)))
                    .sum()
            })
            .collect();
        let in_src: Vec<usize> = (0..n).filter(|&a| pi[a].0 == source).collect();
        let mut out = Complex64::new(0.0, 0.0);
        if x.0 == source && y.0 == source {
            out += self.table.density(x.1.to(y.1));
        }
        if y.0 == source {
            for &a in &in_src {
                out -= ax[a] * self.table.density(pi[a].1.to(y.1));
            }
        }
        if x.0 == source {
            for &b in &in_src {
                out -= self.table.density(x.1.to(pi[b].1)) * by[b];
            }
        }
        for &a in &in_src {
            for &b in &in_src {
                out += ax[a] * self.table.density(pi[a].1.to(pi[b].1)) * by[b];
            }
        }
        out
    }
}

/// Net current out of reservoir 1 summed over the junction bonds,
/// Σ_{x∈S₁,y∈S₂} 2 t_{x,y} Im ρ(x,y), with ρ = Σᵢ fᵢ ρᵢ integrated over energy.
pub fn junction_bond_current(junction: &Junction, states: &[ReservoirState; 2], tol: f64) -> Result<f64> {
    if junction.is_decoupled() {
        return Ok(0.0);
    }
    let s1 = junction.contacts(Reservoir::One).to_vec();
    let s2 = junction.contacts(Reservoir::Two).to_vec();
    let t = junction.amplitudes().clone();
    let sites: Vec<(Reservoir, Site)> = junction.pi_sites();
    let (lo, hi, hints) = occupied_range(states);
    let v = energy_integral(
        |e| {
            let tp = TwoPoint::new(junction, e, &sites)?;
            let mut sum = 0.0;
            for (i, &x) in s1.iter().enumerate() {
                for (j, &y) in s2.iter().enumerate() {
                    if t[(i, j)] == 0.0 {
                        continue;
                    }
                    let rho: Complex64 = Reservoir::BOTH
                        .iter()
                        .map(|&r| tp.element(r, (Reservoir::One, x), (Reservoir::Two, y)) * states[r.index()].fermi(e))
                        .sum();
                    sum += 2.0 * t[(i, j)] * rho.im;
                }
            }
            Ok(vec![sum])
        },
        lo,
        hi,
        &hints,
        tol,
        1,
    )?;
    Ok(v[0])
}

/// Energy-integrated (transmitted, reflected) densities at a reservoir-2 site.
pub fn density_ac(junction: &Junction, states: &[ReservoirState; 2], x: Site) -> Result<(f64, f64)> {
    let f = stationary_fields(junction, states, &FieldRequest::sites(vec![x]), &[], FieldOptions::default())?;
    Ok((f.transmitted.values[0].1, f.reflected.values[0].1))
}

/// Bound-state density d_p(x) = Σ_λ (P_λδₓ, ρ⁰P_λδₓ) at a reservoir-2 site.
pub fn density_point(junction: &Junction, states: &[ReservoirState; 2], bound: &[BoundState], x: Site) -> Result<f64> {
    Ok(point_densities(junction, states, bound, &[x], 1e-12)?[0])
}

/// d_p on many reservoir-2 sites; c = G⁻¹f(x), d_p = Σ_λ cᵀWc.
pub fn point_densities(junction: &Junction, states: &[ReservoirState; 2], bound: &[BoundState], sites: &[Site], tol: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; sites.len()];
    for state in bound {
        let w = crate::scattering::occupation_matrix(junction, state, states, tol)?;
        let ginv = state
            .gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::domain("density_point", format!("singular Gram matrix at λ = {}", state.lambda)))?;
        let amps = state.amplitudes(junction, Reservoir::Two, sites)?;
        for (k, slot) in out.iter_mut().enumerate() {
            let f = DVector::from_iterator(amps.len(), amps.iter().map(|row| row[k]));
            let cv = &ginv * f;
            *slot += cv.dot(&(&w * &cv));
        }
    }
    Ok(out)
}

/// Energy-integrated stationary current on a bond: a nearest-neighbour bond in
/// either reservoir or a junction bond (x ∈ S₁, y ∈ S₂).
pub fn bond_current(junction: &Junction, states: &[ReservoirState; 2], x: (Reservoir, Site), y: (Reservoir, Site), tol: f64) -> Result<f64> {
    if y < x {
        return Ok(-bond_current(junction, states, y, x, tol)?);
    }
    let hop = if x.0 == y.0 {
        if x.1 == y.1 {
            return Ok(0.0);
        }
        if !x.1.is_neighbour(y.1) {
            return Err(Error::domain("bond_current", format!("{} and {} are not nearest neighbours", x.1, y.1)));
        }
        -0.5
    } else {
        let (a, b) = if x.0 == Reservoir::One { (x.1, y.1) } else { (y.1, x.1) };
        let i = junction.contacts(Reservoir::One).iter().position(|&s| s == a);
        let j = junction.contacts(Reservoir::Two).iter().position(|&s| s == b);
        match (i, j) {
            (Some(i), Some(j)) if junction.amplitudes()[(i, j)] != 0.0 => junction.amplitudes()[(i, j)],
            _ => return Err(Error::domain("bond_current", format!("{a} and {b} are not joined by the junction"))),
        }
    };
    if junction.is_decoupled() && x.0 == y.0 {
        return Ok(0.0);
    }
    let (lo, hi, hints) = occupied_range(states);
    let v = energy_integral(
        |e| {
            let tp = TwoPoint::new(junction, e, &[x, y])?;
            let rho: Complex64 = Reservoir::BOTH.iter().map(|&r| tp.element(r, x, y) * states[r.index()].fermi(e)).sum();
            Ok(vec![2.0 * hop * rho.im])
        },
        lo,
        hi,
        &hints,
        tol,
        1,
    )?;
    Ok(v[0])
}

#[cfg(test)]
mod tests;
