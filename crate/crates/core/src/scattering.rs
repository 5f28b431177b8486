//! The tunneling junction between the two reservoirs, its scattering matrices
//! Q(z) = v(v + v r⁰(z) v)⁻¹v and the point spectrum of the coupled Hamiltonian.
//!
//! Junction sites Π = S₁ ⊔ S₂ are indexed S₁ first. The coupling v is real
//! symmetric with blocks [[0, t], [tᵀ, 0]] and the free resolvent r⁰ is
//! block-diagonal with entries g(z; s′ − s) inside each reservoir.

use crate::error::{Error, Result};
use crate::green::{line, shell_density_many, GreenTable, Side};
use crate::lattice::{Disp, Site, BAND_BOTTOM, BAND_TOP, VAN_HOVE};
use crate::quad::Quadrature;
use crate::reservoir::ReservoirState;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reservoir {
    One,
    Two,
}

impl Reservoir {
    pub const BOTH: [Reservoir; 2] = [Reservoir::One, Reservoir::Two];

    pub fn index(self) -> usize {
        match self {
            Reservoir::One => 0,
            Reservoir::Two => 1,
        }
    }
}

/// Contact sets S₁, S₂ and the real tunneling amplitudes t (|S₁| × |S₂|).
#[derive(Debug, Clone)]
pub struct Junction {
    contacts1: Vec<Site>,
    contacts2: Vec<Site>,
    t: DMatrix<f64>,
    /// Orthonormal basis of range(v), |Π| × rank.
    range: DMatrix<f64>,
}

impl Junction {
    pub fn new(contacts1: Vec<Site>, contacts2: Vec<Site>, t: DMatrix<f64>) -> Result<Self> {
        if t.nrows() != contacts1.len() || t.ncols() != contacts2.len() {
            return Err(Error::Junction(format!(
                "amplitude matrix is {}×{} but there are {} and {} contacts",
                t.nrows(),
                t.ncols(),
                contacts1.len(),
                contacts2.len()
            )));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::Junction("amplitudes must be finite".into()));
        }
        for (name, set) in [("S1", &contacts1), ("S2", &contacts2)] {
            let mut sorted = set.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != set.len() {
                return Err(Error::Junction(format!("{name} lists a site twice")));
            }
        }
        let any = t.iter().any(|&v| v != 0.0);
        if any && (contacts1.is_empty() || contacts2.is_empty()) {
            return Err(Error::Junction("nonzero coupling needs contacts on both sides".into()));
        }
        let mut j = Self { contacts1, contacts2, t, range: DMatrix::zeros(0, 0) };
        j.range = range_basis(&j.coupling());
        Ok(j)
    }

    /// Build from (s¹, s², amplitude) triples; repeated sites are merged and
    /// repeated pairs add up.
    pub fn from_pairs(pairs: &[(Site, Site, f64)]) -> Result<Self> {
        let mut s1: Vec<Site> = Vec::new();
        let mut s2: Vec<Site> = Vec::new();
        for &(a, b, _) in pairs {
            if !s1.contains(&a) {
                s1.push(a);
            }
            if !s2.contains(&b) {
                s2.push(b);
            }
        }
        let mut t = DMatrix::zeros(s1.len(), s2.len());
        for &(a, b, amp) in pairs {
            let i = s1.iter().position(|&s| s == a).unwrap();
            let j = s2.iter().position(|&s| s == b).unwrap();
            t[(i, j)] += amp;
        }
        Self::new(s1, s2, t)
    }

    /// The two-channel junction: (0,0)₁ ↔ (0,0)₂ with t₁ and (d₁,0)₁ ↔ (d₂,0)₂ with t₂.
    pub fn two_contact(t1: f64, t2: f64, d1: i64, d2: i64) -> Result<Self> {
        Self::new(
            vec![Site::new(0, 0), Site::new(d1, 0)],
            vec![Site::new(0, 0), Site::new(d2, 0)],
            DMatrix::from_row_slice(2, 2, &[t1, 0.0, 0.0, t2]),
        )
    }

    /// One bond (0,0)₁ ↔ (0,0)₂ with amplitude t.
    pub fn single_contact(t: f64) -> Self {
        Self::new(vec![Site::new(0, 0)], vec![Site::new(0, 0)], DMatrix::from_element(1, 1, t)).expect("valid single contact")
    }

    pub fn contacts(&self, r: Reservoir) -> &[Site] {
        match r {
            Reservoir::One => &self.contacts1,
            Reservoir::Two => &self.contacts2,
        }
    }

    pub fn amplitudes(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// |Π| = |S₁| + |S₂|
    pub fn size(&self) -> usize {
        self.contacts1.len() + self.contacts2.len()
    }

    pub fn is_decoupled(&self) -> bool {
        self.range.ncols() == 0
    }

    /// Position in Π of the i-th contact of reservoir r.
    pub fn pi_index(&self, r: Reservoir, i: usize) -> usize {
        match r {
            Reservoir::One => i,
            Reservoir::Two => self.contacts1.len() + i,
        }
    }

    /// (reservoir, site) for every index of Π.
    pub fn pi_sites(&self) -> Vec<(Reservoir, Site)> {
        self.contacts1
            .iter()
            .map(|&s| (Reservoir::One, s))
            .chain(self.contacts2.iter().map(|&s| (Reservoir::Two, s)))
            .collect()
    }

    /// v restricted to Π.
    pub fn coupling(&self) -> DMatrix<f64> {
        let (n1, n) = (self.contacts1.len(), self.size());
        let mut v = DMatrix::zeros(n, n);
        for i in 0..n1 {
            for j in 0..self.contacts2.len() {
                v[(i, n1 + j)] = self.t[(i, j)];
                v[(n1 + j, i)] = self.t[(i, j)];
            }
        }
        v
    }

    /// Displacements s′ − s within each contact set: what r⁰ needs.
    pub fn internal_displacements(&self) -> Vec<Disp> {
        let mut out = Vec::new();
        for set in [&self.contacts1, &self.contacts2] {
            for a in set.iter() {
                for b in set.iter() {
                    out.push(a.to(*b));
                }
            }
        }
        out
    }

    /// r⁰ on Π from a Green-function lookup g(x).
    pub fn free_resolvent<T, F>(&self, g: F) -> DMatrix<T>
    where
        T: nalgebra::Scalar + num_traits::Zero,
        F: Fn(Disp) -> T,
    {
        let sites = self.pi_sites();
        DMatrix::from_fn(sites.len(), sites.len(), |i, j| {
            let (ri, si) = sites[i];
            let (rj, sj) = sites[j];
            if ri == rj {
                g(si.to(sj))
            } else {
                T::zero()
            }
        })
    }

    /// P(e) restricted to Π and to reservoir `only` if given (block-diagonal).
    pub fn shell_block(&self, density: impl Fn(Disp) -> f64, only: Option<Reservoir>) -> DMatrix<f64> {
        let sites = self.pi_sites();
        DMatrix::from_fn(sites.len(), sites.len(), |i, j| {
            let (ri, si) = sites[i];
            let (rj, sj) = sites[j];
            if ri == rj && only.is_none_or(|o| o == ri) {
                density(si.to(sj))
            } else {
                0.0
            }
        })
    }
}

fn range_basis(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    if n == 0 || v.iter().all(|&x| x == 0.0) {
        return DMatrix::zeros(n, 0);
    }
    let eig = SymmetricEigen::new(v.clone());
    let scale = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() > 1e-12 * scale).collect();
    DMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}

/// Where Q and M are evaluated: off the band at complex z, or on it at e ± i0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralPoint {
    OffBand(Complex64),
    Boundary(f64, Side),
}

impl SpectralPoint {
    fn as_complex(self) -> Complex64 {
        match self {
            SpectralPoint::OffBand(z) => z,
            SpectralPoint::Boundary(e, Side::Plus) => Complex64::new(e, 0.0),
            SpectralPoint::Boundary(e, Side::Minus) => Complex64::new(e, -0.0),
        }
    }
}

fn green_lookup(j: &Junction, at: SpectralPoint, tol: f64) -> Result<HashMap<Disp, Complex64>> {
    let mut keys: Vec<Disp> = j.internal_displacements().into_iter().map(crate::green::canonical).collect();
    keys.sort();
    keys.dedup();
    let vals = match at {
        SpectralPoint::OffBand(z) => crate::green::green_offband_many(z, &keys, crate::green::GreenOptions { tol, gap: 0.0 })?,
        SpectralPoint::Boundary(e, side) => {
            let g = line::boundary_line(e, &keys, tol)?;
            if side == Side::Plus {
                g
            } else {
                g.into_iter().map(|v| v.conj()).collect()
            }
        }
    };
    Ok(keys.into_iter().zip(vals).collect())
}

/// M = v + v r⁰ v on Π.
pub fn m_matrix(junction: &Junction, at: SpectralPoint) -> Result<DMatrix<Complex64>> {
    let g = green_lookup(junction, at, 1e-13)?;
    let r0 = junction.free_resolvent(|d| g[&crate::green::canonical(d)]);
    Ok(m_from_resolvent(junction, &r0))
}

fn m_from_resolvent(junction: &Junction, r0: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let v = junction.coupling().map(|x| Complex64::new(x, 0.0));
    &v + &v * r0 * &v
}

/// Q on Π with reservoir blocks.
#[derive(Debug, Clone)]
pub struct QMatrices {
    pub at: SpectralPoint,
    pub q: DMatrix<Complex64>,
    n1: usize,
}

impl QMatrices {
    /// Q^{(i,j)}: rows in S_i, columns in S_j.
    pub fn block(&self, i: Reservoir, j: Reservoir) -> DMatrix<Complex64> {
        let n = self.q.nrows();
        let (r0, rn) = match i {
            Reservoir::One => (0, self.n1),
            Reservoir::Two => (self.n1, n - self.n1),
        };
        let (c0, cn) = match j {
            Reservoir::One => (0, self.n1),
            Reservoir::Two => (self.n1, n - self.n1),
        };
        self.q.view((r0, c0), (rn, cn)).into_owned()
    }

    /// Q(z̄) = Q(z)* for real coupling.
    pub fn adjoint(&self) -> QMatrices {
        let at = match self.at {
            SpectralPoint::OffBand(z) => SpectralPoint::OffBand(z.conj()),
            SpectralPoint::Boundary(e, Side::Plus) => SpectralPoint::Boundary(e, Side::Minus),
            SpectralPoint::Boundary(e, Side::Minus) => SpectralPoint::Boundary(e, Side::Plus),
        };
        QMatrices { at, q: self.q.adjoint(), n1: self.n1 }
    }
}

/// rcond below which M is treated as singular on range(v).
pub const RCOND_MIN: f64 = 1e-12;

/// Q = v B (Bᵀ M B)⁻¹ Bᵀ v with B an orthonormal basis of range(v).
pub fn q_matrix(junction: &Junction, at: SpectralPoint) -> Result<QMatrices> {
    let g = green_lookup(junction, at, 1e-13)?;
    let r0 = junction.free_resolvent(|d| g[&crate::green::canonical(d)]);
    q_from_resolvent(junction, at, &r0)
}

/// Q₊(e) from a precomputed table (the table must contain the junction's displacements).
pub fn q_from_table(junction: &Junction, table: &GreenTable, side: Side) -> Result<QMatrices> {
    let r0 = junction.free_resolvent(|d| table.g(side, d));
    q_from_resolvent(junction, SpectralPoint::Boundary(table.energy(), side), &r0)
}

pub(crate) fn q_from_resolvent(junction: &Junction, at: SpectralPoint, r0: &DMatrix<Complex64>) -> Result<QMatrices> {
    let n = junction.size();
    let n1 = junction.contacts(Reservoir::One).len();
    let b = junction.range.map(|x| Complex64::new(x, 0.0));
    if b.ncols() == 0 {
        return Ok(QMatrices { at, q: DMatrix::zeros(n, n), n1 });
    }
    let m = m_from_resolvent(junction, r0);
    let m_pi = b.transpose() * &m * &b;
    let sv = m_pi.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(rcond > RCOND_MIN) {
        return Err(Error::NearBoundState { z: at.as_complex(), rcond, det: m_pi.determinant() });
    }
    let inv = m_pi.lu().try_inverse().ok_or(Error::NearBoundState {
        z: at.as_complex(),
        rcond,
        det: Complex64::new(0.0, 0.0),
    })?;
    let vb = junction.coupling().map(|x| Complex64::new(x, 0.0)) * &b;
    let q = &vb * inv * vb.transpose();
    Ok(QMatrices { at, q, n1 })
}

/// Settings of the bound-state scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Closest grid point to a band edge.
    pub min_gap: f64,
    /// Farthest grid point from a band edge.
    pub max_distance: f64,
    pub points_per_side: usize,
    /// Absolute tolerance of the energy integrals for norms.
    pub quad_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        // 10 band widths out, log-spaced.
        Self { min_gap: 1e-6, max_distance: 40.0, points_per_side: 2000, quad_tol: 1e-12 }
    }
}

/// An eigenvalue λ ∉ [0, 4] of the coupled Hamiltonian with its eigenspace.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub lambda: f64,
    /// Orthonormal kernel vectors ψ of M(λ) on Π.
    pub kernel: Vec<DVector<f64>>,
    /// vψ for each kernel vector; eigenvectors are f = −r⁰(λ)vψ.
    pub v_psi: Vec<DVector<f64>>,
    /// Gram matrix (f_a, f_b) = ∫ (vψ_a, P(e) vψ_b)/(e − λ)² de.
    pub gram: DMatrix<f64>,
    /// max ‖M(λ)ψ‖ over the kernel vectors.
    pub residual: f64,
}

impl BoundState {
    pub fn multiplicity(&self) -> usize {
        self.kernel.len()
    }

    /// ‖f‖² for the first kernel vector.
    pub fn norm_sq(&self) -> f64 {
        self.gram[(0, 0)]
    }

    /// Eigenvector amplitudes f_x = −Σ_s g(λ; x − s)(vψ)_s for sites x of one
    /// reservoir; one row per kernel vector.
    pub fn amplitudes(&self, junction: &Junction, reservoir: Reservoir, sites: &[Site]) -> Result<Vec<Vec<f64>>> {
        let contacts = junction.contacts(reservoir);
        let mut keys: Vec<Disp> = sites
            .iter()
            .flat_map(|x| contacts.iter().map(move |s| crate::green::canonical(s.to(*x))))
            .collect();
        keys.sort();
        keys.dedup();
        if keys.is_empty() {
            return Ok(vec![vec![0.0; sites.len()]; self.kernel.len()]);
        }
        let g = line::offband_real(self.lambda, &keys, 1e-13)?;
        let lookup: HashMap<Disp, f64> = keys.into_iter().zip(g).collect();
        Ok(self
            .v_psi
            .iter()
            .map(|vp| {
                sites
                    .iter()
                    .map(|x| {
                        -contacts
                            .iter()
                            .enumerate()
                            .map(|(i, s)| lookup[&crate::green::canonical(s.to(*x))] * vp[junction.pi_index(reservoir, i)])
                            .sum::<f64>()
                    })
                    .collect()
            })
            .collect())
    }
}

/// Result of [`find_bound_states`]: states in increasing λ and any scan warnings.
#[derive(Debug, Clone, Default)]
pub struct BoundStateScan {
    pub states: Vec<BoundState>,
    pub warnings: Vec<String>,
}

/// Real symmetric M restricted to range(v) at real λ off the band.
fn restricted_m(junction: &Junction, lambda: f64) -> Result<DMatrix<f64>> {
    let mut keys: Vec<Disp> = junction.internal_displacements().into_iter().map(crate::green::canonical).collect();
    keys.sort();
    keys.dedup();
    let g = line::offband_real(lambda, &keys, 1e-13)?;
    let lookup: HashMap<Disp, f64> = keys.into_iter().zip(g).collect();
    let r0 = junction.free_resolvent(|d| lookup[&crate::green::canonical(d)]);
    let v = junction.coupling();
    let m = &v + &v * r0 * &v;
    let b = &junction.range;
    let mp = b.transpose() * m * b;
    // Symmetrise away rounding so the eigen-solver sees an exactly symmetric matrix.
    Ok((&mp + mp.transpose()) * 0.5)
}

fn negative_count(m: &DMatrix<f64>) -> usize {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().filter(|&&x| x < 0.0).count()
}

/// Eigenvalues of the coupled Hamiltonian outside [0, 4].
///
/// Roots of det M_Π(λ) are eigenvalue crossings of the real symmetric M_Π; the
/// number of negative eigenvalues is tracked on a log grid in the distance from
/// each band edge and every change is bisected to machine precision.
pub fn find_bound_states(junction: &Junction, opts: ScanOptions) -> Result<BoundStateScan> {
    let mut scan = BoundStateScan::default();
    if junction.is_decoupled() {
        return Ok(scan);
    }
    if !(opts.min_gap > 0.0 && opts.max_distance > opts.min_gap && opts.points_per_side >= 2) {
        return Err(Error::domain("find_bound_states", "scan range must exclude the band and be non-empty"));
    }
    let n = opts.points_per_side;
    let ratio = (opts.max_distance / opts.min_gap).ln() / (n - 1) as f64;
    let dists: Vec<f64> = (0..n).map(|i| opts.min_gap * (ratio * i as f64).exp()).collect();
    let limit_count = negative_count(&(junction.range.transpose() * junction.coupling() * &junction.range));

    let mut roots: Vec<(f64, usize)> = Vec::new();
    for below in [true, false] {
        let at = |d: f64| if below { BAND_BOTTOM - d } else { BAND_TOP + d };
        let counts: Vec<usize> = dists
            .par_iter()
            .map(|&d| restricted_m(junction, at(d)).map(|m| negative_count(&m)))
            .collect::<Result<_>>()?;
        for i in 0..n - 1 {
            if counts[i] != counts[i + 1] {
                if i == 0 {
                    scan.warnings.push(format!(
                        "root within {:.1e} of the band edge {}; closer roots are not resolved",
                        dists[1],
                        if below { "0" } else { "4" }
                    ));
                }
                bisect_counts(junction, at(dists[i]), counts[i], at(dists[i + 1]), counts[i + 1], &mut roots)?;
            }
        }
        if counts[n - 1] != limit_count {
            scan.warnings.push(format!(
                "eigenvalue count at distance {} from the band differs from its λ → ∞ limit; roots may lie beyond the scan",
                opts.max_distance
            ));
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 * a.0.abs().max(1.0));

    for (lambda, mult) in roots {
        let state = extract_state(junction, lambda, mult, opts.quad_tol, &mut scan.warnings)?;
        scan.states.push(state);
    }
    Ok(scan)
}

fn bisect_counts(junction: &Junction, a: f64, ca: usize, b: f64, cb: usize, out: &mut Vec<(f64, usize)>) -> Result<()> {
    if ca == cb {
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) || mid == a || mid == b {
        out.push((mid, ca.abs_diff(cb)));
        return Ok(());
    }
    let cm = negative_count(&restricted_m(junction, mid)?);
    bisect_counts(junction, a, ca, mid, cm, out)?;
    bisect_counts(junction, mid, cm, b, cb, out)
}

fn extract_state(junction: &Junction, lambda: f64, multiplicity: usize, quad_tol: f64, warnings: &mut Vec<String>) -> Result<BoundState> {
    let mp = restricted_m(junction, lambda)?;
    let svd = mp.clone().svd(false, true);
    let sv = &svd.singular_values;
    let vt = svd.v_t.expect("requested right singular vectors");
    let smax = sv.max();
    let small = sv.iter().filter(|&&s| s < 1e-8 * smax).count();
    if small != multiplicity {
        warnings.push(format!(
            "λ = {lambda:.12}: {small} singular values below threshold but eigenvalue crossing of multiplicity {multiplicity}"
        ));
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let b = &junction.range;
    let v = junction.coupling();
    let mut kernel = Vec::new();
    let mut v_psi = Vec::new();
    let mut residual = 0.0f64;
    for &k in order.iter().take(multiplicity.max(1)) {
        let coeffs = vt.row(k).transpose();
        residual = residual.max((&mp * &coeffs).norm());
        let psi = b * coeffs;
        let psi = fix_sign(&(&psi / psi.norm()));
        v_psi.push(&v * &psi);
        kernel.push(psi);
    }
    let gram = spectral_overlaps(junction, lambda, &v_psi, None, quad_tol)?;
    Ok(BoundState { lambda, kernel, v_psi, gram, residual })
}

fn fix_sign(v: &DVector<f64>) -> DVector<f64> {
    let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        -v
    } else {
        v.clone()
    }
}

/// ∫ w(e) (u_a, P(e) u_b)/(e − λ)² de over the band, with P restricted to the
/// reservoirs listed by `weights` (per reservoir occupation), or to all with weight 1.
fn spectral_overlaps(
    junction: &Junction,
    lambda: f64,
    us: &[DVector<f64>],
    weights: Option<&[ReservoirState; 2]>,
    tol: f64,
) -> Result<DMatrix<f64>> {
    let k = us.len();
    let keys = junction.internal_displacements();
    let forms = |e: f64| -> Result<Vec<f64>> {
        let p = shell_density_many(e, &keys)?;
        let lookup: HashMap<Disp, f64> = keys.iter().copied().zip(p).collect();
        let den = (e - lambda) * (e - lambda);
        let mut out = vec![0.0; 2 * k * k];
        for (r_i, r) in Reservoir::BOTH.iter().enumerate() {
            let block = junction.shell_block(|d| lookup[&d], Some(*r));
            for a in 0..k {
                for b in 0..k {
                    out[r_i * k * k + a * k + b] = us[a].dot(&(&block * &us[b])) / den;
                }
            }
        }
        Ok(out)
    };
    let failure = std::sync::Mutex::new(None);
    let weight = |r: usize, e: f64| weights.map_or(1.0, |s| s[r].fermi(e));
    let f = |e: f64| match forms(e) {
        Ok(mut v) => {
            for (r, chunk) in v.chunks_exact_mut(k * k).enumerate() {
                let w = weight(r, e);
                chunk.iter_mut().for_each(|x| *x *= w);
            }
            v
        }
        Err(err) => {
            failure.lock().unwrap().get_or_insert(err);
            vec![f64::NAN; 2 * k * k]
        }
    };
    let upper = match weights {
        None => BAND_TOP,
        Some(states) => states.iter().map(|s| s.support().1).fold(BAND_BOTTOM, f64::max),
    };
    let mut total = DMatrix::zeros(k, k);
    if upper <= BAND_BOTTOM {
        return Ok(total);
    }
    let hints: Vec<f64> = weights.map_or(Vec::new(), |s| s.iter().map(|s| s.mu).collect());
    let quad = Quadrature { abs_tol: tol, rel_tol: 1e-12, max_intervals: 20_000, parallel: false };
    let est = quad.integrate_graded(f, BAND_BOTTOM, upper, &hints, &[VAN_HOVE]);
    if let Some(err) = failure.lock().unwrap().take() {
        return Err(err);
    }
    let est = est.map_err(Error::from)?;
    for r in 0..2 {
        for a in 0..k {
            for b in 0..k {
                total[(a, b)] += est.value[r * k * k + a * k + b];
            }
        }
    }
    Ok(total)
}

/// Occupation matrix W_ab = (f_a, ρ⁰ f_b) = Σᵢ ∫ f_{βᵢ,μᵢ}(e)(vψ_a, Pᵢ(e) vψ_b)/(e − λ)² de.
pub fn occupation_matrix(junction: &Junction, state: &BoundState, reservoirs: &[ReservoirState; 2], tol: f64) -> Result<DMatrix<f64>> {
    spectral_overlaps(junction, state.lambda, &state.v_psi, Some(reservoirs), tol)
}

/// (f, ρ⁰ f) for the first kernel vector of the bound state.
pub fn occupation_weight(junction: &Junction, state: &BoundState, reservoirs: &[ReservoirState; 2]) -> Result<f64> {
    Ok(occupation_matrix(junction, state, reservoirs, 1e-12)?[(0, 0)])
}
