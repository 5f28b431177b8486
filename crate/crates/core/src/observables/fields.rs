//! Density and bond-current fields over sets of reservoir-2 sites.

use super::{energy_integral, occupied_range, point_densities, Channel, EnergySlice};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::reservoir::ReservoirState;
use crate::scattering::{BoundState, Junction};

/// An oriented nearest-neighbour bond (x, y).
pub type Bond = (Site, Site);

/// Integer rectangle [x_min, x_max] × [y_min, y_max] of reservoir-2 sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Window {
    pub fn new(x_min: i64, x_max: i64, y_min: i64, y_max: i64) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::domain("window", format!("empty window [{x_min}, {x_max}] × [{y_min}, {y_max}]")));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// 40 × 40 sites around S₂ = {(0,0), (20,0)}.
    pub fn around_contacts() -> Self {
        Self { x_min: -10, x_max: 29, y_min: -20, y_max: 19 }
    }

    pub fn contains(&self, s: Site) -> bool {
        (self.x_min..=self.x_max).contains(&s.x1) && (self.y_min..=self.y_max).contains(&s.x2)
    }

    pub fn len(&self) -> usize {
        ((self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sites in lexicographic order.
    pub fn sites(&self) -> Vec<Site> {
        (self.x_min..=self.x_max).flat_map(|a| (self.y_min..=self.y_max).map(move |b| Site::new(a, b))).collect()
    }

    /// Bonds with both ends inside, each listed once with x < y.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for s in self.sites() {
            for n in [Site::new(s.x1 + 1, s.x2), Site::new(s.x1, s.x2 + 1)] {
                if self.contains(n) {
                    out.push((s, n));
                }
            }
        }
        out.sort();
        out
    }

    /// Sites all of whose neighbours lie inside.
    pub fn interior_sites(&self) -> Vec<Site> {
        self.sites().into_iter().filter(|s| s.neighbours().iter().all(|n| self.contains(*n))).collect()
    }

    /// Bonds leaving the rectangle, oriented inside → outside.
    pub fn outward_bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for s in self.sites() {
            for n in s.neighbours() {
                if !self.contains(n) {
                    out.push((s, n));
                }
            }
        }
        out.sort();
        out
    }
}

/// Sites and bonds on which fields are evaluated.
#[derive(Debug, Clone, Default)]
pub struct FieldRequest {
    pub sites: Vec<Site>,
    pub bonds: Vec<Bond>,
}

impl FieldRequest {
    pub fn window(w: &Window) -> Self {
        Self { sites: w.sites(), bonds: w.bonds() }
    }

    pub fn sites(sites: Vec<Site>) -> Self {
        Self { sites, bonds: Vec::new() }
    }

    pub fn bonds(bonds: Vec<Bond>) -> Self {
        Self { sites: Vec::new(), bonds }
    }

    fn validate(&self) -> Result<()> {
        for &(x, y) in &self.bonds {
            if !x.is_neighbour(y) {
                return Err(Error::domain("field request", format!("bond ({x}, {y}) is not nearest-neighbour")));
            }
        }
        Ok(())
    }

    fn all_sites(&self) -> Vec<Site> {
        let mut all: Vec<Site> = self.sites.iter().copied().chain(self.bonds.iter().flat_map(|&(x, y)| [x, y])).collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Per-site density values, sorted by site.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub channel: Channel,
    pub values: Vec<(Site, f64)>,
}

impl DensityField {
    fn new(channel: Channel, sites: &[Site], values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<(Site, f64)> = sites.iter().copied().zip(values).collect();
        v.sort_by_key(|a| a.0);
        Self { channel, values: v }
    }

    pub fn get(&self, x: Site) -> Option<f64> {
        self.values.binary_search_by(|p| p.0.cmp(&x)).ok().map(|i| self.values[i].1)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
}

/// Per-bond current values, stored with x < y and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub channel: Channel,
    pub values: Vec<(Bond, f64)>,
}

impl CurrentField {
    fn new(channel: Channel, bonds: &[Bond], values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<(Bond, f64)> = bonds
            .iter()
            .zip(values)
            .map(|(&(x, y), j)| if x <= y { ((x, y), j) } else { ((y, x), -j) })
            .collect();
        v.sort_by_key(|a| a.0);
        v.dedup_by(|a, b| a.0 == b.0);
        Self { channel, values: v }
    }

    /// j_{x,y} in either orientation.
    pub fn get(&self, x: Site, y: Site) -> Option<f64> {
        let (key, sign) = if x <= y { ((x, y), 1.0) } else { ((y, x), -1.0) };
        self.values.binary_search_by(|p| p.0.cmp(&key)).ok().map(|i| sign * self.values[i].1)
    }

    /// Σ_y j_{x,y} over the neighbours present in the field.
    pub fn divergence(&self, x: Site) -> f64 {
        x.neighbours().iter().filter_map(|&y| self.get(x, y)).sum()
    }

    /// Net flux through a set of oriented bonds (missing bonds count as errors).
    pub fn flux(&self, bonds: &[Bond]) -> Result<f64> {
        bonds
            .iter()
            .map(|&(x, y)| self.get(x, y).ok_or_else(|| Error::domain("flux", format!("bond ({x}, {y}) not in field"))))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|p| p.1.abs()).fold(0.0, f64::max)
    }
}

/// All channels of a density/current evaluation.
#[derive(Debug, Clone)]
pub struct StationaryFields {
    pub transmitted: DensityField,
    pub reflected: DensityField,
    pub point: DensityField,
    pub total: DensityField,
    pub current_transmitted: CurrentField,
    pub current_reflected: CurrentField,
    pub current_total: CurrentField,
}

impl StationaryFields {
    fn assemble(req: &FieldRequest, d1: &[f64], d2: &[f64], dp: &[f64], j1: &[f64], j2: &[f64]) -> Self {
        let s = &req.sites;
        let b = &req.bonds;
        let total: Vec<f64> = (0..s.len()).map(|i| d1[i] + d2[i] + dp[i]).collect();
        let jt: Vec<f64> = (0..b.len()).map(|i| j1[i] + j2[i]).collect();
        Self {
            transmitted: DensityField::new(Channel::Transmitted, s, d1.iter().copied()),
            reflected: DensityField::new(Channel::Reflected, s, d2.iter().copied()),
            point: DensityField::new(Channel::Point, s, dp.iter().copied()),
            total: DensityField::new(Channel::Total, s, total),
            current_transmitted: CurrentField::new(Channel::Transmitted, b, j1.iter().copied()),
            current_reflected: CurrentField::new(Channel::Reflected, b, j2.iter().copied()),
            current_total: CurrentField::new(Channel::Total, b, jt),
        }
    }

    pub fn density(&self, channel: Channel) -> &DensityField {
        match channel {
            Channel::Transmitted => &self.transmitted,
            Channel::Reflected => &self.reflected,
            Channel::Point => &self.point,
            Channel::Total => &self.total,
        }
    }

    /// Point-spectrum currents vanish (real eigenvectors), so `Point` maps to `None`.
    pub fn current(&self, channel: Channel) -> Option<&CurrentField> {
        match channel {
            Channel::Transmitted => Some(&self.current_transmitted),
            Channel::Reflected => Some(&self.current_reflected),
            Channel::Point => None,
            Channel::Total => Some(&self.current_total),
        }
    }
}

/// Accuracy and channel options for [`stationary_fields`].
#[derive(Debug, Clone, Copy)]
pub struct FieldOptions {
    /// Absolute energy-quadrature tolerance per field value.
    pub tol: f64,
    /// Add d_p to the total density. Off reproduces figures that show d_ac only.
    pub include_point: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self { tol: 1e-9, include_point: true }
    }
}

/// Fields at a single energy: δ⁽¹⁾, δ⁽²⁾ and the spectral bond currents, unweighted.
/// The point channel is zero and the total is δ⁽¹⁾ + δ⁽²⁾.
pub fn spectral_fields(junction: &Junction, e: f64, req: &FieldRequest) -> Result<StationaryFields> {
    super::check_in_band("spectral_fields", e)?;
    req.validate()?;
    let slice = EnergySlice::new(junction, e, &req.all_sites())?;
    let d1: Vec<f64> = req.sites.iter().map(|&x| slice.delta_transmitted(x)).collect();
    let d2: Vec<f64> = req.sites.iter().map(|&x| slice.delta_reflected(x)).collect();
    let j1: Vec<f64> = req.bonds.iter().map(|&(x, y)| slice.bond_transmitted(x, y)).collect();
    let j2: Vec<f64> = req.bonds.iter().map(|&(x, y)| slice.bond_reflected(x, y)).collect();
    let dp = vec![0.0; req.sites.len()];
    Ok(StationaryFields::assemble(req, &d1, &d2, &dp, &j1, &j2))
}

/// Energy-integrated stationary fields: d⁽¹⁾ = ∫f₁δ⁽¹⁾, d⁽²⁾ = ∫f₂δ⁽²⁾ and the
/// matching bond currents, all from one shared set of energy nodes; plus d_p
/// from the given bound states.
pub fn stationary_fields(
    junction: &Junction,
    states: &[ReservoirState; 2],
    req: &FieldRequest,
    bound: &[BoundState],
    opts: FieldOptions,
) -> Result<StationaryFields> {
    req.validate()?;
    let (ns, nb) = (req.sites.len(), req.bonds.len());
    let width = 2 * ns + 2 * nb;
    let all = req.all_sites();
    let (lo, hi, hints) = occupied_range(states);
    let v = if width == 0 {
        Vec::new()
    } else {
        energy_integral(
            |e| {
                let (f1, f2) = (states[0].fermi(e), states[1].fermi(e));
                let mut out = vec![0.0; width];
                if f1 == 0.0 && f2 == 0.0 {
                    return Ok(out);
                }
                let slice = EnergySlice::new(junction, e, &all)?;
                for (i, &x) in req.sites.iter().enumerate() {
                    if f1 != 0.0 {
                        out[i] = f1 * slice.delta_transmitted(x);
                    }
                    if f2 != 0.0 {
                        out[ns + i] = f2 * slice.delta_reflected(x);
                    }
                }
                for (i, &(x, y)) in req.bonds.iter().enumerate() {
                    if f1 != 0.0 {
                        out[2 * ns + i] = f1 * slice.bond_transmitted(x, y);
                    }
                    if f2 != 0.0 {
                        out[2 * ns + nb + i] = f2 * slice.bond_reflected(x, y);
                    }
                }
                Ok(out)
            },
            lo,
            hi,
            &hints,
            opts.tol,
            width,
        )?
    };
    let dp = if opts.include_point && !bound.is_empty() && ns > 0 {
        point_densities(junction, states, bound, &req.sites, 1e-12)?
    } else {
        vec![0.0; ns]
    };
    let (d1, rest) = v.split_at(ns.min(v.len()));
    let (d2, rest) = rest.split_at(ns.min(rest.len()));
    let (j1, j2) = rest.split_at(nb.min(rest.len()));
    let pad = |x: &[f64], n: usize| if x.len() == n { x.to_vec() } else { vec![0.0; n] };
    Ok(StationaryFields::assemble(req, &pad(d1, ns), &pad(d2, ns), &dp, &pad(j1, nb), &pad(j2, nb)))
}
