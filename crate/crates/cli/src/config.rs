//! TOML scenario configuration.
//!
//! Every key is optional; omitted keys take the two-contact defaults
//! (μ₁ = 1.4, μ₂ = 0.3, zero temperature, S₁ = {(0,0),(1,0)}, S₂ = {(0,0),(20,0)},
//! t₁ = t₂ = 1, the 40 × 40 window around S₂).
//!
//! ```toml
//! name = "default"
//! mu1 = 1.4
//! mu2 = 0.3
//! beta1 = inf            # or a positive number, or "inf"
//! beta2 = inf
//! energy = 0.3           # fixed energy for `field`; omit for energy-integrated fields
//! energy_nodes = 50      # j(e) samples
//! figures_compat = false # true: total density without the bound-state part
//! outputs = ["summary", "density", "current", "spectral_current", "bound_states"]
//! contacts = [
//!   { s1 = [0, 0], s2 = [0, 0], t = 1.0 },
//!   { s1 = [1, 0], s2 = [20, 0], t = 1.0 },
//! ]
//!
//! [window]
//! x_min = -10
//! x_max = 29
//! y_min = -20
//! y_max = 19
//!
//! [tolerances]
//! quad = 1e-9         # energy quadrature, absolute per value
//! bound_state = 1e-12 # norm / occupation integrals
//! ```

use crate::error::{CliError, Result};
use serde::Deserialize;
use std::collections::BTreeSet;
use tunnel_core::observables::Window;
use tunnel_core::reservoir::ReservoirState;
use tunnel_core::scattering::Junction;
use tunnel_core::Site;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    mu1: Option<f64>,
    mu2: Option<f64>,
    beta1: Option<RawBeta>,
    beta2: Option<RawBeta>,
    energy: Option<f64>,
    energy_nodes: Option<i64>,
    figures_compat: Option<bool>,
    outputs: Option<Vec<String>>,
    contacts: Option<Vec<RawContact>>,
    window: Option<RawWindow>,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBeta {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContact {
    s1: [i64; 2],
    s2: [i64; 2],
    t: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    x_min: i64,
    x_max: i64,
    y_min: i64,
    y_max: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    quad: Option<f64>,
    bound_state: Option<f64>,
}

/// Products a `custom` run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    Summary,
    Density,
    Current,
    SpectralCurrent,
    BoundStates,
}

impl Output {
    pub const ALL: [Output; 5] = [Output::Summary, Output::Density, Output::Current, Output::SpectralCurrent, Output::BoundStates];

    pub fn name(self) -> &'static str {
        match self {
            Output::Summary => "summary",
            Output::Density => "density",
            Output::Current => "current",
            Output::SpectralCurrent => "spectral_current",
            Output::BoundStates => "bound_states",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub quad: f64,
    pub bound_state: f64,
}

/// One junction bond: contact in reservoir 1, contact in reservoir 2, amplitude.
pub type Contact = (Site, Site, f64);

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub reservoirs: [ReservoirState; 2],
    pub contacts: Vec<Contact>,
    pub window: Window,
    pub energy: Option<f64>,
    pub energy_nodes: usize,
    pub tolerances: Tolerances,
    pub outputs: Vec<Output>,
    pub figures_compat: bool,
    explicit: BTreeSet<String>,
}

/// The two-contact junction with t₂ = 1, S₂ = {(0,0),(20,0)}.
pub fn default_contacts(t1: f64, d1: i64) -> Vec<Contact> {
    vec![(Site::new(0, 0), Site::new(0, 0), t1), (Site::new(d1, 0), Site::new(20, 0), 1.0)]
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            reservoirs: [ReservoirState::zero_temperature(1.4), ReservoirState::zero_temperature(0.3)],
            contacts: default_contacts(1.0, 1),
            window: Window::around_contacts(),
            energy: None,
            energy_nodes: 50,
            tolerances: Tolerances { quad: 1e-9, bound_state: 1e-12 },
            outputs: vec![Output::Summary],
            figures_compat: false,
            explicit: BTreeSet::new(),
        }
    }
}

fn beta(raw: RawBeta, path: &str) -> Result<f64> {
    let b = match raw {
        RawBeta::Number(x) => x,
        RawBeta::Text(s) if matches!(s.trim(), "inf" | "infinity" | "Inf" | "∞") => f64::INFINITY,
        RawBeta::Text(s) => return Err(CliError::config(path, format!("expected a positive number or \"inf\", got {s:?}"))),
    };
    if b > 0.0 && !b.is_nan() {
        Ok(b)
    } else {
        Err(CliError::config(path, format!("inverse temperature must be positive, got {b}")))
    }
}

fn chemical_potential(mu: f64, path: &str) -> Result<f64> {
    if (0.0..=4.0).contains(&mu) {
        Ok(mu)
    } else {
        Err(CliError::config(path, format!("chemical potential {mu} lies outside the band [0, 4]")))
    }
}

fn positive(x: f64, path: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::config(path, format!("must be a positive number, got {x}")))
    }
}

impl ScenarioConfig {
    /// Parse and validate a TOML document.
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.message().trim().to_string();
            CliError::config(if path == "." { "<document>".to_string() } else { path }, message)
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let mut cfg = Self::default();
        let mut explicit = BTreeSet::new();
        let mut mark = |k: &str| {
            explicit.insert(k.to_string());
        };
        if let Some(name) = raw.name {
            mark("name");
            cfg.name = name;
        }
        if let Some(mu) = raw.mu1 {
            mark("mu1");
            cfg.reservoirs[0].mu = chemical_potential(mu, "mu1")?;
        }
        if let Some(mu) = raw.mu2 {
            mark("mu2");
            cfg.reservoirs[1].mu = chemical_potential(mu, "mu2")?;
        }
        if let Some(b) = raw.beta1 {
            mark("beta1");
            cfg.reservoirs[0].beta = beta(b, "beta1")?;
        }
        if let Some(b) = raw.beta2 {
            mark("beta2");
            cfg.reservoirs[1].beta = beta(b, "beta2")?;
        }
        if let Some(e) = raw.energy {
            mark("energy");
            if !(e > 0.0 && e < 4.0) || e == 2.0 {
                return Err(CliError::config("energy", format!("energy {e} must lie in (0, 2) ∪ (2, 4)")));
            }
            cfg.energy = Some(e);
        }
        if let Some(n) = raw.energy_nodes {
            mark("energy_nodes");
            if n < 1 {
                return Err(CliError::config("energy_nodes", format!("must be a positive integer, got {n}")));
            }
            cfg.energy_nodes = n as usize;
        }
        if let Some(f) = raw.figures_compat {
            mark("figures_compat");
            cfg.figures_compat = f;
        }
        if let Some(outs) = raw.outputs {
            mark("outputs");
            let mut parsed = Vec::new();
            for (i, o) in outs.iter().enumerate() {
                let out = Output::ALL
                    .into_iter()
                    .find(|x| x.name() == o)
                    .ok_or_else(|| CliError::config(format!("outputs[{i}]"), format!("unknown output {o:?}")))?;
                parsed.push(out);
            }
            parsed.sort();
            parsed.dedup();
            cfg.outputs = parsed;
        }
        if let Some(contacts) = raw.contacts {
            mark("contacts");
            cfg.contacts = contacts
                .into_iter()
                .enumerate()
                .map(|(i, c)| {
                    if !c.t.is_finite() {
                        return Err(CliError::config(format!("contacts[{i}].t"), "amplitude must be finite"));
                    }
                    Ok((Site::new(c.s1[0], c.s1[1]), Site::new(c.s2[0], c.s2[1]), c.t))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(w) = raw.window {
            mark("window");
            cfg.window = Window::new(w.x_min, w.x_max, w.y_min, w.y_max)
                .map_err(|_| CliError::config("window", format!("empty window [{}, {}] × [{}, {}]", w.x_min, w.x_max, w.y_min, w.y_max)))?;
        }
        if let Some(t) = raw.tolerances {
            if let Some(q) = t.quad {
                mark("tolerances.quad");
                cfg.tolerances.quad = positive(q, "tolerances.quad")?;
            }
            if let Some(b) = t.bound_state {
                mark("tolerances.bound_state");
                cfg.tolerances.bound_state = positive(b, "tolerances.bound_state")?;
            }
        }
        cfg.explicit = explicit;
        cfg.junction()?;
        Ok(cfg)
    }

    /// Keys set explicitly in the document (dotted paths).
    pub fn explicit_keys(&self) -> &BTreeSet<String> {
        &self.explicit
    }

    pub fn junction(&self) -> Result<Junction> {
        Junction::from_pairs(&self.contacts).map_err(|e| CliError::config("contacts", e.to_string()))
    }

    pub fn with_contacts(&self, contacts: Vec<Contact>) -> Self {
        Self { contacts, ..self.clone() }
    }
}
