//! Figure presets: each fixes the junction, energy and channel of one figure.

use crate::config::{default_contacts, Contact, ScenarioConfig};
use crate::error::{CliError, Result};
use std::fmt;
use tunnel_core::observables::Channel;
use tunnel_core::Site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 8] =
        [Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7, Preset::Fig8, Preset::Fig9, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Custom => "custom",
        }
    }

    /// Config keys the preset sets itself; setting them explicitly is a conflict.
    pub fn controlled_keys(self) -> &'static [&'static str] {
        match self {
            Preset::Fig3 | Preset::Fig4 | Preset::Fig5 => &["contacts", "energy"],
            Preset::Fig6 | Preset::Fig7 | Preset::Fig8 | Preset::Fig9 => &["beta1", "beta2", "contacts", "energy", "mu1", "mu2"],
            Preset::Custom => &[],
        }
    }

    /// Reject configs that set keys the preset overrides, listing all of them.
    pub fn check(self, cfg: &ScenarioConfig) -> Result<()> {
        let clash: Vec<&str> = self.controlled_keys().iter().copied().filter(|k| cfg.explicit_keys().contains(*k)).collect();
        if clash.is_empty() {
            Ok(())
        } else {
            Err(CliError::config(
                clash.join(", "),
                format!("preset {} sets these keys itself; remove them from the config or use `custom`", self.name()),
            ))
        }
    }

    /// The parameter tuples of the figure, one per panel or curve.
    pub fn cases(self) -> Vec<Case> {
        let fixed = |label: &str, t1, d1, e, channel| Case { label: label.into(), t1, d1, energy: Some(e), channel };
        let integrated = |label: &str, t1, d1, channel| Case { label: label.into(), t1, d1, energy: None, channel };
        match self {
            Preset::Fig3 => vec![
                fixed("t1_1", 1.0, 1, 0.3, Channel::Transmitted),
                fixed("t1_0.5", 0.5, 1, 0.3, Channel::Transmitted),
                fixed("t1_0", 0.0, 1, 0.3, Channel::Transmitted),
            ],
            Preset::Fig4 => vec![
                fixed("t1_1", 1.0, 1, 0.3, Channel::Reflected),
                fixed("t1_0.5", 0.5, 1, 0.3, Channel::Reflected),
                fixed("t1_0", 0.0, 1, 0.3, Channel::Reflected),
            ],
            Preset::Fig5 => vec![
                fixed("t1_1_d1_1", 1.0, 1, 1.4, Channel::Transmitted),
                fixed("t1_1_d1_20", 1.0, 20, 1.4, Channel::Transmitted),
                fixed("t1_0", 0.0, 1, 1.4, Channel::Transmitted),
            ],
            Preset::Fig6 => vec![integrated("line", 1.0, 1, Channel::Total)],
            Preset::Fig7 => vec![integrated("j", 1.0, 1, Channel::Total), integrated("j0", 0.0, 1, Channel::Total)],
            Preset::Fig8 => vec![
                fixed("e1.4", 1.0, 1, 1.4, Channel::Transmitted),
                fixed("e0.3", 1.0, 1, 0.3, Channel::Transmitted),
                integrated("integrated", 1.0, 1, Channel::Transmitted),
            ],
            Preset::Fig9 => vec![integrated("integrated", 1.0, 1, Channel::Total)],
            Preset::Custom => Vec::new(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One panel of a figure: junction (t₁, d₁ with t₂ = 1, d₂ = 20), energy, channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub t1: f64,
    pub d1: i64,
    /// `None` means energy-integrated.
    pub energy: Option<f64>,
    pub channel: Channel,
}

impl Case {
    pub fn contacts(&self) -> Vec<Contact> {
        default_contacts(self.t1, self.d1)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.energy.map_or("integrated".to_string(), |e| e.to_string());
        write!(f, "{}: t1={} d1={} t2=1 d2=20 e={} channel={}", self.label, self.t1, self.d1, e, self.channel)
    }
}

/// Sites (i, 19), i = 1..=40: the line of the profile and bond-current figures.
pub fn line_sites() -> Vec<Site> {
    (1..=40).map(|i| Site::new(i, 19)).collect()
}

/// Bonds (i, 19) → (i, 20) crossing the line.
pub fn line_bonds() -> Vec<(Site, Site)> {
    line_sites().into_iter().map(|s| (s, Site::new(s.x1, s.x2 + 1))).collect()
}

/// Open grid of n nodes strictly inside (lo, hi): lo + (hi − lo)k/(n + 1).
pub fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "\
fig3
  t1_1: t1=1 d1=1 t2=1 d2=20 e=0.3 channel=transmitted
  t1_0.5: t1=0.5 d1=1 t2=1 d2=20 e=0.3 channel=transmitted
  t1_0: t1=0 d1=1 t2=1 d2=20 e=0.3 channel=transmitted
fig4
  t1_1: t1=1 d1=1 t2=1 d2=20 e=0.3 channel=reflected
  t1_0.5: t1=0.5 d1=1 t2=1 d2=20 e=0.3 channel=reflected
  t1_0: t1=0 d1=1 t2=1 d2=20 e=0.3 channel=reflected
fig5
  t1_1_d1_1: t1=1 d1=1 t2=1 d2=20 e=1.4 channel=transmitted
  t1_1_d1_20: t1=1 d1=20 t2=1 d2=20 e=1.4 channel=transmitted
  t1_0: t1=0 d1=1 t2=1 d2=20 e=1.4 channel=transmitted
fig6
  line: t1=1 d1=1 t2=1 d2=20 e=integrated channel=total
fig7
  j: t1=1 d1=1 t2=1 d2=20 e=integrated channel=total
  j0: t1=0 d1=1 t2=1 d2=20 e=integrated channel=total
fig8
  e1.4: t1=1 d1=1 t2=1 d2=20 e=1.4 channel=transmitted
  e0.3: t1=1 d1=1 t2=1 d2=20 e=0.3 channel=transmitted
  integrated: t1=1 d1=1 t2=1 d2=20 e=integrated channel=transmitted
fig9
  integrated: t1=1 d1=1 t2=1 d2=20 e=integrated channel=total
custom
";

    #[test]
    fn preset_tuples_match_snapshot() {
        let mut s = String::new();
        for p in Preset::ALL {
            s.push_str(p.name());
            s.push('\n');
            for c in p.cases() {
                s.push_str(&format!("  {c}\n"));
            }
        }
        assert_eq!(s, GOLDEN);
    }

    #[test]
    fn conflicts_list_every_overridden_key() {
        let cfg = ScenarioConfig::parse("energy = 0.5\nmu1 = 1.0\ncontacts = []").unwrap();
        let e = Preset::Fig7.check(&cfg).unwrap_err();
        assert!(matches!(&e, CliError::Config { path, .. } if path == "contacts, energy, mu1"), "{e}");
        let e = Preset::Fig3.check(&cfg).unwrap_err();
        assert!(matches!(&e, CliError::Config { path, .. } if path == "contacts, energy"), "{e}");
        assert!(Preset::Custom.check(&cfg).is_ok());
        assert!(Preset::Fig3.check(&ScenarioConfig::parse("mu1 = 1.0").unwrap()).is_ok());
    }

    #[test]
    fn line_geometry() {
        let b = line_bonds();
        assert_eq!(b.len(), 40);
        assert_eq!(b[0], (Site::new(1, 19), Site::new(1, 20)));
        assert_eq!(b[39], (Site::new(40, 19), Site::new(40, 20)));
        let g = open_grid(0.3, 1.4, 50);
        assert_eq!(g.len(), 50);
        assert!(g[0] > 0.3 && g[49] < 1.4);
    }
}
