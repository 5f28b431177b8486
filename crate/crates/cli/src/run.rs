//! Subcommand and preset orchestration. Kernels are computed in the core crate;
//! this module only picks parameters and writes files.

use crate::config::{Output, ScenarioConfig};
use crate::error::Result;
use crate::output::{current_csv, density_csv, fmt_sig, write_file, Report, Table};
use crate::presets::{line_bonds, line_sites, open_grid, Case, Preset};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use tunnel_core::green::{GreenTable, Side};
use tunnel_core::lattice::VAN_HOVE;
use tunnel_core::observables::{
    equilibrium_density, junction_bond_current, kernels, spectral_fields, stationary_fields, total_current_with_tol, Channel,
    FieldOptions, FieldRequest, StationaryFields,
};
use tunnel_core::scattering::{find_bound_states, occupation_matrix, q_matrix, BoundState, Junction, ScanOptions, SpectralPoint};
use tunnel_core::{Disp, Site};

/// Tolerance for tabulating g at fixed energy.
const TABLE_TOL: f64 = 1e-12;

/// One row of the bound-state list.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub lambda: f64,
    pub multiplicity: usize,
    pub norm_sq: f64,
    /// tr(G⁻¹W): the summed occupation of the eigenspace.
    pub occupation: f64,
    pub residual: f64,
}

/// Everything a run reports; `report()` omits the wall time so files stay byte-identical.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub rho_eq: [f64; 2],
    pub current: f64,
    pub current_junction_bonds: f64,
    pub samples: Vec<(f64, f64)>,
    pub bound_states: Vec<BoundRow>,
    pub warnings: Vec<String>,
    /// Energy and Frobenius norm of Q₊ there.
    pub q_norm: (f64, f64),
    pub extra: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
    pub wall_time: Duration,
}

impl RunSummary {
    pub fn report(&self) -> Report {
        let c = &self.config;
        let mut r = Report::default();
        r.set("scenario", self.scenario.as_str());
        for (i, s) in c.reservoirs.iter().enumerate() {
            r.num(format!("mu{}", i + 1), s.mu);
            r.num(format!("beta{}", i + 1), s.beta);
        }
        let contacts: Vec<String> = c.contacts.iter().map(|(a, b, t)| format!("{a}-{b}:{}", fmt_sig(*t))).collect();
        r.set("contacts", contacts.join(";"));
        r.num("rho_eq1", self.rho_eq[0]);
        r.num("rho_eq2", self.rho_eq[1]);
        r.num("J", self.current);
        r.num("J_junction_bonds", self.current_junction_bonds);
        r.num("J_route_difference", (self.current - self.current_junction_bonds).abs());
        r.num("q_energy", self.q_norm.0);
        r.num("q_norm", self.q_norm.1);
        r.set("bound_states", self.bound_states.len().to_string());
        for (i, b) in self.bound_states.iter().enumerate() {
            r.num(format!("bound_state.{i}.lambda"), b.lambda);
            r.set(format!("bound_state.{i}.multiplicity"), b.multiplicity.to_string());
            r.num(format!("bound_state.{i}.norm_sq"), b.norm_sq);
            r.num(format!("bound_state.{i}.occupation"), b.occupation);
            r.num(format!("bound_state.{i}.residual"), b.residual);
        }
        r.set("warnings", self.warnings.len().to_string());
        for (i, w) in self.warnings.iter().enumerate() {
            r.set(format!("warning.{i}"), w.as_str());
        }
        r.set("j_samples", self.samples.len().to_string());
        for (i, (e, j)) in self.samples.iter().enumerate() {
            r.set(format!("j.{i}"), format!("{},{}", fmt_sig(*e), fmt_sig(*j)));
        }
        for (k, v) in &self.extra {
            r.set(k.as_str(), v.as_str());
        }
        r.num("tol.quad", c.tolerances.quad);
        r.num("tol.bound_state", c.tolerances.bound_state);
        r.set("figures_compat", c.figures_compat.to_string());
        r
    }
}

fn scan_options(cfg: &ScenarioConfig) -> ScanOptions {
    ScanOptions { quad_tol: cfg.tolerances.bound_state, ..ScanOptions::default() }
}

fn bound_rows(j: &Junction, cfg: &ScenarioConfig, states: &[BoundState]) -> Result<Vec<BoundRow>> {
    states
        .iter()
        .map(|s| {
            let w = occupation_matrix(j, s, &cfg.reservoirs, cfg.tolerances.bound_state)?;
            let occupation = s.gram.clone().try_inverse().map_or(f64::NAN, |g| (g * w).trace());
            Ok(BoundRow { lambda: s.lambda, multiplicity: s.multiplicity(), norm_sq: s.norm_sq(), occupation, residual: s.residual })
        })
        .collect()
}

/// Energies for j(e): between the Fermi levels, or the whole band if they coincide.
fn current_grid(cfg: &ScenarioConfig) -> Vec<f64> {
    let (a, b) = (cfg.reservoirs[0].mu, cfg.reservoirs[1].mu);
    let (lo, hi) = if a == b { (0.0, 4.0) } else { (a.min(b), a.max(b)) };
    open_grid(lo, hi, cfg.energy_nodes).into_iter().filter(|&e| e != VAN_HOVE).collect()
}

fn spectral_samples(j: &Junction, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter().map(|&e| Ok((e, kernels(j, e)?.spectral_current()))).collect()
}

fn mid_energy(cfg: &ScenarioConfig) -> f64 {
    let e = 0.5 * (cfg.reservoirs[0].mu + cfg.reservoirs[1].mu);
    if e <= 0.0 || e >= 4.0 || e == VAN_HOVE {
        1.0
    } else {
        e
    }
}

/// ρ_eq, J by both routes, bound states, j(e) samples and a Q norm.
pub fn summarize(cfg: &ScenarioConfig, scenario: &str) -> Result<RunSummary> {
    let start = Instant::now();
    let j = cfg.junction()?;
    let rho_eq = [equilibrium_density(&cfg.reservoirs[0])?, equilibrium_density(&cfg.reservoirs[1])?];
    let current = total_current_with_tol(&j, &cfg.reservoirs, cfg.tolerances.quad)?;
    let current_junction_bonds = junction_bond_current(&j, &cfg.reservoirs, cfg.tolerances.quad)?;
    let scan = find_bound_states(&j, scan_options(cfg))?;
    let bound_states = bound_rows(&j, cfg, &scan.states)?;
    let samples = spectral_samples(&j, &current_grid(cfg))?;
    let e = mid_energy(cfg);
    let q = q_matrix(&j, SpectralPoint::Boundary(e, Side::Plus))?;
    Ok(RunSummary {
        scenario: scenario.to_string(),
        config: cfg.clone(),
        rho_eq,
        current,
        current_junction_bonds,
        samples,
        bound_states,
        warnings: scan.warnings,
        q_norm: (e, q.q.norm()),
        extra: Vec::new(),
        files: Vec::new(),
        wall_time: start.elapsed(),
    })
}

/// Collects written files under one output directory.
struct Sink<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Sink<'a> {
    fn new(dir: &'a Path) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn finish(mut summary: RunSummary, mut sink: Sink<'_>, start: Instant) -> Result<RunSummary> {
    sink.write("summary.txt", &summary.report().render())?;
    summary.files = sink.files;
    summary.wall_time = start.elapsed();
    Ok(summary)
}

/// `green`: g±(e; x) on an open energy grid over the band, as `e,re,im`.
pub fn run_green(cfg: &ScenarioConfig, out: &Path, x: Disp, side: Side) -> Result<Vec<PathBuf>> {
    let mut sink = Sink::new(out);
    let mut t = Table::new(&["e", "re", "im"]);
    for e in open_grid(0.0, 4.0, cfg.energy_nodes) {
        if e == VAN_HOVE {
            continue;
        }
        let g = GreenTable::boundary(e, [x], TABLE_TOL)?.g(side, x);
        t.push(&[fmt_sig(e), fmt_sig(g.re), fmt_sig(g.im)]);
    }
    let suffix = if side == Side::Plus { "plus" } else { "minus" };
    sink.write(&format!("green_{suffix}_{}_{}.csv", x.m, x.n), &t.render())?;
    Ok(sink.files)
}

fn bound_states_csv(rows: &[BoundRow]) -> String {
    let mut t = Table::new(&["index", "lambda", "multiplicity", "norm_sq", "occupation", "residual"]);
    for (i, b) in rows.iter().enumerate() {
        t.push(&[i.to_string(), fmt_sig(b.lambda), b.multiplicity.to_string(), fmt_sig(b.norm_sq), fmt_sig(b.occupation), fmt_sig(b.residual)]);
    }
    t.render()
}

/// `scan`: bound states of the configured junction.
pub fn run_scan(cfg: &ScenarioConfig, out: &Path) -> Result<(Vec<BoundRow>, Vec<String>, Vec<PathBuf>)> {
    let j = cfg.junction()?;
    let scan = find_bound_states(&j, scan_options(cfg))?;
    let rows = bound_rows(&j, cfg, &scan.states)?;
    let mut sink = Sink::new(out);
    sink.write("bound_states.csv", &bound_states_csv(&rows))?;
    Ok((rows, scan.warnings, sink.files))
}

/// Window fields at the configured energy, or energy-integrated when none is set.
fn window_fields(cfg: &ScenarioConfig, j: &Junction, energy: Option<f64>, req: &FieldRequest) -> Result<StationaryFields> {
    match energy {
        Some(e) => Ok(spectral_fields(j, e, req)?),
        None => {
            let bound = find_bound_states(j, scan_options(cfg))?.states;
            let opts = FieldOptions { tol: cfg.tolerances.quad, include_point: !cfg.figures_compat };
            Ok(stationary_fields(j, &cfg.reservoirs, req, &bound, opts)?)
        }
    }
}

fn write_fields(sink: &mut Sink<'_>, f: &StationaryFields, densities: bool, currents: bool, suffix: &str) -> Result<()> {
    for ch in [Channel::Transmitted, Channel::Reflected, Channel::Point, Channel::Total] {
        if densities {
            sink.write(&format!("density_{ch}{suffix}.csv"), &density_csv(f.density(ch)))?;
        }
        if let (true, Some(c)) = (currents, f.current(ch)) {
            sink.write(&format!("current_{ch}{suffix}.csv"), &current_csv(c))?;
        }
    }
    Ok(())
}

/// `field`: density and bond-current grids over the window.
pub fn run_field(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let j = cfg.junction()?;
    let f = window_fields(cfg, &j, cfg.energy, &FieldRequest::window(&cfg.window))?;
    let mut sink = Sink::new(out);
    write_fields(&mut sink, &f, true, true, "")?;
    Ok(sink.files)
}

fn spectral_csv(samples: &[(f64, f64)]) -> String {
    let mut t = Table::new(&["e", "j"]);
    for (e, v) in samples {
        t.push(&[fmt_sig(*e), fmt_sig(*v)]);
    }
    t.render()
}

fn q_dump(j: &Junction, grid: &[f64]) -> Result<String> {
    use tunnel_core::scattering::Reservoir;
    let mut t = Table::new(&["e", "block", "row", "col", "re", "im"]);
    for &e in grid {
        for (side, tag) in [(Side::Plus, "+"), (Side::Minus, "-")] {
            let q = q_matrix(j, SpectralPoint::Boundary(e, side))?;
            for a in Reservoir::BOTH {
                for b in Reservoir::BOTH {
                    let blk = q.block(a, b);
                    let name = format!("{tag}{}{}", a.index() + 1, b.index() + 1);
                    for r in 0..blk.nrows() {
                        for c in 0..blk.ncols() {
                            let v = blk[(r, c)];
                            t.push(&[fmt_sig(e), name.clone(), r.to_string(), c.to_string(), fmt_sig(v.re), fmt_sig(v.im)]);
                        }
                    }
                }
            }
        }
    }
    Ok(t.render())
}

/// `current`: J by both routes, j(e) samples and optionally a Q± dump.
pub fn run_current(cfg: &ScenarioConfig, out: &Path, dump_q: bool) -> Result<RunSummary> {
    let start = Instant::now();
    let summary = summarize(cfg, &cfg.name)?;
    let mut sink = Sink::new(out);
    sink.write("spectral_current.csv", &spectral_csv(&summary.samples))?;
    if dump_q {
        let grid: Vec<f64> = summary.samples.iter().map(|s| s.0).collect();
        sink.write("q.csv", &q_dump(&cfg.junction()?, &grid)?)?;
    }
    finish(summary, sink, start)
}

fn case_config(cfg: &ScenarioConfig, case: &Case) -> ScenarioConfig {
    cfg.with_contacts(case.contacts())
}

fn range_extra(extra: &mut Vec<(String, String)>, key: &str, values: impl Iterator<Item = f64> + Clone) {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    extra.push((format!("{key}.min"), fmt_sig(min)));
    extra.push((format!("{key}.max"), fmt_sig(max)));
}

/// `scenario <preset>`: the files of one figure plus a summary of its base junction.
pub fn run_scenario(cfg: &ScenarioConfig, preset: Preset, out: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    preset.check(cfg)?;
    let cases = preset.cases();
    let base = cases.first().map_or_else(|| cfg.clone(), |c| case_config(cfg, c));
    let mut summary = summarize(&base, preset.name())?;
    let mut sink = Sink::new(out);
    let mut extra = Vec::new();
    match preset {
        Preset::Fig3 | Preset::Fig4 | Preset::Fig5 => {
            let req = FieldRequest::sites(cfg.window.sites());
            for case in &cases {
                let e = case.energy.expect("fixed-energy preset");
                let f = spectral_fields(&case_config(cfg, case).junction()?, e, &req)?;
                let d = f.density(case.channel);
                sink.write(&format!("density_{}_{}.csv", case.channel, case.label), &density_csv(d))?;
                range_extra(&mut extra, &format!("case.{}", case.label), d.values.iter().map(|v| v.1));
            }
        }
        Preset::Fig6 => {
            let j = base.junction()?;
            let f = window_fields(&base, &j, None, &FieldRequest::sites(line_sites()))?;
            let rho = summary.rho_eq[1];
            let mut t = Table::new(&["i", "x1", "x2", "transmitted", "reflected", "point", "total", "rho_eq"]);
            for (k, s) in line_sites().into_iter().enumerate() {
                let v = |ch: Channel| fmt_sig(f.density(ch).values[k].1);
                t.push(&[
                    (k + 1).to_string(),
                    s.x1.to_string(),
                    s.x2.to_string(),
                    v(Channel::Transmitted),
                    v(Channel::Reflected),
                    v(Channel::Point),
                    v(Channel::Total),
                    fmt_sig(rho),
                ]);
            }
            sink.write("profile.csv", &t.render())?;
            range_extra(&mut extra, "profile.total", f.total.values.iter().map(|v| v.1));
        }
        Preset::Fig7 => {
            let grid: Vec<f64> = open_grid(0.3, 1.4, cfg.energy_nodes);
            let j = spectral_samples(&case_config(cfg, &cases[0]).junction()?, &grid)?;
            let j0 = spectral_samples(&case_config(cfg, &cases[1]).junction()?, &grid)?;
            let mut t = Table::new(&["e", "j", "two_j0"]);
            for (a, b) in j.iter().zip(&j0) {
                t.push(&[fmt_sig(a.0), fmt_sig(a.1), fmt_sig(2.0 * b.1)]);
            }
            sink.write("spectral_current.csv", &t.render())?;
            let max_j = j.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            let max_j0 = j0.iter().map(|v| 2.0 * v.1).fold(f64::NEG_INFINITY, f64::max);
            extra.push(("fig7.max_j".into(), fmt_sig(max_j)));
            extra.push(("fig7.max_two_j0".into(), fmt_sig(max_j0)));
        }
        Preset::Fig8 | Preset::Fig9 => {
            let j = base.junction()?;
            let mut req = FieldRequest::window(&cfg.window);
            let window_bonds = req.bonds.len();
            req.bonds.extend(line_bonds());
            let integrated = window_fields(&base, &j, None, &req)?;
            let line = |f: &StationaryFields, ch: Channel| -> Vec<f64> {
                f.current(ch).map_or_else(Vec::new, |c| line_bonds().iter().map(|&(x, y)| c.get(x, y).unwrap_or(0.0)).collect())
            };
            let channels: Vec<Channel> =
                if preset == Preset::Fig8 { vec![Channel::Transmitted] } else { vec![Channel::Transmitted, Channel::Reflected, Channel::Total] };
            let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
            if preset == Preset::Fig8 {
                for case in cases.iter().filter(|c| c.energy.is_some()) {
                    let f = spectral_fields(&j, case.energy.unwrap(), &FieldRequest::bonds(line_bonds()))?;
                    columns.push((format!("spectral_{}", case.label), line(&f, Channel::Transmitted)));
                    let wf = spectral_fields(&j, case.energy.unwrap(), &FieldRequest::window(&cfg.window))?;
                    sink.write(&format!("current_transmitted_{}.csv", case.label), &current_csv(&wf.current_transmitted))?;
                }
            }
            for &ch in &channels {
                columns.push((format!("{ch}"), line(&integrated, ch)));
            }
            let mut header = vec!["i", "x1", "x2", "y1", "y2"];
            header.extend(columns.iter().map(|c| c.0.as_str()));
            let mut t = Table::new(&header);
            for (k, (x, y)) in line_bonds().into_iter().enumerate() {
                let mut row = vec![(k + 1).to_string(), x.x1.to_string(), x.x2.to_string(), y.x1.to_string(), y.x2.to_string()];
                row.extend(columns.iter().map(|c| fmt_sig(c.1[k])));
                t.push(&row);
            }
            sink.write("line_currents.csv", &t.render())?;
            // window files exclude the line bonds that leave the window
            let ch = if preset == Preset::Fig8 { Channel::Transmitted } else { Channel::Total };
            let mut window_only = integrated.current(ch).expect("current channel").clone();
            let keep: Vec<(Site, Site)> = FieldRequest::window(&cfg.window).bonds;
            window_only.values.retain(|(b, _)| keep.binary_search(b).is_ok());
            debug_assert_eq!(window_only.values.len(), window_bonds);
            sink.write(&format!("current_{ch}.csv"), &current_csv(&window_only))?;
            sink.write(&format!("density_{ch}.csv"), &density_csv(integrated.density(ch)))?;
            let total_line: f64 = columns.last().map_or(0.0, |c| c.1.iter().sum());
            extra.push(("line.flux".into(), fmt_sig(total_line)));
        }
        Preset::Custom => {
            let j = cfg.junction()?;
            let dens = cfg.outputs.contains(&Output::Density);
            let cur = cfg.outputs.contains(&Output::Current);
            if dens || cur {
                let req = if cur { FieldRequest::window(&cfg.window) } else { FieldRequest::sites(cfg.window.sites()) };
                let f = window_fields(cfg, &j, cfg.energy, &req)?;
                write_fields(&mut sink, &f, dens, cur, "")?;
            }
            if cfg.outputs.contains(&Output::SpectralCurrent) {
                sink.write("spectral_current.csv", &spectral_csv(&summary.samples))?;
            }
            if cfg.outputs.contains(&Output::BoundStates) {
                sink.write("bound_states.csv", &bound_states_csv(&summary.bound_states))?;
            }
        }
    }
    summary.extra = extra;
    finish(summary, sink, start)
}
