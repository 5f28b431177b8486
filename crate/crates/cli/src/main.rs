use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tunnel_cli::presets::Preset;
use tunnel_cli::run;
use tunnel_cli::{CliError, Result, ScenarioConfig};
use tunnel_core::green::Side;
use tunnel_core::Disp;

#[derive(Debug, Parser)]
#[command(name = "tunnel", version, about = "Stationary state of two lattice reservoirs joined by a tunneling junction")]
struct Cli {
    /// TOML scenario file; omitted keys take the two-contact defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Energy-quadrature tolerance (overrides `tolerances.quad`).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the boundary value g±(e; x) over the band as `e,re,im`.
    Green {
        /// Displacement `m,n`.
        #[arg(long, default_value = "0,0", value_parser = parse_disp)]
        x: Disp,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
    },
    /// Find the bound states of the junction.
    Scan,
    /// Density and bond-current grids over the window.
    Field,
    /// Total current J and the spectral current j(e).
    Current {
        /// Also write Q± blocks at every j(e) node as `e,block,row,col,re,im`.
        #[arg(long)]
        dump_q: bool,
    },
    /// Run a figure preset or the `custom` product list.
    Scenario {
        #[arg(value_enum)]
        preset: Preset,
    },
}

fn parse_disp(s: &str) -> std::result::Result<Disp, String> {
    let (m, n) = s.split_once(',').ok_or_else(|| format!("expected `m,n`, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(Disp::new(p(m)?, p(n)?))
}

fn load_config(path: Option<&Path>, tol: Option<f64>) -> Result<ScenarioConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            ScenarioConfig::parse(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::config("--tol", format!("must be a positive number, got {t}")));
        }
        cfg.tolerances.quad = t;
    }
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads", "must be at least 1"));
        }
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load_config(cli.config.as_deref(), cli.tol)?;
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Green { x, side } => {
            let side = match side {
                SideArg::Plus => Side::Plus,
                SideArg::Minus => Side::Minus,
            };
            print_files(&run::run_green(&cfg, out, x, side)?);
        }
        Command::Scan => {
            let (rows, warnings, files) = run::run_scan(&cfg, out)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            for r in &rows {
                println!("lambda={} multiplicity={} residual={:.3e}", r.lambda, r.multiplicity, r.residual);
            }
            print_files(&files);
        }
        Command::Field => print_files(&run::run_field(&cfg, out)?),
        Command::Current { dump_q } => {
            let s = run::run_current(&cfg, out, dump_q)?;
            println!("J={} J_junction_bonds={} ({:.2?})", s.current, s.current_junction_bonds, s.wall_time);
            print_files(&s.files);
        }
        Command::Scenario { preset } => {
            let s = run::run_scenario(&cfg, preset, out)?;
            println!("{preset}: J={} bound_states={} ({:.2?})", s.current, s.bound_states.len(), s.wall_time);
            print_files(&s.files);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
