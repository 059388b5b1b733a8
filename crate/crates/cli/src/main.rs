use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mqs_core::experiments::{
    run_cat_distributions, run_ofilter_visibility, run_qiopa_distributions, run_qiopa_visibility, run_universal_curve,
    slope_diagnostics, write_distribution_csv, write_ofilter_csv, write_qiopa_csv, write_universal_csv,
    DistributionBasis, GridVariable, SlopeReport,
};
use mqs_core::metrics::StateFamily;
use mqs_core::{Error, SweepConfig};
use serde::Serialize;

/// Visibility sweeps for lossy macroscopic superpositions of light.
#[derive(Parser)]
#[command(name = "mqs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cat-state visibility D(x): numeric pipeline next to the closed form.
    UniversalCurve(SweepArgs),
    /// Photon-number distributions of the lossy even cat.
    CatDist(SweepArgs),
    /// Joint photon-number distributions of a lossy QI-OPA macrostate.
    QiopaDist(SweepArgs),
    /// Distance between the lossy amplified |1_+⟩ and |1_−⟩.
    QiopaVis(SweepArgs),
    /// The same distance after the orthogonality filter.
    OfilterVis(SweepArgs),
    /// Slope and inflection report for the curve selected by --family (JSON).
    Diagnostics(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cat,
    Qiopa,
    QiopaFiltered,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    R,
    X,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Equatorial,
    Hv,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with a sweep configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Comma-separated gains g.
    #[arg(long, value_delimiter = ',')]
    gains: Option<Vec<f64>>,
    /// Comma-separated filter thresholds k.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<usize>>,
    /// Comma-separated grid values (reflectivities unless --grid-variable x).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    grid_variable: Option<GridArg>,
    #[arg(long, value_enum)]
    basis: Option<BasisArg>,
    #[arg(long)]
    epsilon_tail: Option<f64>,
    #[arg(long)]
    n_cap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SweepArgs {
    fn resolve(&self, default_family: StateFamily) -> Result<SweepConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => SweepConfig { family: default_family, ..SweepConfig::default() },
        };
        if let Some(f) = self.family {
            cfg.family = match f {
                FamilyArg::Cat => StateFamily::Cat,
                FamilyArg::Qiopa => StateFamily::Qiopa,
                FamilyArg::QiopaFiltered => StateFamily::QiopaFiltered,
            };
        }
        if self.alpha.is_some() {
            cfg.alpha = self.alpha;
        }
        if self.phi.is_some() {
            cfg.phi = self.phi;
        }
        if let Some(g) = &self.gains {
            cfg.gains = g.clone();
        }
        if let Some(k) = &self.thresholds {
            cfg.thresholds = k.clone();
        }
        if let Some(grid) = &self.grid {
            cfg.grid = grid.clone();
        }
        if let Some(v) = self.grid_variable {
            cfg.grid_variable = match v {
                GridArg::R => GridVariable::R,
                GridArg::X => GridVariable::X,
            };
        }
        if let Some(b) = self.basis {
            cfg.basis = match b {
                BasisArg::Equatorial => DistributionBasis::Equatorial,
                BasisArg::Hv => DistributionBasis::Hv,
            };
        }
        if let Some(e) = self.epsilon_tail {
            cfg.truncation.epsilon_tail = e;
        }
        if let Some(n) = self.n_cap {
            cfg.truncation.n_cap = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.display().to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config: &'a SweepConfig,
}

#[derive(Serialize)]
struct CurveReport {
    label: String,
    report: SlopeReport,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit_error("usage", e.to_string().trim_end().to_string());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}

fn emit_error(kind: &str, message: String) {
    let report = ErrorReport { error: kind, message };
    eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
}

fn run(command: Command) -> Result<(), Error> {
    let (name, args, family) = match &command {
        Command::UniversalCurve(a) => ("universal-curve", a, StateFamily::Cat),
        Command::CatDist(a) => ("cat-dist", a, StateFamily::Cat),
        Command::QiopaDist(a) => ("qiopa-dist", a, StateFamily::Qiopa),
        Command::QiopaVis(a) => ("qiopa-vis", a, StateFamily::Qiopa),
        Command::OfilterVis(a) => ("ofilter-vis", a, StateFamily::QiopaFiltered),
        Command::Diagnostics(a) => ("diagnostics", a, StateFamily::Cat),
    };
    let cfg = args.resolve(family)?;

    let mut buf = Vec::new();
    match command {
        Command::UniversalCurve(_) => write_universal_csv(&run_universal_curve(&cfg)?, &mut buf)?,
        Command::CatDist(_) => write_distribution_csv(&run_cat_distributions(&cfg)?, &mut buf)?,
        Command::QiopaDist(_) => write_distribution_csv(&run_qiopa_distributions(&cfg)?, &mut buf)?,
        Command::QiopaVis(_) => write_qiopa_csv(&run_qiopa_visibility(&cfg)?, &mut buf)?,
        Command::OfilterVis(_) => write_ofilter_csv(&run_ofilter_visibility(&cfg)?, &mut buf)?,
        Command::Diagnostics(_) => {
            serde_json::to_writer_pretty(&mut buf, &diagnostics(&cfg)?)?;
            buf.push(b'\n');
        }
    }

    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(&buf)?;
            w.flush()?;
            let meta = RunMeta { tool: "mqs", version: env!("CARGO_PKG_VERSION"), command: name, config: &cfg };
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            let mut m = BufWriter::new(File::create(meta_path)?);
            serde_json::to_writer_pretty(&mut m, &meta)?;
            m.write_all(b"\n")?;
            m.flush()?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// One report per curve: the cat curve, or one per gain (and threshold).
fn diagnostics(cfg: &SweepConfig) -> Result<Vec<CurveReport>, Error> {
    let mut out = Vec::new();
    match cfg.family {
        StateFamily::Cat => {
            let rows = run_universal_curve(cfg)?;
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.d_numeric)).collect();
            out.push(CurveReport {
                label: format!("alpha={:?}", cfg.alpha.unwrap_or_default()),
                report: slope_diagnostics(&pts)?,
            });
        }
        StateFamily::Qiopa => {
            let rows = run_qiopa_visibility(cfg)?;
            for &g in &cfg.gains {
                let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.g == g).map(|r| (r.x, r.distance)).collect();
                out.push(CurveReport { label: format!("g={g:?}"), report: slope_diagnostics(&pts)? });
            }
        }
        StateFamily::QiopaFiltered => {
            let rows = run_ofilter_visibility(cfg)?;
            for &g in &cfg.gains {
                for &k in &cfg.thresholds {
                    let pts: Vec<(f64, f64)> =
                        rows.iter().filter(|r| r.g == g && r.k == k).map(|r| (r.x, r.distance)).collect();
                    out.push(CurveReport { label: format!("g={g:?}/k={k}"), report: slope_diagnostics(&pts)? });
                }
            }
        }
    }
    Ok(out)
}
