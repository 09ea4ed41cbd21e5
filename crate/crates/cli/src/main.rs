use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use microgrid_capacity::config::{Format, RunConfig};
use microgrid_capacity::optimizer::{design, scenario_sweep, DesignConfig, ScenarioOutcome};
use microgrid_capacity::profiles::SystemProfiles;
use microgrid_capacity::reliability::{lole_vs_prm_curve, AdequacyStudy, CurvePoint};
use microgrid_capacity::selection::{lcoe_curve, qfd_absolute_targets, rank_options};
use microgrid_capacity::{report, Error, Result};

/// Generator and battery capacity design for islanded community microgrids.
#[derive(Debug, Parser)]
#[command(name = "mgcap", version)]
struct Cli {
    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for all Monte Carlo draws (overrides `reliability.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulated years (overrides `reliability.years`).
    #[arg(long, global = true)]
    years: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Screen technologies: LCOE curves and QFD scores.
    Select,
    /// Design one system for a counted renewable portion.
    Size {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Design one system per alpha.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// LOLE against PRM for fleets with given largest-unit proportions.
    Curve {
        #[arg(long, value_delimiter = ',')]
        plg: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        prm: Option<Vec<f64>>,
    },
    /// Write the default configuration to `--config` (default `mgcap.toml`).
    Init,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mgcap: {e}");
            match e {
                Error::Infeasible(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn init_logging(level: &str) {
    let env = env_logger::Env::default().default_filter_or(level);
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Command::Init = cli.command {
        let path = cli.config.unwrap_or_else(|| PathBuf::from("mgcap.toml"));
        if path.exists() {
            return Err(Error::Config(format!("{} already exists", path.display())));
        }
        fs::write(&path, RunConfig::init_document()?)?;
        println!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    }

    let (mut cfg, base_dir) = match &cli.config {
        Some(path) => {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (RunConfig::load(path)?, base)
        }
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.reliability.seed = seed;
    }
    if let Some(years) = cli.years {
        cfg.reliability.years = years;
        cfg.search.screening_years = cfg.search.screening_years.min(years);
    }
    if let Some(format) = cli.format {
        cfg.output.format = format.into();
    }
    match &cli.command {
        Command::Size { alpha: Some(a) } => cfg.system.alpha = *a,
        Command::Sweep { alphas: Some(a) } => cfg.sweep.alphas = a.clone(),
        Command::Curve { plg, prm } => {
            if let Some(p) = plg {
                cfg.curve.plg = p.clone();
            }
            if let Some(p) = prm {
                cfg.curve.prm_grid = p.clone();
            }
        }
        _ => {}
    }

    init_logging(&cfg.output.log_level);
    let job = match cli.command {
        Command::Select => {
            cfg.qfd.validate()?;
            Job::Select
        }
        Command::Size { .. } => Job::Size(cfg.design_config(&base_dir)?),
        Command::Sweep { .. } => Job::Sweep(cfg.design_config(&base_dir)?),
        Command::Curve { .. } => Job::Curve(cfg.profiles(&base_dir)?),
        Command::Init => unreachable!("handled above"),
    };
    let resolved = cfg.to_toml_string()?;
    info!("resolved configuration:\n{resolved}");
    let out = Output::new(&cfg.output.dir, cfg.output.format)?;
    out.write("resolved_config.toml", &resolved)?;

    match job {
        Job::Select => select(&cfg, &out),
        Job::Size(design_cfg) => size(&design_cfg, &out),
        Job::Sweep(design_cfg) => sweep(&design_cfg, &cfg.sweep.alphas, &out),
        Job::Curve(profiles) => curve(&cfg, &profiles, &out),
    }
}

/// A subcommand with its inputs resolved and validated.
enum Job {
    Select,
    Size(DesignConfig),
    Sweep(DesignConfig),
    Curve(SystemProfiles),
}

struct Output<'a> {
    dir: &'a Path,
    format: Format,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir, format })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn csv(&self, name: &str, contents: impl FnOnce() -> String) -> Result<()> {
        if self.format.csv() {
            self.write(name, &contents())?;
        }
        Ok(())
    }

    fn json(&self, name: &str, contents: impl FnOnce() -> Result<String>) -> Result<()> {
        if self.format.json() {
            self.write(name, &contents()?)?;
        }
        Ok(())
    }
}

fn select(cfg: &RunConfig, out: &Output<'_>) -> Result<ExitCode> {
    let curves = cfg
        .selection
        .technologies
        .iter()
        .map(|t| {
            Ok((
                t.name.clone(),
                lcoe_curve(t, &cfg.selection.capacity_factor_grid)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = qfd_absolute_targets(&cfg.qfd)?;
    let ranking = rank_options(&scores)?;
    for s in &ranking {
        info!("{:>5}  {}", s.score, s.option);
    }
    out.csv("lcoe_curves.csv", || report::lcoe_csv(&curves))?;
    out.json("qfd_scores.json", || {
        report::to_json(&report::SelectionReport {
            scores: &scores,
            ranking: &ranking,
        })
    })?;
    Ok(ExitCode::SUCCESS)
}

fn size(cfg: &DesignConfig, out: &Output<'_>) -> Result<ExitCode> {
    let result = design(cfg)?;
    let s = &result.solution;
    info!(
        "alpha {}: {} gas units of {:.4} MW + {:.4} MW biomass, battery {:.4} MW / {:.4} MWh, \
         LOLE {:.4} ± {:.4} d/yr, {:.0} $/MW-yr",
        s.alpha,
        s.fleet.ng_unit_count,
        s.fleet.ng_unit_capacity_mw,
        s.fleet.biomass_capacity_mw,
        s.bess.power_mw,
        s.bess.energy_mwh,
        s.lole.lole_days_per_year,
        s.lole.ci_halfwidth,
        s.cost.per_mw_year
    );
    out.csv("solution.csv", || report::solution_csv(s))?;
    out.json("solution.json", || report::to_json(s))?;
    out.json("design_trace.json", || report::to_json(&result.trace))?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(cfg: &DesignConfig, alphas: &[f64], out: &Output<'_>) -> Result<ExitCode> {
    let result = scenario_sweep(cfg, alphas)?;
    out.csv("sweep.csv", || report::sweep_csv(&result))?;
    out.csv("cost_trend.csv", || report::cost_trend_csv(&result))?;
    out.json("sweep.json", || report::to_json(&result))?;
    match result.best_alpha {
        Some(a) => info!("minimum-cost alpha: {a}"),
        None => info!("no feasible scenario"),
    }
    let failed = result
        .scenarios
        .iter()
        .filter(|s| matches!(s.outcome, ScenarioOutcome::Failed { .. }))
        .count();
    if failed > 0 {
        eprintln!(
            "mgcap: {failed} of {} scenarios infeasible",
            result.scenarios.len()
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn curve(cfg: &RunConfig, profiles: &SystemProfiles, out: &Output<'_>) -> Result<ExitCode> {
    let study = AdequacyStudy {
        profiles,
        outage: cfg.outage,
        bess: cfg.curve.bess,
        settings: cfg.reliability.clone(),
    };
    let mut families: Vec<(f64, Vec<CurvePoint>)> = Vec::new();
    for &plg in &cfg.curve.plg {
        let points = lole_vs_prm_curve(&study, plg, &cfg.curve.prm_grid)?;
        out.csv(&format!("curve_plg_{plg}.csv"), || {
            report::curve_csv(&points)
        })?;
        families.push((plg, points));
    }
    out.json("curves.json", || {
        let named: Vec<_> = families
            .iter()
            .map(|(plg, points)| report::CurveFamily { plg: *plg, points })
            .collect();
        report::to_json(&named)
    })?;
    Ok(ExitCode::SUCCESS)
}
