use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gtib::cutter::{plan, recover, CutPlan};
use gtib::io;
use gtib::metrics::{convergence_sweep, ErrorReport};
use gtib::oracles::{forward_scatter, Dispersion};
use gtib::scenarios::{ExperimentConfig, Prepared, ResolvedGrid, Scenario};
use gtib::spectral::Side;
use gtib::{Error, Result, TimeGrid};

#[derive(Parser)]
#[command(name = "gtib", version, about = "Inverse Zakharov-Shabat scattering by GTIB")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the signal and write signal.csv, plan.json and error files.
    Recover,
    /// Write the cut plan only.
    Plan,
    /// Convergence sweep over step sizes; writes sweep.csv and sweep.json.
    Sweep,
    /// Write the scenario's exact signal to reference.csv.
    Oracle,
    /// Forward-scatter the exact signal to spectral_left.json and spectral_right.json.
    Scatter,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// no_cuts, with_cuts, extended, left_only or right_only.
    #[arg(long, global = true)]
    method: Option<String>,
    /// GLME step h = 2 tau. For `sweep`, the first of five halvings.
    #[arg(long = "h", global = true)]
    h: Option<f64>,
    /// GLME window P = M h.
    #[arg(long = "P", global = true)]
    p: Option<f64>,
    /// Number of grid intervals.
    #[arg(long = "M", global = true)]
    m: Option<usize>,
    /// Stability zone half-width constant, in units of 1/eta.
    #[arg(long, global = true)]
    zone_constant: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn load_config(common: &Common, sweeping: bool) -> Result<(ExperimentConfig, PathBuf)> {
    let (mut cfg, base) = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(m) = &common.method {
        cfg.method = serde_json::from_value(serde_json::Value::String(m.clone()))
            .map_err(|_| Error::Config(format!("unknown method {m:?}")))?;
    }
    if let Some(c) = common.zone_constant {
        cfg.zone_constant = c;
    }
    if sweeping {
        if let Some(h) = common.h {
            cfg.h_list = Some((0..5).map(|k| h / f64::from(1u32 << k)).collect());
        }
    } else {
        match (common.h, common.m) {
            (Some(h), Some(m)) => {
                cfg.grid.tau = Some(0.5 * h);
                cfg.grid.intervals = Some(m);
            }
            (Some(h), None) => {
                cfg.grid.tau = Some(0.5 * h);
                cfg.grid.intervals = None;
            }
            (None, Some(m)) => {
                cfg.grid.intervals = Some(m);
                cfg.grid.tau = None;
            }
            (None, None) => {}
        }
        if common.p.is_some() {
            cfg.window = common.p;
        }
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn run(cli: &Cli) -> Result<()> {
    let sweeping = matches!(cli.command, Command::Sweep);
    let (cfg, base) = load_config(&cli.common, sweeping)?;
    let prepared = cfg.scenario.prepare(&base)?;
    match cli.command {
        Command::Recover => run_recover(&cfg, &prepared),
        Command::Plan => {
            let g = cfg.resolve_grid()?;
            let p = make_plan(&cfg, &prepared, &g)?;
            io::write(&cfg.out, "plan.json", &io::to_json(&p)?)?;
            println!("plan: {} units, {} segments", p.units.len(), p.segments.len());
            Ok(())
        }
        Command::Sweep => run_sweep(&cfg, &prepared),
        Command::Oracle => {
            let g = cfg.resolve_grid()?;
            let exact = prepared
                .reference(g.grid)?
                .ok_or_else(|| Error::Config("this scenario has no reference signal".into()))?;
            io::write(&cfg.out, "reference.csv", &io::signal_csv(&exact))?;
            println!("reference: {} samples", exact.q.len());
            Ok(())
        }
        Command::Scatter => run_scatter(&cfg, &prepared),
    }
}

fn make_plan(cfg: &ExperimentConfig, prepared: &Prepared, g: &ResolvedGrid) -> Result<CutPlan> {
    plan(&prepared.data, g.grid, g.p, g.m, &cfg.plan_options())
}

fn label(cfg: &ExperimentConfig) -> String {
    let kind = match &cfg.scenario {
        Scenario::FromSpectralFile { .. } => "from_spectral_file",
        Scenario::SingleSoliton { .. } => "single_soliton",
        Scenario::TwoSoliton { .. } => "two_soliton",
        Scenario::EightSoliton => "eight_soliton",
        Scenario::ChirpedSech { .. } => "chirped_sech",
    };
    let method = serde_json::to_value(cfg.method)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    format!("{kind}/{method}")
}

fn run_recover(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<()> {
    let g = cfg.resolve_grid()?;
    let p = make_plan(cfg, prepared, &g)?;
    io::write(&cfg.out, "plan.json", &io::to_json(&p)?)?;
    let rec = recover(&prepared.data, &p)?;
    io::write(&cfg.out, "signal.csv", &io::signal_csv(&rec.signal))?;
    if let Some(exact) = prepared.reference(g.grid)? {
        let report = ErrorReport::new(label(cfg), g.h, &rec.signal, &exact)?;
        io::write(&cfg.out, "error.csv", &io::error_csv(&report, g.grid))?;
        io::write(&cfg.out, "error.json", &io::to_json(&io::ErrorSummary::from(&report))?)?;
        println!("rmse {:e}, max {:e}", report.rmse, report.max());
    }
    if rec.failures.is_empty() {
        return Ok(());
    }
    for f in &rec.failures {
        eprintln!(
            "segment {} stopped after {} samples: {}",
            f.segment, f.completed, f.message
        );
    }
    rec.into_complete().map(|_| ())
}

fn run_sweep(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<()> {
    if !prepared.has_reference() {
        return Err(Error::Config("a sweep needs a scenario with a reference signal".into()));
    }
    let steps = cfg.sweep_steps()?;
    let label = label(cfg);
    let report = convergence_sweep(&label, &steps, |h| {
        let g = cfg.grid_for_step(h)?;
        let p = make_plan(cfg, prepared, &g)?;
        let q = recover(&prepared.data, &p)?.into_complete()?;
        let exact = prepared.reference(g.grid)?.expect("checked above");
        Ok((q, exact))
    })?;
    io::write(&cfg.out, "sweep.csv", &io::sweep_csv(&report))?;
    io::write(&cfg.out, "sweep.json", &io::to_json(&io::sweep_summaries(&report))?)?;
    for r in &report.reports {
        println!("h {:e} rmse {:e}", r.h, r.rmse);
    }
    match report.slope {
        Some(s) => println!("slope {s:.4}"),
        None => println!("slope not fitted"),
    }
    Ok(())
}

fn run_scatter(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<()> {
    let g = cfg.resolve_grid()?;
    let signal = prepared
        .reference(g.grid)?
        .ok_or_else(|| Error::Config("this scenario has no signal to scatter".into()))?;
    let (dispersion, xi_max, xi_intervals) = match cfg.scenario {
        Scenario::ChirpedSech {
            dispersion,
            xi_max,
            xi_intervals,
            ..
        } => (dispersion, xi_max, xi_intervals),
        _ => (Dispersion::Anomalous, 30.0, 2400),
    };
    let xi = TimeGrid::covering(-xi_max, xi_max, xi_intervals);
    for (side, name) in [(Side::Left, "spectral_left.json"), (Side::Right, "spectral_right.json")] {
        let data = forward_scatter(&signal, xi, dispersion, side)?;
        let mut text = data.to_json()?;
        text.push('\n');
        io::write(&cfg.out, name, &text)?;
        if side == Side::Left {
            println!("{} eigenvalues", data.discrete.len());
            for d in &data.discrete {
                println!("  zeta {} {}", d.zeta.re, d.zeta.im);
            }
        }
    }
    Ok(())
}
