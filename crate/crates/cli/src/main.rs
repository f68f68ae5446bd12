use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mocg_core::allocation::Certificate;
use mocg_core::convexopt::safe_distance;
use mocg_core::engine::{Engine, EvaderStatus};
use mocg_core::onsite::onsite_region;
use mocg_core::scenario::Scenario;
use mocg_core::Error;

mod render;

use render::{render_frame, RenderOptions};

#[derive(Parser)]
#[command(name = "mocg", version, about = "Multiplayer reach-avoid pursuit-evasion games in polygonal arenas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the trajectory log, lower-bound series and SVG frames.
    Run(RunArgs),
    /// Report the winning certificate of a coalition against one evader at t = 0.
    Check(CheckArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Output directory (default: out/<scenario name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's max_steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write a frame every N steps (0: final frame only).
    #[arg(long, default_value_t = 0)]
    render_every: usize,
    #[arg(long)]
    no_render: bool,
    /// Validate the scenario and exit.
    #[arg(long)]
    check_only: bool,
    #[arg(long)]
    no_disks: bool,
    #[arg(long)]
    no_gcp: bool,
    #[arg(long)]
    no_paths: bool,
    #[arg(long)]
    no_trails: bool,
}

#[derive(clap::Args)]
struct CheckArgs {
    scenario: PathBuf,
    /// One or two 1-based pursuer ids, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pursuers: Vec<usize>,
    /// 1-based evader id.
    #[arg(long)]
    evader: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::SimulationFault { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    Ok(Scenario::load(path)?)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let mut scenario = load(&args.scenario)?;
    if args.check_only {
        println!("ok: {} pursuers, {} evaders", scenario.pursuers.len(), scenario.evaders.len());
        return Ok(());
    }
    if let Some(s) = args.seed {
        scenario.sim.seed = s;
    }
    let max_steps = args.steps.unwrap_or(scenario.sim.max_steps);
    let name = match scenario.name.as_str() {
        "" => args.scenario.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into()),
        n => n.to_string(),
    };
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out").join(&name));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let opts = RenderOptions { disks: !args.no_disks, gcp: !args.no_gcp, paths: !args.no_paths, trails: !args.no_trails };
    let frames = out.join("frames");
    if !args.no_render {
        fs::create_dir_all(&frames)?;
    }

    let mut engine = Engine::new(scenario)?;
    let mut log = BufWriter::new(fs::File::create(out.join("trajectory.jsonl"))?);
    let write_frame = |engine: &Engine| -> anyhow::Result<()> {
        let path = frames.join(format!("frame_{:06}.svg", engine.step_index()));
        fs::write(&path, render_frame(engine, &opts)).with_context(|| format!("writing {}", path.display()))
    };
    if !args.no_render && args.render_every > 0 {
        write_frame(&engine)?;
    }
    let mut fault = None;
    while engine.step_index() < max_steps && !engine.finished() {
        match engine.step() {
            Ok(record) => {
                serde_json::to_writer(&mut log, &record)?;
                log.write_all(b"\n")?;
                if !args.no_render && args.render_every > 0 && engine.step_index() % args.render_every == 0 {
                    write_frame(&engine)?;
                }
            }
            Err(e) => {
                fault = Some(e);
                break;
            }
        }
    }
    log.flush()?;
    if !args.no_render {
        write_frame(&engine)?;
    }
    let summary = engine.summary();
    let series: Vec<usize> = engine.history().iter().map(|r| r.lower_bound).collect();
    fs::write(out.join("lower_bound.json"), serde_json::to_string(&series)?)?;
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    if let Some(e) = fault {
        return Err(e.into());
    }

    let outcome = final_event(engine.status());
    println!("steps: {}", summary.steps);
    println!("captured: {}  arrived: {}", summary.captured, summary.arrived);
    println!("lower bound: initial {} final {}", summary.initial_lower_bound, summary.final_lower_bound);
    for (j, s) in engine.status().iter().enumerate() {
        match s {
            EvaderStatus::Captured { by, step } => println!("E{}: captured by P{} at step {step}", j + 1, by + 1),
            EvaderStatus::Arrived { step } => println!("E{}: reached the goal at step {step}", j + 1),
            EvaderStatus::Active => println!("E{}: active", j + 1),
        }
    }
    println!("final event: {outcome}");
    println!("output: {}", out.display());
    Ok(())
}

fn final_event(status: &[EvaderStatus]) -> &'static str {
    let last = status
        .iter()
        .filter_map(|s| match s {
            EvaderStatus::Captured { step, .. } => Some((*step, "capture")),
            EvaderStatus::Arrived { step } => Some((*step, "arrival")),
            EvaderStatus::Active => None,
        })
        .max_by_key(|(s, _)| *s);
    if status.iter().any(EvaderStatus::is_active) {
        return "timeout";
    }
    last.map(|(_, e)| e).unwrap_or("timeout")
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<()> {
    let scenario = load(&args.scenario)?;
    let np = scenario.pursuers.len();
    let ne = scenario.evaders.len();
    if args.pursuers.is_empty() || args.pursuers.len() > 2 {
        bail!("give one or two pursuer ids");
    }
    if let Some(&bad) = args.pursuers.iter().find(|&&i| i == 0 || i > np) {
        bail!("unknown pursuer id {bad} (scenario has {np})");
    }
    if args.evader == 0 || args.evader > ne {
        bail!("unknown evader id {} (scenario has {ne})", args.evader);
    }
    if args.pursuers.len() == 2 && args.pursuers[0] == args.pursuers[1] {
        bail!("pursuer ids must differ");
    }
    let coalition: Vec<usize> = args.pursuers.iter().map(|i| i - 1).collect();
    let j = args.evader - 1;
    let names: Vec<String> = args.pursuers.iter().map(|i| format!("P{i}")).collect();
    let engine = Engine::new(scenario)?;
    let scn = engine.scenario();
    let cert = engine.check(&coalition, j)?;
    println!("subgame: {{{}}} vs E{}", names.join(","), args.evader);
    match cert {
        None => println!("T=0"),
        Some(Certificate::Onsite(snaps)) => {
            println!("T=1 onsite");
            for (k, &i) in coalition.iter().enumerate() {
                let a = scn.alpha(i, j);
                if let Ok(reg) = onsite_region(scn.pursuers[i].position, scn.evaders[j].position, a, scn.sim.delta) {
                    println!(
                        "  P{}: apollonius center {} radius {:.6} expanded radius {:.6}",
                        i + 1,
                        reg.disk.center,
                        reg.disk.radius,
                        snaps[k].expanded_radius
                    );
                }
            }
        }
        Some(Certificate::GoalVisible { safe_distance: rho }) => {
            println!("T=2 goal-visible");
            println!("  safe distance: {rho:.6}");
            let ps: Vec<_> = coalition.iter().map(|&i| scn.pursuers[i].position).collect();
            let alphas: Vec<_> = coalition.iter().map(|&i| scn.alpha(i, j)).collect();
            let radii: Vec<_> = coalition.iter().map(|&i| scn.pursuers[i].capture_radius).collect();
            if let Ok(d) = safe_distance(&ps, scn.evaders[j].position, &alphas, &radii, &scn.goal) {
                println!("  closest evasion point {} goal point {}", d.x_i, d.x_g);
            }
        }
        Some(Certificate::NonVisible(c)) => {
            println!("T=3 non-goal-visible");
            println!("  anchor: {}", c.anchor);
            println!("  path length: {:.6}", c.path.length);
            println!("  evader budget: {:.6}", c.evader_budget);
            println!("  reach sectors: {}", c.sectors.len());
            println!("  min program value: {:.6}", c.min_program_value);
        }
    }
    Ok(())
}
