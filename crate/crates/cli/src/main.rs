use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use choral_cli::bench::{budget_sweep, cmd_benchmark, write_csv, BenchConfig};
use choral_cli::commands::{
    cmd_gen_map, cmd_plan, cmd_render, cmd_validate, json_line, OutputSpec, PlanOutcome, EXIT_ERROR,
};
use choral_cli::pipeline::RunOptions;
use choral_core::scenario::{MapSpec, Template};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "choral", version, about = "Heterogeneous multi-robot inspection planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SolveFlags {
    /// Seed for the roadmap and the solver (overrides the scenario).
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock solver budget in seconds.
    #[arg(long)]
    budget_s: Option<f64>,
    /// Solver budget in move evaluations (reproducible).
    #[arg(long)]
    budget_iters: Option<u64>,
    /// Stop once this many evaluations bring no improvement.
    #[arg(long)]
    stall_iters: Option<u64>,
    /// Risk weight applied to every robot.
    #[arg(long)]
    alpha: Option<f64>,
    /// Parallel solver runs with consecutive seeds.
    #[arg(long)]
    workers: Option<usize>,
}

impl SolveFlags {
    fn options(&self, baseline: bool) -> RunOptions {
        RunOptions {
            seed: self.seed,
            budget_s: self.budget_s,
            budget_iters: self.budget_iters,
            stall_iterations: self.stall_iters,
            baseline,
            alpha: self.alpha,
            workers: self.workers,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Plan a scenario and write solution, report, matrices and SVG.
    Plan {
        scenario: PathBuf,
        #[command(flatten)]
        solve: SolveFlags,
        /// Also plan with the distance-only homogeneous baseline.
        #[arg(long)]
        baseline: bool,
        /// Output root (default: $CHORAL_OUT_DIR or ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run directory name (default: Unix time).
        #[arg(long)]
        tag: Option<String>,
    },
    /// Run the het/hom comparison over generated maps and write CSV.
    Benchmark {
        /// Comma-separated templates: orchard, forest, park, cave.
        #[arg(long, default_value = "orchard,forest,park,cave")]
        templates: String,
        /// Comma-separated teams, e.g. `ga,2g2a`.
        #[arg(long, default_value = "ga,2g2a")]
        teams: String,
        /// Number of seeds, starting at --seed (default 0).
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[command(flatten)]
        solve: SolveFlags,
        /// Rows evaluated concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Comma-separated budgets in seconds: write the relative-gap sweep instead.
        #[arg(long)]
        sweep: Option<String>,
        /// Budget of the reference run for --sweep.
        #[arg(long, default_value_t = 600.0)]
        sweep_reference_s: f64,
        /// CSV path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a solution over its scenario's map.
    Render {
        solution: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a benchmark map with a ready-to-plan scenario.
    GenMap {
        /// orchard, forest, park or cave.
        template: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Team written into the scenario, e.g. `ga` or `2g2a`.
        #[arg(long, default_value = "ga")]
        team: String,
        #[arg(long)]
        tasks: Option<usize>,
        #[arg(long)]
        obstacle_density: Option<f64>,
        #[arg(long)]
        terrain_density: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario and optionally a solution against it.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

fn split(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_ERROR as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Plan { scenario, solve, baseline, out, tag } => {
            match cmd_plan(&scenario, &solve.options(baseline), &OutputSpec { root: out, tag }) {
                Ok(outcome) => {
                    let code = outcome.exit_code();
                    match &outcome {
                        PlanOutcome::Feasible { dir, output } => {
                            let h = &output.report.het;
                            println!("feasible: {} tasks, objective {:.3}", output.report.num_tasks, h.objective);
                            println!(
                                "het: max time {:.1} s, max distance {:.1} m, trav {:.3}, coll {:.3}",
                                h.max_time_s,
                                h.max_distance_m,
                                h.max_traversability_accident_probability,
                                h.max_collision_accident_probability
                            );
                            if let Some(h) = &output.report.hom {
                                println!(
                                    "hom: max time {:.1} s, max distance {:.1} m, trav {:.3}, coll {:.3}",
                                    h.max_time_s,
                                    h.max_distance_m,
                                    h.max_traversability_accident_probability,
                                    h.max_collision_accident_probability
                                );
                            }
                            println!("artifacts: {}", dir.display());
                        }
                        PlanOutcome::Infeasible { dir, report } => {
                            let ids: Vec<String> = report.tasks.iter().map(|t| t.id.to_string()).collect();
                            eprintln!("infeasible at stage {}: {}", report.stage, report.message);
                            eprintln!("tasks: {}", ids.join(", "));
                            eprintln!("report: {}", dir.join("report.json").display());
                        }
                    }
                    ExitCode::from(code as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Benchmark { templates, teams, seeds, solve, parallel, sweep, sweep_reference_s, out } => {
            let templates = match split(&templates).iter().map(|t| Template::parse(t)).collect() {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let first = solve.seed.unwrap_or(0);
            let cfg = BenchConfig {
                templates,
                teams: split(&teams),
                seeds: (first..first + seeds).collect(),
                run: RunOptions { seed: None, ..solve.options(true) },
                parallel,
            };
            let sink: Box<dyn std::io::Write> = match &out {
                Some(p) => match File::create(p) {
                    Ok(f) => Box::new(f),
                    Err(e) => return fail(format!("{}: {e}", p.display())),
                },
                None => Box::new(std::io::stdout()),
            };
            let written = match sweep {
                Some(s) => {
                    let budgets: Result<Vec<f64>, _> = split(&s).iter().map(|b| b.parse::<f64>()).collect();
                    let Ok(budgets) = budgets else { return fail(format!("bad --sweep list `{s}`")) };
                    write_csv(&budget_sweep(&cfg, &budgets, sweep_reference_s), sink)
                }
                None => write_csv(&cmd_benchmark(&cfg), sink),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Command::Render { solution, scenario, out } => match cmd_render(&solution, &scenario, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::GenMap { template, seed, team, tasks, obstacle_density, terrain_density, out } => {
            let t = match Template::parse(&template) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let mut spec = MapSpec::standard(t, seed);
            if let Some(n) = tasks {
                spec.tasks = n;
            }
            if let Some(d) = obstacle_density {
                spec.obstacle_density = d;
            }
            if let Some(d) = terrain_density {
                spec.terrain_density = d;
            }
            match cmd_gen_map(&spec, &team, &out) {
                Ok(p) => {
                    println!("{}", p.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { scenario, solution } => match cmd_validate(&scenario, solution.as_deref()) {
            Ok(summary) => {
                print!("{}", json_line(&summary));
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
