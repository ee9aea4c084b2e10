use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cluster_seeds::explore::{self, ExploreOptions, DEFAULT_BUDGET};
use cluster_seeds::io;
use cluster_seeds::quotient::{self, Relation};
use cluster_seeds::serve;
use cluster_seeds::specialize::Specialization;
use cluster_seeds::verify::{self, CheckResult};

#[derive(Parser)]
#[command(name = "cluster-seeds", version, about = "Labelled cluster seeds under the global mutation group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Auto,
    Seed,
    Quiver,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemmas,
    Markov,
    Mainthm,
    Properties,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the class of a preset or JSON quiver/seed file.
    Explore {
        source: String,
        #[arg(long, env = "CLUSTER_SEEDS_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "seed")]
        level: LevelArg,
        /// Write the seed graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Only bound the seed count from below, using specialized seeds.
        #[arg(long, conflicts_with_all = ["dot", "level"])]
        lower_bound: bool,
    },
    /// Quotient graph and group for a closed class.
    Quotient {
        source: String,
        #[arg(long, default_value = "same-quiver")]
        relation: Relation,
        /// `auto` uses seeds when the seed class closes, quivers otherwise.
        #[arg(long, value_enum, default_value = "auto")]
        level: LevelArg,
        #[arg(long, env = "CLUSTER_SEEDS_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run a check suite; exits with status 1 on any failure.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Print the results as JSON instead of a summary.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = verify::DEFAULT_POWER_BOUND)]
        power_bound: usize,
        #[arg(long, default_value_t = verify::DEFAULT_MARKOV_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = verify::DEFAULT_CASES)]
        cases: usize,
        #[arg(long, default_value_t = 2024)]
        rng_seed: u64,
        #[arg(long, env = "CLUSTER_SEEDS_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Serve the session API on 127.0.0.1.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = serve::DEFAULT_CLASS_BUDGET)]
        class_budget: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_dot(path: &Option<PathBuf>, dot: String) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, dot).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Explore { source, budget, level, dot, lower_bound } => {
            let seed = io::load(&source)?;
            if lower_bound {
                let spec = Specialization::standard(seed.ambient(), 1);
                print_json(&explore::count_specialized(&seed, &spec, budget)?)?;
                return Ok(true);
            }
            let opts = ExploreOptions::with_budget(budget);
            let report = match level {
                LevelArg::Quiver => explore::explore_quivers(seed.quiver(), opts)?.report(),
                LevelArg::Seed | LevelArg::Auto => explore::explore_seeds(&seed, opts)?.report(),
            };
            write_dot(&dot, report.graph.to_dot("seeds", true))?;
            print_json(&report)?;
            Ok(true)
        }
        Command::Quotient { source, relation, level, budget, dot } => {
            let seed = io::load(&source)?;
            let opts = ExploreOptions::with_budget(budget);
            let seeds = match level {
                LevelArg::Quiver => None,
                _ => Some(explore::explore_seeds(&seed, opts)?),
            };
            let (graph, classes, group, used) = match seeds {
                Some(ex) if ex.is_closed() || level == LevelArg::Seed => {
                    let (g, part) = quotient::quotient_graph(&ex, relation)?;
                    let grp = quotient::compute_group(&ex, relation, 0)?;
                    (g, part.len(), grp.report(), "seed")
                }
                _ => {
                    if relation == Relation::SameStabilizer {
                        bail!("relation {relation} needs a closed seed class");
                    }
                    let ex = explore::explore_quivers(seed.quiver(), opts)?;
                    let (g, part) = quotient::quotient_graph(&ex, relation)?;
                    let grp = quotient::compute_group(&ex, relation, 0)?;
                    (g, part.len(), grp.report(), "quiver")
                }
            };
            write_dot(&dot, graph.to_dot("quotient", true))?;
            print_json(&json!({
                "relation": relation,
                "level": used,
                "classes": classes,
                "graph": graph,
                "group": group,
            }))?;
            Ok(true)
        }
        Command::Verify { suite, json, power_bound, depth, cases, rng_seed, budget } => {
            let results: Vec<CheckResult> = match suite {
                Suite::Lemmas => verify::run_lemma_suite(power_bound),
                Suite::Markov => verify::check_markov(depth)?,
                Suite::Mainthm => {
                    let mut r = verify::check_main_theorem(budget)?;
                    for p in verify::CLAIM_PRESETS {
                        r.extend(verify::check_claims(p, power_bound)?);
                    }
                    r
                }
                Suite::Properties => verify::run_property_suite(cases, rng_seed),
            };
            if json {
                print_json(&results)?;
            } else {
                print!("{}", verify::summary(&results));
            }
            Ok(verify::all_pass(&results))
        }
        Command::Serve { port, class_budget } => {
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://127.0.0.1:{port}");
            rt.block_on(serve::run(port, serve::AppState::new(class_budget)))?;
            Ok(true)
        }
    }
}
