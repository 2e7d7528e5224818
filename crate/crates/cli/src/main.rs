use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fairrepair::experiment::{run_experiment, Dataset, ExperimentConfig};
use fairrepair::graph::io::{read_graph, write_graph, write_text};
use fairrepair::graph::{builtin, generate_sbm, SbmSpec};
use fairrepair::ot::Metric;
use fairrepair::repair::{repair, Method, RepairConfig};
use fairrepair::{AttributedGraph, Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "fairrepair", version, about = "Optimal-transport graph repair for fair edge prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic graph and write its edge list and attribute TSVs.
    Generate {
        /// Builtin name (G1..G5) or path to an SBM spec JSON file.
        #[arg(long)]
        graph: String,
        #[arg(long, env = "FAIRREPAIR_SEED", default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// File stem; defaults to the builtin name or `graph`.
        #[arg(long)]
        name: Option<String>,
    },
    /// Repair a graph and write the repaired files plus JSON metadata.
    Repair {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value = "emd")]
        method: Method,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value = "sqeuclidean")]
        metric: Metric,
        #[arg(long, env = "FAIRREPAIR_SEED", default_value_t = 0)]
        seed: u64,
        /// Edge mass added by `--method random`.
        #[arg(long)]
        target_mass: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a configured sweep of repair, embedding, link prediction and metrics.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Replace the dataset with a builtin graph.
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, requires = "attrs")]
        edges: Option<PathBuf>,
        #[arg(long, requires = "edges")]
        attrs: Option<PathBuf>,
        /// Repair method, or `none` to skip the repair.
        #[arg(long)]
        method: Option<String>,
        /// λ grid, comma separated.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        #[arg(long)]
        metric: Option<Metric>,
        /// Seed list, comma separated.
        #[arg(long, value_delimiter = ',')]
        seed: Option<Vec<u64>>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphInput {
    /// Builtin graph to generate with `--seed` instead of reading files.
    #[arg(long, conflicts_with_all = ["edges", "attrs"], required_unless_present = "edges")]
    graph: Option<String>,
    #[arg(long, requires = "attrs")]
    edges: Option<PathBuf>,
    #[arg(long, requires = "edges")]
    attrs: Option<PathBuf>,
}

fn load_spec(graph: &str, seed: u64) -> Result<SbmSpec> {
    let path = Path::new(graph);
    if graph.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {graph}: {e}")))?;
        let spec: SbmSpec = serde_json::from_str(&text).map_err(Error::from)?;
        Ok(SbmSpec { seed, ..spec })
    } else {
        builtin(graph, seed)
    }
}

fn load_graph(input: &GraphInput, seed: u64) -> Result<AttributedGraph> {
    match (&input.graph, &input.edges, &input.attrs) {
        (Some(name), _, _) => generate_sbm(&load_spec(name, seed)?),
        (None, Some(edges), Some(attrs)) => Ok(read_graph(edges, attrs)?.graph),
        _ => Err(Error::Config("give --graph or both --edges and --attrs".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { graph, seed, out, name } => {
            let spec = load_spec(&graph, seed)?;
            let g = generate_sbm(&spec)?;
            let stem = name.unwrap_or_else(|| if Path::new(&graph).is_file() { "graph".into() } else { graph.clone() });
            write_graph(&g, &out, &stem)?;
            println!(
                "wrote {} nodes, {} edges to {}",
                g.n_nodes(),
                g.edge_count(),
                out.join(format!("{stem}.edges.tsv")).display()
            );
        }
        Command::Repair { input, method, lambda, metric, seed, target_mass, out } => {
            let g = load_graph(&input, seed)?;
            let cfg = RepairConfig {
                method,
                lambda,
                metric,
                seed,
                target_mass,
                ..RepairConfig::default()
            };
            let result = repair(&g, &cfg)?;
            let meta = result.metadata(&g);
            write_graph(&result.repaired, &out, "repaired")?;
            write_text(out.join("repair.json"), &serde_json::to_string_pretty(&meta).map_err(Error::from)?)?;
            println!(
                "{} repair: assortativity {} -> {}, added mass {:.4}",
                meta.method,
                fmt_opt(meta.assortativity_original),
                fmt_opt(meta.assortativity_repaired),
                meta.added_mass
            );
        }
        Command::Pipeline { config, graph, edges, attrs, method, lambda, metric, seed, jobs, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(name) = graph {
                cfg.dataset = Dataset::Builtin { name };
            }
            if let (Some(edges), Some(attrs)) = (edges, attrs) {
                cfg.dataset = Dataset::Files { edges, attrs };
            }
            if let Some(m) = method {
                cfg.method = if m.eq_ignore_ascii_case("none") { None } else { Some(m.parse()?) };
            }
            if let Some(l) = lambda {
                cfg.lambdas = l;
            }
            if let Some(m) = metric {
                cfg.repair.metric = m;
            }
            if let Some(s) = seed {
                cfg.seeds = s;
            }
            if jobs.is_some() {
                cfg.jobs = jobs;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            let outcome = run_experiment(&cfg)?;
            let total = outcome.records.len() + outcome.failures.len();
            println!(
                "{} of {} runs succeeded; results in {}",
                outcome.records.len(),
                total,
                outcome.dir.display()
            );
            if outcome.records.is_empty() {
                if let Some(f) = outcome.failures.first() {
                    return Err(match f.kind {
                        ErrorKind::Config => Error::Config(f.message.clone()),
                        ErrorKind::Data => Error::InvalidGraph(f.message.clone()),
                        ErrorKind::Numerical => Error::Numerical(f.message.clone()),
                    });
                }
            }
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.4}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numerical => 4,
            })
        }
    }
}
