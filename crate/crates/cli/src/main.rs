use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hampow_core::absorber::{build_gadget, verify_gadget};
use hampow_core::connect::{count_connecting_walks, find_connector};
use hampow_core::graph::{gen_extremal, gen_random, load_graph, save_graph, GraphFormat};
use hampow_core::oracle::{ham_power_cycle_exists, SearchBudget};
use hampow_core::paths::verify_ham_power_cycle;
use hampow_core::pipeline::{run_pipeline, GroupMode, PipelineOptions};
use hampow_core::ratio::parse_ratio;
use hampow_core::scan::{grid, parse_sizes, run_scan, write_csv};
use hampow_core::sequencing::{sequence, sort_parts_descending, SequenceOptions};
use hampow_core::tiling::fractional_tiling;
use hampow_core::{Config, Error, MultipartiteGraph, Ratio, Result};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hampow",
    version,
    about = "Powers of Hamiltonian cycles in dense multipartite graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random or extremal multipartite graph.
    Gen(GenArgs),
    /// Check a vertex sequence against the cycle definition.
    Verify(VerifyArgs),
    /// Run partitioning and sequencing on a graph with more than r parts.
    Sequence(SequenceArgs),
    /// Build and check the absorber gadget for r.
    Absorber(AbsorberArgs),
    /// Count connecting walks and sample a connecting path.
    Connect(ConnectArgs),
    /// Exact fractional clique tiling with its dual certificate.
    Tile(TileArgs),
    /// Exhaustive search for a Hamiltonian (r-1)-cycle.
    Search(SearchArgs),
    /// Build and verify a Hamiltonian (r-1)-cycle end to end.
    Pipeline(PipelineArgs),
    /// Oracle answers over a grid of sizes, r and densities, as CSV.
    Scan(ScanArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Degree slack, as p/q or a decimal.
    #[arg(long, value_parser = ratio)]
    gamma: Option<Ratio>,
    #[arg(long, value_parser = ratio)]
    sigma: Option<Ratio>,
    #[arg(long, value_parser = ratio)]
    beta: Option<Ratio>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut cfg = Config::for_r(self.r).with_seed(self.seed);
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(s) = self.sigma {
            cfg.sigma = s;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenArgs {
    /// Part sizes, e.g. 4-4-4.
    #[arg(long, value_parser = sizes)]
    sizes: Sizes,
    /// Edge probability for random graphs.
    #[arg(long, value_parser = ratio, default_value = "1")]
    delta: Ratio,
    /// Complete multipartite minus the edges inside the first floor(|V_i|/r)+1 vertices of each part.
    #[arg(long)]
    extremal: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// JSON array of vertex ids.
    #[arg(long)]
    cycle: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Skip the slack conditions that need large n.
    #[arg(long)]
    relaxed: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AbsorberArgs {
    /// Print Q1 and Q2 as label strings.
    #[arg(long)]
    print: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConnectArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated path whose last r vertices start the walk.
    #[arg(long, value_delimiter = ',', required = true)]
    from: Vec<usize>,
    /// Comma-separated path whose first r vertices end the walk.
    #[arg(long, value_delimiter = ',', required = true)]
    to: Vec<usize>,
    #[arg(long)]
    ell: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TileArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Node limit.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Node limit for each exact search.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[arg(long, default_value = "auto", value_parser = mode)]
    mode: GroupMode,
    /// Skip the slack conditions that need large n.
    #[arg(long)]
    relaxed: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    /// Comma-separated size lists, e.g. 3-3-3,4-4-4.
    #[arg(long, value_delimiter = ',', value_parser = sizes, required = true)]
    sizes: Vec<Sizes>,
    /// Comma-separated values of r.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    rs: Vec<usize>,
    /// Comma-separated target densities.
    #[arg(long, value_delimiter = ',', value_parser = ratio, default_value = "1")]
    deltas: Vec<Ratio>,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn ratio(s: &str) -> std::result::Result<Ratio, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

/// Part sizes written `3-3-3`.
#[derive(Clone, Debug)]
struct Sizes(Vec<usize>);

fn sizes(s: &str) -> std::result::Result<Sizes, String> {
    parse_sizes(s).map(Sizes).map_err(|e| e.to_string())
}

fn mode(s: &str) -> std::result::Result<GroupMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_graph(path: &Path) -> Result<MultipartiteGraph> {
    load_graph(BufReader::new(File::open(path)?), GraphFormat::Json)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Gen(a) => {
            let g = if a.extremal {
                gen_extremal(&a.sizes.0, a.common.r)?
            } else {
                gen_random(&a.sizes.0, a.delta, a.common.seed)?
            };
            let mut w = sink(&a.common.out)?;
            save_graph(&mut w, &g, GraphFormat::Json)?;
            writeln!(w)?;
            w.flush()?;
            Ok(0)
        }
        Cmd::Verify(a) => {
            let g = read_graph(&a.graph)?;
            let text = std::fs::read_to_string(&a.cycle)?;
            let seq: Vec<usize> = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("cycle file: {e}")))?;
            let verdict = verify_ham_power_cycle(&g, &seq, a.common.r);
            emit(&a.common.out, &to_json(&verdict))?;
            Ok(if verdict.ok { 0 } else { 4 })
        }
        Cmd::Sequence(a) => {
            let cfg = a.common.config()?;
            let g = sort_parts_descending(&read_graph(&a.graph)?);
            let out = sequence(
                &g,
                &cfg,
                SequenceOptions {
                    relaxed: a.relaxed,
                    floor_m: None,
                },
            )
            .map_err(|e| Error::stage("sequencing", e))?;
            emit(&a.common.out, &to_json(&out))?;
            Ok(0)
        }
        Cmd::Absorber(a) => {
            let t = build_gadget(a.common.r)?;
            let verdict = verify_gadget(&t);
            if a.print {
                let line = |ls: &[hampow_core::absorber::Label]| {
                    ls.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
                };
                let mut w = sink(&a.common.out)?;
                writeln!(w, "Q1 ({}): {}", t.q1.len(), line(&t.q1))?;
                writeln!(w, "Q2 ({}): {}", t.q2.len(), line(&t.q2))?;
                writeln!(w, "verify: {}", if verdict.ok { "pass" } else { &verdict.reason })?;
                w.flush()?;
            } else {
                emit(
                    &a.common.out,
                    &json!({ "gadget": to_json(&t), "verdict": to_json(&verdict) }),
                )?;
            }
            Ok(if verdict.ok { 0 } else { 4 })
        }
        Cmd::Connect(a) => {
            let cfg = a.common.config()?;
            let g = read_graph(&a.graph)?;
            let r = cfg.r;
            if a.from.len() < r || a.to.len() < r {
                return Err(Error::Precondition(format!(
                    "--from and --to need at least r = {r} vertices"
                )));
            }
            let (p1, p2) = (&a.from[a.from.len() - r..], &a.to[..r]);
            // pools follow the parts of the tail, one per walk position mod r
            let pools: Vec<Vec<usize>> = p1.iter().map(|&v| g.part(g.part_of(v)).to_vec()).collect();
            let count = count_connecting_walks(&g, &pools, p1, p2, a.ell, r)?;
            let forbidden = a.from.iter().chain(&a.to).copied().collect();
            let path = find_connector(&g, &pools, p1, p2, a.ell, &forbidden, &cfg);
            let value = json!({
                "walks": count.total.to_string(),
                "path": path.as_ref().ok(),
                "error": path.as_ref().err().map(ToString::to_string),
            });
            emit(&a.common.out, &value)?;
            Ok(path.map_or_else(|e| e.exit_code(), |_| 0))
        }
        Cmd::Tile(a) => {
            let g = read_graph(&a.graph)?;
            let t = fractional_tiling(&g, a.common.r);
            emit(&a.common.out, &to_json(&t))?;
            Ok(0)
        }
        Cmd::Search(a) => {
            let g = read_graph(&a.graph)?;
            let out = ham_power_cycle_exists(&g, a.common.r, SearchBudget::nodes(a.budget));
            emit(&a.common.out, &to_json(&out))?;
            Ok(match out.answer.label() {
                "budget_exceeded" => 5,
                _ => 0,
            })
        }
        Cmd::Pipeline(a) => {
            let cfg = a.common.config()?;
            let g = read_graph(&a.graph)?;
            let run = run_pipeline(
                &g,
                &cfg,
                PipelineOptions {
                    mode: a.mode,
                    budget: a.budget,
                    relaxed: a.relaxed,
                },
            );
            emit(&a.common.out, &to_json(&run.report))?;
            if let Err(e) = &run.result {
                eprintln!("error: {e}");
            }
            Ok(run.exit_code())
        }
        Cmd::Scan(a) => {
            let sizes: Vec<Vec<usize>> = a.sizes.into_iter().map(|s| s.0).collect();
            let cells = grid(&sizes, &a.rs, &a.deltas);
            let rows = run_scan(&cells, a.samples, a.budget, a.seed)?;
            write_csv(&rows, sink(&a.out)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
