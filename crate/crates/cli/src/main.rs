use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sbm_core::clustering::{Algorithm, DeltaMode};
use sbm_core::model::{BlockParams, PlantedModel};

mod audit;
mod io;
mod run;
mod sweep;

use audit::{run_audit, AuditKind, AuditParams};
use run::{run_algorithm, AlgoOptions};

#[derive(Parser)]
#[command(name = "sbm", version, about = "Spectral recovery experiments on stochastic block models")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "SBM_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted graph and write edges, labels and metadata.
    Generate(GenerateArgs),
    /// Run one algorithm on an edge list.
    Cluster(ClusterArgs),
    /// Run a parameter sweep from a JSON spec and write CSV rows.
    Sweep(SweepArgs),
    /// Run audits and print one JSON record per line.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Clusters for a uniform assignment.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated contiguous cluster sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "on")]
    self_loops: OnOff,
    /// Output directory; receives graph.edges, labels.txt and meta.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    /// Planted labels, one per line; enables the recovery report.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Vertex count; defaults to the label count or the largest id + 1.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "power")]
    algorithm: String,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<u32>,
    /// theory, estimate, or a positive threshold.
    #[arg(long, default_value = "theory")]
    delta: String,
    /// Largest cluster size for the theoretical power threshold.
    #[arg(long)]
    s_star: Option<usize>,
    /// Seed for the random halving of svd2.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Experimental: peel off the largest group this many times.
    #[arg(long, default_value_t = 0)]
    peel: u32,
    /// Result file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec.
    #[arg(long)]
    spec: PathBuf,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add per-row wall time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Audits to run; all of them when empty.
    #[arg(value_enum)]
    audits: Vec<AuditKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    log_power: Option<i32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON-lines output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("configuring the thread pool")?;
    match cli.command {
        Command::Generate(a) => generate(a).map(|_| ExitCode::SUCCESS),
        Command::Cluster(a) => cluster(a).map(|_| ExitCode::SUCCESS),
        Command::Sweep(a) => sweep_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => verify(a),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let params = match (&a.sizes, a.n, a.k) {
        (Some(sizes), n, _) => {
            let params = BlockParams::with_sizes(sizes.clone(), a.p, a.q)?;
            if let Some(n) = n {
                if n != params.n {
                    bail!("--n {n} disagrees with --sizes summing to {}", params.n);
                }
            }
            params
        }
        (None, Some(n), Some(k)) => BlockParams::uniform(n, k, a.p, a.q)?,
        _ => bail!("give either --sizes or both --n and --k"),
    };
    let params = params.self_loops(matches!(a.self_loops, OnOff::On));
    let model = PlantedModel::new(params, a.seed)?;
    let adjacency = model.sample();
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    io::write_edges(&a.out.join("graph.edges"), &adjacency)?;
    io::write_labels(&a.out.join("labels.txt"), &model.labels)?;
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    io::write_json(
        &a.out.join("meta.json"),
        &json!({
            "params": model.params,
            "seed": model.seed,
            "cluster_sizes": model.cluster_sizes(),
            "files": { "edges": "graph.edges", "labels": "labels.txt" },
            "created_unix": created,
        }),
    )
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let algorithm: Algorithm = a.algorithm.parse()?;
    let delta: DeltaMode = a.delta.parse()?;
    let labels = a.labels.as_deref().map(io::read_labels).transpose()?;
    let n = a.n.or(labels.as_ref().map(Vec::len));
    let adjacency = io::read_edges(&a.graph, n)?;
    let opts = AlgoOptions {
        algorithm,
        k: a.k,
        p: a.p,
        q: a.q,
        r: a.r,
        delta,
        s_star: a.s_star,
        seed: a.seed,
        peel: a.peel,
    };
    let outcome = run_algorithm(&adjacency, &opts, labels.as_deref())?;
    let c = &outcome.clustering;
    let result = json!({
        "algorithm": c.algorithm,
        "n": c.n,
        "r": c.r,
        "delta_mode": outcome.delta_mode,
        "threshold_ln": c.threshold.ln(),
        "groups": c.groups,
        "largest_group": c.largest,
        "report": outcome.report,
        "accuracy": outcome.report.as_ref().map(|r| r.accuracy),
        "separation": outcome.gap,
    });
    let mut text = serde_json::to_string(&result)?;
    text.push('\n');
    match a.out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let spec = sweep::SweepSpec::load(&a.spec)?;
    let rows = sweep::run_sweep(&spec, a.timing)?;
    match a.out {
        Some(path) => {
            let mut file =
                std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            sweep::write_csv(&rows, &mut file)
        }
        None => sweep::write_csv(&rows, &mut std::io::stdout().lock()),
    }
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let params = AuditParams {
        n: a.n,
        k: a.k,
        p: a.p,
        q: a.q,
        r: a.r,
        t: a.t,
        instances: a.instances,
        seed: a.seed,
        log_power: a.log_power,
    };
    let kinds = if a.audits.is_empty() {
        AuditKind::value_variants().to_vec()
    } else {
        a.audits
    };
    let mut lines = String::new();
    let mut failed = false;
    for kind in kinds {
        for record in run_audit(kind, &params)? {
            failed |= record.is_identity_failure();
            lines.push_str(&record.to_json_line());
            lines.push('\n');
        }
    }
    match a.out {
        Some(path) => std::fs::write(&path, lines).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(lines.as_bytes())?,
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
