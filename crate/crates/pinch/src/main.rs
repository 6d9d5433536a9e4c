//! Command-line front end: clustering, label prediction, cross-validated
//! evaluation, synthetic data generation, and dataset validation.
//!
//! All randomness flows from `--seed` through documented derivations, so a
//! command with the same inputs, flags, and seed writes byte-identical
//! output, regardless of `--threads`. When no seed is given one is drawn
//! and printed to stderr so the run can be reproduced.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pinch::dataset::{self, MatrixFormat, StatsReport};
use pinch::eval;
use pinch::predict::{bagged_predict, BagConfig, LabelAssignment};
use pinch::search::{cluster_graph, DEFAULT_CLUSTER_STARTS};
use pinch::synth::{synth_planted, SynthSpec};
use pinch::{Error, Result, WeightedGraph};

#[derive(Parser)]
#[command(
    name = "pinch",
    version,
    about = "Graph clustering by boundary-width reduction, with semisupervised label prediction and cross-validated evaluation"
)]
struct Cli {
    /// Master random seed; drawn and printed to stderr when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per CPU). Output is identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[default]
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cluster the vertices of a graph file.
    Cluster {
        /// Edge list or Matrix Market file (detected by content).
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Predict labels for the unlabeled vertices of a graph.
    Predict {
        graph: PathBuf,
        /// Label file: lines `vertex_id<TAB>{0|1}`.
        labels: PathBuf,
        /// Bagging runs.
        #[arg(long, default_value_t = 25)]
        bags: u32,
        /// Fraction of unlabeled vertices sampled into each bag.
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Cross-validate every label class against every graph of a dataset.
    Cv {
        /// Dataset manifest (JSON).
        manifest: PathBuf,
        #[arg(long, default_value_t = 25)]
        bags: u32,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Score hidden vertices even when isolated in the evaluated graph.
        #[arg(long)]
        score_isolated: bool,
        /// Report path prefix; writes PREFIX.tsv and PREFIX.json. Without
        /// it the report goes to stdout in the chosen format.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Generate a planted-partition graph with labels and ground truth.
    Synth {
        /// Comma-separated block sizes, e.g. `50,50`.
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        /// Edge probability inside a block.
        #[arg(long)]
        p_in: f64,
        /// Edge probability across blocks (at most --p-in).
        #[arg(long, default_value_t = 0.0)]
        p_out: f64,
        /// Smallest integer edge weight.
        #[arg(long, default_value_t = 1)]
        weight_min: u32,
        /// Largest integer edge weight.
        #[arg(long, default_value_t = 1)]
        weight_max: u32,
        /// Fraction of vertices whose truth is revealed as labels.
        #[arg(long, default_value_t = 0.3)]
        label_fraction: f64,
        /// Output prefix; writes PREFIX.graph.tsv, PREFIX.labels.tsv and
        /// PREFIX.truth.tsv.
        #[arg(long, default_value = "synth")]
        out: PathBuf,
    },
    /// Check a dataset's graphs against the manifest's expected statistics.
    Validate {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let seed_value = resolve_seed(cli.seed);
    match cli.cmd {
        Cmd::Cluster { graph, out, format } => cmd_cluster(&graph, seed_value, out, format),
        Cmd::Predict {
            graph,
            labels,
            bags,
            lambda,
            out,
            format,
        } => cmd_predict(&graph, &labels, bags, lambda, seed_value, out, format),
        Cmd::Cv {
            manifest,
            bags,
            lambda,
            folds,
            repeats,
            score_isolated,
            out,
            format,
        } => cmd_cv(
            &manifest,
            bags,
            lambda,
            folds,
            repeats,
            score_isolated,
            seed_value,
            out,
            format,
        ),
        Cmd::Synth {
            blocks,
            p_in,
            p_out,
            weight_min,
            weight_max,
            label_fraction,
            out,
        } => cmd_synth(
            blocks,
            p_in,
            p_out,
            (weight_min, weight_max),
            label_fraction,
            seed_value,
            &out,
        ),
        Cmd::Validate { manifest, out, format } => cmd_validate(&manifest, out, format),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let drawn = rand::random::<u64>();
            eprintln!("seed: {drawn} (pass --seed {drawn} to reproduce)");
            drawn
        }
    }
}

fn load_graph_auto(path: &Path) -> Result<WeightedGraph> {
    let format = MatrixFormat::sniff(path)?;
    let g = dataset::load_graph(path, format, 0.0)?;
    if g.vertex_count() == 0 {
        return Err(Error::InvalidInput(format!(
            "{} contains no vertices",
            path.display()
        )));
    }
    Ok(g)
}

fn emit(out: Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(&path, content).map_err(|e| Error::io(&path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_cluster(
    graph: &Path,
    seed_value: u64,
    out: Option<PathBuf>,
    format: OutputFormat,
) -> Result<()> {
    let g = load_graph_auto(graph)?;
    let clusters = cluster_graph(&g, seed_value, DEFAULT_CLUSTER_STARTS)?;
    let content = match format {
        OutputFormat::Tsv => {
            let mut s = String::new();
            for (v, c) in clusters.iter().enumerate() {
                writeln!(s, "{}\t{c}", g.id(v as u32)).expect("string write");
            }
            s
        }
        OutputFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = clusters
                .iter()
                .enumerate()
                .map(|(v, &c)| (g.id(v as u32).to_string(), c.into()))
                .collect();
            serde_json::to_string_pretty(&map).expect("clusters serialize") + "\n"
        }
    };
    emit(out, &content)
}

fn cmd_predict(
    graph: &Path,
    labels_path: &Path,
    bags: u32,
    lambda: f64,
    seed_value: u64,
    out: Option<PathBuf>,
    format: OutputFormat,
) -> Result<()> {
    let g = load_graph_auto(graph)?;
    let labels = dataset::read_label_file(labels_path, &g)?;
    let cfg = BagConfig::new(bags, lambda, seed_value)?;
    let pv = bagged_predict(&g, &labels, &cfg)?;
    let content = match format {
        OutputFormat::Tsv => {
            let mut s = String::new();
            for (v, p) in pv.iter().filter(|&(v, _)| !g.is_isolated(v)) {
                writeln!(s, "{}\t{}", g.id(v), p.probability).expect("string write");
            }
            s
        }
        OutputFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = pv
                .iter()
                .filter(|&(v, _)| !g.is_isolated(v))
                .map(|(v, p)| {
                    (
                        g.id(v).to_string(),
                        serde_json::json!({
                            "probability": p.probability,
                            "contributing_runs": p.contributing_runs,
                        }),
                    )
                })
                .collect();
            serde_json::to_string_pretty(&map).expect("predictions serialize") + "\n"
        }
    };
    emit(out, &content)
}

#[allow(clippy::too_many_arguments)]
fn cmd_cv(
    manifest_path: &Path,
    bags: u32,
    lambda: f64,
    folds: usize,
    repeats: usize,
    score_isolated: bool,
    seed_value: u64,
    out: Option<PathBuf>,
    format: OutputFormat,
) -> Result<()> {
    let manifest = dataset::load_manifest(manifest_path)?;
    let ds = dataset::load_dataset(&manifest)?;
    for (name, g) in &ds.graphs {
        let expected = manifest
            .expected_stats
            .as_ref()
            .and_then(|m| m.get(name));
        if let StatsReport::Checked { mismatches } = dataset::validate_stats(g, expected) {
            for m in mismatches {
                log::warn!("{name}: {m}");
            }
        }
    }

    let graphs: Vec<(String, &WeightedGraph)> =
        ds.graphs.iter().map(|(n, g)| (n.clone(), g)).collect();
    let report = eval::run_experiment(
        &graphs,
        &ds.classes,
        &eval::ExperimentConfig {
            folds,
            repeats,
            runs: bags,
            lambda,
            master_seed: seed_value,
            score_isolated,
        },
    )?;

    match out {
        Some(prefix) => {
            let tsv_path = prefix.with_extension("tsv");
            let json_path = prefix.with_extension("json");
            std::fs::write(&tsv_path, report.to_tsv()).map_err(|e| Error::io(&tsv_path, e))?;
            std::fs::write(&json_path, report.to_json()).map_err(|e| Error::io(&json_path, e))?;
            log::info!("wrote {} and {}", tsv_path.display(), json_path.display());
            Ok(())
        }
        None => {
            let content = match format {
                OutputFormat::Tsv => report.to_tsv(),
                OutputFormat::Json => report.to_json(),
            };
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_synth(
    blocks: Vec<usize>,
    p_in: f64,
    p_out: f64,
    weight_range: (u32, u32),
    label_fraction: f64,
    seed_value: u64,
    out: &Path,
) -> Result<()> {
    let spec = SynthSpec {
        block_sizes: blocks,
        p_in,
        p_out,
        weight_range,
        label_fraction,
        seed: seed_value,
    };
    let data = synth_planted(&spec)?;

    let prefix = out.as_os_str().to_string_lossy();
    let graph_path = PathBuf::from(format!("{prefix}.graph.tsv"));
    let labels_path = PathBuf::from(format!("{prefix}.labels.tsv"));
    let truth_path = PathBuf::from(format!("{prefix}.truth.tsv"));

    let mut buf = Vec::new();
    dataset::write_edge_list(&data.graph, &mut buf).expect("vec write");
    std::fs::write(&graph_path, &buf).map_err(|e| Error::io(&graph_path, e))?;

    buf.clear();
    dataset::write_label_file(&data.graph, &data.revealed, &mut buf).expect("vec write");
    std::fs::write(&labels_path, &buf).map_err(|e| Error::io(&labels_path, e))?;

    let truth = LabelAssignment::new(
        &data.graph,
        data.truth.iter().enumerate().map(|(v, &y)| (v as u32, y)),
    )?;
    buf.clear();
    dataset::write_label_file(&data.graph, &truth, &mut buf).expect("vec write");
    std::fs::write(&truth_path, &buf).map_err(|e| Error::io(&truth_path, e))?;

    log::info!(
        "wrote {}, {} and {}",
        graph_path.display(),
        labels_path.display(),
        truth_path.display()
    );
    Ok(())
}

fn cmd_validate(manifest_path: &Path, out: Option<PathBuf>, format: OutputFormat) -> Result<()> {
    let manifest = dataset::load_manifest(manifest_path)?;
    let ds = dataset::load_dataset(&manifest)?;
    let reports: Vec<(String, StatsReport)> = ds
        .graphs
        .iter()
        .map(|(name, g)| {
            let expected = manifest
                .expected_stats
                .as_ref()
                .and_then(|m| m.get(name));
            (name.clone(), dataset::validate_stats(g, expected))
        })
        .collect();

    let content = match format {
        OutputFormat::Tsv => {
            let mut s = String::new();
            for (name, report) in &reports {
                match report {
                    StatsReport::Unchecked => writeln!(s, "{name}\tunchecked").expect("string write"),
                    StatsReport::Checked { mismatches } if mismatches.is_empty() => {
                        writeln!(s, "{name}\tok").expect("string write")
                    }
                    StatsReport::Checked { mismatches } => {
                        writeln!(s, "{name}\t{}", mismatches.join("; ")).expect("string write")
                    }
                }
            }
            s
        }
        OutputFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = reports
                .iter()
                .map(|(name, report)| {
                    (
                        name.clone(),
                        serde_json::to_value(report).expect("report serializes"),
                    )
                })
                .collect();
            serde_json::to_string_pretty(&map).expect("reports serialize") + "\n"
        }
    };
    emit(out, &content)
}
