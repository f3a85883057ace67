//! `simnerve`: similarity decomposition, Mapper networks and the analyses
//! built on them, one subcommand per stage plus `run` for the whole pipeline.

mod config;
mod demo;
mod focal;
mod pipeline;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use simnerve_core::community::{
    louvain_network, modularity, read_communities_csv, write_communities_csv, CommunityPartition,
    EdgeWeighting,
};
use simnerve_core::corpus::{validate_corpus, write_interactions};
use simnerve_core::export::{edges_csv, export, network_from_json, AnnotatedNetwork, ExportFormat};
use simnerve_core::glm::{community_labels, regression_report, LowThreshold, ModelId, RegressionDataset};
use simnerve_core::layout::{fr_layout, LayoutParams, LayoutPositions};
use simnerve_core::lens::{import_lens, pca_lens, write_lens_csv};
use simnerve_core::mapper::{build_cover, build_network, filter_small_components, ClusterParams};
use simnerve_core::opportunity::{color_network, focal_report, highlight_and_classify, scatter_export};
use simnerve_core::render::{network_svg, NetworkStyle};
use simnerve_core::simdecomp::{all_profiles, decompose, read_profiles_csv, write_profiles_csv, ProfileOptions};
use simnerve_core::{load_interactions, InputFormat, InteractionSet, LoadOptions, MapperNetwork};

use crate::config::PipelineConfig;

#[derive(Parser)]
#[command(name = "simnerve", version, about = "Functional / cross-capacity similarity and Mapper networks of if-then interactions")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Interaction file (CSV or JSON lines).
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<InputFormat>,
    /// Rescale non-unit vectors instead of rejecting them.
    #[arg(long)]
    renormalize: bool,
}

impl CorpusArgs {
    fn load(&self) -> Result<InteractionSet> {
        let format = self.format.unwrap_or_else(|| InputFormat::from_path(&self.input));
        load_interactions(
            &self.input,
            format,
            LoadOptions {
                renormalize: self.renormalize,
            },
        )
        .with_context(|| format!("loading {}", self.input.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and report its within-similarity statistics.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Validation report (JSON); printed when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the normalized corpus here.
        #[arg(long)]
        normalized: Option<PathBuf>,
    },
    /// Similarity components of one pair, as JSON.
    Similarity {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        pair: Vec<i64>,
    },
    /// Per-focal within similarity and functional/cross-capacity correlation.
    Profiles {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 256)]
        block_size: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compute (PCA) or import a 2-D lens and write it as CSV.
    Lens {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// `pca` or a lens CSV with columns id,x,y.
        #[arg(long, default_value = "pca")]
        method: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Build the Mapper network.
    Mapper {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// `pca` or a lens CSV.
        #[arg(long, default_value = "pca")]
        lens: String,
        #[arg(long, default_value_t = 35)]
        resolution: usize,
        #[arg(long, default_value_t = 2.0)]
        gain: f64,
        /// Histogram bins of the first-gap cut.
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        min_component_size: usize,
        /// Network JSON.
        #[arg(long)]
        output: PathBuf,
        /// Where to write the list of removed components.
        #[arg(long)]
        filter_report: Option<PathBuf>,
    },
    /// Louvain communities of a network.
    Communities {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Weight edges by shared-member count.
        #[arg(long)]
        weighted: bool,
        /// CSV node_id,community.
        #[arg(long)]
        output: PathBuf,
    },
    /// Fruchterman–Reingold layout of a network.
    Layout {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        /// Layout JSON.
        #[arg(long)]
        output: PathBuf,
    },
    /// Exploitation/exploration lists and scatter for one focal interaction.
    Focal {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        id: i64,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Functional and cross-capacity highlight thresholds.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.7, 0.6])]
        thresholds: Vec<f64>,
        /// Network JSON for the contiguity classification.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Receives focal_<id>.json, focal_<id>_scatter.csv and .svg.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Piecewise regression of r on within similarity and community type.
    Regress {
        /// Profiles CSV from `profiles`.
        #[arg(long)]
        profiles: PathBuf,
        /// Network JSON; with --communities supplies the type factor.
        #[arg(long, requires = "communities")]
        network: Option<PathBuf>,
        #[arg(long, requires = "network")]
        communities: Option<PathBuf>,
        /// `mean` or a number.
        #[arg(long, default_value = "mean")]
        low_threshold: LowThreshold,
        #[arg(long, default_value_t = 3)]
        max_model: u8,
        /// Report JSON; tables are printed either way.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// SVG of the laid-out network.
    Render {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, value_enum, default_value_t = ColorBy::Within)]
        color_by: ColorBy,
        #[arg(long)]
        communities: Option<PathBuf>,
        /// Corpus, needed for functional / cross-capacity coloring.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        focal: Option<i64>,
        /// Fade nodes at or below this value.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a network as GraphML, DOT, JSON or CSV.
    Export {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        format: ExportFormat,
        #[arg(long)]
        communities: Option<PathBuf>,
        #[arg(long)]
        layout: Option<PathBuf>,
        /// For CSV, edges go to `<stem>_edges.csv` alongside.
        #[arg(long)]
        output: PathBuf,
    },
    /// Whole pipeline from a config file.
    Run(RunArgs),
    /// Write the 30-interaction demo corpus and a config for it.
    Demo {
        #[arg(long)]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorBy {
    Within,
    Community,
    Functional,
    CrossCapacity,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    lens: Option<String>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long)]
    histogram_bins: Option<usize>,
    #[arg(long)]
    min_component_size: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    louvain_seed: Option<u64>,
    #[arg(long)]
    layout_seed: Option<u64>,
    #[arg(long)]
    layout_iterations: Option<usize>,
    #[arg(long)]
    low_threshold: Option<String>,
    #[arg(long)]
    max_model: Option<u8>,
    /// Replaces the configured focal list.
    #[arg(long = "focal")]
    focal_ids: Vec<i64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl RunArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = v.clone(); })*};
        }
        set!(
            input,
            lens,
            resolution,
            gain,
            histogram_bins,
            min_component_size,
            gamma,
            louvain_seed,
            layout_seed,
            layout_iterations,
            low_threshold,
            max_model,
            output_dir
        );
        if !self.focal_ids.is_empty() {
            c.focal_ids = self.focal_ids.clone();
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be ≥ 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure worker pool")?;
    }
    match cli.command {
        Command::Ingest {
            corpus,
            output,
            normalized,
        } => {
            let set = corpus.load()?;
            let report = validate_corpus(&set);
            emit_json(&report, output.as_deref())?;
            if let Some(path) = normalized {
                let format = InputFormat::from_path(&path);
                write_file(&path, |w| Ok(write_interactions(&set, w, format)?))?;
            }
        }
        Command::Similarity { corpus, pair } => {
            let set = corpus.load()?;
            let get = |id: i64| set.get(id).with_context(|| format!("unknown id {id}"));
            let components = decompose(get(pair[0])?, get(pair[1])?)?;
            emit_json(&components, None)?;
        }
        Command::Profiles {
            corpus,
            block_size,
            output,
        } => {
            let set = corpus.load()?;
            let rows = all_profiles(
                &set,
                ProfileOptions {
                    block_size,
                    threads: None,
                },
            )?;
            write_file(&output, |w| Ok(write_profiles_csv(&rows, w)?))?;
        }
        Command::Lens {
            corpus,
            method,
            output,
        } => {
            let set = corpus.load()?;
            let lens = lens_for(&method, &set)?;
            write_file(&output, |w| Ok(write_lens_csv(&lens, w)?))?;
        }
        Command::Mapper {
            corpus,
            lens,
            resolution,
            gain,
            bins,
            min_component_size,
            output,
            filter_report,
        } => {
            let set = corpus.load()?;
            let lens = lens_for(&lens, &set)?;
            let cover = build_cover(&lens, resolution, gain)?;
            let full = build_network(&lens, &cover, &set, ClusterParams { histogram_bins: bins })?;
            let (network, report) = filter_small_components(&full, min_component_size)?;
            eprintln!(
                "{} bins, {} nodes ({} removed with {} interactions), {} edges",
                cover.bin_count(),
                network.node_count(),
                report.removed_nodes,
                report.dropped_interactions.len(),
                network.edge_count()
            );
            emit_json(&network, Some(&output))?;
            if let Some(path) = filter_report {
                emit_json(&report, Some(&path))?;
            }
        }
        Command::Communities {
            network,
            gamma,
            seed,
            weighted,
            output,
        } => {
            let net = read_network(&network)?;
            let partition = louvain_network(&net, gamma, seed, weighting(weighted))?;
            eprintln!(
                "{} communities, modularity {:.4}",
                partition.community_count(),
                partition.modularity
            );
            write_file(&output, |w| Ok(write_communities_csv(&partition, w)?))?;
        }
        Command::Layout {
            network,
            iterations,
            seed,
            area,
            output,
        } => {
            let net = read_network(&network)?;
            let layout = fr_layout(&net, LayoutParams { iterations, seed, area })?;
            emit_json(&layout, Some(&output))?;
        }
        Command::Focal {
            corpus,
            id,
            top,
            thresholds,
            network,
            output_dir,
        } => {
            let set = corpus.load()?;
            let report = focal_report(id, &set, top)?;
            let net = network.as_deref().map(read_network).transpose()?;
            let doc = focal::focal_document(&report, net.as_ref(), thresholds[0], thresholds[1])?;
            fs::create_dir_all(&output_dir)
                .with_context(|| format!("cannot create {}", output_dir.display()))?;
            emit_json(&doc, Some(&output_dir.join(format!("focal_{id}.json"))))?;
            let (csv, svg) = scatter_export(&report)?;
            fs::write(output_dir.join(format!("focal_{id}_scatter.csv")), csv)?;
            fs::write(output_dir.join(format!("focal_{id}_scatter.svg")), svg)?;
            print_candidates("Opportunities for exploitation", &report.exploitation);
            print_candidates("Opportunities for exploration", &report.exploration);
        }
        Command::Regress {
            profiles,
            network,
            communities,
            low_threshold,
            max_model,
            output,
        } => {
            let rows = read_profiles_csv(open(&profiles)?)?;
            let labels = match (network, communities) {
                (Some(n), Some(c)) => {
                    let net = read_network(&n)?;
                    let partition = read_partition(&c, &net)?;
                    community_labels(&net, &partition)?
                }
                _ => Default::default(),
            };
            let dataset = RegressionDataset::build(&rows, &labels, low_threshold)?;
            for w in &dataset.warnings {
                eprintln!("warning: {w}");
            }
            let report = regression_report(&dataset, ModelId::try_from(max_model)?)?;
            print!("{report}");
            if let Some(path) = output {
                emit_json(&report, Some(&path))?;
            }
        }
        Command::Render {
            network,
            layout,
            color_by,
            communities,
            input,
            focal,
            threshold,
            output,
        } => {
            let net = read_network(&network)?;
            let layout: LayoutPositions = read_json(&layout)?;
            let mut style = NetworkStyle::default();
            style.values = match color_by {
                ColorBy::Within => net.nodes.iter().map(|n| (n.id, n.stats.mean_within)).collect(),
                ColorBy::Community => {
                    let path = communities.context("--color-by community needs --communities")?;
                    let p = read_partition(&path, &net)?;
                    p.node_ids
                        .iter()
                        .zip(&p.assignment)
                        .map(|(&id, &c)| (id, c as f64))
                        .collect()
                }
                ColorBy::Functional | ColorBy::CrossCapacity => {
                    let input = input.context("focal coloring needs --input")?;
                    let id = focal.context("focal coloring needs --focal")?;
                    let set = CorpusArgs {
                        input,
                        format: None,
                        renormalize: false,
                    }
                    .load()?;
                    let report = focal_report(id, &set, 1)?;
                    let values = match color_by {
                        ColorBy::Functional => report.functional_values(),
                        _ => report.cross_capacity_values(),
                    };
                    style.outlined = net.nodes_containing(id).iter().map(|&k| net.nodes[k].id).collect();
                    color_network(&net, &values)?
                }
            };
            if let Some(t) = threshold {
                style.faded = style
                    .values
                    .iter()
                    .filter(|(_, &v)| v <= t)
                    .map(|(&id, _)| id)
                    .collect();
                if let Some(id) = focal {
                    let c = highlight_and_classify(&net, &style.values, t, id);
                    eprintln!(
                        "{} highlighted: {} contiguous, {} discontinuous",
                        c.highlighted.len(),
                        c.contiguous.len(),
                        c.discontinuous.len()
                    );
                }
            }
            fs::write(&output, network_svg(&net, &layout, &style))
                .with_context(|| format!("cannot write {}", output.display()))?;
        }
        Command::Export {
            network,
            format,
            communities,
            layout,
            output,
        } => {
            let net = read_network(&network)?;
            let partition = communities.as_deref().map(|p| read_partition(p, &net)).transpose()?;
            let positions: Option<LayoutPositions> = layout.as_deref().map(read_json).transpose()?;
            let mut annotated = AnnotatedNetwork::new(&net);
            if let Some(p) = &partition {
                annotated = annotated.with_communities(p);
            }
            if let Some(l) = &positions {
                annotated = annotated.with_layout(l);
            }
            write_file(&output, |w| Ok(export(&annotated, format, w)?))?;
            if format == ExportFormat::Csv {
                let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("network");
                let edges = output.with_file_name(format!("{stem}_edges.csv"));
                fs::write(&edges, edges_csv(&net)?)
                    .with_context(|| format!("cannot write {}", edges.display()))?;
            }
        }
        Command::Run(args) => {
            let mut config = PipelineConfig::load(&args.config)?;
            args.apply(&mut config);
            let base = args
                .config
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default();
            let manifest = pipeline::run_pipeline(&config, &base)?;
            let s = &manifest.summary;
            eprintln!(
                "{} interactions → {} nodes, {} edges, {} communities; {} outputs",
                s.interactions,
                s.nodes,
                s.edges,
                s.communities,
                manifest.outputs.len() + 1
            );
        }
        Command::Demo { output_dir, seed } => {
            fs::create_dir_all(&output_dir)
                .with_context(|| format!("cannot create {}", output_dir.display()))?;
            let set = demo::demo_corpus(seed)?;
            write_file(&output_dir.join("demo_corpus.csv"), |w| {
                Ok(write_interactions(&set, w, InputFormat::Csv)?)
            })?;
            fs::write(output_dir.join("demo.toml"), demo::DEMO_CONFIG)?;
        }
    }
    Ok(())
}

fn weighting(weighted: bool) -> EdgeWeighting {
    if weighted {
        EdgeWeighting::SharedMembers
    } else {
        EdgeWeighting::Unweighted
    }
}

fn lens_for(method: &str, set: &InteractionSet) -> Result<simnerve_core::LensCoordinates> {
    if method == "pca" {
        Ok(pca_lens(set)?)
    } else {
        Ok(import_lens(method, set)?)
    }
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

fn read_network(path: &Path) -> Result<MapperNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    network_from_json(&text).with_context(|| format!("invalid network JSON in {}", path.display()))
}

/// Rebuilds a partition from its CSV; modularity is recomputed on the network.
fn read_partition(path: &Path, network: &MapperNetwork) -> Result<CommunityPartition> {
    let pairs: BTreeMap<usize, usize> = read_communities_csv(open(path)?)?.into_iter().collect();
    let mut partition = CommunityPartition {
        node_ids: Vec::new(),
        assignment: Vec::new(),
        modularity: f64::NAN,
        gamma: 1.0,
        level_modularity: Vec::new(),
    };
    for node in &network.nodes {
        let c = pairs
            .get(&node.id)
            .with_context(|| format!("node {} missing from {}", node.id, path.display()))?;
        partition.node_ids.push(node.id);
        partition.assignment.push(*c);
    }
    if let Ok(q) = modularity(network, &partition, 1.0, EdgeWeighting::Unweighted) {
        partition.modularity = q;
    }
    Ok(partition)
}

fn write_file(path: &Path, f: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let result = f(&mut file).and_then(|_| Ok(file.flush()?));
    if result.is_err() {
        let _ = fs::remove_file(path);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => write_file(p, |w| Ok(w.write_all(text.as_bytes())?)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_candidates(title: &str, list: &[simnerve_core::opportunity::Candidate]) {
    println!("{title}");
    println!("{:>8}  {:>10}  {:>14}  interaction", "id", "functional", "cross-capacity");
    for c in list {
        println!(
            "{:>8}  {:>10.3}  {:>14.3}  if {}, then {}",
            c.id, c.functional, c.cross_capacity, c.if_text, c.then_text
        );
    }
    println!();
}
