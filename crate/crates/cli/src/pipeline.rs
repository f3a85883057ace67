//! End-to-end run writing a bundle of artifacts plus a manifest.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use simnerve_core::community::{louvain_network, EdgeWeighting};
use simnerve_core::export::{edges_csv, nodes_csv, to_dot, to_graphml, to_json, AnnotatedNetwork};
use simnerve_core::glm::{community_labels, regression_report, ModelId, RegressionDataset};
use simnerve_core::layout::{fr_layout, LayoutParams};
use simnerve_core::lens::{import_lens, pca_lens, write_lens_csv};
use simnerve_core::mapper::{build_cover, build_network, filter_small_components, ClusterParams};
use simnerve_core::opportunity::{color_network, focal_report_packed, highlight_and_classify, scatter_export};
use simnerve_core::render::{network_svg, NetworkStyle};
use simnerve_core::simdecomp::{all_profiles, write_profiles_csv, PackedCorpus, ProfileOptions};
use simnerve_core::corpus::validate_corpus;
use simnerve_core::{community, load_interactions, LoadOptions};

use crate::config::PipelineConfig;
use crate::focal::{focal_document, FocalDocument};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Default, Serialize)]
pub struct RunSummary {
    pub interactions: usize,
    pub dimension: usize,
    pub undefined_profiles: usize,
    pub lens: String,
    pub bins: usize,
    pub nodes_before_filter: usize,
    pub nodes: usize,
    pub edges: usize,
    pub removed_nodes: usize,
    pub dropped_interactions: usize,
    pub communities: usize,
    pub modularity: Option<f64>,
    pub r_squared: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// The configuration as written, before path resolution.
    pub config: PipelineConfig,
    pub input_sha256: String,
    pub stages: Vec<&'static str>,
    pub summary: RunSummary,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files written so far, removed again if the run fails.
struct Bundle {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
    entries: Vec<OutputEntry>,
}

impl Bundle {
    fn open(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.entries.push(OutputEntry {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> simnerve_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Runs every stage; `base` is the directory relative config paths are
/// resolved against.
pub fn run_pipeline(config: &PipelineConfig, base: &Path) -> Result<Manifest> {
    config.validate()?;
    let resolved = config.resolve_paths(base);
    let mut bundle = Bundle::open(&resolved.output_dir)?;
    match run_stages(config, &resolved, &mut bundle) {
        Ok(manifest) => Ok(manifest),
        Err(e) => {
            bundle.discard();
            Err(e)
        }
    }
}

fn stage<T>(name: &'static str, stages: &mut Vec<&'static str>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let out = f().with_context(|| format!("stage `{name}` failed"))?;
    stages.push(name);
    Ok(out)
}

fn run_stages(config: &PipelineConfig, resolved: &PipelineConfig, bundle: &mut Bundle) -> Result<Manifest> {
    let mut stages = Vec::new();
    let mut summary = RunSummary::default();

    let (set, input_sha256) = stage("ingest", &mut stages, || {
        let bytes = fs::read(&resolved.input)
            .with_context(|| format!("cannot read {}", resolved.input.display()))?;
        let set = load_interactions(
            &resolved.input,
            resolved.input_format()?,
            LoadOptions {
                renormalize: resolved.renormalize,
            },
        )?;
        let mut report = validate_corpus(&set);
        report.source = Some(config.input.display().to_string());
        bundle.write("validation.json", &json_bytes(&report)?)?;
        Ok((set, sha256_hex(&bytes)))
    })?;
    summary.interactions = set.len();
    summary.dimension = set.dimension();

    let profiles = stage("profiles", &mut stages, || {
        let rows = all_profiles(
            &set,
            ProfileOptions {
                block_size: resolved.block_size,
                threads: None,
            },
        )?;
        bundle.write("profiles.csv", &csv_bytes(|b| write_profiles_csv(&rows, b))?)?;
        Ok(rows)
    })?;
    summary.undefined_profiles = profiles.iter().filter(|p| p.r_functional_cc.is_none()).count();

    let lens = stage("lens", &mut stages, || {
        let lens = if resolved.lens == "pca" {
            pca_lens(&set)?
        } else {
            import_lens(&resolved.lens, &set)?
        };
        bundle.write("lens.csv", &csv_bytes(|b| write_lens_csv(&lens, b))?)?;
        Ok(lens)
    })?;
    summary.lens = match lens.provenance() {
        simnerve_core::LensProvenance::Pca => "pca".to_string(),
        _ => format!("imported:{}", config.lens),
    };

    let (network, filter) = stage("mapper", &mut stages, || {
        let cover = build_cover(&lens, resolved.resolution, resolved.gain)?;
        let full = build_network(
            &lens,
            &cover,
            &set,
            ClusterParams {
                histogram_bins: resolved.histogram_bins,
            },
        )?;
        summary.bins = cover.bin_count();
        summary.nodes_before_filter = full.node_count();
        let (network, report) = filter_small_components(&full, resolved.min_component_size)?;
        bundle.write("filter_report.json", &json_bytes(&report)?)?;
        Ok((network, report))
    })?;
    summary.nodes = network.node_count();
    summary.edges = network.edge_count();
    summary.removed_nodes = filter.removed_nodes;
    summary.dropped_interactions = filter.dropped_interactions.len();

    let weighting = if resolved.weighted {
        EdgeWeighting::SharedMembers
    } else {
        EdgeWeighting::Unweighted
    };
    let partition = stage("communities", &mut stages, || {
        let partition = louvain_network(&network, resolved.gamma, resolved.louvain_seed, weighting)?;
        bundle.write(
            "communities.csv",
            &csv_bytes(|b| community::write_communities_csv(&partition, b))?,
        )?;
        Ok(partition)
    })?;
    summary.communities = partition.community_count();
    summary.modularity = Some(partition.modularity).filter(|q| q.is_finite());

    let layout = stage("layout", &mut stages, || {
        let layout = fr_layout(
            &network,
            LayoutParams {
                iterations: resolved.layout_iterations,
                seed: resolved.layout_seed,
                area: resolved.layout_area,
            },
        )?;
        bundle.write("layout.json", &json_bytes(&layout)?)?;
        Ok(layout)
    })?;

    stage("export", &mut stages, || {
        let annotated = AnnotatedNetwork::new(&network)
            .with_communities(&partition)
            .with_layout(&layout);
        bundle.write("network.json", to_json(&annotated)?.as_bytes())?;
        bundle.write("network.graphml", to_graphml(&annotated).as_bytes())?;
        bundle.write("network.dot", to_dot(&annotated).as_bytes())?;
        bundle.write("network_nodes.csv", nodes_csv(&annotated)?.as_bytes())?;
        bundle.write("network_edges.csv", edges_csv(&network)?.as_bytes())?;
        let style = NetworkStyle {
            values: network.nodes.iter().map(|n| (n.id, n.stats.mean_within)).collect(),
            ..Default::default()
        };
        bundle.write("network.svg", network_svg(&network, &layout, &style).as_bytes())?;
        Ok(())
    })?;

    stage("focal", &mut stages, || {
        let packed = PackedCorpus::new(&set);
        for &id in &resolved.focal_ids {
            let report = focal_report_packed(id, &set, &packed, resolved.top)?;
            let doc: FocalDocument = focal_document(
                &report,
                Some(&network),
                resolved.functional_threshold,
                resolved.cross_capacity_threshold,
            )?;
            bundle.write(&format!("focal_{id}.json"), &json_bytes(&doc)?)?;
            let (csv, svg) = scatter_export(&report)?;
            bundle.write(&format!("focal_{id}_scatter.csv"), csv.as_bytes())?;
            bundle.write(&format!("focal_{id}_scatter.svg"), svg.as_bytes())?;
            if report_in_network(&network, id) {
                let functional = color_network(&network, &report.functional_values())?;
                let classes = highlight_and_classify(&network, &functional, resolved.functional_threshold, id);
                let style = NetworkStyle {
                    faded: network
                        .nodes
                        .iter()
                        .map(|n| n.id)
                        .filter(|n| !classes.highlighted.contains(n))
                        .collect(),
                    outlined: classes.focal_nodes.clone(),
                    values: functional,
                };
                bundle.write(
                    &format!("focal_{id}_functional.svg"),
                    network_svg(&network, &layout, &style).as_bytes(),
                )?;
            }
        }
        Ok(())
    })?;

    stage("regress", &mut stages, || {
        let labels: HashMap<i64, String> = community_labels(&network, &partition)?;
        let dataset = RegressionDataset::build(&profiles, &labels, resolved.low_threshold()?)?;
        for w in &dataset.warnings {
            eprintln!("warning: {w}");
        }
        let report = regression_report(&dataset, ModelId::try_from(resolved.max_model)?)?;
        summary.r_squared = report.fits.iter().map(|f| f.r_squared).collect();
        bundle.write("regression.json", &json_bytes(&report)?)?;
        bundle.write("regression.txt", report.to_string().as_bytes())?;
        Ok(())
    })?;

    let manifest = Manifest {
        tool: "simnerve",
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        input_sha256,
        stages,
        summary,
        outputs: std::mem::take(&mut bundle.entries),
    };
    let bytes = json_bytes(&manifest)?;
    let path = bundle.dir.join(MANIFEST_NAME);
    bundle.written.push(path.clone());
    fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(manifest)
}

fn report_in_network(network: &simnerve_core::MapperNetwork, id: i64) -> bool {
    !network.nodes_containing(id).is_empty()
}
