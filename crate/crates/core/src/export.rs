//! GraphML, DOT, JSON and CSV serializations of a Mapper network with
//! optional community labels and layout positions.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::community::CommunityPartition;
use crate::error::{Error, Result};
use crate::layout::LayoutPositions;
use crate::mapper::{MapperNetwork, MapperNode, MapperParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown export format `{other}` (expected graphml, dot, json or csv)"
            ))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
        }
    }
}

/// A network plus whatever per-node annotations are available.
#[derive(Debug, Clone, Copy)]
pub struct AnnotatedNetwork<'a> {
    pub network: &'a MapperNetwork,
    pub communities: Option<&'a CommunityPartition>,
    pub layout: Option<&'a LayoutPositions>,
}

impl<'a> AnnotatedNetwork<'a> {
    pub fn new(network: &'a MapperNetwork) -> Self {
        AnnotatedNetwork {
            network,
            communities: None,
            layout: None,
        }
    }

    pub fn with_communities(mut self, partition: &'a CommunityPartition) -> Self {
        self.communities = Some(partition);
        self
    }

    pub fn with_layout(mut self, layout: &'a LayoutPositions) -> Self {
        self.layout = Some(layout);
        self
    }

    fn lookups(&self) -> (HashMap<usize, usize>, HashMap<usize, [f64; 2]>) {
        let communities = self
            .communities
            .map(|p| p.node_ids.iter().copied().zip(p.assignment.iter().copied()).collect())
            .unwrap_or_default();
        let positions = self
            .layout
            .map(|l| l.node_ids.iter().copied().zip(l.positions.iter().copied()).collect())
            .unwrap_or_default();
        (communities, positions)
    }
}

pub fn export<W: Write>(net: &AnnotatedNetwork, format: ExportFormat, mut writer: W) -> Result<()> {
    let text = match format {
        ExportFormat::GraphMl => to_graphml(net),
        ExportFormat::Dot => to_dot(net),
        ExportFormat::Json => to_json(net)?,
        ExportFormat::Csv => nodes_csv(net)?,
    };
    writer
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<export>", e))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn to_graphml(net: &AnnotatedNetwork) -> String {
    let (communities, positions) = net.lookups();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    let keys = [
        ("size", "int"),
        ("mean_within", "double"),
        ("members", "string"),
        ("community", "int"),
        ("x", "double"),
        ("y", "double"),
    ];
    for (name, ty) in keys {
        let _ = writeln!(
            out,
            "  <key id=\"{name}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    let p = &net.network.parameters;
    let _ = writeln!(
        out,
        "  <graph id=\"mapper\" edgedefault=\"undirected\">\n    <desc>resolution={} gain={} histogram_bins={} lens={}</desc>",
        p.resolution,
        p.gain,
        p.histogram_bins,
        xml_escape(&p.lens)
    );
    for node in &net.network.nodes {
        let _ = writeln!(out, "    <node id=\"n{}\">", node.id);
        let _ = writeln!(out, "      <data key=\"size\">{}</data>", node.stats.size);
        let _ = writeln!(out, "      <data key=\"mean_within\">{}</data>", node.stats.mean_within);
        let _ = writeln!(out, "      <data key=\"members\">{}</data>", join_ids(&node.members));
        if let Some(c) = communities.get(&node.id) {
            let _ = writeln!(out, "      <data key=\"community\">{c}</data>");
        }
        if let Some(xy) = positions.get(&node.id) {
            let _ = writeln!(out, "      <data key=\"x\">{}</data>", xy[0]);
            let _ = writeln!(out, "      <data key=\"y\">{}</data>", xy[1]);
        }
        out.push_str("    </node>\n");
    }
    for (k, [u, v]) in net.network.edges.iter().enumerate() {
        let _ = writeln!(out, "    <edge id=\"e{k}\" source=\"n{u}\" target=\"n{v}\"/>");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

pub fn to_dot(net: &AnnotatedNetwork) -> String {
    let (communities, positions) = net.lookups();
    let p = &net.network.parameters;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "graph mapper {{\n  // resolution={} gain={} histogram_bins={} lens={}",
        p.resolution, p.gain, p.histogram_bins, p.lens
    );
    for node in &net.network.nodes {
        let mut attrs = vec![
            format!("size={}", node.stats.size),
            format!("mean_within={}", node.stats.mean_within),
        ];
        if let Some(c) = communities.get(&node.id) {
            attrs.push(format!("community={c}"));
        }
        if let Some(xy) = positions.get(&node.id) {
            attrs.push(format!("x={}", xy[0]));
            attrs.push(format!("y={}", xy[1]));
            attrs.push(format!("pos=\"{},{}\"", xy[0], xy[1]));
        }
        let _ = writeln!(out, "  n{} [{}];", node.id, attrs.join(", "));
    }
    for [u, v] in &net.network.edges {
        let _ = writeln!(out, "  n{u} -- n{v};");
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    #[serde(flatten)]
    node: MapperNode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    community: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    y: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    parameters: MapperParameters,
    nodes: Vec<JsonNode>,
    edges: Vec<[usize; 2]>,
}

pub fn to_json(net: &AnnotatedNetwork) -> Result<String> {
    let (communities, positions) = net.lookups();
    let doc = JsonDocument {
        parameters: net.network.parameters.clone(),
        nodes: net
            .network
            .nodes
            .iter()
            .map(|n| JsonNode {
                node: n.clone(),
                community: communities.get(&n.id).copied(),
                x: positions.get(&n.id).map(|p| p[0]),
                y: positions.get(&n.id).map(|p| p[1]),
            })
            .collect(),
        edges: net.network.edges.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// Reads a network JSON document; annotations are ignored.
pub fn network_from_json(text: &str) -> Result<MapperNetwork> {
    let doc: JsonDocument = serde_json::from_str(text)?;
    Ok(MapperNetwork {
        parameters: doc.parameters,
        nodes: doc.nodes.into_iter().map(|n| n.node).collect(),
        edges: doc.edges,
    })
}

/// One row per node: `node_id,size,mean_within,community,x,y,members`
/// with members separated by spaces and absent annotations left empty.
pub fn nodes_csv(net: &AnnotatedNetwork) -> Result<String> {
    let (communities, positions) = net.lookups();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node_id", "size", "mean_within", "community", "x", "y", "members"])?;
    for n in &net.network.nodes {
        let xy = positions.get(&n.id);
        w.write_record([
            n.id.to_string(),
            n.stats.size.to_string(),
            n.stats.mean_within.to_string(),
            communities.get(&n.id).map(|c| c.to_string()).unwrap_or_default(),
            xy.map(|p| p[0].to_string()).unwrap_or_default(),
            xy.map(|p| p[1].to_string()).unwrap_or_default(),
            join_ids(&n.members),
        ])?;
    }
    finish_csv(w)
}

/// `source,target` edge list.
pub fn edges_csv(network: &MapperNetwork) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "target"])?;
    for [u, v] in &network.edges {
        w.write_record([u.to_string(), v.to_string()])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn join_ids(ids: &[i64]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}
