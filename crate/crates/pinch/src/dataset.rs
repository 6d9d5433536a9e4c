//! File formats: edge lists, Matrix Market matrices, label files, and the
//! JSON manifest tying a multi-matrix dataset together.
//!
//! A manifest names several similarity matrices and one label matrix. All
//! matrices are loaded onto a shared vertex universe (the union of their
//! identifiers, in order of first appearance), so a vertex keeps the same
//! numeric id in every graph; vertices absent from one matrix are simply
//! isolated there. Expected per-graph statistics can ride along in the
//! manifest and are checked non-fatally with [`validate_stats`].
//!
//! Entries whose value lies below the manifest threshold (default 0) are
//! dropped at parse time. General (non-symmetric) Matrix Market inputs are
//! symmetrized by averaging the two directions exactly; diagonal entries
//! are ignored throughout.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, GraphStats, WeightedGraph};
use crate::predict::LabelAssignment;
use crate::weight::{self, ParsedWeight};

/// On-disk layout of a matrix file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    /// Lines `u<TAB>v<TAB>weight`; `#` comments and blank lines allowed.
    EdgeList,
    /// Coordinate Matrix Market, real/integer/pattern, general/symmetric.
    MatrixMarket,
}

impl MatrixFormat {
    /// Guesses the format from the file content: Matrix Market files open
    /// with their `%%MatrixMarket` banner.
    pub fn sniff(path: &Path) -> Result<MatrixFormat> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let first = text.lines().next().unwrap_or("");
        if first.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
            Ok(MatrixFormat::MatrixMarket)
        } else {
            Ok(MatrixFormat::EdgeList)
        }
    }
}

/// One matrix in a manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: MatrixFormat,
}

/// A dataset description: matrices, a label matrix, optional expected
/// statistics keyed by matrix name, and the drop threshold for entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub matrices: Vec<MatrixEntry>,
    pub labels: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_stats: Option<BTreeMap<String, GraphStats>>,
    #[serde(default)]
    pub threshold: f64,
}

/// Reads a manifest, resolving relative paths against its directory.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    if manifest.matrices.is_empty() {
        return Err(Error::parse(path, 0, "manifest lists no matrices"));
    }
    let mut names: Vec<&str> = manifest.matrices.iter().map(|m| m.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != manifest.matrices.len() {
        return Err(Error::parse(path, 0, "matrix names must be unique"));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    for m in &mut manifest.matrices {
        if m.path.is_relative() {
            m.path = base.join(&m.path);
        }
    }
    if manifest.labels.is_relative() {
        manifest.labels = base.join(&manifest.labels);
    }
    Ok(manifest)
}

/// A fully loaded dataset. All graphs share one vertex universe and id
/// numbering; each class is one binary label column.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub graphs: Vec<(String, WeightedGraph)>,
    pub classes: Vec<(String, LabelAssignment)>,
}

/// Matrix file reduced to names and weighted pairs, before any universe is
/// fixed.
struct ParsedMatrix {
    /// Vertex names in first-appearance order.
    vertices: Vec<String>,
    /// Indices into `vertices`.
    edges: Vec<(u32, u32, ParsedWeight)>,
}

/// Parses the weight token, dropping the entry when its value lies below
/// `threshold` (this is how negative similarities are discarded before the
/// nonnegativity check).
fn screened_weight(
    token: &str,
    threshold: f64,
    path: &Path,
    line: usize,
) -> Result<Option<ParsedWeight>> {
    let approx: f64 = token
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad weight {token:?}")))?;
    if !approx.is_finite() {
        return Err(Error::parse(path, line, format!("weight {token:?} is not finite")));
    }
    if approx < threshold {
        return Ok(None);
    }
    weight::parse(token)
        .map(Some)
        .map_err(|e| Error::parse(path, line, format!("weight {token:?}: {e}")))
}

fn parse_edge_list(path: &Path, threshold: f64) -> Result<ParsedMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vertices: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, u32> = BTreeMap::new();
    let mut intern = |name: &str, vertices: &mut Vec<String>| -> u32 {
        *index.entry(name.to_string()).or_insert_with(|| {
            vertices.push(name.to_string());
            vertices.len() as u32 - 1
        })
    };
    let mut edges = Vec::new();
    let mut seen: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                format!("expected `u v weight`, found {} fields", fields.len()),
            ));
        }
        let u = intern(fields[0], &mut vertices);
        let v = intern(fields[1], &mut vertices);
        if u == v {
            return Err(Error::parse(path, line, format!("self-loop on {:?}", fields[0])));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate edge {:?} {:?}", fields[0], fields[1]),
            ));
        }
        if let Some(w) = screened_weight(fields[2], threshold, path, line)? {
            edges.push((u, v, w));
        }
    }
    Ok(ParsedMatrix { vertices, edges })
}

fn parse_matrix_market(path: &Path, threshold: f64) -> Result<ParsedMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let lowered = header.to_ascii_lowercase();
    let fields: Vec<&str> = lowered.split_whitespace().collect();
    if fields.first() != Some(&"%%matrixmarket") {
        return Err(Error::parse(path, 1, "missing %%MatrixMarket banner"));
    }
    if fields.get(1) != Some(&"matrix") || fields.get(2) != Some(&"coordinate") {
        return Err(Error::parse(
            path,
            1,
            "only `matrix coordinate` files are supported",
        ));
    }
    let value_kind = *fields
        .get(3)
        .filter(|k| ["real", "integer", "pattern"].contains(k))
        .ok_or_else(|| {
            Error::parse(path, 1, format!("unsupported value type {:?}", fields.get(3)))
        })?;
    let symmetry = *fields
        .get(4)
        .filter(|s| ["general", "symmetric"].contains(s))
        .ok_or_else(|| {
            Error::parse(path, 1, format!("unsupported symmetry {:?}", fields.get(4)))
        })?;

    // Size line: first non-comment line after the banner.
    let (mut dim, mut declared) = (0usize, 0usize);
    let mut size_line = 0usize;
    for (lineno, raw) in lines.by_ref() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        let nums: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
        match nums.as_deref() {
            Some([rows, cols, nnz]) if parts.len() == 3 => {
                if rows != cols {
                    return Err(Error::parse(
                        path,
                        lineno + 1,
                        format!("matrix must be square, got {rows}x{cols}"),
                    ));
                }
                dim = *rows;
                declared = *nnz;
                size_line = lineno + 1;
            }
            _ => {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "expected size line `rows cols nnz`",
                ))
            }
        }
        break;
    }
    if size_line == 0 {
        return Err(Error::parse(path, 1, "missing size line"));
    }

    // Entries. For general matrices the two directions of a pair are
    // collected separately and averaged afterwards; symmetric matrices may
    // name each unordered pair only once.
    let mut slots: BTreeMap<(u32, u32), (Option<ParsedWeight>, Option<ParsedWeight>)> =
        BTreeMap::new();
    let mut entries = 0usize;
    for (lineno, raw) in lines {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        let expected = if value_kind == "pattern" { 2 } else { 3 };
        if parts.len() != expected {
            return Err(Error::parse(
                path,
                line,
                format!("expected {expected} fields, found {}", parts.len()),
            ));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad row index {:?}", parts[0])))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad column index {:?}", parts[1])))?;
        if i < 1 || i > dim || j < 1 || j > dim {
            return Err(Error::parse(
                path,
                line,
                format!("index ({i}, {j}) outside 1..={dim}"),
            ));
        }
        entries += 1;
        if i == j {
            continue; // self-similarity carries no edge
        }
        let w = if value_kind == "pattern" {
            Some(ParsedWeight::integer(1))
        } else {
            screened_weight(parts[2], threshold, path, line)?
        };
        let Some(w) = w else { continue };
        let (a, b) = (i.min(j) as u32 - 1, i.max(j) as u32 - 1);
        let slot = slots.entry((a, b)).or_default();
        let side = if symmetry == "symmetric" || i < j {
            &mut slot.0
        } else {
            &mut slot.1
        };
        if side.is_some() {
            return Err(Error::parse(path, line, format!("duplicate entry ({i}, {j})")));
        }
        *side = Some(w);
    }
    if entries != declared {
        return Err(Error::parse(
            path,
            size_line,
            format!("size line declares {declared} entries, file has {entries}"),
        ));
    }

    let mut edges = Vec::with_capacity(slots.len());
    for ((a, b), (fwd, rev)) in slots {
        let w = if symmetry == "symmetric" {
            fwd.expect("symmetric entries land in the first slot")
        } else {
            let zero = ParsedWeight::integer(0);
            weight::average(fwd.unwrap_or(zero), rev.unwrap_or(zero))
                .map_err(|e| Error::parse(path, 0, format!("entry ({a}, {b}): {e}", a = a + 1, b = b + 1)))?
        };
        edges.push((a, b, w));
    }
    Ok(ParsedMatrix {
        vertices: (1..=dim).map(|i| i.to_string()).collect(),
        edges,
    })
}

fn parse_matrix(path: &Path, format: MatrixFormat, threshold: f64) -> Result<ParsedMatrix> {
    match format {
        MatrixFormat::EdgeList => parse_edge_list(path, threshold),
        MatrixFormat::MatrixMarket => parse_matrix_market(path, threshold),
    }
}

/// Loads a single graph file on its own universe.
pub fn load_graph(path: &Path, format: MatrixFormat, threshold: f64) -> Result<WeightedGraph> {
    let parsed = parse_matrix(path, format, threshold)?;
    build_on_universe(&parsed.vertices, &parsed, identity_map)
}

fn identity_map(local: u32) -> u32 {
    local
}

fn build_on_universe(
    universe: &[String],
    parsed: &ParsedMatrix,
    map: impl Fn(u32) -> u32,
) -> Result<WeightedGraph> {
    let mut b = GraphBuilder::new();
    for name in universe {
        b.vertex(name);
    }
    for &(u, v, w) in &parsed.edges {
        b.add_edge_ids(map(u), map(v), w)?;
    }
    b.build()
}

/// Loads every matrix and the label matrix of `manifest` onto a shared
/// vertex universe.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Dataset> {
    let parsed: Vec<ParsedMatrix> = manifest
        .matrices
        .iter()
        .map(|m| parse_matrix(&m.path, m.format, manifest.threshold))
        .collect::<Result<_>>()?;

    // Shared universe: union of vertex names, in order of first appearance
    // across the matrices as listed.
    let mut universe: Vec<String> = Vec::new();
    let mut global: BTreeMap<&str, u32> = BTreeMap::new();
    for pm in &parsed {
        for name in &pm.vertices {
            global.entry(name).or_insert_with(|| {
                universe.push(name.clone());
                universe.len() as u32 - 1
            });
        }
    }

    let mut graphs = Vec::with_capacity(parsed.len());
    for (entry, pm) in manifest.matrices.iter().zip(&parsed) {
        let to_global: Vec<u32> = pm
            .vertices
            .iter()
            .map(|n| global[n.as_str()])
            .collect();
        let g = build_on_universe(&universe, pm, |local| to_global[local as usize])?;
        graphs.push((entry.name.clone(), g));
    }

    let classes = read_label_matrix(&manifest.labels, &graphs[0].1)?;
    Ok(Dataset { graphs, classes })
}

/// Parses a label matrix: a header naming the id column and the classes,
/// then one row per vertex with binary entries.
pub fn read_label_matrix(
    path: &Path,
    g: &WeightedGraph,
) -> Result<Vec<(String, LabelAssignment)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let cells: Vec<&str> = header.split('\t').map(str::trim).collect();
    if cells.len() < 2 {
        return Err(Error::parse(
            path,
            header_line,
            "header needs an id column and at least one class",
        ));
    }
    let class_names: Vec<String> = cells[1..].iter().map(|c| c.to_string()).collect();

    let mut columns: Vec<Vec<(u32, bool)>> = vec![Vec::new(); class_names.len()];
    let mut seen: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
    for (line, row) in lines {
        let cells: Vec<&str> = row.split('\t').map(str::trim).collect();
        if cells.len() != class_names.len() + 1 {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} columns, found {}", class_names.len() + 1, cells.len()),
            ));
        }
        let v = g.lookup(cells[0]).ok_or_else(|| {
            Error::parse(path, line, format!("unknown vertex {:?}", cells[0]))
        })?;
        if !seen.insert(v) {
            return Err(Error::parse(path, line, format!("duplicate row for {:?}", cells[0])));
        }
        for (ci, cell) in cells[1..].iter().enumerate() {
            let y = match *cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("label entries must be 0 or 1, found {other:?}"),
                    ))
                }
            };
            columns[ci].push((v, y));
        }
    }

    class_names
        .into_iter()
        .zip(columns)
        .map(|(name, col)| Ok((name, LabelAssignment::new(g, col)?)))
        .collect()
}

/// Parses a single-class label file: lines `vertex_id<TAB>{0|1}`.
pub fn read_label_file(path: &Path, g: &WeightedGraph) -> Result<LabelAssignment> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut seen: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                line,
                format!("expected `vertex label`, found {} fields", fields.len()),
            ));
        }
        let v = g.lookup(fields[0]).ok_or_else(|| {
            Error::parse(path, line, format!("unknown vertex {:?}", fields[0]))
        })?;
        if !seen.insert(v) {
            return Err(Error::parse(path, line, format!("duplicate label for {:?}", fields[0])));
        }
        let y = match fields[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("label must be 0 or 1, found {other:?}"),
                ))
            }
        };
        pairs.push((v, y));
    }
    LabelAssignment::new(g, pairs)
}

/// Result of checking a graph against expected statistics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StatsReport {
    /// No expectations were given.
    Unchecked,
    /// Compared; `mismatches` is empty when everything agrees.
    Checked { mismatches: Vec<String> },
}

impl StatsReport {
    pub fn is_clean(&self) -> bool {
        !matches!(self, StatsReport::Checked { mismatches } if !mismatches.is_empty())
    }
}

/// Compares the graph's statistics (isolated vertices excluded) against the
/// expectation, reporting mismatches without failing.
pub fn validate_stats(g: &WeightedGraph, expected: Option<&GraphStats>) -> StatsReport {
    let Some(want) = expected else {
        return StatsReport::Unchecked;
    };
    let got = g.stats();
    let mut mismatches = Vec::new();
    for (what, want, got) in [
        ("components", want.components, got.components),
        ("vertices", want.vertices, got.vertices),
        ("edges", want.edges, got.edges),
    ] {
        if want != got {
            mismatches.push(format!("{what}: expected {want}, found {got}"));
        }
    }
    StatsReport::Checked { mismatches }
}

/// Writes the canonical edge list of `g`: edges in canonical order, exact
/// decimal weights. Loading the output reproduces `g` bit for bit.
pub fn write_edge_list(g: &WeightedGraph, out: &mut impl Write) -> io::Result<()> {
    for e in g.edges() {
        writeln!(
            out,
            "{}\t{}\t{}",
            g.id(e.u),
            g.id(e.v),
            weight::format_scaled(e.weight, g.scale())
        )?;
    }
    Ok(())
}

/// Writes labels as a single-class label file, vertices ascending.
pub fn write_label_file(
    g: &WeightedGraph,
    labels: &LabelAssignment,
    out: &mut impl Write,
) -> io::Result<()> {
    for (v, y) in labels.iter() {
        writeln!(out, "{}\t{}", g.id(v), u8::from(y))?;
    }
    Ok(())
}
