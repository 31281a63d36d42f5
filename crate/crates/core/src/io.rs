//! File formats.
//!
//! * weight-matrix CSV: header row of B-labels (first cell ignored), one row
//!   per A-node with its label first;
//! * edge list: `a_label<TAB>b_label[<TAB>weight]` lines, weight defaulting
//!   to 1, `#` comments and blank lines ignored;
//! * ground truth CSV: `node_label,group_index`;
//! * similarity networks as CSV matrices, GraphML or DOT;
//! * error curves and ensemble summaries as CSV;
//! * run metadata and generator configs as `key=value` lines.
//!
//! Reals are written with Rust's shortest round-trip formatting, except the
//! edge weights of GraphML and DOT exports which use six decimals.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ndarray::Array2;
use thiserror::Error;

use crate::bipartite::{BipartiteNetwork, NetworkError, ProjectedNetwork, SimilarityNetwork};
use crate::evaluation::{EnsembleSummary, ErrorCurve};
use crate::generator::{
    GeneratorConfig, GroundTruth, LinkWeights, Partition, RewireScheme, RNG_ALGORITHM,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("row {row}, column {column}: {message}")]
    Cell {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate edge {a:?} - {b:?} on line {line}")]
    DuplicateEdge { a: String, b: String, line: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::File {
            path: path.to_owned(),
            source,
        })
}

fn parse_weight(text: &str) -> Result<f64, String> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("{text:?} is not a number"))?;
    if !value.is_finite() {
        return Err(format!("weight {text:?} is not finite"));
    }
    if value < 0.0 {
        return Err(format!("negative weight {value}"));
    }
    Ok(value)
}

fn reader_builder() -> csv::ReaderBuilder {
    let mut b = csv::ReaderBuilder::new();
    b.has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'));
    b
}

/// Parses a weight-matrix CSV. Row and column numbers in errors are
/// 1-based positions in the file.
pub fn parse_weight_matrix<R: Read>(input: R) -> Result<BipartiteNetwork, IoError> {
    let mut records = reader_builder()
        .flexible(true)
        .from_reader(input)
        .into_records();
    let header = records.next().ok_or(IoError::Parse {
        line: 1,
        message: "empty weight matrix".into(),
    })??;
    let b_labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut a_labels = Vec::new();
    let mut values = Vec::new();
    for (index, record) in records.enumerate() {
        let record = record?;
        let row = index + 2;
        if record.len() != b_labels.len() + 1 {
            return Err(IoError::Parse {
                line: row,
                message: format!(
                    "expected {} fields, found {}",
                    b_labels.len() + 1,
                    record.len()
                ),
            });
        }
        a_labels.push(record[0].to_owned());
        for (k, cell) in record.iter().skip(1).enumerate() {
            values.push(parse_weight(cell).map_err(|message| IoError::Cell {
                row,
                column: k + 2,
                message,
            })?);
        }
    }
    let weights = Array2::from_shape_vec((a_labels.len(), b_labels.len()), values)
        .expect("row lengths checked");
    Ok(BipartiteNetwork::new(a_labels, b_labels, weights)?)
}

pub fn read_weight_matrix(path: &Path) -> Result<BipartiteNetwork, IoError> {
    parse_weight_matrix(open(path)?)
}

fn labelled_matrix<W: Write + ?Sized>(
    out: &mut W,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    values: &Array2<f64>,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once(corner).chain(col_labels.iter().map(String::as_str)))?;
    for (label, row) in row_labels.iter().zip(values.outer_iter()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        w.write_record(std::iter::once(label.as_str()).chain(cells.iter().map(String::as_str)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_weight_matrix<W: Write + ?Sized>(
    net: &BipartiteNetwork,
    out: &mut W,
) -> Result<(), IoError> {
    labelled_matrix(out, "", net.a_labels(), net.b_labels(), net.weights())
}

/// Parses an edge list. Fields are tab separated; lines without a tab are
/// split on whitespace. Labels are indexed in order of first appearance.
pub fn parse_edge_list<R: Read>(input: R) -> Result<BipartiteNetwork, IoError> {
    let mut a_index: HashMap<String, usize> = HashMap::new();
    let mut b_index: HashMap<String, usize> = HashMap::new();
    let mut a_labels = Vec::new();
    let mut b_labels = Vec::new();
    let mut edges: HashMap<(usize, usize), f64> = HashMap::new();

    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let number = n + 1;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if content.contains('\t') {
            content.split('\t').map(str::trim).collect()
        } else {
            content.split_whitespace().collect()
        };
        let (a, b, weight) = match fields.as_slice() {
            [a, b] => (*a, *b, 1.0),
            [a, b, w] => (
                *a,
                *b,
                parse_weight(w).map_err(|message| IoError::Parse {
                    line: number,
                    message,
                })?,
            ),
            _ => {
                return Err(IoError::Parse {
                    line: number,
                    message: format!("expected 2 or 3 fields, found {}", fields.len()),
                })
            }
        };
        if a.is_empty() || b.is_empty() {
            return Err(IoError::Parse {
                line: number,
                message: "empty node label".into(),
            });
        }
        let i = *a_index.entry(a.to_owned()).or_insert_with(|| {
            a_labels.push(a.to_owned());
            a_labels.len() - 1
        });
        let k = *b_index.entry(b.to_owned()).or_insert_with(|| {
            b_labels.push(b.to_owned());
            b_labels.len() - 1
        });
        if edges.insert((i, k), weight).is_some() {
            return Err(IoError::DuplicateEdge {
                a: a.to_owned(),
                b: b.to_owned(),
                line: number,
            });
        }
    }
    if a_labels.is_empty() {
        return Err(IoError::Parse {
            line: 0,
            message: "edge list has no edges".into(),
        });
    }
    let mut weights = Array2::zeros((a_labels.len(), b_labels.len()));
    for ((i, k), w) in edges {
        weights[[i, k]] = w;
    }
    Ok(BipartiteNetwork::new(a_labels, b_labels, weights)?)
}

pub fn read_edge_list(path: &Path) -> Result<BipartiteNetwork, IoError> {
    parse_edge_list(open(path)?)
}

/// Writes positive-weight links in row-major order.
///
/// The reader numbers labels by first appearance, so two kinds of
/// zero-weight lines are added when needed to reproduce the exact label
/// order: the first A-row is written in full if the B-labels would
/// otherwise appear out of order (or not at all), and an A-node without
/// links gets a single line to its first B-node.
pub fn write_edge_list<W: Write + ?Sized>(
    net: &BipartiteNetwork,
    out: &mut W,
) -> Result<(), IoError> {
    let w = net.weights();
    let mut seen = HashSet::new();
    let mut b_order = Vec::new();
    for ((_, k), &v) in w.indexed_iter() {
        if v > 0.0 && seen.insert(k) {
            b_order.push(k);
        }
    }
    let dense_first_row =
        b_order.len() != net.n_b() || b_order.iter().enumerate().any(|(n, &k)| n != k);

    for (i, a) in net.a_labels().iter().enumerate() {
        let row = w.row(i);
        let isolated = row.iter().all(|&v| v == 0.0);
        for (k, b) in net.b_labels().iter().enumerate() {
            let v = row[k];
            let declare = (i == 0 && dense_first_row) || (isolated && k == 0);
            if v > 0.0 || declare {
                writeln!(out, "{a}\t{b}\t{v}")?;
            }
        }
    }
    Ok(())
}

/// Writes the labels and groups of every A-node followed by every B-node.
pub fn write_ground_truth<W: Write + ?Sized>(
    truth: &GroundTruth,
    out: &mut W,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node_label", "group_index"])?;
    for part in [&truth.a, &truth.b] {
        for (label, group) in part.labels.iter().zip(&part.groups) {
            w.write_record([label.as_str(), &group.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a ground-truth CSV into one partition covering all listed nodes.
pub fn parse_ground_truth<R: Read>(input: R) -> Result<Partition, IoError> {
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let mut seen = HashSet::new();
    for (index, record) in reader_builder()
        .from_reader(input)
        .into_records()
        .enumerate()
    {
        let record = record?;
        let line = index + 1;
        if index == 0 && record.get(0) == Some("node_label") {
            continue;
        }
        if record.len() != 2 {
            return Err(IoError::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let group = record[1].parse::<usize>().map_err(|_| IoError::Parse {
            line,
            message: format!("group index {:?} is not a non-negative integer", &record[1]),
        })?;
        if !seen.insert(record[0].to_owned()) {
            return Err(IoError::Parse {
                line,
                message: format!("duplicate node {:?}", &record[0]),
            });
        }
        labels.push(record[0].to_owned());
        groups.push(group);
    }
    Ok(Partition { labels, groups })
}

pub fn read_ground_truth(path: &Path) -> Result<Partition, IoError> {
    parse_ground_truth(open(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Csv,
    GraphMl,
    Dot,
}

impl std::str::FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(GraphFormat::Csv),
            "graphml" => Ok(GraphFormat::GraphMl),
            "dot" => Ok(GraphFormat::Dot),
            other => Err(format!(
                "unknown format {other:?} (expected csv|graphml|dot)"
            )),
        }
    }
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
            _ => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes a similarity network. CSV holds the full matrix; GraphML and DOT
/// hold one undirected edge per positive off-diagonal entry.
pub fn write_similarity<W: Write + ?Sized>(
    sim: &SimilarityNetwork,
    format: GraphFormat,
    out: &mut W,
) -> Result<(), IoError> {
    match format {
        GraphFormat::Csv => labelled_matrix(out, "", &sim.labels, &sim.labels, &sim.matrix),
        GraphFormat::GraphMl => {
            let mut doc = String::new();
            doc.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            doc.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            doc.push_str(
                "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n",
            );
            let _ = writeln!(
                doc,
                "  <graph id=\"coincidence-{}\" edgedefault=\"undirected\">",
                sim.orientation
            );
            for label in &sim.labels {
                let _ = writeln!(doc, "    <node id=\"{}\"/>", xml_escape(label));
            }
            for (i, j, v) in sim.edges() {
                let _ = writeln!(
                    doc,
                    "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{v:.6}</data></edge>",
                    xml_escape(&sim.labels[i]),
                    xml_escape(&sim.labels[j]),
                );
            }
            doc.push_str("  </graph>\n</graphml>\n");
            out.write_all(doc.as_bytes())?;
            Ok(())
        }
        GraphFormat::Dot => {
            writeln!(
                out,
                "graph {} {{",
                dot_quote(&format!("coincidence-{}", sim.orientation))
            )?;
            for label in &sim.labels {
                writeln!(out, "  {};", dot_quote(label))?;
            }
            for (i, j, v) in sim.edges() {
                writeln!(
                    out,
                    "  {} -- {} [weight={v:.6}];",
                    dot_quote(&sim.labels[i]),
                    dot_quote(&sim.labels[j])
                )?;
            }
            writeln!(out, "}}")?;
            Ok(())
        }
    }
}

pub fn write_projection<W: Write + ?Sized>(
    proj: &ProjectedNetwork,
    out: &mut W,
) -> Result<(), IoError> {
    labelled_matrix(out, "", &proj.labels, &proj.labels, &proj.matrix)
}

const CURVE_HEADER: [&str; 6] = [
    "T",
    "eps_b_mean",
    "eps_b_std",
    "eps_w_mean",
    "eps_w_std",
    "n_realizations",
];

/// Error curve as CSV with zero standard deviations and a realization
/// count of 1.
pub fn write_error_curve<W: Write + ?Sized>(
    curve: &ErrorCurve,
    out: &mut W,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for (t, p) in curve.thresholds.iter().zip(&curve.points) {
        w.write_record([
            t.to_string(),
            p.eps_between.to_string(),
            "0".into(),
            p.eps_within.to_string(),
            "0".into(),
            "1".into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ensemble_summary<W: Write + ?Sized>(
    summary: &EnsembleSummary,
    out: &mut W,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    let n = summary.n_realizations().to_string();
    for k in 0..summary.thresholds.len() {
        w.write_record([
            summary.thresholds[k].to_string(),
            summary.eps_between_mean[k].to_string(),
            summary.eps_between_std[k].to_string(),
            summary.eps_within_mean[k].to_string(),
            summary.eps_within_std[k].to_string(),
            n.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Every retained realization curve in long form: `seed,T,eps_b,eps_w`.
pub fn write_realization_curves<W: Write + ?Sized>(
    summary: &EnsembleSummary,
    out: &mut W,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "T", "eps_b", "eps_w"])?;
    for (seed, curve) in summary.seeds.iter().zip(&summary.curves) {
        for (t, p) in curve.thresholds.iter().zip(&curve.points) {
            w.write_record([
                seed.to_string(),
                t.to_string(),
                p.eps_between.to_string(),
                p.eps_within.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Ordered `key=value` record describing how an output was produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunMetadata {
    entries: Vec<(String, String)>,
}

/// Keys that describe a run but do not configure the generator.
const INFORMATIONAL_KEYS: [&str; 5] = ["tool", "version", "command", "timestamp", "rng"];

impl RunMetadata {
    /// Metadata for a generator run, stamped with the current time.
    pub fn for_config(command: &str, cfg: &GeneratorConfig) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut meta = Self::default();
        meta.set("tool", env!("CARGO_PKG_NAME"));
        meta.set("version", env!("CARGO_PKG_VERSION"));
        meta.set("command", command);
        meta.set("timestamp", timestamp);
        meta.set("rng", RNG_ALGORITHM);
        meta.extend_config(cfg);
        meta
    }

    pub fn extend_config(&mut self, cfg: &GeneratorConfig) {
        self.set("groups", cfg.n_groups);
        self.set("a_per_group", cfg.a_per_group);
        self.set("b_per_group", cfg.b_per_group);
        self.set("p", cfg.rewire_p);
        self.set("seed", cfg.seed);
        self.set("scheme", cfg.scheme.as_str());
        let max = match cfg.weights {
            LinkWeights::Unit => 0,
            LinkWeights::UniformInt { max } => max,
        };
        self.set("weight_max", max);
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_owned(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut meta = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| IoError::Parse {
                line: n + 1,
                message: format!("expected key=value, found {line:?}"),
            })?;
            meta.set(key.trim(), value.trim());
        }
        Ok(meta)
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let mut text = String::new();
        open(path)?
            .read_to_string(&mut text)
            .map_err(|source| IoError::File {
                path: path.to_owned(),
                source,
            })?;
        Self::parse(&text)
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W) -> Result<(), IoError> {
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }

    /// Generator configuration described by these entries.
    ///
    /// `groups`, `a_per_group`, `b_per_group`, `p` and `seed` are required;
    /// `scheme` and `weight_max` are optional. Keys listed in `extra` are
    /// accepted and ignored, as are the informational keys written by
    /// [`RunMetadata::for_config`]. A recorded `rng` other than this build's
    /// generator is rejected because the run could not be reproduced.
    pub fn generator_config(&self, extra: &[&str]) -> Result<GeneratorConfig, IoError> {
        const CONFIG_KEYS: [&str; 7] = [
            "groups",
            "a_per_group",
            "b_per_group",
            "p",
            "seed",
            "scheme",
            "weight_max",
        ];
        for (k, _) in &self.entries {
            let known = CONFIG_KEYS.contains(&k.as_str())
                || INFORMATIONAL_KEYS.contains(&k.as_str())
                || extra.contains(&k.as_str());
            if !known {
                return Err(IoError::Config(format!("unknown config key {k:?}")));
            }
        }
        if let Some(rng) = self.get("rng") {
            if rng != RNG_ALGORITHM {
                return Err(IoError::Config(format!(
                    "recorded rng {rng:?} differs from this build's {RNG_ALGORITHM:?}"
                )));
            }
        }
        fn field<T: std::str::FromStr>(meta: &RunMetadata, key: &str) -> Result<T, IoError> {
            let raw = meta
                .get(key)
                .ok_or_else(|| IoError::Config(format!("missing config key {key:?}")))?;
            raw.parse()
                .map_err(|_| IoError::Config(format!("invalid value {raw:?} for {key:?}")))
        }
        let mut cfg = GeneratorConfig::new(
            field(self, "groups")?,
            field(self, "a_per_group")?,
            field(self, "b_per_group")?,
            field(self, "p")?,
            field(self, "seed")?,
        );
        if self.get("scheme").is_some() {
            cfg.scheme = self
                .get("scheme")
                .unwrap_or_default()
                .parse::<RewireScheme>()
                .map_err(IoError::Config)?;
        }
        if self.get("weight_max").is_some() {
            let max: u32 = field(self, "weight_max")?;
            if max > 0 {
                cfg.weights = LinkWeights::UniformInt { max };
            }
        }
        cfg.validate().map_err(|e| IoError::Config(e.to_string()))?;
        Ok(cfg)
    }
}
