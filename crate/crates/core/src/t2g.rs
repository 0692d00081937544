//! Text-to-graph adapter: pools per-subword embeddings into per-node features
//! and stacks knowledge-base graphs into disjoint-union batches.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{KnowledgeBase, NodeKind};

#[derive(Debug, Error, PartialEq)]
pub enum T2gError {
    #[error("node {node}: word {word} of sentence {sent} has no subword alignment")]
    MissingOffset {
        node: usize,
        sent: usize,
        word: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("offset {index} for {sent}:{word} is outside 0..{n_tokens}")]
    OffsetOutOfRange {
        sent: usize,
        word: usize,
        index: usize,
        n_tokens: usize,
    },
    #[error("empty subword list for {sent}:{word}")]
    EmptyOffset { sent: usize, word: usize },
    #[error("embedding file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("offsets file: {0}")]
    Offsets(String),
    #[error("dummy policy `{0}` is reserved and not implemented")]
    UnsupportedDummyPolicy(String),
    #[error("batch has no graphs")]
    EmptyBatch,
    #[error("graph label `{0}` is not a known class")]
    UnknownClass(String),
}

/// Token embeddings of one document plus their word alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    rows: Array2<f64>,
    offsets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl EmbeddingTable {
    pub fn new(
        rows: Array2<f64>,
        offsets: BTreeMap<(usize, usize), Vec<usize>>,
    ) -> Result<Self, T2gError> {
        if rows.ncols() == 0 {
            return Err(T2gError::Format {
                line: 1,
                message: "dim must be positive".into(),
            });
        }
        if let Some(((r, _), _)) = rows.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(T2gError::Format {
                line: r + 2,
                message: "non-finite value".into(),
            });
        }
        let n = rows.nrows();
        for (&(sent, word), idx) in &offsets {
            if idx.is_empty() {
                return Err(T2gError::EmptyOffset { sent, word });
            }
            if let Some(&index) = idx.iter().find(|&&i| i >= n) {
                return Err(T2gError::OffsetOutOfRange {
                    sent,
                    word,
                    index,
                    n_tokens: n,
                });
            }
        }
        Ok(EmbeddingTable { rows, offsets })
    }

    pub fn n_tokens(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn offsets(&self) -> &BTreeMap<(usize, usize), Vec<usize>> {
        &self.offsets
    }

    pub fn subwords(&self, sent: usize, word: usize) -> Option<&[usize]> {
        self.offsets.get(&(sent, word)).map(Vec::as_slice)
    }
}

/// Parses the `EMB 1 <n_tokens> <dim>` matrix format.
pub fn parse_matrix(text: &str) -> Result<Array2<f64>, T2gError> {
    let err = |line: usize, message: String| T2gError::Format { line, message };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let (n, dim) = match fields.as_slice() {
        ["EMB", "1", n, d] => (
            n.parse::<usize>()
                .map_err(|_| err(1, format!("bad row count `{n}`")))?,
            d.parse::<usize>()
                .map_err(|_| err(1, format!("bad dim `{d}`")))?,
        ),
        _ => {
            return Err(err(
                1,
                format!("expected `EMB 1 <n_tokens> <dim>`, found `{header}`"),
            ))
        }
    };
    if dim == 0 {
        return Err(err(1, "dim must be positive".into()));
    }
    let mut data = Vec::with_capacity(n * dim);
    for r in 0..n {
        let line_no = r + 2;
        let line = lines
            .next()
            .ok_or_else(|| err(line_no, format!("expected {n} rows, found {r}")))?;
        let values: Vec<&str> = line.split(' ').collect();
        if values.len() != dim {
            return Err(err(
                line_no,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        for v in values {
            let x = f64::from_str(v).map_err(|_| err(line_no, format!("bad number `{v}`")))?;
            if !x.is_finite() {
                return Err(err(line_no, format!("non-finite value `{v}`")));
            }
            data.push(x);
        }
    }
    if let Some((i, extra)) = lines.enumerate().find(|(_, l)| !l.is_empty()) {
        return Err(err(
            n + 2 + i,
            format!("unexpected trailing line `{extra}`"),
        ));
    }
    Ok(Array2::from_shape_vec((n, dim), data).expect("row-major shape"))
}

/// Writes a matrix in the `EMB` format; values use the shortest round-tripping decimal form.
pub fn write_matrix(m: &Array2<f64>) -> String {
    let mut out = format!("EMB 1 {} {}\n", m.nrows(), m.ncols());
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Parses `{"<sent>:<word>": [subword indices]}`.
pub fn parse_offsets(text: &str) -> Result<BTreeMap<(usize, usize), Vec<usize>>, T2gError> {
    let raw: BTreeMap<String, Vec<usize>> =
        serde_json::from_str(text).map_err(|e| T2gError::Offsets(e.to_string()))?;
    raw.into_iter()
        .map(|(k, v)| {
            let (s, w) = k
                .split_once(':')
                .and_then(|(s, w)| Some((s.parse().ok()?, w.parse().ok()?)))
                .ok_or_else(|| T2gError::Offsets(format!("bad key `{k}`")))?;
            Ok(((s, w), v))
        })
        .collect()
}

pub fn write_offsets(offsets: &BTreeMap<(usize, usize), Vec<usize>>) -> String {
    let raw: BTreeMap<String, &Vec<usize>> = offsets
        .iter()
        .map(|((s, w), v)| (format!("{s}:{w}"), v))
        .collect();
    let mut s = serde_json::to_string(&raw).expect("offsets serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DummyPolicy {
    #[default]
    Zero,
    LearnedConstant,
}

impl FromStr for DummyPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(DummyPolicy::Zero),
            "learned-constant" => Ok(DummyPolicy::LearnedConstant),
            _ => Err(format!(
                "unknown dummy policy `{s}` (expected zero or learned-constant)"
            )),
        }
    }
}

/// Node features: row k is the mean of every subword row of every word in
/// node k's provenance.
pub fn pool_nodes(
    kb: &KnowledgeBase,
    emb: &EmbeddingTable,
    dummy: DummyPolicy,
) -> Result<Array2<f64>, T2gError> {
    let mut out = Array2::zeros((kb.nodes.len(), emb.dim()));
    for node in &kb.nodes {
        if node.kind == NodeKind::Dummy {
            match dummy {
                DummyPolicy::Zero => continue,
                DummyPolicy::LearnedConstant => {
                    return Err(T2gError::UnsupportedDummyPolicy("learned-constant".into()))
                }
            }
        }
        let mut row = out.row_mut(node.id);
        let mut count = 0usize;
        for span in &node.provenance {
            for &word in &span.words {
                let subwords = emb
                    .subwords(span.sent, word)
                    .ok_or(T2gError::MissingOffset {
                        node: node.id,
                        sent: span.sent,
                        word,
                    })?;
                for &i in subwords {
                    row += &emb.rows.row(i);
                    count += 1;
                }
            }
        }
        if count > 0 {
            row /= count as f64;
        }
    }
    Ok(out)
}

/// Sorted list of class names; a label's id is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassIndex {
    names: Vec<String>,
}

impl ClassIndex {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut names: Vec<String> = labels.into_iter().map(str::to_string).collect();
        names.sort();
        names.dedup();
        ClassIndex { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// One graph ready for batching: node features, symmetric edge pairs, class id.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledGraph {
    pub features: Array2<f64>,
    pub edges: Vec<(usize, usize)>,
    pub label: Option<usize>,
}

impl PooledGraph {
    pub fn from_kb(
        kb: &KnowledgeBase,
        emb: &EmbeddingTable,
        classes: &ClassIndex,
        dummy: DummyPolicy,
    ) -> Result<Self, T2gError> {
        let features = pool_nodes(kb, emb, dummy)?;
        Self::from_features(kb, features, classes)
    }

    /// Pairs already-pooled features with the graph structure of `kb`.
    pub fn from_features(
        kb: &KnowledgeBase,
        features: Array2<f64>,
        classes: &ClassIndex,
    ) -> Result<Self, T2gError> {
        if features.nrows() != kb.node_count() {
            return Err(T2gError::DimMismatch {
                expected: kb.node_count(),
                found: features.nrows(),
            });
        }
        let label = match &kb.label {
            Some(l) => Some(
                classes
                    .id(l)
                    .ok_or_else(|| T2gError::UnknownClass(l.clone()))?,
            ),
            None => None,
        };
        Ok(PooledGraph {
            features,
            edges: kb.to_edge_list().0,
            label,
        })
    }

    pub fn node_count(&self) -> usize {
        self.features.nrows()
    }
}

/// Disjoint union of several graphs. Graph i owns global node ids
/// `offsets[i]..offsets[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBatch {
    pub features: Array2<f64>,
    pub edges: Vec<(usize, usize)>,
    pub graph_of: Vec<usize>,
    /// Per-graph class ids; `None` when any graph in the batch is unlabeled.
    pub labels: Option<Vec<usize>>,
    pub offsets: Vec<usize>,
}

impl GraphBatch {
    pub fn from_graphs(graphs: &[PooledGraph]) -> Result<Self, T2gError> {
        let first = graphs.first().ok_or(T2gError::EmptyBatch)?;
        let dim = first.features.ncols();
        let total: usize = graphs.iter().map(PooledGraph::node_count).sum();
        let mut features = Array2::zeros((total, dim));
        let mut edges = Vec::new();
        let mut graph_of = Vec::with_capacity(total);
        let mut offsets = vec![0];
        let mut offset = 0;
        for (g, graph) in graphs.iter().enumerate() {
            if graph.features.ncols() != dim {
                return Err(T2gError::DimMismatch {
                    expected: dim,
                    found: graph.features.ncols(),
                });
            }
            let k = graph.node_count();
            features
                .slice_mut(s![offset..offset + k, ..])
                .assign(&graph.features);
            edges.extend(graph.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
            graph_of.extend(std::iter::repeat_n(g, k));
            offset += k;
            offsets.push(offset);
        }
        let labels = graphs.iter().map(|g| g.label).collect();
        Ok(GraphBatch {
            features,
            edges,
            graph_of,
            labels,
            offsets,
        })
    }

    pub fn n_graphs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.features.nrows()
    }

    /// Node-id range of graph `g`.
    pub fn block(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    /// Recovers each graph's feature matrix.
    pub fn split(&self) -> Vec<Array2<f64>> {
        (0..self.n_graphs())
            .map(|g| self.features.slice(s![self.block(g), ..]).to_owned())
            .collect()
    }
}

/// Pools every (knowledge base, embeddings) pair and stacks the results.
pub fn assemble_batch(
    items: &[(KnowledgeBase, EmbeddingTable)],
    classes: &ClassIndex,
    dummy: DummyPolicy,
) -> Result<GraphBatch, T2gError> {
    if let Some((_, first)) = items.first() {
        if let Some((_, bad)) = items.iter().find(|(_, e)| e.dim() != first.dim()) {
            return Err(T2gError::DimMismatch {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
    }
    let graphs = items
        .iter()
        .map(|(kb, emb)| PooledGraph::from_kb(kb, emb, classes, dummy))
        .collect::<Result<Vec<_>, _>>()?;
    GraphBatch::from_graphs(&graphs)
}
