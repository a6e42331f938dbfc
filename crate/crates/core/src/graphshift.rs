//! Edge-labeled directed graphs and their conditional shift operators.
//!
//! A labeled edge `(src, dst, label)` contributes `|dst⟩⟨src| ⊗ |label⟩⟨label|`
//! to the shift. Nothing is added implicitly: a graph whose (vertex, label)
//! slots are not matched one-to-one compiles to a non-unitary operator, and
//! [`audit_shift`] says exactly where.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, SpaceShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: usize,
}

/// Directed graph with integer edge labels. Edge order is the insertion
/// order and is preserved by every transform in this module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct EdgeLabeledGraph {
    n_vertices: usize,
    n_labels: usize,
    edges: Vec<Edge>,
}

/// On-disk form: `{"n_vertices": 10, "n_labels": 3, "edges": [[src, dst, label], ...]}`.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n_vertices: usize,
    n_labels: usize,
    edges: Vec<[usize; 3]>,
}

impl TryFrom<GraphJson> for EdgeLabeledGraph {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        EdgeLabeledGraph::new(
            g.n_vertices,
            g.n_labels,
            g.edges.into_iter().map(|[s, d, l]| (s, d, l)),
        )
    }
}

impl From<EdgeLabeledGraph> for GraphJson {
    fn from(g: EdgeLabeledGraph) -> Self {
        GraphJson {
            n_vertices: g.n_vertices,
            n_labels: g.n_labels,
            edges: g.edges.iter().map(|e| [e.src, e.dst, e.label]).collect(),
        }
    }
}

impl EdgeLabeledGraph {
    pub fn new(
        n_vertices: usize,
        n_labels: usize,
        edges: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "graph needs at least one vertex",
            });
        }
        if n_labels == 0 {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "graph needs at least one label",
            });
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (src, dst, label) in edges {
            if src >= n_vertices || dst >= n_vertices || label >= n_labels {
                return Err(Error::EdgeOutOfRange {
                    src,
                    dst,
                    label,
                    n_vertices,
                    n_labels,
                });
            }
            if !seen.insert((src, dst, label)) {
                return Err(Error::DuplicateEdge { src, dst, label });
            }
            out.push(Edge { src, dst, label });
        }
        Ok(Self {
            n_vertices,
            n_labels,
            edges: out,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Shape of the space the shift acts on: `[n_vertices, n_labels]`.
    pub fn shape(&self) -> SpaceShape {
        SpaceShape::new(vec![self.n_vertices, self.n_labels]).expect("dims checked in new")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }
}

/// `Σ_edges |dst⟩⟨src| ⊗ |label⟩⟨label|` on `[n_vertices, n_labels]`.
pub fn build_shift(g: &EdgeLabeledGraph) -> OperatorMatrix {
    let shape = g.shape();
    let one = Complex64::new(1.0, 0.0);
    let entries = g.edges.iter().map(|e| {
        (
            e.dst * g.n_labels + e.label,
            e.src * g.n_labels + e.label,
            one,
        )
    });
    OperatorMatrix::from_entries(shape, entries).expect("edges checked in new")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftAudit {
    pub is_permutation: bool,
    /// (vertex, label) slots with no outgoing edge.
    pub missing: Vec<(usize, usize)>,
    /// (vertex, label) slots with two or more outgoing edges.
    pub colliding_out: Vec<(usize, usize)>,
    /// (vertex, label) slots with two or more incoming edges.
    pub colliding_in: Vec<(usize, usize)>,
    #[serde(serialize_with = "serialize_norms")]
    pub column_norms: BTreeMap<(usize, usize), f64>,
}

fn serialize_norms<S: Serializer>(
    norms: &BTreeMap<(usize, usize), f64>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        vertex: usize,
        label: usize,
        norm: f64,
    }
    serializer.collect_seq(norms.iter().map(|(&(vertex, label), &norm)| Entry {
        vertex,
        label,
        norm,
    }))
}

pub fn audit_shift(g: &EdgeLabeledGraph) -> ShiftAudit {
    let mut out_count = BTreeMap::new();
    let mut in_count = BTreeMap::new();
    for v in 0..g.n_vertices {
        for l in 0..g.n_labels {
            out_count.insert((v, l), 0usize);
            in_count.insert((v, l), 0usize);
        }
    }
    for e in &g.edges {
        *out_count.get_mut(&(e.src, e.label)).unwrap() += 1;
        *in_count.get_mut(&(e.dst, e.label)).unwrap() += 1;
    }
    let slots = |counts: &BTreeMap<(usize, usize), usize>, pred: fn(usize) -> bool| {
        counts
            .iter()
            .filter(|(_, &n)| pred(n))
            .map(|(&k, _)| k)
            .collect::<Vec<_>>()
    };
    let missing = slots(&out_count, |n| n == 0);
    let colliding_out = slots(&out_count, |n| n > 1);
    let colliding_in = slots(&in_count, |n| n > 1);
    let column_norms = out_count
        .iter()
        .map(|(&k, &n)| (k, (n as f64).sqrt()))
        .collect();
    ShiftAudit {
        is_permutation: missing.is_empty() && colliding_out.is_empty() && colliding_in.is_empty(),
        missing,
        colliding_out,
        colliding_in,
        column_norms,
    }
}

/// Which of the two printed shift listings to transcribe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaperVariant {
    Original,
    Rearranged,
}

impl fmt::Display for PaperVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaperVariant::Original => "original",
            PaperVariant::Rearranged => "rearranged",
        })
    }
}

impl FromStr for PaperVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(PaperVariant::Original),
            "rearranged" => Ok(PaperVariant::Rearranged),
            other => Err(Error::UnknownBuiltin(other.to_string())),
        }
    }
}

/// The 10-vertex, 3-label cycled-path graph, in listing order.
pub fn paper_graph(variant: PaperVariant) -> EdgeLabeledGraph {
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    edges.extend((0..=7).map(|m| (m, m + 1, 0)));
    edges.extend((1..=7).map(|m| (m, m - 1, 1)));
    match variant {
        PaperVariant::Original => edges.extend([
            (1, 8, 2),
            (8, 1, 1),
            (8, 3, 2),
            (3, 8, 1),
            (4, 9, 2),
            (9, 4, 1),
            (6, 9, 1),
            (9, 6, 2),
        ]),
        PaperVariant::Rearranged => edges.extend([
            (8, 1, 1),
            (3, 8, 1),
            (9, 4, 1),
            (6, 9, 1),
            (1, 8, 2),
            (8, 3, 2),
            (4, 9, 2),
            (9, 6, 2),
            (5, 4, 2),
            (6, 5, 2),
            (3, 2, 2),
            (2, 1, 2),
        ]),
    }
    EdgeLabeledGraph::new(10, 3, edges).expect("static listing is well formed")
}

fn check_min_vertices(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidDimension {
            dim: n,
            reason: "need at least 2 vertices",
        })
    } else {
        Ok(())
    }
}

/// N-cycle: label 0 steps `i → i+1`, label 1 steps `i → i−1` (mod N).
pub fn cycle_graph(n: usize) -> Result<EdgeLabeledGraph> {
    check_min_vertices(n)?;
    let forward = (0..n).map(|i| (i, (i + 1) % n, 0));
    let backward = (0..n).map(|i| (i, (i + n - 1) % n, 1));
    EdgeLabeledGraph::new(n, 2, forward.chain(backward))
}

/// N-path: label 0 steps right, label 1 steps left, with a self-loop at each
/// endpoint on the label that would otherwise leave the path.
///
/// A label-preserving shift cannot be a permutation on a path, so the
/// endpoint self-loops collide with the path's last in-edges and the audit
/// reports `colliding_in` at both ends.
pub fn path_graph(n: usize) -> Result<EdgeLabeledGraph> {
    check_min_vertices(n)?;
    let mut edges: Vec<(usize, usize, usize)> = (0..n - 1).map(|i| (i, i + 1, 0)).collect();
    edges.extend((1..n).map(|i| (i, i - 1, 1)));
    edges.push((n - 1, n - 1, 0));
    edges.push((0, 0, 1));
    EdgeLabeledGraph::new(n, 2, edges)
}

/// Greedily keeps edges in listing order, dropping any edge whose outgoing
/// or incoming (vertex, label) slot is already taken.
pub fn drop_colliding_edges(g: &EdgeLabeledGraph) -> EdgeLabeledGraph {
    let mut out_used = BTreeSet::new();
    let mut in_used = BTreeSet::new();
    let edges = g
        .edges
        .iter()
        .filter(|e| {
            let free = !out_used.contains(&(e.src, e.label)) && !in_used.contains(&(e.dst, e.label));
            if free {
                out_used.insert((e.src, e.label));
                in_used.insert((e.dst, e.label));
            }
            free
        })
        .copied()
        .collect();
    EdgeLabeledGraph {
        n_vertices: g.n_vertices,
        n_labels: g.n_labels,
        edges,
    }
}

/// Adds edges until every (vertex, label) slot has exactly one outgoing and
/// one incoming edge. Per label, each open chain `s → … → t` is closed with
/// `t → s`; an isolated slot becomes a self-loop. Existing edges are never
/// removed, so graphs with collisions are rejected.
pub fn complete_to_permutation(g: &EdgeLabeledGraph) -> Result<EdgeLabeledGraph> {
    let audit = audit_shift(g);
    if !audit.colliding_out.is_empty() || !audit.colliding_in.is_empty() {
        return Err(Error::Collisions {
            out: audit.colliding_out,
            incoming: audit.colliding_in,
        });
    }
    let mut edges = g.edges.clone();
    for label in 0..g.n_labels {
        let mut pred = vec![None; g.n_vertices];
        let mut has_out = vec![false; g.n_vertices];
        for e in g.edges.iter().filter(|e| e.label == label) {
            pred[e.dst] = Some(e.src);
            has_out[e.src] = true;
        }
        for tail in (0..g.n_vertices).filter(|&v| !has_out[v]) {
            let mut head = tail;
            while let Some(p) = pred[head] {
                head = p;
            }
            edges.push(Edge {
                src: tail,
                dst: head,
                label,
            });
        }
    }
    Ok(EdgeLabeledGraph {
        n_vertices: g.n_vertices,
        n_labels: g.n_labels,
        edges,
    })
}

/// Rearranged listing with its collisions dropped, then completed.
pub fn completed_paper_graph() -> EdgeLabeledGraph {
    complete_to_permutation(&drop_colliding_edges(&paper_graph(PaperVariant::Rearranged)))
        .expect("collisions were dropped")
}

/// Graph choice for the built-in 10-vertex scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftVariant {
    Original,
    Rearranged,
    Completed,
}

impl ShiftVariant {
    pub const ALL: [ShiftVariant; 3] = [
        ShiftVariant::Original,
        ShiftVariant::Rearranged,
        ShiftVariant::Completed,
    ];

    pub fn graph(self) -> EdgeLabeledGraph {
        match self {
            ShiftVariant::Original => paper_graph(PaperVariant::Original),
            ShiftVariant::Rearranged => paper_graph(PaperVariant::Rearranged),
            ShiftVariant::Completed => completed_paper_graph(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShiftVariant::Original => "original",
            ShiftVariant::Rearranged => "rearranged",
            ShiftVariant::Completed => "completed",
        }
    }
}

impl fmt::Display for ShiftVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShiftVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShiftVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownBuiltin(s.to_string()))
    }
}

/// Resolves `paper:original`, `paper:rearranged`, `paper:completed`,
/// `cycle:N` and `path:N`.
pub fn builtin_graph(name: &str) -> Result<EdgeLabeledGraph> {
    let unknown = || Error::UnknownBuiltin(name.to_string());
    let (family, arg) = name.split_once(':').ok_or_else(unknown)?;
    match family {
        "paper" => Ok(arg.parse::<ShiftVariant>().map_err(|_| unknown())?.graph()),
        "cycle" => cycle_graph(arg.parse().map_err(|_| unknown())?),
        "path" => path_graph(arg.parse().map_err(|_| unknown())?),
        _ => Err(unknown()),
    }
}
