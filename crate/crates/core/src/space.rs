//! Cell-based DAG search space: operation catalog, per-edge candidate sets,
//! size arithmetic and the pruning mutation.
//!
//! A network is a stack of `v` cells. Each cell is a fully-connected DAG over
//! one input node (node 0, the previous cell's output) and `M` intermediate
//! nodes; the directed edge `(i, j)` with `i < j` carries one operation drawn
//! from that edge's candidate set. With all candidate sets at cardinality `K`
//! the space holds `K^(M(M+1)/2 * v)` genotypes.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// The candidate operations. Declaration order is the stable catalog index
/// (0..8) used by serialization, sampling order and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OperationKind {
    #[serde(rename = "max_pool_3x3")]
    MaxPool3x3,
    #[serde(rename = "avg_pool_3x3")]
    AvgPool3x3,
    #[serde(rename = "skip_connect")]
    SkipConnect,
    #[serde(rename = "dil_conv_3x3")]
    DilConv3x3,
    #[serde(rename = "dil_conv_5x5")]
    DilConv5x5,
    #[serde(rename = "sep_conv_3x3")]
    SepConv3x3,
    #[serde(rename = "sep_conv_5x5")]
    SepConv5x5,
    #[serde(rename = "gabor_3x3")]
    Gabor3x3,
    #[serde(rename = "denoise")]
    Denoise,
}

impl OperationKind {
    /// Full catalog in stable index order.
    pub const ALL: [OperationKind; 9] = [
        OperationKind::MaxPool3x3,
        OperationKind::AvgPool3x3,
        OperationKind::SkipConnect,
        OperationKind::DilConv3x3,
        OperationKind::DilConv5x5,
        OperationKind::SepConv3x3,
        OperationKind::SepConv5x5,
        OperationKind::Gabor3x3,
        OperationKind::Denoise,
    ];

    /// Stable integer index, 0..8.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<OperationKind> {
        OperationKind::ALL.get(index).copied()
    }

    /// Stable serialization name.
    pub fn name(self) -> &'static str {
        match self {
            OperationKind::MaxPool3x3 => "max_pool_3x3",
            OperationKind::AvgPool3x3 => "avg_pool_3x3",
            OperationKind::SkipConnect => "skip_connect",
            OperationKind::DilConv3x3 => "dil_conv_3x3",
            OperationKind::DilConv5x5 => "dil_conv_5x5",
            OperationKind::SepConv3x3 => "sep_conv_3x3",
            OperationKind::SepConv5x5 => "sep_conv_5x5",
            OperationKind::Gabor3x3 => "gabor_3x3",
            OperationKind::Denoise => "denoise",
        }
    }

    pub fn from_name(name: &str) -> Option<OperationKind> {
        OperationKind::ALL.iter().copied().find(|op| op.name() == name)
    }
}

impl fmt::Display for OperationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One directed edge of one cell. `from < to` keeps the cell acyclic; node 0
/// is the cell input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub cell: usize,
    pub from: usize,
    pub to: usize,
}

impl EdgeId {
    pub fn new(cell: usize, from: usize, to: usize) -> EdgeId {
        EdgeId { cell, from, to }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell {} edge ({}, {})", self.cell, self.from, self.to)
    }
}

/// Immutable snapshot of the search space: per-edge ordered candidate sets.
/// Pruning produces a new snapshot; concurrent readers are safe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    cells: usize,
    nodes: usize,
    catalog: Vec<OperationKind>,
    candidates: BTreeMap<EdgeId, Vec<OperationKind>>,
}

impl SearchSpace {
    /// Builds a space of `cells` cells with `nodes` intermediate nodes each;
    /// every edge starts with the full `catalog` (kept in catalog-index order).
    pub fn new(cells: usize, nodes: usize, catalog: &[OperationKind]) -> Result<SearchSpace> {
        if cells == 0 {
            return Err(Error::Config("cell count must be at least 1".into()));
        }
        if nodes == 0 {
            return Err(Error::Config("intermediate node count must be at least 1".into()));
        }
        if catalog.is_empty() {
            return Err(Error::Config("operation catalog must not be empty".into()));
        }
        let mut ordered = catalog.to_vec();
        ordered.sort();
        ordered.dedup();
        if ordered.len() != catalog.len() {
            return Err(Error::Config("operation catalog contains duplicates".into()));
        }
        let mut candidates = BTreeMap::new();
        for cell in 0..cells {
            for to in 1..=nodes {
                for from in 0..to {
                    candidates.insert(EdgeId::new(cell, from, to), ordered.clone());
                }
            }
        }
        Ok(SearchSpace { cells, nodes, catalog: ordered, candidates })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// The initial catalog, in stable index order.
    pub fn catalog(&self) -> &[OperationKind] {
        &self.catalog
    }

    /// Edges in canonical order: by cell, then (from, to) lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.candidates.keys().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.candidates.len()
    }

    /// Edges per cell: 1 + 2 + ... + M.
    pub fn edges_per_cell(&self) -> usize {
        self.nodes * (self.nodes + 1) / 2
    }

    /// Current candidate set of an edge, ordered by catalog index.
    pub fn candidates(&self, edge: EdgeId) -> Result<&[OperationKind]> {
        self.candidates
            .get(&edge)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::NotFound(format!("{edge} is not part of this space")))
    }

    /// Number of genotypes: the product of candidate-set sizes over all edges.
    pub fn size(&self) -> BigUint {
        let mut size = BigUint::from(1u32);
        for ops in self.candidates.values() {
            size *= BigUint::from(ops.len());
        }
        size
    }

    /// Removes `op` from `edge`'s candidate set, leaving every other edge
    /// untouched. Fails if `op` is not a candidate or would be the last one.
    pub fn prune(&self, edge: EdgeId, op: OperationKind) -> Result<SearchSpace> {
        let ops = self.candidates(edge)?;
        let position = ops.iter().position(|&o| o == op).ok_or_else(|| {
            Error::NotFound(format!("{op} is not a candidate on {edge}"))
        })?;
        if ops.len() < 2 {
            return Err(Error::Invariant(format!(
                "cannot remove the last candidate ({op}) from {edge}"
            )));
        }
        let mut next = self.clone();
        next.candidates.get_mut(&edge).expect("edge exists").remove(position);
        Ok(next)
    }

    /// True iff `genotype` assigns exactly one in-set operation to every edge.
    pub fn is_valid_genotype(&self, genotype: &Genotype) -> bool {
        if genotype.len() != self.candidates.len() {
            return false;
        }
        genotype.iter().all(|(edge, op)| {
            self.candidates.get(&edge).is_some_and(|ops| ops.contains(&op))
        })
    }

    /// When every edge holds a single candidate, that unique genotype.
    pub fn sole_genotype(&self) -> Option<Genotype> {
        let mut choices = BTreeMap::new();
        for (&edge, ops) in &self.candidates {
            match ops.as_slice() {
                [only] => {
                    choices.insert(edge, *only);
                }
                _ => return None,
            }
        }
        Some(Genotype { choices })
    }

    pub(crate) fn from_parts(
        cells: usize,
        nodes: usize,
        catalog: Vec<OperationKind>,
        candidates: BTreeMap<EdgeId, Vec<OperationKind>>,
    ) -> SearchSpace {
        SearchSpace { cells, nodes, catalog, candidates }
    }
}

/// Convenience constructor matching the full-catalog setup.
pub fn build_search_space(cells: usize, nodes: usize) -> Result<SearchSpace> {
    SearchSpace::new(cells, nodes, &OperationKind::ALL)
}

/// One chosen operation per edge per cell; the search's output artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genotype {
    choices: BTreeMap<EdgeId, OperationKind>,
}

impl Genotype {
    pub fn new(choices: BTreeMap<EdgeId, OperationKind>) -> Genotype {
        Genotype { choices }
    }

    pub fn get(&self, edge: EdgeId) -> Option<OperationKind> {
        self.choices.get(&edge).copied()
    }

    /// Choices in canonical edge order.
    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, OperationKind)> + '_ {
        self.choices.iter().map(|(&e, &o)| (e, o))
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Number of cells spanned (1 + highest cell index; 0 when empty).
    pub fn cell_count(&self) -> usize {
        self.choices.keys().map(|e| e.cell + 1).max().unwrap_or(0)
    }

    /// Deterministic FNV-1a style hash, independent of the std hasher.
    pub fn stable_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |byte: u64| {
            h ^= byte;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        for (edge, op) in self.iter() {
            mix(edge.cell as u64);
            mix(edge.from as u64);
            mix(edge.to as u64);
            mix(op.index() as u64);
        }
        h
    }

    /// Serializes to the interchange document
    /// `{"cells":[{"edges":[{"from":0,"to":1,"op":"gabor_3x3"},...]},...]}`.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GenotypeDoc::from(self)).expect("genotype serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Genotype> {
        let doc: GenotypeDoc = serde_json::from_str(text)?;
        doc.into_genotype()
    }
}

/// Interchange form of [`Genotype`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenotypeDoc {
    pub cells: Vec<CellDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellDoc {
    pub edges: Vec<EdgeChoiceDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeChoiceDoc {
    pub from: usize,
    pub to: usize,
    pub op: OperationKind,
}

impl From<&Genotype> for GenotypeDoc {
    fn from(genotype: &Genotype) -> GenotypeDoc {
        let mut cells: Vec<CellDoc> = Vec::new();
        cells.resize_with(genotype.cell_count(), || CellDoc { edges: Vec::new() });
        for (edge, op) in genotype.iter() {
            cells[edge.cell].edges.push(EdgeChoiceDoc { from: edge.from, to: edge.to, op });
        }
        GenotypeDoc { cells }
    }
}

impl GenotypeDoc {
    pub fn into_genotype(self) -> Result<Genotype> {
        let mut choices = BTreeMap::new();
        for (cell, doc) in self.cells.into_iter().enumerate() {
            for e in doc.edges {
                if e.from >= e.to {
                    return Err(Error::InvalidArgument(format!(
                        "edge ({}, {}) in cell {cell} violates from < to",
                        e.from, e.to
                    )));
                }
                let edge = EdgeId::new(cell, e.from, e.to);
                if choices.insert(edge, e.op).is_some() {
                    return Err(Error::InvalidArgument(format!("duplicate edge {edge}")));
                }
            }
        }
        Ok(Genotype { choices })
    }
}

// Serialize the runtime type through the interchange document so that
// checkpoints and summaries embed the same shape as genotype.json.
impl Serialize for Genotype {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GenotypeDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Genotype {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Genotype, D::Error> {
        let doc = GenotypeDoc::deserialize(deserializer)?;
        doc.into_genotype().map_err(serde::de::Error::custom)
    }
}
