//! Entropy accounting for random graphs with independent Bernoulli edges.
//!
//! A graph on `n` nodes has `n(n+1)/2` independent edge slots (self-loops
//! included). Partitioning the nodes splits the adjacency matrix into
//! within-block and cross-block sections; because the slots are independent
//! the section entropies always add back up to the graph entropy.

use crate::entropy::{bernoulli_entropy, Unit};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_EXHAUSTIVE_N: usize = 16;

/// Cross entropies closer than this are considered tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    PartitionMismatch { partition: usize, graph: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unknown block {0}")]
    UnknownBlock(usize),
    #[error("exhaustive search over {n} nodes exceeds the cap of {cap}")]
    TooLargeForExhaustive { n: usize, cap: usize },
    #[error("bipartition needs at least two nodes")]
    TooSmall,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> GraphError {
    GraphError::InvalidField {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Symmetric matrix of per-slot edge probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbabilityGraph {
    n: usize,
    p: Vec<f64>,
}

impl EdgeProbabilityGraph {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        let n = p.len();
        if n == 0 {
            return Err(invalid("n", "graph must have at least one node"));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(
                    format!("p[{i}]"),
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid(format!("p[{i}][{j}]"), format!("{v} outside [0, 1]")));
                }
            }
            flat.extend_from_slice(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if flat[i * n + j] != flat[j * n + i] {
                    return Err(invalid(
                        format!("p[{i}][{j}]"),
                        format!("not symmetric with p[{j}][{i}]"),
                    ));
                }
            }
        }
        Ok(Self { n, p: flat })
    }

    pub fn uniform(n: usize, p: f64) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(invalid("n", "graph must have at least one node"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("uniform_p", format!("{p} outside [0, 1]")));
        }
        Ok(Self {
            n,
            p: vec![p; n * n],
        })
    }

    /// Two planted communities: `first` nodes in block A, the rest in block B.
    pub fn planted(n: usize, first: usize, p_in: f64, p_cross: f64) -> Result<Self, GraphError> {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if (i < first) == (j < first) { p_in } else { p_cross })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    /// Number of independent edge variables, `n(n+1)/2`.
    pub fn slot_count(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    fn slot_bits(&self, i: usize, j: usize) -> f64 {
        bernoulli_entropy(self.prob(i, j), Unit::Bits).expect("validated probability")
    }

    /// Per-slot entropies in bits (upper triangle filled, symmetric).
    fn slot_entropy_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.slot_bits(i, j);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        h
    }
}

/// JSON description of a graph: either a full matrix or a uniform probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Matrix { n: usize, p: Vec<Vec<f64>> },
    Uniform { n: usize, uniform_p: f64 },
}

impl GraphSpec {
    pub fn build(&self) -> Result<EdgeProbabilityGraph, GraphError> {
        match self {
            GraphSpec::Matrix { n, p } => {
                if p.len() != *n {
                    return Err(invalid("p", format!("has {} rows but n = {n}", p.len())));
                }
                EdgeProbabilityGraph::new(p.clone())
            }
            GraphSpec::Uniform { n, uniform_p } => EdgeProbabilityGraph::uniform(*n, *uniform_p),
        }
    }

    /// Parses and validates a graph document, naming the offending field on
    /// failure.
    pub fn parse(json: &str) -> Result<EdgeProbabilityGraph, GraphError> {
        let value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| invalid("<document>", e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| invalid("<document>", "expected a JSON object"))?;
        let n = obj
            .get("n")
            .ok_or_else(|| invalid("n", "missing"))?
            .as_u64()
            .ok_or_else(|| invalid("n", "expected a non-negative integer"))? as usize;
        match (obj.get("p"), obj.get("uniform_p")) {
            (Some(p), None) => {
                let p: Vec<Vec<f64>> = serde_json::from_value(p.clone())
                    .map_err(|e| invalid("p", format!("expected a matrix of numbers: {e}")))?;
                GraphSpec::Matrix { n, p }.build()
            }
            (None, Some(u)) => {
                let u = u
                    .as_f64()
                    .ok_or_else(|| invalid("uniform_p", "expected a number"))?;
                GraphSpec::Uniform { n, uniform_p: u }.build()
            }
            (Some(_), Some(_)) => Err(invalid("p", "give either `p` or `uniform_p`, not both")),
            (None, None) => Err(invalid("p", "missing (or give `uniform_p`)")),
        }
    }
}

/// Assignment of nodes to blocks `0..k`; every block is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePartition {
    block_of: Vec<usize>,
    blocks: usize,
}

impl NodePartition {
    pub fn new(block_of: Vec<usize>) -> Result<Self, GraphError> {
        if block_of.is_empty() {
            return Err(GraphError::InvalidPartition("no nodes".into()));
        }
        let blocks = block_of.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; blocks];
        for &b in &block_of {
            seen[b] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(GraphError::InvalidPartition(format!("block {empty} is empty")));
        }
        Ok(Self { block_of, blocks })
    }

    pub fn single(n: usize) -> Result<Self, GraphError> {
        Self::new(vec![0; n])
    }

    /// Builds a partition from explicit node lists; every node of `0..n` must
    /// appear exactly once.
    pub fn from_blocks(blocks: &[Vec<usize>], n: usize) -> Result<Self, GraphError> {
        let mut block_of = vec![usize::MAX; n];
        for (b, nodes) in blocks.iter().enumerate() {
            for &node in nodes {
                if node >= n {
                    return Err(GraphError::PartitionMismatch {
                        partition: node + 1,
                        graph: n,
                    });
                }
                if block_of[node] != usize::MAX {
                    return Err(GraphError::InvalidPartition(format!(
                        "node {node} assigned twice"
                    )));
                }
                block_of[node] = b;
            }
        }
        if let Some(missing) = block_of.iter().position(|b| *b == usize::MAX) {
            return Err(GraphError::InvalidPartition(format!("node {missing} unassigned")));
        }
        Self::new(block_of)
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn node_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn members(&self, block: usize) -> Vec<usize> {
        (0..self.block_of.len())
            .filter(|&i| self.block_of[i] == block)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntropy {
    pub block: usize,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropy {
    pub blocks: (usize, usize),
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntropyReport {
    pub within_block: Vec<BlockEntropy>,
    pub cross_block: Vec<CrossEntropy>,
    pub total: f64,
}

impl BlockEntropyReport {
    pub fn within(&self, block: usize) -> Option<f64> {
        self.within_block
            .iter()
            .find(|b| b.block == block)
            .map(|b| b.bits)
    }

    pub fn cross(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.cross_block
            .iter()
            .find(|c| c.blocks == key)
            .map(|c| c.bits)
    }

    pub fn cross_total(&self) -> f64 {
        self.cross_block.iter().map(|c| c.bits).sum()
    }
}

/// Sum of Bernoulli entropies over the independent slots `i <= j`, in bits.
pub fn graph_entropy(g: &EdgeProbabilityGraph) -> f64 {
    let n = g.n();
    (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| g.slot_bits(i, j))
        .sum()
}

pub fn block_entropies(
    g: &EdgeProbabilityGraph,
    part: &NodePartition,
) -> Result<BlockEntropyReport, GraphError> {
    if part.node_count() != g.n() {
        return Err(GraphError::PartitionMismatch {
            partition: part.node_count(),
            graph: g.n(),
        });
    }
    let k = part.block_count();
    let mut within = vec![0.0; k];
    let mut cross = vec![0.0; k * k];
    let blocks = part.block_of();
    for i in 0..g.n() {
        for j in i..g.n() {
            let h = g.slot_bits(i, j);
            let (a, b) = (blocks[i].min(blocks[j]), blocks[i].max(blocks[j]));
            if a == b {
                within[a] += h;
            } else {
                cross[a * k + b] += h;
            }
        }
    }
    let within_block: Vec<BlockEntropy> = within
        .iter()
        .enumerate()
        .map(|(block, &bits)| BlockEntropy { block, bits })
        .collect();
    let cross_block: Vec<CrossEntropy> = (0..k)
        .flat_map(|a| ((a + 1)..k).map(move |b| (a, b)))
        .map(|(a, b)| CrossEntropy {
            blocks: (a, b),
            bits: cross[a * k + b],
        })
        .collect();
    let total = within.iter().sum::<f64>() + cross_block.iter().map(|c| c.bits).sum::<f64>();
    Ok(BlockEntropyReport {
        within_block,
        cross_block,
        total,
    })
}

/// Entropy of one block recovered through the chain rule,
/// `H(target) = H(G) - H(all other sections)`; the other sections are
/// independent of the target so their joint entropy is their sum.
pub fn conditional_block_entropy(
    g: &EdgeProbabilityGraph,
    part: &NodePartition,
    target_block: usize,
) -> Result<f64, GraphError> {
    if target_block >= part.block_count() {
        return Err(GraphError::UnknownBlock(target_block));
    }
    let report = block_entropies(g, part)?;
    let rest: f64 = report
        .within_block
        .iter()
        .filter(|b| b.block != target_block)
        .map(|b| b.bits)
        .sum::<f64>()
        + report.cross_total();
    Ok(graph_entropy(g) - rest)
}

/// What a bipartition search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutObjective {
    /// Mean entropy per cross-block slot: a split is good when the slots it
    /// cuts are nearly deterministic, whatever their number.
    #[default]
    MeanSlotEntropy,
    /// Total cross-block entropy `H(B)`; favours cutting off few slots.
    TotalEntropy,
}

/// [`best_bipartition_by`] with the default [`CutObjective`].
pub fn best_bipartition(
    g: &EdgeProbabilityGraph,
    max_exhaustive_n: usize,
) -> Result<(NodePartition, BlockEntropyReport), GraphError> {
    best_bipartition_by(g, max_exhaustive_n, CutObjective::default())
}

/// Exhaustive search over all `2^(n-1) - 1` nontrivial two-block splits.
/// Node 0 is pinned to block 0 so each split is visited once; ties go to the
/// lexicographically smallest assignment vector.
pub fn best_bipartition_by(
    g: &EdgeProbabilityGraph,
    max_exhaustive_n: usize,
    objective: CutObjective,
) -> Result<(NodePartition, BlockEntropyReport), GraphError> {
    let n = g.n();
    if n < 2 {
        return Err(GraphError::TooSmall);
    }
    if n > max_exhaustive_n {
        return Err(GraphError::TooLargeForExhaustive {
            n,
            cap: max_exhaustive_n,
        });
    }
    let h = g.slot_entropy_matrix();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1..(1u64 << (n - 1)) {
        let blocks = bipartition_assignment(n, mask);
        let mut cross = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                if blocks[i] != blocks[j] {
                    cross += h[i * n + j];
                }
            }
        }
        let score = match objective {
            CutObjective::TotalEntropy => cross,
            CutObjective::MeanSlotEntropy => {
                let size = blocks.iter().filter(|&&b| b == 1).count();
                cross / (size * (n - size)) as f64
            }
        };
        let better = match &best {
            None => true,
            Some((b, bb)) => {
                score < b - TIE_TOLERANCE || ((score - b).abs() <= TIE_TOLERANCE && blocks < *bb)
            }
        };
        if better {
            best = Some((score, blocks));
        }
    }
    let (_, blocks) = best.expect("n >= 2 yields at least one split");
    let part = NodePartition::new(blocks)?;
    let report = block_entropies(g, &part)?;
    Ok((part, report))
}

/// Block assignment for split number `mask`: bit `i - 1` places node `i` in
/// block 1; node 0 is always in block 0.
pub fn bipartition_assignment(n: usize, mask: u64) -> Vec<usize> {
    (0..n)
        .map(|i| usize::from(i > 0 && mask >> (i - 1) & 1 == 1))
        .collect()
}

/// Mean Bernoulli entropy of the slots crossing a two-block partition.
pub fn mean_cross_slot_entropy(report: &BlockEntropyReport, part: &NodePartition) -> f64 {
    let size = part.members(1).len();
    report.cross_total() / (size * (part.node_count() - size)) as f64
}

/// Draws one realization: each slot `i <= j` is an independent Bernoulli draw
/// in row-major order, mirrored to `(j, i)`.
pub fn sample_graph(g: &EdgeProbabilityGraph, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    sample_with(g, &mut rng)
}

fn sample_with<R: Rng>(g: &EdgeProbabilityGraph, rng: &mut R) -> Vec<Vec<u8>> {
    let n = g.n();
    let mut adj = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in i..n {
            let edge = u8::from(rng.random::<f64>() < g.prob(i, j));
            adj[i][j] = edge;
            adj[j][i] = edge;
        }
    }
    adj
}

/// Many realizations from one seeded stream.
pub fn sample_graphs(g: &EdgeProbabilityGraph, seed: u64, count: usize) -> Vec<Vec<Vec<u8>>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| sample_with(g, &mut rng)).collect()
}
