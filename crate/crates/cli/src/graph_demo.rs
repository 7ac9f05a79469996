use crate::error::{CliError, CliResult};
use crate::output::{BlockChoice, Format, Formats, GraphDemoRun, OutputDir};
use crate::svg;
use cie_core::graph::{
    best_bipartition_by, block_entropies, conditional_block_entropy, graph_entropy, mean_cross_slot_entropy,
    sample_graph, BlockEntropyReport, CutObjective, EdgeProbabilityGraph, GraphSpec, NodePartition,
};
use serde::{Deserialize, Serialize};

/// Eight nodes, every slot present with probability one half.
pub fn paper_example() -> GraphSpec {
    GraphSpec::Uniform { n: 8, uniform_p: 0.5 }
}

/// Parses `all` or comma-separated blocks of 1-based nodes, where a block is
/// a `+`-joined list of nodes or ranges: `1-4,5-8`, `1+3,2+4`.
pub fn parse_blocks(text: &str) -> CliResult<BlockChoice> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("all") {
        return Ok(BlockChoice::All);
    }
    let bad = |why: String| CliError::input(format!("--blocks {text:?}: {why}"));
    let node = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| bad(format!("{s:?} is not a node number (nodes count from 1)")))
    };
    let mut blocks = Vec::new();
    for block in text.split(',') {
        let mut nodes = Vec::new();
        for item in block.split('+') {
            match item.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (node(a)?, node(b)?);
                    if a > b {
                        return Err(bad(format!("range {a}-{b} is reversed")));
                    }
                    nodes.extend(a..=b);
                }
                None => nodes.push(node(item)?),
            }
        }
        blocks.push(nodes);
    }
    Ok(BlockChoice::Blocks(blocks))
}

fn partition(choice: &BlockChoice, n: usize) -> CliResult<NodePartition> {
    match choice {
        BlockChoice::All => NodePartition::single(n),
        BlockChoice::Blocks(blocks) => {
            let mut seen = vec![false; n];
            for &v in blocks.iter().flatten() {
                if v == 0 || v > n {
                    return Err(CliError::input(format!("--blocks: node {v} is outside 1..={n}")));
                }
                if std::mem::replace(&mut seen[v - 1], true) {
                    return Err(CliError::input(format!("--blocks: node {v} appears twice")));
                }
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(CliError::input(format!("--blocks: node {} is in no block", missing + 1)));
            }
            let zero_based: Vec<Vec<usize>> = blocks.iter().map(|b| b.iter().map(|v| v - 1).collect()).collect();
            NodePartition::from_blocks(&zero_based, n)
        }
    }
    .map_err(|e| CliError::input(format!("--blocks: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockLine {
    pub block: usize,
    pub nodes: Vec<usize>,
    pub bits: f64,
    /// The same value recovered as `H(G)` minus every other section.
    pub conditional_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossLine {
    pub blocks: (usize, usize),
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartitionLine {
    pub objective: CutObjective,
    pub blocks: Vec<Vec<usize>>,
    pub cross_bits: f64,
    pub mean_cross_slot_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub spec_version: String,
    pub n: usize,
    pub slots: usize,
    pub graph_entropy_bits: f64,
    pub blocks: Vec<BlockLine>,
    pub cross: Vec<CrossLine>,
    pub block_total_bits: f64,
    /// Whether the sections add back up to the graph entropy within 1e-9.
    pub conserved: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bipartition: Option<BipartitionLine>,
}

fn one_based(part: &NodePartition) -> Vec<Vec<usize>> {
    (0..part.block_count())
        .map(|b| part.members(b).into_iter().map(|v| v + 1).collect())
        .collect()
}

fn describe(g: &EdgeProbabilityGraph, part: &NodePartition, report: &BlockEntropyReport) -> CliResult<(Vec<BlockLine>, Vec<CrossLine>)> {
    let nodes = one_based(part);
    let blocks = report
        .within_block
        .iter()
        .map(|b| {
            Ok(BlockLine {
                block: b.block + 1,
                nodes: nodes[b.block].clone(),
                bits: b.bits,
                conditional_bits: conditional_block_entropy(g, part, b.block)
                    .map_err(|e| CliError::invariant(e.to_string()))?,
            })
        })
        .collect::<CliResult<_>>()?;
    let cross = report
        .cross_block
        .iter()
        .map(|c| CrossLine {
            blocks: (c.blocks.0 + 1, c.blocks.1 + 1),
            bits: c.bits,
        })
        .collect();
    Ok((blocks, cross))
}

pub fn build_report(run: &GraphDemoRun) -> CliResult<(GraphReport, EdgeProbabilityGraph, NodePartition)> {
    let g = run.graph.build().map_err(|e| CliError::input(e.to_string()))?;
    let part = partition(&run.blocks, g.n())?;
    let report = block_entropies(&g, &part).map_err(|e| CliError::input(e.to_string()))?;
    let h = graph_entropy(&g);
    let (blocks, cross) = describe(&g, &part, &report)?;
    let mut shaded = part.clone();
    let bipartition = if run.find_bipartition {
        let (best, best_report) = best_bipartition_by(&g, run.max_exhaustive_n, run.objective)
            .map_err(|e| CliError::input(format!("--find-bipartition: {e}")))?;
        let line = BipartitionLine {
            objective: run.objective,
            blocks: one_based(&best),
            cross_bits: best_report.cross_total(),
            mean_cross_slot_bits: mean_cross_slot_entropy(&best_report, &best),
        };
        shaded = best;
        Some(line)
    } else {
        None
    };
    let report = GraphReport {
        spec_version: cie_core::SPEC_VERSION.into(),
        n: g.n(),
        slots: g.slot_count(),
        graph_entropy_bits: h,
        blocks,
        cross,
        block_total_bits: report.total,
        conserved: (report.total - h).abs() <= 1e-9,
        bipartition,
    };
    Ok((report, g, shaded))
}

pub fn execute(run: &GraphDemoRun, formats: &Formats, out: &mut OutputDir) -> CliResult<GraphReport> {
    let (report, g, shaded) = build_report(run)?;
    if !report.conserved {
        return Err(CliError::invariant(format!(
            "sections sum to {} bits but the graph holds {}",
            report.block_total_bits, report.graph_entropy_bits
        )));
    }
    if formats.has(Format::Json) {
        out.write_json("graph_report.json", &report)?;
    }
    if formats.has(Format::Csv) {
        let mut csv = String::from("section,nodes,bits\n");
        for b in &report.blocks {
            let nodes: Vec<String> = b.nodes.iter().map(usize::to_string).collect();
            csv.push_str(&format!("A{},{},{}\n", b.block, nodes.join(" "), b.bits));
        }
        for c in &report.cross {
            csv.push_str(&format!("B{}{},,{}\n", c.blocks.0, c.blocks.1, c.bits));
        }
        csv.push_str(&format!("total,,{}\n", report.block_total_bits));
        out.write("graph_blocks.csv", csv.as_bytes())?;
    }
    if formats.has(Format::Svg) {
        let sample = sample_graph(&g, run.seed);
        let title = format!("sampled adjacency, n = {}, seed {}", g.n(), run.seed);
        out.write("adjacency.svg", svg::adjacency(&sample, &shaded, &title).as_bytes())?;
    }
    Ok(report)
}
