use crate::error::{CliError, CliResult};
use crate::output::{Format, Formats, LifeRun, OutputDir};
use cie_core::multiscale::{extract_objects, life_zizo, run, LifeError, LifeGrid, LifeZizoOutcome, MacroObject, Topology};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeReport {
    pub spec_version: String,
    pub width: usize,
    pub height: usize,
    pub topology: Topology,
    pub generations: usize,
    pub population: Vec<usize>,
    pub objects: Vec<MacroObject>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zizo: Option<LifeZizoOutcome>,
}

fn life_error(e: LifeError) -> CliError {
    CliError::input(e.to_string())
}

/// Places `pattern` on an empty `width` by `height` board with its top-left
/// corner at (`x`, `y`) and returns the board in run-length encoding.
pub fn place(pattern: &str, width: usize, height: usize, x: usize, y: usize, topology: Topology) -> CliResult<String> {
    let p = LifeGrid::parse_pattern(pattern, topology).map_err(|e| CliError::input(format!("pattern: {e}")))?;
    let board = LifeGrid::embed(&p, width, height, x, y, topology).map_err(|e| CliError::input(format!("pattern: {e}")))?;
    Ok(board.to_rle())
}

pub fn execute(cfg: &LifeRun, formats: &Formats, out: &mut OutputDir) -> CliResult<LifeReport> {
    let start = LifeGrid::parse_rle(&cfg.board, cfg.topology).map_err(|e| CliError::input(format!("board: {e}")))?;
    let frames = run(&start, cfg.generations);
    let objects = extract_objects(&frames, cfg.max_period)
        .map_err(|e| CliError::input(format!("--generations/--max-period: {}", life_error(e))))?;
    let zizo = if cfg.zizo {
        Some(life_zizo(&frames, cfg.max_period, cfg.max_iters).map_err(life_error)?)
    } else {
        None
    };
    let report = LifeReport {
        spec_version: cie_core::SPEC_VERSION.into(),
        width: start.width(),
        height: start.height(),
        topology: cfg.topology,
        generations: cfg.generations,
        population: frames.iter().map(LifeGrid::population).collect(),
        objects,
        zizo,
    };
    let mut dump = String::new();
    for (i, f) in frames.iter().enumerate() {
        dump.push_str(&format!("!generation {i}\n"));
        dump.push_str(&f.to_plaintext());
    }
    out.write("frames.txt", dump.as_bytes())?;
    if formats.has(Format::Json) {
        out.write_json("life_report.json", &report)?;
    }
    if formats.has(Format::Csv) {
        let mut csv = String::from("object,kind,period,dx,dy,origin_x,origin_y,first_frame,last_frame,end\n");
        for (i, o) in report.objects.iter().enumerate() {
            let kind = serde_json::to_value(o.kind).map_err(|e| CliError::output(e.to_string()))?;
            let end = serde_json::to_value(o.end).map_err(|e| CliError::output(e.to_string()))?;
            csv.push_str(&format!(
                "{i},{},{},{},{},{},{},{},{},{}\n",
                kind.as_str().unwrap_or_default(),
                o.period,
                o.displacement.0,
                o.displacement.1,
                o.origin.0,
                o.origin.1,
                o.first_frame,
                o.last_frame,
                end.as_str().unwrap_or_default()
            ));
        }
        out.write("objects.csv", csv.as_bytes())?;
    }
    Ok(report)
}
