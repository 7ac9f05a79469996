use crate::error::{CliError, CliResult};
use cie_core::graph::{CutObjective, GraphSpec};
use cie_core::inference::InferenceConfig;
use cie_core::multiscale::Topology;
use cie_core::world::WorldConfig;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formats(pub Vec<Format>);

impl Formats {
    pub fn new(mut list: Vec<Format>) -> Self {
        list.sort();
        list.dedup();
        Self(list)
    }

    pub fn has(&self, f: Format) -> bool {
        self.0.contains(&f)
    }
}

/// Which blocks a graph demo reports, as 1-based node lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockChoice {
    All,
    Blocks(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDemoRun {
    pub graph: GraphSpec,
    pub blocks: BlockChoice,
    pub find_bipartition: bool,
    pub objective: CutObjective,
    pub max_exhaustive_n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRun {
    pub world: WorldConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferRun {
    pub input: PathBuf,
    pub inference: InferenceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeRun {
    /// Starting board in run-length encoding.
    pub board: String,
    pub topology: Topology,
    pub generations: usize,
    pub max_period: usize,
    pub zizo: bool,
    pub max_iters: usize,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    GraphDemo(GraphDemoRun),
    Simulate(SimulateRun),
    Infer(InferRun),
    Life(LifeRun),
}

impl RunConfig {
    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::GraphDemo(r) => Some(r.seed),
            RunConfig::Simulate(r) => Some(r.world.seed),
            RunConfig::Infer(r) => Some(r.inference.seed),
            RunConfig::Life(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec_version: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub formats: Formats,
    pub run: RunConfig,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("manifest {}: {e}", path.display())))?;
        if m.spec_version != cie_core::SPEC_VERSION {
            return Err(CliError::input(format!(
                "manifest spec_version {} does not match {}",
                m.spec_version,
                cie_core::SPEC_VERSION
            )));
        }
        Ok(m)
    }
}

/// Output directory whose files are written through a temporary file and
/// renamed into place.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::output(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        let fail = |e: std::io::Error| CliError::output(format!("cannot write {}: {e}", path.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(fail)?;
        tmp.write_all(bytes).map_err(fail)?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file()
                .set_permissions(std::fs::Permissions::from_mode(0o644))
                .map_err(fail)?;
        }
        tmp.persist(&path).map_err(|e| fail(e.error))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(mut self, formats: &Formats, run: RunConfig) -> CliResult<Vec<String>> {
        let manifest = Manifest {
            spec_version: cie_core::SPEC_VERSION.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: run.seed(),
            formats: formats.clone(),
            run,
            outputs: self.written.clone(),
        };
        self.write_json(MANIFEST_FILE, &manifest)?;
        Ok(self.written)
    }
}
