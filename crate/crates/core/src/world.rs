//! Seeded simulator of a ball moving under four hidden motion laws.
//!
//! The square map holds a central disk (Region 1) where the ball turns with
//! constant-magnitude acceleration perpendicular to its velocity, and three
//! 120-degree sectors (Regions 2-4) with fixed acceleration directions that
//! each point back toward the centre.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub type Vec2 = [f64; 2];

/// CSV header of an exported trajectory.
pub const CSV_COLUMNS: [&str; 8] = ["t", "x", "y", "vx", "vy", "ax", "ay", "region_true"];

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("zero velocity in the central region: direction is undefined")]
    ZeroVelocityInCenter,
    #[error("region must be 1..=4, got {0}")]
    InvalidRegion(u8),
    #[error("trajectory schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Region {
    Center = 1,
    Bottom = 2,
    UpperLeft = 3,
    UpperRight = 4,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Center, Region::Bottom, Region::UpperLeft, Region::UpperRight];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Zero-based index, `number() - 1`.
    pub fn index(self) -> usize {
        self as usize - 1
    }
}

impl TryFrom<u8> for Region {
    type Error = WorldError;

    fn try_from(v: u8) -> Result<Self, WorldError> {
        match v {
            1 => Ok(Region::Center),
            2 => Ok(Region::Bottom),
            3 => Ok(Region::UpperLeft),
            4 => Ok(Region::UpperRight),
            other => Err(WorldError::InvalidRegion(other)),
        }
    }
}

impl From<Region> for u8 {
    fn from(r: Region) -> u8 {
        r.number()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub map_size: f64,
    /// Defaults to the middle of the map when absent.
    pub center: Option<Vec2>,
    pub r_center: f64,
    pub a_mag: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub v0_mag: f64,
    pub seed: u64,
    /// Speeds at or below this leave the central law undefined.
    pub velocity_guard: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            map_size: 1.0,
            center: None,
            r_center: 0.25,
            a_mag: 1.0,
            dt: 0.01,
            n_steps: 20_000,
            v0_mag: 0.01,
            seed: 42,
            velocity_guard: 1e-8,
        }
    }
}

impl WorldConfig {
    pub fn center(&self) -> Vec2 {
        self.center
            .unwrap_or([self.map_size / 2.0, self.map_size / 2.0])
    }

    /// Copy with every defaulted field made explicit.
    pub fn resolved(&self) -> Self {
        Self {
            center: Some(self.center()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |field, reason: String| Err(WorldError::InvalidConfig { field, reason });
        if !(self.map_size > 0.0 && self.map_size.is_finite()) {
            return bad("map_size", format!("{} must be positive", self.map_size));
        }
        if !(self.a_mag > 0.0 && self.a_mag.is_finite()) {
            return bad("a_mag", format!("{} must be positive", self.a_mag));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("{} must be positive", self.dt));
        }
        if !(self.r_center > 0.0 && self.r_center < self.map_size / 2.0) {
            return bad(
                "r_center",
                format!("{} must lie in (0, map_size/2)", self.r_center),
            );
        }
        if !(self.v0_mag >= 0.0 && self.v0_mag.is_finite()) {
            return bad("v0_mag", format!("{} must be non-negative", self.v0_mag));
        }
        if !(self.velocity_guard >= 0.0) {
            return bad("velocity_guard", format!("{} must be non-negative", self.velocity_guard));
        }
        if let Some(c) = self.center {
            if !c.iter().all(|v| v.is_finite()) {
                return bad("center", "must be finite".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub t: u64,
    pub pos: Vec2,
    pub vel: Vec2,
    pub acc: Vec2,
    pub region_true: Region,
}

impl StateSample {
    /// One-hot indicator of the active hidden law.
    pub fn activation_true(&self) -> [u8; 4] {
        let mut a = [0; 4];
        a[self.region_true.index()] = 1;
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: WorldConfig,
    pub samples: Vec<StateSample>,
}

pub fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

pub fn region_of(pos: Vec2, cfg: &WorldConfig) -> Region {
    let c = cfg.center();
    let d = [pos[0] - c[0], pos[1] - c[1]];
    if norm(d) <= cfg.r_center {
        return Region::Center;
    }
    let mut theta = d[1].atan2(d[0]).to_degrees();
    if theta < 0.0 {
        theta += 360.0;
    }
    if (210.0..330.0).contains(&theta) {
        Region::Bottom
    } else if (90.0..210.0).contains(&theta) {
        Region::UpperLeft
    } else {
        Region::UpperRight
    }
}

/// Unit acceleration direction of each edge region.
pub fn edge_direction(region: Region) -> Option<Vec2> {
    let half_root3 = 3f64.sqrt() / 2.0;
    match region {
        Region::Center => None,
        Region::Bottom => Some([0.0, 1.0]),
        Region::UpperLeft => Some([half_root3, -0.5]),
        Region::UpperRight => Some([-half_root3, -0.5]),
    }
}

/// The hidden law of `region`. In the centre the direction is `v x k`,
/// i.e. `(v_y, -v_x) / |v|`, undefined when `|v| <= guard`.
pub fn acceleration(vel: Vec2, region: Region, a_mag: f64, guard: f64) -> Result<Vec2, WorldError> {
    match edge_direction(region) {
        Some(d) => Ok([a_mag * d[0], a_mag * d[1]]),
        None => {
            let speed = norm(vel);
            if speed <= guard {
                return Err(WorldError::ZeroVelocityInCenter);
            }
            Ok([a_mag * vel[1] / speed, -a_mag * vel[0] / speed])
        }
    }
}

/// Runs the world from a seeded random start: position uniform on the map,
/// heading uniform on the circle.
pub fn simulate(cfg: &WorldConfig) -> Result<Trajectory, WorldError> {
    cfg.validate()?;
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let pos = [
        cfg.map_size * rng.random::<f64>(),
        cfg.map_size * rng.random::<f64>(),
    ];
    let heading = 2.0 * PI * rng.random::<f64>();
    let vel = [cfg.v0_mag * heading.cos(), cfg.v0_mag * heading.sin()];
    simulate_from(cfg, pos, vel)
}

/// Runs the world from an explicit initial state with semi-implicit Euler:
/// `v += a dt`, then `x += v dt`.
pub fn simulate_from(cfg: &WorldConfig, pos0: Vec2, vel0: Vec2) -> Result<Trajectory, WorldError> {
    cfg.validate()?;
    let mut pos = pos0;
    let mut vel = vel0;
    let mut last_dir: Vec2 = [0.0, 1.0];
    let mut samples = Vec::with_capacity(cfg.n_steps);
    for t in 0..cfg.n_steps {
        let region = region_of(pos, cfg);
        let acc = match acceleration(vel, region, cfg.a_mag, cfg.velocity_guard) {
            Ok(a) => a,
            Err(_) => [cfg.a_mag * last_dir[0], cfg.a_mag * last_dir[1]],
        };
        last_dir = [acc[0] / cfg.a_mag, acc[1] / cfg.a_mag];
        samples.push(StateSample {
            t: t as u64,
            pos,
            vel,
            acc,
            region_true: region,
        });
        vel = [vel[0] + acc[0] * cfg.dt, vel[1] + acc[1] * cfg.dt];
        pos = [pos[0] + vel[0] * cfg.dt, pos[1] + vel[1] * cfg.dt];
    }
    Ok(Trajectory {
        config: cfg.resolved(),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryFormat {
    Csv,
    Json,
}

/// Flat record shared by the CSV and JSON encodings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    t: u64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    ax: f64,
    ay: f64,
    region_true: u8,
}

impl From<&StateSample> for Row {
    fn from(s: &StateSample) -> Self {
        Row {
            t: s.t,
            x: s.pos[0],
            y: s.pos[1],
            vx: s.vel[0],
            vy: s.vel[1],
            ax: s.acc[0],
            ay: s.acc[1],
            region_true: s.region_true.number(),
        }
    }
}

impl TryFrom<Row> for StateSample {
    type Error = WorldError;

    fn try_from(r: Row) -> Result<Self, WorldError> {
        Ok(StateSample {
            t: r.t,
            pos: [r.x, r.y],
            vel: [r.vx, r.vy],
            acc: [r.ax, r.ay],
            region_true: Region::try_from(r.region_true)?,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTrajectory {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<WorldConfig>,
    samples: Vec<Row>,
}

pub fn write_csv<W: Write>(samples: &[StateSample], out: W) -> Result<(), WorldError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for s in samples {
        w.serialize(Row::from(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(traj: &Trajectory, out: W) -> Result<(), WorldError> {
    let doc = JsonTrajectory {
        config: Some(traj.config.clone()),
        samples: traj.samples.iter().map(Row::from).collect(),
    };
    serde_json::to_writer(out, &doc)?;
    Ok(())
}

pub fn export_trajectory(
    traj: &Trajectory,
    path: &Path,
    format: TrajectoryFormat,
) -> Result<(), WorldError> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        TrajectoryFormat::Csv => write_csv(&traj.samples, file),
        TrajectoryFormat::Json => write_json(traj, file),
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<StateSample>, WorldError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != CSV_COLUMNS {
        return Err(WorldError::Schema(format!(
            "expected columns {}, found {}",
            CSV_COLUMNS.join(","),
            found.join(",")
        )));
    }
    r.deserialize::<Row>()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(|e| WorldError::Schema(format!("data row {}: {e}", i + 1)))?;
            StateSample::try_from(row)
        })
        .collect()
}

/// Reads a JSON trajectory; the embedded config is returned when present.
pub fn read_json<R: Read>(input: R) -> Result<(Option<WorldConfig>, Vec<StateSample>), WorldError> {
    let doc: JsonTrajectory =
        serde_json::from_reader(input).map_err(|e| WorldError::Schema(e.to_string()))?;
    let samples = doc
        .samples
        .into_iter()
        .map(StateSample::try_from)
        .collect::<Result<_, _>>()?;
    Ok((doc.config, samples))
}

/// Reads a trajectory file, choosing the decoder by extension (`.json`,
/// anything else is CSV).
pub fn import_trajectory(path: &Path) -> Result<Vec<StateSample>, WorldError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => Ok(read_json(file)?.1),
        _ => read_csv(file),
    }
}
