use crate::error::{CliError, CliResult};
use crate::output::{Format, Formats, OutputDir, SimulateRun};
use crate::svg;
use cie_core::world::{simulate, write_csv, write_json, Region, Trajectory, WorldError};

pub fn world_error(e: WorldError) -> CliError {
    match e {
        WorldError::ZeroVelocityInCenter => CliError::invariant(e.to_string()),
        other => CliError::input(other.to_string()),
    }
}

pub fn execute(run: &SimulateRun, formats: &Formats, out: &mut OutputDir) -> CliResult<Trajectory> {
    run.world.validate().map_err(world_error)?;
    let traj = simulate(&run.world).map_err(world_error)?;
    if formats.has(Format::Csv) {
        let mut bytes = Vec::new();
        write_csv(&traj.samples, &mut bytes).map_err(|e| CliError::output(e.to_string()))?;
        out.write("trajectory.csv", &bytes)?;
    }
    if formats.has(Format::Json) {
        let mut bytes = Vec::new();
        write_json(&traj, &mut bytes).map_err(|e| CliError::output(e.to_string()))?;
        bytes.push(b'\n');
        out.write("trajectory.json", &bytes)?;
    }
    if formats.has(Format::Svg) {
        let points: Vec<_> = traj.samples.iter().map(|s| s.pos).collect();
        let labels: Vec<usize> = traj.samples.iter().map(|s| s.region_true.index()).collect();
        let legend: Vec<String> = Region::ALL.iter().map(|r| format!("region {}", r.number())).collect();
        let title = format!("trajectory, {} steps, seed {}", run.world.n_steps, run.world.seed);
        let doc = svg::labeled_map(&points, &labels, &traj.config, &title, &legend);
        out.write("trajectory.svg", doc.as_bytes())?;
    }
    Ok(traj)
}
