use crate::error::{CliError, CliResult};
use crate::output::{Format, Formats, InferRun, OutputDir};
use crate::simulate::world_error;
use crate::svg;
use cie_core::inference::{
    evaluate_against_truth, structure_learning_loop, Dataset, InferenceError, ModelDocument,
};
use cie_core::world::{import_trajectory, WorldConfig};

fn inference_error(e: InferenceError) -> CliError {
    match e {
        InferenceError::InvalidConfig { .. } | InferenceError::InvalidData(_) | InferenceError::ZeroVelocity { .. } => {
            CliError::input(e.to_string())
        }
        InferenceError::EmptyDataset | InferenceError::TooFewPoints { .. } | InferenceError::Invariant(_) => {
            CliError::invariant(e.to_string())
        }
    }
}

pub fn execute(run: &InferRun, formats: &Formats, out: &mut OutputDir) -> CliResult<ModelDocument> {
    run.inference.validate().map_err(inference_error)?;
    let samples = import_trajectory(&run.input)
        .map_err(|e| CliError::input(format!("{}: {}", run.input.display(), world_error(e))))?;
    let ds = Dataset::from_samples(&samples, run.inference.velocity_guard).map_err(inference_error)?;
    let outcome = structure_learning_loop(&ds, &run.inference).map_err(inference_error)?;
    if outcome.model.k() == 0 {
        return Err(CliError::invariant("inference produced an empty model"));
    }
    let recovery = evaluate_against_truth(&ds, &outcome.model);
    let doc = ModelDocument::new(&ds, &run.inference, &outcome, Some(recovery));
    if formats.has(Format::Json) {
        out.write_json("model.json", &doc)?;
    }
    if formats.has(Format::Csv) {
        let mut csv = String::from("t,x,y,object,region_true\n");
        for (p, a) in ds.points().iter().zip(&outcome.model.assignment) {
            csv.push_str(&format!("{},{},{},{},{}\n", p.t, p.pos[0], p.pos[1], a, p.region_true.number()));
        }
        out.write("assignment.csv", csv.as_bytes())?;
    }
    if formats.has(Format::Svg) {
        let k = outcome.model.k();
        let title = format!("object activation, {k} objects");
        out.write("activation.svg", svg::activation_timeline(&outcome.model.assignment, k, &title).as_bytes())?;
        let points: Vec<_> = ds.points().iter().map(|p| p.pos).collect();
        let legend: Vec<String> = (0..k).map(|i| format!("object {i}")).collect();
        let map_cfg = WorldConfig::default();
        let doc = svg::labeled_map(&points, &outcome.model.assignment, &map_cfg, "inferred object assignment", &legend);
        out.write("assignment_map.svg", doc.as_bytes())?;
    }
    Ok(doc)
}
