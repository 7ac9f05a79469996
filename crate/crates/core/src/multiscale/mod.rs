//! Zoom-in/zoom-out fixed-point iteration and a Game of Life engine whose
//! macro-objects (still lifes, oscillators, movers) serve as its demo.

mod extract;
mod grid;

pub use extract::{
    extract_objects, label_clusters, render, Cell, Cluster, MacroObject, ObjectKind, Phase, TrackEnd,
};
pub use grid::{life_step, patterns, run, LifeError, LifeGrid, Topology};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZizoState<X, Y> {
    /// Latest macro model; `None` only when no iteration ran.
    pub macro_model: Option<X>,
    pub micro_encoding: Y,
    pub converged: bool,
    pub iterations: usize,
}

/// Alternates `x = zoom_out(y)` and `y = zoom_in(x)` from `y0` until
/// `zoom_out(zoom_in(x))` equals `x` under `eq`, or `max_iters` round trips
/// have been made.
pub fn zizo<X, Y>(
    mut zoom_out: impl FnMut(&Y) -> X,
    mut zoom_in: impl FnMut(&X) -> Y,
    eq: impl Fn(&X, &X) -> bool,
    y0: Y,
    max_iters: usize,
) -> ZizoState<X, Y> {
    if max_iters == 0 {
        return ZizoState {
            macro_model: None,
            micro_encoding: y0,
            converged: false,
            iterations: 0,
        };
    }
    let mut x = zoom_out(&y0);
    let mut y = y0;
    for it in 1..=max_iters {
        y = zoom_in(&x);
        let next = zoom_out(&y);
        let same = eq(&next, &x);
        x = next;
        if same {
            return ZizoState {
                macro_model: Some(x),
                micro_encoding: y,
                converged: true,
                iterations: it,
            };
        }
    }
    ZizoState {
        macro_model: Some(x),
        micro_encoding: y,
        converged: false,
        iterations: max_iters,
    }
}

/// Frames together with their labeled clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroEncoding {
    pub frames: Vec<LifeGrid>,
    pub clusters: Vec<Vec<Cluster>>,
}

impl MicroEncoding {
    pub fn new(frames: Vec<LifeGrid>) -> Self {
        let clusters = frames.iter().map(label_clusters).collect();
        Self { frames, clusters }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeZizoOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub macro_model: Vec<MacroObject>,
    /// Whether rendering the final macro model reproduces every observed frame.
    pub explains_observed: bool,
}

/// Runs ZIZO on observed Life frames: zooming out extracts macro-objects,
/// zooming in renders their predicted footprints over the same window.
/// Macro models are compared by exact equality.
pub fn life_zizo(frames: &[LifeGrid], max_period: usize, max_iters: usize) -> Result<LifeZizoOutcome, LifeError> {
    let observed = extract_objects(frames, max_period)?;
    let template = frames[0].clone();
    let n = frames.len();
    let state = zizo(
        |y: &MicroEncoding| extract_objects(&y.frames, max_period).expect("frame window was validated"),
        |x: &Vec<MacroObject>| MicroEncoding::new(render(x, &template, n)),
        |a, b| a == b,
        MicroEncoding::new(frames.to_vec()),
        max_iters,
    );
    let macro_model = state.macro_model.unwrap_or(observed);
    let explains_observed = render(&macro_model, &template, n) == frames;
    Ok(LifeZizoOutcome {
        converged: state.converged,
        iterations: state.iterations,
        macro_model,
        explains_observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_pair_converges_in_one() {
        let s = zizo(|y: &i32| y * 2, |x: &i32| x / 2, |a, b| a == b, 21, 10);
        assert!(s.converged);
        assert_eq!(s.iterations, 1);
        assert_eq!(s.macro_model, Some(42));
        assert_eq!(s.micro_encoding, 21);
    }

    #[test]
    fn zero_iterations_returns_initial_state() {
        let s = zizo(|y: &i32| y * 2, |x: &i32| x / 2, |a, b| a == b, 7, 0);
        assert!(!s.converged);
        assert_eq!(s.macro_model, None);
        assert_eq!(s.micro_encoding, 7);
    }

    #[test]
    fn drifting_pair_does_not_converge() {
        let s = zizo(|y: &i32| y + 1, |x: &i32| *x, |a, b| a == b, 0, 5);
        assert!(!s.converged);
        assert_eq!(s.iterations, 5);
        assert_eq!(s.macro_model, Some(6));
    }

    #[test]
    fn glider_demo_converges_with_one_mover() {
        let p = LifeGrid::parse_plaintext(patterns::GLIDER, Topology::Torus).unwrap();
        let g = LifeGrid::embed(&p, 16, 16, 1, 1, Topology::Torus).unwrap();
        let out = life_zizo(&run(&g, 20), 4, 10).unwrap();
        assert!(out.converged && out.explains_observed);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.macro_model.len(), 1);
        assert_eq!(out.macro_model[0].kind, ObjectKind::Mover);
    }
}
