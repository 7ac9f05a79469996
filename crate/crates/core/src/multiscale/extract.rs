use super::grid::{LifeError, LifeGrid, Topology};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

pub type Cell = (i64, i64);

/// An 8-connected group of live cells. Coordinates are unwrapped, so a
/// cluster straddling a torus edge keeps its shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub cells: Vec<Cell>,
}

impl Cluster {
    fn corner(&self) -> Cell {
        let x = self.cells.iter().map(|c| c.0).min().unwrap_or(0);
        let y = self.cells.iter().map(|c| c.1).min().unwrap_or(0);
        (x, y)
    }

    /// Top-left corner of the bounding box, wrapped onto the grid.
    pub fn origin(&self, g: &LifeGrid) -> Cell {
        let (x, y) = self.corner();
        match g.wrap(x, y) {
            Some((x, y)) => (x as i64, y as i64),
            None => (x, y),
        }
    }

    /// Cells relative to the bounding-box corner, sorted.
    pub fn shape(&self) -> Vec<Cell> {
        let (ox, oy) = self.corner();
        let mut s: Vec<Cell> = self.cells.iter().map(|&(x, y)| (x - ox, y - oy)).collect();
        s.sort_unstable();
        s
    }

    fn wrapped(&self, g: &LifeGrid) -> BTreeSet<Cell> {
        self.cells
            .iter()
            .filter_map(|&(x, y)| g.wrap(x, y))
            .map(|(x, y)| (x as i64, y as i64))
            .collect()
    }

    fn dilated(&self, g: &LifeGrid) -> BTreeSet<Cell> {
        let mut out = BTreeSet::new();
        for &(x, y) in &self.cells {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some((wx, wy)) = g.wrap(x + dx, y + dy) {
                        out.insert((wx as i64, wy as i64));
                    }
                }
            }
        }
        out
    }
}

/// Labels the 8-connected live clusters of a grid, in row-major order of
/// their first cell.
pub fn label_clusters(g: &LifeGrid) -> Vec<Cluster> {
    let mut seen = vec![false; g.width() * g.height()];
    let mut clusters = Vec::new();
    for (sx, sy) in g.live_cells() {
        if seen[sy * g.width() + sx] {
            continue;
        }
        seen[sy * g.width() + sx] = true;
        let mut cells = Vec::new();
        let mut queue = VecDeque::from([(sx as i64, sy as i64)]);
        while let Some((x, y)) = queue.pop_front() {
            cells.push((x, y));
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if let Some((wx, wy)) = g.wrap(nx, ny) {
                        if g.get(wx, wy) && !seen[wy * g.width() + wx] {
                            seen[wy * g.width() + wx] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
        }
        cells.sort_unstable();
        clusters.push(Cluster { cells });
    }
    clusters
}

/// Shortest displacement from `a` to `b`, taking wraparound into account.
fn displacement(g: &LifeGrid, a: Cell, b: Cell) -> Cell {
    let d = (b.0 - a.0, b.1 - a.1);
    match g.topology() {
        Topology::Bounded => d,
        Topology::Torus => {
            let wrap = |v: i64, n: usize| {
                let n = n as i64;
                let v = v.rem_euclid(n);
                if v > n / 2 {
                    v - n
                } else {
                    v
                }
            };
            (wrap(d.0, g.width()), wrap(d.1, g.height()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    StillLife,
    Oscillator,
    Mover,
    Unknown,
}

/// Why a track stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackEnd {
    WindowEnd,
    Vanished,
    Merged,
    Split,
}

/// One phase of a periodic object, placed relative to the origin of its
/// first frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub offset: Cell,
    pub shape: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroObject {
    pub kind: ObjectKind,
    /// Live cells at `first_frame`, wrapped onto the grid.
    pub cells: Vec<Cell>,
    /// Zero for unknown objects.
    pub period: usize,
    pub displacement: Cell,
    pub origin: Cell,
    pub first_frame: usize,
    pub last_frame: usize,
    pub end: TrackEnd,
    /// One entry per generation of the period; empty for unknown objects.
    pub phases: Vec<Phase>,
}

impl MacroObject {
    /// Predicted live cells at `frame`, or `None` outside the object's
    /// lifetime or for unknown objects.
    pub fn footprint_at(&self, frame: usize, g: &LifeGrid) -> Option<Vec<(usize, usize)>> {
        if self.phases.is_empty() || frame < self.first_frame || frame > self.last_frame {
            return None;
        }
        let k = frame - self.first_frame;
        let (q, r) = ((k / self.period) as i64, k % self.period);
        let phase = &self.phases[r];
        let ox = self.origin.0 + phase.offset.0 + q * self.displacement.0;
        let oy = self.origin.1 + phase.offset.1 + q * self.displacement.1;
        let mut cells: Vec<(usize, usize)> = phase
            .shape
            .iter()
            .filter_map(|&(x, y)| g.wrap(ox + x, oy + y))
            .collect();
        cells.sort_unstable();
        Some(cells)
    }
}

struct Track {
    first_frame: usize,
    clusters: Vec<Cluster>,
    end: TrackEnd,
}

fn links(g: &LifeGrid, prev: &[Cluster], next: &[Cluster]) -> Vec<Vec<usize>> {
    let prev_sets: Vec<(BTreeSet<Cell>, BTreeSet<Cell>)> = prev.iter().map(|c| (c.wrapped(g), c.dilated(g))).collect();
    let next_sets: Vec<(BTreeSet<Cell>, BTreeSet<Cell>)> = next.iter().map(|c| (c.wrapped(g), c.dilated(g))).collect();
    prev_sets
        .iter()
        .map(|(a, da)| {
            next_sets
                .iter()
                .enumerate()
                .filter(|(_, (b, db))| {
                    let ab = b.intersection(da).count();
                    let ba = a.intersection(db).count();
                    2 * ab >= b.len() && 2 * ba >= a.len()
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

fn classify(g: &LifeGrid, track: &Track, max_period: usize) -> MacroObject {
    let first = &track.clusters[0];
    let origin = first.origin(g);
    let mut cells: Vec<Cell> = first.wrapped(g).into_iter().collect();
    cells.sort_unstable_by_key(|&(x, y)| (y, x));
    let shapes: Vec<Vec<Cell>> = track.clusters.iter().map(Cluster::shape).collect();
    let origins: Vec<Cell> = track.clusters.iter().map(|c| c.origin(g)).collect();
    let len = track.clusters.len();
    let mut found = None;
    for p in 1..=max_period.min(len.saturating_sub(1)) {
        let d = displacement(g, origins[0], origins[p]);
        let repeats = (0..len - p).all(|i| shapes[i + p] == shapes[i] && displacement(g, origins[i], origins[i + p]) == d);
        if repeats {
            found = Some((p, d));
            break;
        }
    }
    let base = MacroObject {
        kind: ObjectKind::Unknown,
        cells,
        period: 0,
        displacement: (0, 0),
        origin,
        first_frame: track.first_frame,
        last_frame: track.first_frame + len - 1,
        end: track.end,
        phases: Vec::new(),
    };
    let Some((period, d)) = found else { return base };
    let kind = match (d, period) {
        ((0, 0), 1) => ObjectKind::StillLife,
        ((0, 0), _) => ObjectKind::Oscillator,
        _ => ObjectKind::Mover,
    };
    let phases = (0..period)
        .map(|r| Phase {
            offset: displacement(g, origins[0], origins[r]),
            shape: shapes[r].clone(),
        })
        .collect();
    MacroObject {
        kind,
        period,
        displacement: d,
        phases,
        ..base
    }
}

fn check_frames(frames: &[LifeGrid], max_period: usize) -> Result<(), LifeError> {
    if frames.len() < max_period + 1 || frames.is_empty() {
        return Err(LifeError::TooFewFrames {
            got: frames.len(),
            need: (max_period + 1).max(1),
        });
    }
    let key = |g: &LifeGrid| (g.width(), g.height(), g.topology());
    let expected = key(&frames[0]);
    for (index, f) in frames.iter().enumerate() {
        if key(f) != expected {
            return Err(LifeError::FrameMismatch { index, got: key(f), expected });
        }
    }
    Ok(())
}

/// Finds persistent patterns in a frame sequence.
///
/// Clusters are linked between consecutive frames when at least half of each
/// lies within one cell of the other. A cluster with exactly one link in
/// each direction continues its track; merges and splits end every track
/// involved and start fresh ones. Each track is classified from its own
/// frames as the smallest period up to `max_period` at which its shape
/// recurs with a constant shift.
pub fn extract_objects(frames: &[LifeGrid], max_period: usize) -> Result<Vec<MacroObject>, LifeError> {
    check_frames(frames, max_period)?;
    let g = &frames[0];
    let mut tracks: Vec<Track> = Vec::new();
    let mut current = label_clusters(g);
    let mut active: Vec<usize> = (0..current.len())
        .map(|i| {
            tracks.push(Track {
                first_frame: 0,
                clusters: vec![current[i].clone()],
                end: TrackEnd::WindowEnd,
            });
            tracks.len() - 1
        })
        .collect();
    for (f, frame) in frames.iter().enumerate().skip(1) {
        let next = label_clusters(frame);
        let fwd = links(g, &current, &next);
        let mut back = vec![Vec::new(); next.len()];
        for (i, js) in fwd.iter().enumerate() {
            for &j in js {
                back[j].push(i);
            }
        }
        let mut next_active = vec![usize::MAX; next.len()];
        for (i, js) in fwd.iter().enumerate() {
            let t = active[i];
            match js.as_slice() {
                [] => tracks[t].end = TrackEnd::Vanished,
                [j] if back[*j].len() == 1 => {
                    tracks[t].clusters.push(next[*j].clone());
                    next_active[*j] = t;
                }
                [_] => tracks[t].end = TrackEnd::Merged,
                _ => tracks[t].end = TrackEnd::Split,
            }
        }
        for (j, slot) in next_active.iter_mut().enumerate() {
            if *slot == usize::MAX {
                tracks.push(Track {
                    first_frame: f,
                    clusters: vec![next[j].clone()],
                    end: TrackEnd::WindowEnd,
                });
                *slot = tracks.len() - 1;
            }
        }
        current = next;
        active = next_active;
    }
    Ok(tracks.iter().map(|t| classify(g, t, max_period)).collect())
}

/// Draws the predicted footprints of `objects` into `n_frames` blank grids
/// shaped like `template`.
pub fn render(objects: &[MacroObject], template: &LifeGrid, n_frames: usize) -> Vec<LifeGrid> {
    (0..n_frames)
        .map(|f| {
            let mut g = LifeGrid::new(template.width(), template.height(), template.topology())
                .expect("template has valid dimensions");
            for o in objects {
                for (x, y) in o.footprint_at(f, template).unwrap_or_default() {
                    g.set(x, y, true);
                }
            }
            g
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::grid::{patterns, run};
    use super::*;

    fn board(pattern: &str, size: usize, x: usize, y: usize) -> LifeGrid {
        let p = LifeGrid::parse_plaintext(pattern, Topology::Torus).unwrap();
        LifeGrid::embed(&p, size, size, x, y, Topology::Torus).unwrap()
    }

    #[test]
    fn glider_is_one_mover() {
        let frames = run(&board(patterns::GLIDER, 16, 1, 1), 20);
        let objs = extract_objects(&frames, 4).unwrap();
        assert_eq!(objs.len(), 1);
        let o = &objs[0];
        assert_eq!((o.kind, o.period, o.displacement), (ObjectKind::Mover, 4, (1, 1)));
        assert_eq!((o.first_frame, o.last_frame, o.end), (0, 20, TrackEnd::WindowEnd));
        assert_eq!(o.cells, vec![(2, 1), (3, 2), (1, 3), (2, 3), (3, 3)]);
    }

    #[test]
    fn glider_across_the_wrap_is_tracked() {
        let frames = run(&board(patterns::GLIDER, 8, 5, 5), 40);
        let objs = extract_objects(&frames, 4).unwrap();
        assert_eq!(objs.len(), 1);
        assert_eq!((objs[0].kind, objs[0].displacement), (ObjectKind::Mover, (1, 1)));
    }

    #[test]
    fn block_and_blinker() {
        let frames = run(&board(patterns::BLOCK, 8, 3, 3), 6);
        let objs = extract_objects(&frames, 4).unwrap();
        assert_eq!(objs.len(), 1);
        assert_eq!((objs[0].kind, objs[0].period, objs[0].displacement), (ObjectKind::StillLife, 1, (0, 0)));

        let frames = run(&board(patterns::BLINKER, 8, 3, 2), 6);
        let objs = extract_objects(&frames, 4).unwrap();
        assert_eq!(objs.len(), 1);
        assert_eq!((objs[0].kind, objs[0].period, objs[0].displacement), (ObjectKind::Oscillator, 2, (0, 0)));
    }

    #[test]
    fn separate_objects_are_separate_tracks() {
        let mut g = board(patterns::BLOCK, 16, 1, 1);
        for (x, y) in board(patterns::BLINKER, 16, 10, 10).live_cells() {
            g.set(x, y, true);
        }
        let objs = extract_objects(&run(&g, 8), 4).unwrap();
        let kinds: Vec<ObjectKind> = objs.iter().map(|o| o.kind).collect();
        assert_eq!(kinds, vec![ObjectKind::StillLife, ObjectKind::Oscillator]);
    }

    #[test]
    fn collision_ends_tracks_as_merged() {
        // Glider heading into a block.
        let mut g = board(patterns::GLIDER, 16, 1, 1);
        for (x, y) in board(patterns::BLOCK, 16, 6, 6).live_cells() {
            g.set(x, y, true);
        }
        let frames = run(&g, 30);
        let objs = extract_objects(&frames, 4).unwrap();
        let glider = objs.iter().find(|o| o.first_frame == 0 && o.kind == ObjectKind::Mover).unwrap();
        assert_eq!(glider.end, TrackEnd::Merged);
        assert!(glider.last_frame < 30);
    }

    #[test]
    fn extending_the_window_keeps_classifications() {
        let frames = run(&board(patterns::GLIDER, 16, 1, 1), 30);
        let short = extract_objects(&frames[..9], 4).unwrap();
        let long = extract_objects(&frames, 4).unwrap();
        assert_eq!(short[0].kind, long[0].kind);
        assert_eq!(short[0].phases, long[0].phases);
        let too_short = extract_objects(&frames[..4], 3).unwrap();
        assert_eq!(too_short[0].kind, ObjectKind::Unknown);
    }

    #[test]
    fn frame_checks() {
        let frames = run(&board(patterns::BLOCK, 8, 1, 1), 2);
        assert_eq!(
            extract_objects(&frames, 4),
            Err(LifeError::TooFewFrames { got: 3, need: 5 })
        );
        let mut mixed = run(&board(patterns::BLOCK, 8, 1, 1), 5);
        mixed[3] = board(patterns::BLOCK, 9, 1, 1);
        assert!(matches!(extract_objects(&mixed, 4), Err(LifeError::FrameMismatch { index: 3, .. })));
    }

    #[test]
    fn rendering_reproduces_frames() {
        let frames = run(&board(patterns::GLIDER, 16, 12, 3).translate(3, 0), 24);
        let objs = extract_objects(&frames, 4).unwrap();
        assert_eq!(render(&objs, &frames[0], frames.len()), frames);
    }
}
