use super::InferenceError;
use crate::world::{norm, Region, StateSample, Vec2};

/// Number of regression inputs: a constant plus the velocity heading.
pub const FEATURES: usize = 3;
/// Number of regression outputs: the normalized acceleration.
pub const OUTPUTS: usize = 2;

pub type Features = [f64; FEATURES];
pub type Target = [f64; OUTPUTS];

/// One fit-ready observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub features: Features,
    pub target: Target,
    pub t: u64,
    pub pos: Vec2,
    pub region_true: Region,
}

/// Maps a sample to `(1, v_x/|v|, v_y/|v|)` and `acc / a_mag_hat`; every
/// ground-truth law is affine in these features.
pub fn featurize(
    sample: &StateSample,
    a_mag_hat: f64,
    velocity_guard: f64,
) -> Result<(Features, Target), InferenceError> {
    let speed = norm(sample.vel);
    if speed <= velocity_guard {
        return Err(InferenceError::ZeroVelocity { t: sample.t });
    }
    Ok((
        [1.0, sample.vel[0] / speed, sample.vel[1] / speed],
        [sample.acc[0] / a_mag_hat, sample.acc[1] / a_mag_hat],
    ))
}

/// Mean acceleration magnitude over all samples.
pub fn estimate_a_mag(samples: &[StateSample]) -> f64 {
    samples.iter().map(|s| norm(s.acc)).sum::<f64>() / samples.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<DataPoint>,
    excluded: Vec<u64>,
    a_mag_hat: f64,
    ordered: bool,
}

impl Dataset {
    /// Featurizes a trajectory. Samples with speed at or below
    /// `velocity_guard` are left out and listed in [`Dataset::excluded`].
    pub fn from_samples(samples: &[StateSample], velocity_guard: f64) -> Result<Self, InferenceError> {
        if samples.is_empty() {
            return Err(InferenceError::EmptyDataset);
        }
        let a_mag_hat = estimate_a_mag(samples);
        if !(a_mag_hat > 0.0 && a_mag_hat.is_finite()) {
            return Err(InferenceError::InvalidData(format!(
                "mean acceleration magnitude is {a_mag_hat}"
            )));
        }
        let mut points = Vec::with_capacity(samples.len());
        let mut excluded = Vec::new();
        for s in samples {
            match featurize(s, a_mag_hat, velocity_guard) {
                Ok((features, target)) => points.push(DataPoint {
                    features,
                    target,
                    t: s.t,
                    pos: s.pos,
                    region_true: s.region_true,
                }),
                Err(_) => excluded.push(s.t),
            }
        }
        if points.is_empty() {
            return Err(InferenceError::EmptyDataset);
        }
        let ordered = samples.windows(2).all(|w| w[0].t < w[1].t);
        Ok(Self {
            points,
            excluded,
            a_mag_hat,
            ordered,
        })
    }

    /// Builds a dataset directly from fit-ready points.
    pub fn from_points(points: Vec<DataPoint>, a_mag_hat: f64) -> Result<Self, InferenceError> {
        if points.is_empty() {
            return Err(InferenceError::EmptyDataset);
        }
        let ordered = points.windows(2).all(|w| w[0].t < w[1].t);
        Ok(Self {
            points,
            excluded: Vec::new(),
            a_mag_hat,
            ordered,
        })
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self, InferenceError> {
        let points: Vec<DataPoint> = indices.iter().map(|&i| self.points[i].clone()).collect();
        let mut sub = Self::from_points(points, self.a_mag_hat)?;
        sub.ordered &= self.ordered;
        Ok(sub)
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Time indices of samples left out for having no usable heading.
    pub fn excluded(&self) -> &[u64] {
        &self.excluded
    }

    pub fn a_mag_hat(&self) -> f64 {
        self.a_mag_hat
    }

    /// Whether time indices strictly increase; transition statistics are
    /// only meaningful for ordered data.
    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    /// Pairs of row indices `(r, r + 1)` that are consecutive in time.
    pub fn successors(&self) -> impl Iterator<Item = usize> + '_ {
        let ordered = self.ordered;
        (0..self.points.len().saturating_sub(1))
            .filter(move |&r| ordered && self.points[r + 1].t == self.points[r].t + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{simulate, WorldConfig};

    fn sample(vel: Vec2, acc: Vec2) -> StateSample {
        StateSample {
            t: 0,
            pos: [0.5, 0.5],
            vel,
            acc,
            region_true: Region::Center,
        }
    }

    #[test]
    fn featurize_example() {
        let (f, y) = featurize(&sample([2.0, 0.0], [0.0, -1.0]), 1.0, 1e-8).unwrap();
        assert_eq!(f, [1.0, 1.0, 0.0]);
        assert_eq!(y, [0.0, -1.0]);
        assert!(matches!(
            featurize(&sample([0.0, 0.0], [0.0, 1.0]), 1.0, 1e-8),
            Err(InferenceError::ZeroVelocity { t: 0 })
        ));
    }

    #[test]
    fn simulated_targets_follow_the_laws() {
        let traj = simulate(&WorldConfig { n_steps: 3_000, ..Default::default() }).unwrap();
        let ds = Dataset::from_samples(&traj.samples, 1e-8).unwrap();
        assert!((ds.a_mag_hat() - 1.0).abs() < 1e-12);
        for p in ds.points() {
            match p.region_true {
                Region::Bottom => assert_eq!(p.target, [0.0, 1.0]),
                Region::Center => {
                    assert!((p.target[0] - p.features[2]).abs() < 1e-12);
                    assert!((p.target[1] + p.features[1]).abs() < 1e-12);
                }
                _ => {}
            }
        }
        assert!(ds.is_ordered());
        assert_eq!(ds.successors().count(), ds.len() - 1);
    }

    #[test]
    fn zero_speed_samples_are_excluded() {
        let mut samples = vec![
            sample([0.0, 0.0], [0.0, 1.0]),
            sample([0.0, 0.01], [1.0, 0.0]),
            sample([0.01, 0.0], [0.0, -1.0]),
        ];
        for (i, s) in samples.iter_mut().enumerate() {
            s.t = i as u64;
        }
        let ds = Dataset::from_samples(&samples, 1e-8).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.excluded(), &[0]);
    }

    #[test]
    fn shuffled_data_has_no_successors() {
        let traj = simulate(&WorldConfig { n_steps: 50, ..Default::default() }).unwrap();
        let mut samples = traj.samples.clone();
        samples.swap(3, 30);
        let ds = Dataset::from_samples(&samples, 1e-8).unwrap();
        assert!(!ds.is_ordered());
        assert_eq!(ds.successors().count(), 0);
    }
}
