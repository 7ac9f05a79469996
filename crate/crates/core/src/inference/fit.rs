use super::dataset::{DataPoint, Features, Target, FEATURES, OUTPUTS};
use super::InferenceError;
use nalgebra::{Matrix3, Matrix3x2, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Ridge strength used when the design matrix is rank deficient.
pub const RIDGE_LAMBDA: f64 = 1e-8;

/// Eigenvalue ratio below which the normal matrix counts as singular.
const RANK_TOLERANCE: f64 = 1e-12;

/// Affine map from `(1, v_x/|v|, v_y/|v|)` to the normalized acceleration,
/// fitted to the points one hidden object explains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectModel {
    /// Row `o` holds the coefficients of output `o`.
    pub weights: [[f64; FEATURES]; OUTPUTS],
    pub n_points: usize,
    pub sse: f64,
    /// Per-output residual standard deviation (unbiased).
    pub residual_sigma: [f64; OUTPUTS],
    /// Set when the ridge fallback was needed.
    pub ridge: bool,
}

impl ObjectModel {
    pub fn predict(&self, f: &Features) -> Target {
        let row = |w: &[f64; FEATURES]| w.iter().zip(f).map(|(a, b)| a * b).sum();
        [row(&self.weights[0]), row(&self.weights[1])]
    }

    pub fn residual(&self, p: &DataPoint) -> Target {
        let y = self.predict(&p.features);
        [p.target[0] - y[0], p.target[1] - y[1]]
    }

    /// Squared residual norm of one point.
    pub fn sq_error(&self, p: &DataPoint) -> f64 {
        let r = self.residual(p);
        r[0] * r[0] + r[1] * r[1]
    }
}

/// Least-squares affine fit over `points[indices]`.
pub fn fit_object(points: &[DataPoint], indices: &[usize]) -> Result<ObjectModel, InferenceError> {
    if indices.is_empty() {
        return Err(InferenceError::TooFewPoints { got: 0, need: 1 });
    }
    let mut gram = Matrix3::<f64>::zeros();
    let mut cross = Matrix3x2::<f64>::zeros();
    for &i in indices {
        let p = &points[i];
        for a in 0..FEATURES {
            for b in 0..FEATURES {
                gram[(a, b)] += p.features[a] * p.features[b];
            }
            for o in 0..OUTPUTS {
                cross[(a, o)] += p.features[a] * p.target[o];
            }
        }
    }
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    let ridge = !(lo > RANK_TOLERANCE * hi);
    if ridge {
        gram += Matrix3::identity() * RIDGE_LAMBDA;
    }
    let coef = gram
        .cholesky()
        .ok_or_else(|| InferenceError::InvalidData("normal equations are not positive definite".into()))?
        .solve(&cross);
    let mut model = ObjectModel {
        weights: [
            [coef[(0, 0)], coef[(1, 0)], coef[(2, 0)]],
            [coef[(0, 1)], coef[(1, 1)], coef[(2, 1)]],
        ],
        n_points: indices.len(),
        sse: 0.0,
        residual_sigma: [0.0; OUTPUTS],
        ridge,
    };
    if model.weights.iter().flatten().any(|w| !w.is_finite()) {
        return Err(InferenceError::InvalidData("non-finite weights".into()));
    }
    let residuals: Vec<Target> = indices.iter().map(|&i| model.residual(&points[i])).collect();
    model.sse = residuals.iter().map(|r| r[0] * r[0] + r[1] * r[1]).sum();
    model.residual_sigma = residual_sigma(&residuals);
    Ok(model)
}

/// Unbiased per-output standard deviation; zero with fewer than two points.
pub fn residual_sigma(residuals: &[Target]) -> [f64; OUTPUTS] {
    let n = residuals.len() as f64;
    if residuals.len() < 2 {
        return [0.0; OUTPUTS];
    }
    let mut out = [0.0; OUTPUTS];
    for (o, slot) in out.iter_mut().enumerate() {
        let mean = residuals.iter().map(|r| r[o]).sum::<f64>() / n;
        let ss: f64 = residuals.iter().map(|r| (r[o] - mean).powi(2)).sum();
        *slot = (ss / (n - 1.0)).sqrt();
    }
    out
}
