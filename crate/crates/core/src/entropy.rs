//! Entropy primitives: discrete Shannon entropy, Bernoulli edge entropy,
//! Gaussian-fit differential entropy, state surprisal and the weighted
//! object/affordance sum (CIE).
//!
//! Everything is computed in nats internally. Operations that accept a
//! [`Unit`] convert at the boundary.

use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2, PI};
use thiserror::Error;

/// Absolute tolerance on the sum of a probability vector.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Standard deviations at or below this are treated as an exact fit.
pub const DEGENERATE_SIGMA: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("invalid probability vector: {0}")]
    InvalidProbabilityVector(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("state probability {0} outside (0, 1]")]
    SurprisalOutOfRange(f64),
    #[error("sample set: {0}")]
    InvalidSamples(String),
    #[error("coefficient list length {coefficients} does not match entropy list length {entropies}")]
    CoefficientMismatch { coefficients: usize, entropies: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bits,
    #[default]
    Nats,
}

impl Unit {
    /// Converts a value in nats into this unit.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            Unit::Bits => nats / LN_2,
            Unit::Nats => nats,
        }
    }

    /// Converts a value in this unit into nats.
    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            Unit::Bits => value * LN_2,
            Unit::Nats => value,
        }
    }
}

/// A validated discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self, EntropyError> {
        if probs.is_empty() {
            return Err(EntropyError::InvalidProbabilityVector("empty".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(EntropyError::InvalidProbabilityVector(format!(
                "entry {bad} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(EntropyError::InvalidProbabilityVector(format!(
                "entries sum to {sum}"
            )));
        }
        Ok(Self(probs))
    }

    /// Normalizes non-negative counts into a distribution.
    pub fn from_counts(counts: &[f64]) -> Result<Self, EntropyError> {
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) || counts.iter().any(|c| *c < 0.0) {
            return Err(EntropyError::InvalidProbabilityVector(
                "counts must be non-negative with a positive total".into(),
            ));
        }
        Self::new(counts.iter().map(|c| c / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self, EntropyError> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
fn plogp_nats(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

pub fn shannon_entropy(p: &ProbabilityVector, unit: Unit) -> f64 {
    unit.from_nats(p.as_slice().iter().map(|&pi| plogp_nats(pi)).sum())
}

pub fn bernoulli_entropy(p: f64, unit: Unit) -> Result<f64, EntropyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EntropyError::ProbabilityOutOfRange(p));
    }
    Ok(unit.from_nats(plogp_nats(p) + plogp_nats(1.0 - p)))
}

/// Entropy of a single state as `-p_s ln p_s`. A zero probability means the
/// state is outside the model and is rejected.
pub fn state_surprisal(p_s: f64) -> Result<f64, EntropyError> {
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(EntropyError::SurprisalOutOfRange(p_s));
    }
    Ok(plogp_nats(p_s))
}

/// Non-empty list of equal-dimension real vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<Vec<f64>>,
    dim: usize,
}

impl SampleSet {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self, EntropyError> {
        let dim = values
            .first()
            .map(Vec::len)
            .ok_or_else(|| EntropyError::InvalidSamples("empty".into()))?;
        if dim == 0 {
            return Err(EntropyError::InvalidSamples("zero-dimensional samples".into()));
        }
        if values.iter().any(|v| v.len() != dim) {
            return Err(EntropyError::InvalidSamples("mixed sample dimensions".into()));
        }
        Ok(Self { values, dim })
    }

    /// Builds a one-dimensional sample set.
    pub fn scalar(values: &[f64]) -> Result<Self, EntropyError> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Unbiased per-dimension standard deviations.
    pub fn std_devs(&self) -> Vec<f64> {
        let n = self.values.len() as f64;
        (0..self.dim)
            .map(|d| {
                let mean = self.values.iter().map(|v| v[d]).sum::<f64>() / n;
                let ss: f64 = self.values.iter().map(|v| (v[d] - mean).powi(2)).sum();
                (ss / (n - 1.0)).sqrt()
            })
            .collect()
    }
}

/// Result of a differential entropy estimate.
///
/// When any dimension has (numerically) zero spread the estimate is the
/// negative-infinity sentinel and `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferentialEntropy {
    #[serde(with = "extended_real")]
    pub nats: f64,
    pub degenerate: bool,
}

impl DifferentialEntropy {
    /// The estimate with each standard deviation floored at
    /// [`DEGENERATE_SIGMA`]; always finite.
    pub fn from_sigmas(sigmas: &[f64]) -> Self {
        if sigmas.iter().any(|s| *s <= DEGENERATE_SIGMA) {
            Self {
                nats: f64::NEG_INFINITY,
                degenerate: true,
            }
        } else {
            Self {
                nats: gaussian_entropy_nats(sigmas),
                degenerate: false,
            }
        }
    }
}

/// `sum_d 1/2 ln(2 pi e sigma_d^2)`.
pub fn gaussian_entropy_nats(sigmas: &[f64]) -> f64 {
    sigmas
        .iter()
        .map(|s| 0.5 * (2.0 * PI * E * s * s).ln())
        .sum()
}

/// Same as [`gaussian_entropy_nats`] with every sigma floored at
/// [`DEGENERATE_SIGMA`]; used wherever a finite comparison is required.
pub fn floored_gaussian_entropy_nats(sigmas: &[f64]) -> f64 {
    let floored: Vec<f64> = sigmas.iter().map(|s| s.max(DEGENERATE_SIGMA)).collect();
    gaussian_entropy_nats(&floored)
}

/// Differential entropy (nats) of a Gaussian moment fit to the samples.
pub fn differential_entropy_gaussian_fit(
    samples: &SampleSet,
) -> Result<DifferentialEntropy, EntropyError> {
    if samples.len() < 2 {
        return Err(EntropyError::InvalidSamples(
            "at least two samples are required".into(),
        ));
    }
    Ok(DifferentialEntropy::from_sigmas(&samples.std_devs()))
}

/// Entropy terms of one system: object self-entropies and pairwise coupling
/// entropies, each with its weighting coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CieTerms {
    pub object_entropies: Vec<(String, f64)>,
    pub coupling_entropies: Vec<(String, f64)>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub unit: Unit,
}

impl CieTerms {
    /// Terms with every coefficient set to one.
    pub fn unweighted(
        object_entropies: Vec<(String, f64)>,
        coupling_entropies: Vec<(String, f64)>,
        unit: Unit,
    ) -> Self {
        let c = vec![1.0; object_entropies.len()];
        let d = vec![1.0; coupling_entropies.len()];
        Self {
            object_entropies,
            coupling_entropies,
            c,
            d,
            unit,
        }
    }
}

/// Weighted sum of object and coupling entropies, in the unit of `terms`.
///
/// A term with a zero coefficient contributes nothing even when its entropy
/// is the degenerate sentinel.
pub fn cie_total(terms: &CieTerms) -> Result<f64, EntropyError> {
    if terms.c.len() != terms.object_entropies.len() {
        return Err(EntropyError::CoefficientMismatch {
            coefficients: terms.c.len(),
            entropies: terms.object_entropies.len(),
        });
    }
    if terms.d.len() != terms.coupling_entropies.len() {
        return Err(EntropyError::CoefficientMismatch {
            coefficients: terms.d.len(),
            entropies: terms.coupling_entropies.len(),
        });
    }
    let weighted = |w: f64, h: f64| if w == 0.0 { 0.0 } else { w * h };
    let objects: f64 = terms
        .c
        .iter()
        .zip(&terms.object_entropies)
        .map(|(w, (_, h))| weighted(*w, *h))
        .sum();
    let couplings: f64 = terms
        .d
        .iter()
        .zip(&terms.coupling_entropies)
        .map(|(w, (_, h))| weighted(*w, *h))
        .sum();
    Ok(objects + couplings)
}

/// Serializes non-finite floats as the strings `"-inf"`, `"inf"`, `"nan"`.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" => Ok(f64::INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn shannon_examples() {
        let uniform = ProbabilityVector::uniform(4).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&uniform, Unit::Bits), 2.0, epsilon = 1e-12);
        let certain = ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&certain, Unit::Bits), 0.0);
        let coin = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&coin, Unit::Bits), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(shannon_entropy(&coin, Unit::Nats), LN_2, epsilon = 1e-12);
    }

    #[test]
    fn invalid_probability_vectors() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn bernoulli_examples() {
        assert_abs_diff_eq!(bernoulli_entropy(0.5, Unit::Bits).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(bernoulli_entropy(0.0, Unit::Bits).unwrap(), 0.0);
        assert_eq!(bernoulli_entropy(1.0, Unit::Bits).unwrap(), 0.0);
        // direct evaluation of the binary entropy formula
        let p: f64 = 0.11;
        let oracle = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert_abs_diff_eq!(bernoulli_entropy(p, Unit::Bits).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle, 0.499_915_958_164_528, epsilon = 1e-12);
        assert!(bernoulli_entropy(1.5, Unit::Bits).is_err());
        assert!(bernoulli_entropy(-0.01, Unit::Nats).is_err());
    }

    #[test]
    fn surprisal_examples() {
        assert_eq!(state_surprisal(1.0).unwrap(), 0.0);
        let inv_e = 1.0 / E;
        assert_abs_diff_eq!(state_surprisal(inv_e).unwrap(), inv_e, epsilon = 1e-15);
        assert_abs_diff_eq!(state_surprisal(0.5).unwrap(), 0.5 * LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(state_surprisal(0.5).unwrap(), 0.3466, epsilon = 1e-4);
        assert!(state_surprisal(0.0).is_err());
        assert!(state_surprisal(1.0001).is_err());
    }

    #[test]
    fn gaussian_fit_standard_normal_closed_form() {
        // samples with mean 0 and unbiased sigma exactly 1
        let s = SampleSet::scalar(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        let sd = s.std_devs()[0];
        let h = differential_entropy_gaussian_fit(&s).unwrap();
        assert!(!h.degenerate);
        assert_abs_diff_eq!(h.nats, 0.5 * (2.0 * PI * E * sd * sd).ln(), epsilon = 1e-12);

        let unit = SampleSet::scalar(&[-1.0, 1.0]).unwrap();
        // unbiased sd of {-1, 1} is sqrt(2)
        assert_abs_diff_eq!(unit.std_devs()[0], 2f64.sqrt(), epsilon = 1e-15);
        let s1: Vec<f64> = [-1.0, 1.0].iter().map(|x| x / 2f64.sqrt()).collect();
        let h1 = differential_entropy_gaussian_fit(&SampleSet::scalar(&s1).unwrap()).unwrap();
        assert_abs_diff_eq!(h1.nats, 1.418_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_fit_scaling_law() {
        let base = vec![vec![0.3, -1.0], vec![1.7, 0.4], vec![-0.2, 2.2], vec![0.9, 0.1]];
        let scaled: Vec<Vec<f64>> = base
            .iter()
            .map(|v| v.iter().map(|x| 2.0 * x).collect())
            .collect();
        let h0 = differential_entropy_gaussian_fit(&SampleSet::new(base).unwrap()).unwrap();
        let h1 = differential_entropy_gaussian_fit(&SampleSet::new(scaled).unwrap()).unwrap();
        assert_abs_diff_eq!(h1.nats - h0.nats, 2.0 * LN_2, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_fit_degenerate_and_errors() {
        let flat = SampleSet::new(vec![vec![1.0, 2.0], vec![1.0, 3.0]]).unwrap();
        let h = differential_entropy_gaussian_fit(&flat).unwrap();
        assert!(h.degenerate);
        assert_eq!(h.nats, f64::NEG_INFINITY);
        assert!(differential_entropy_gaussian_fit(&SampleSet::scalar(&[1.0]).unwrap()).is_err());
        assert!(SampleSet::new(vec![]).is_err());
        assert!(SampleSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn degenerate_sentinel_serializes() {
        let h = DifferentialEntropy::from_sigmas(&[0.0]);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"nats":"-inf","degenerate":true}"#);
        let back: DifferentialEntropy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn cie_total_examples() {
        let terms = CieTerms::unweighted(
            vec![("A1".into(), 10.0), ("A2".into(), 10.0)],
            vec![("B12".into(), 16.0)],
            Unit::Bits,
        );
        assert_eq!(cie_total(&terms).unwrap(), 36.0);

        let empty = CieTerms::unweighted(vec![], vec![], Unit::Bits);
        assert_eq!(cie_total(&empty).unwrap(), 0.0);

        let weighted = CieTerms {
            object_entropies: vec![("A1".into(), 3.0), ("A2".into(), 99.0)],
            coupling_entropies: vec![],
            c: vec![2.0, 0.0],
            d: vec![],
            unit: Unit::Bits,
        };
        assert_eq!(cie_total(&weighted).unwrap(), 6.0);

        let sentinel = CieTerms {
            object_entropies: vec![("A1".into(), f64::NEG_INFINITY)],
            coupling_entropies: vec![],
            c: vec![0.0],
            d: vec![],
            unit: Unit::Nats,
        };
        assert_eq!(cie_total(&sentinel).unwrap(), 0.0);

        let mismatched = CieTerms {
            c: vec![1.0],
            ..CieTerms::unweighted(vec![], vec![], Unit::Bits)
        };
        assert!(matches!(
            cie_total(&mismatched),
            Err(EntropyError::CoefficientMismatch { .. })
        ));
    }

    fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, len).prop_filter_map("positive mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn uniform_maximizes_shannon(p in (2usize..9).prop_flat_map(distribution)) {
            let n = p.len();
            let pv = ProbabilityVector::new(p.clone()).unwrap();
            let h = shannon_entropy(&pv, Unit::Nats);
            let max = (n as f64).ln();
            let is_uniform = p.iter().all(|x| (x - 1.0 / n as f64).abs() < 1e-12);
            if is_uniform {
                prop_assert!((h - max).abs() < 1e-9);
            } else {
                prop_assert!(h < max);
            }
        }

        #[test]
        fn shannon_permutation_invariant(p in distribution(6), rot in 0usize..6) {
            let mut q = p.clone();
            q.rotate_left(rot);
            q.reverse();
            let a = shannon_entropy(&ProbabilityVector::new(p).unwrap(), Unit::Bits);
            let b = shannon_entropy(&ProbabilityVector::new(q).unwrap(), Unit::Bits);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn bernoulli_symmetric(p in 0.0f64..=1.0) {
            let a = bernoulli_entropy(p, Unit::Bits).unwrap();
            let b = bernoulli_entropy(1.0 - p, Unit::Bits).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn cie_linear_in_coefficient(h in prop::collection::vec(0.0f64..50.0, 1..6),
                                     c in prop::collection::vec(0.1f64..4.0, 6),
                                     idx in 0usize..6) {
            let idx = idx % h.len();
            let objects: Vec<(String, f64)> =
                h.iter().enumerate().map(|(i, v)| (format!("A{i}"), *v)).collect();
            let base = CieTerms {
                object_entropies: objects,
                coupling_entropies: vec![],
                c: c[..h.len()].to_vec(),
                d: vec![],
                unit: Unit::Nats,
            };
            let mut doubled = base.clone();
            doubled.c[idx] *= 2.0;
            let delta = cie_total(&doubled).unwrap() - cie_total(&base).unwrap();
            prop_assert!((delta - base.c[idx] * h[idx]).abs() < 1e-9);
        }

        #[test]
        fn gaussian_fit_translation_invariant(xs in prop::collection::vec(-10.0f64..10.0, 3..40),
                                              shift in -100.0f64..100.0) {
            let spread = xs.iter().cloned().fold(f64::MIN, f64::max)
                - xs.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread > 1e-3);
            let a = differential_entropy_gaussian_fit(&SampleSet::scalar(&xs).unwrap()).unwrap();
            let moved: Vec<f64> = xs.iter().map(|x| x + shift).collect();
            let b = differential_entropy_gaussian_fit(&SampleSet::scalar(&moved).unwrap()).unwrap();
            prop_assert!((a.nats - b.nats).abs() < 1e-9);
        }
    }
}
