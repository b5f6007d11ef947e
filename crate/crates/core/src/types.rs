//! Domain vocabulary shared by every module: p-values, ground-truth labels,
//! per-step decision records and per-trial results.

use std::fmt;

use crate::error::{invalid, FdrError, Result};

/// A p-value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PValue(f64);

impl PValue {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(invalid(format!("p-value {value} outside [0, 1]")))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 1.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Self(1.0)
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PValue {
    type Error = FdrError;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Ground truth for one hypothesis. Only known inside simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HypothesisLabel {
    pub is_null: bool,
}

impl HypothesisLabel {
    pub const NULL: Self = Self { is_null: true };
    pub const NON_NULL: Self = Self { is_null: false };
}

/// Test level and candidacy threshold emitted for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub alpha: f64,
    pub lambda: f64,
}

/// Everything a procedure decided at step `index`.
///
/// `rejected` is `p <= alpha` and `candidate` is `p <= lambda`; since every
/// procedure emits `alpha <= lambda`, a rejection is always a candidate.
/// A level of exactly zero admits nothing, not even `p = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub index: usize,
    pub p: PValue,
    pub alpha: f64,
    pub lambda: f64,
    pub rejected: bool,
    pub candidate: bool,
}

impl DecisionRecord {
    pub fn decide(index: usize, p: PValue, level: Level) -> Self {
        Self {
            index,
            p,
            alpha: level.alpha,
            lambda: level.lambda,
            rejected: level.alpha > 0.0 && p.get() <= level.alpha,
            candidate: level.lambda > 0.0 && p.get() <= level.lambda,
        }
    }
}

/// Outcome of one simulated stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub fdp: f64,
    pub power: f64,
    pub rejections: usize,
    pub false_rejections: usize,
    pub trace: Option<Vec<DecisionRecord>>,
}

fn check_lengths(records: &[DecisionRecord], labels: &[HypothesisLabel]) -> Result<()> {
    if records.len() != labels.len() {
        return Err(FdrError::LengthMismatch {
            left: records.len(),
            right: labels.len(),
        });
    }
    Ok(())
}

/// Counts `(false rejections, rejections, true rejections, non-nulls)`.
pub(crate) fn tally(records: &[DecisionRecord], labels: &[HypothesisLabel]) -> [usize; 4] {
    let mut out = [0usize; 4];
    for (r, l) in records.iter().zip(labels) {
        if r.rejected {
            out[1] += 1;
            if l.is_null {
                out[0] += 1;
            } else {
                out[2] += 1;
            }
        }
        if !l.is_null {
            out[3] += 1;
        }
    }
    out
}

/// Realized false discovery proportion with `0/0 = 0`.
pub fn fdp_of(records: &[DecisionRecord], labels: &[HypothesisLabel]) -> Result<f64> {
    check_lengths(records, labels)?;
    let [false_rej, rej, _, _] = tally(records, labels);
    Ok(ratio_or_zero(false_rej, rej))
}

/// Fraction of non-null hypotheses that were rejected; 0 with no non-nulls.
pub fn power_of(records: &[DecisionRecord], labels: &[HypothesisLabel]) -> Result<f64> {
    check_lengths(records, labels)?;
    let [_, _, true_rej, non_null] = tally(records, labels);
    Ok(ratio_or_zero(true_rej, non_null))
}

pub(crate) fn ratio_or_zero(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
