//! FDP estimators over a decided stream, and across-trial aggregation.
//!
//! All per-step estimators divide by `|R(t)| ∨ 1`.

use std::io::{self, Write};

use crate::error::{invalid, FdrError, Result};
use crate::types::{DecisionRecord, HypothesisLabel, TrialResult};

/// Per-step estimator values `(t, value)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimatorTrace {
    pub points: Vec<(usize, f64)>,
}

impl EstimatorTrace {
    pub fn max(&self) -> f64 {
        self.points.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in &self.points {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

fn running_ratio<'a>(
    records: &'a [DecisionRecord],
    mut numerator_term: impl FnMut(usize, &DecisionRecord) -> f64 + 'a,
) -> EstimatorTrace {
    let mut num = 0.0;
    let mut rejections = 0usize;
    let points = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            num += numerator_term(i, r);
            rejections += r.rejected as usize;
            (r.index, num / rejections.max(1) as f64)
        })
        .collect();
    EstimatorTrace { points }
}

/// `FDP*(t)`: levels spent on true nulls over `|R(t)| ∨ 1`.
pub fn fdp_oracle(
    records: &[DecisionRecord],
    labels: &[HypothesisLabel],
) -> Result<EstimatorTrace> {
    if records.len() != labels.len() {
        return Err(FdrError::LengthMismatch {
            left: records.len(),
            right: labels.len(),
        });
    }
    Ok(running_ratio(records, |i, r| {
        if labels[i].is_null {
            r.alpha
        } else {
            0.0
        }
    }))
}

/// LORD's estimate: every spent level over `|R(t)| ∨ 1`.
pub fn fdp_hat_lord(records: &[DecisionRecord]) -> EstimatorTrace {
    running_ratio(records, |_, r| r.alpha)
}

/// Numerator term of the SAFFRON estimate for one step:
/// `α_j 1{P_j > λ_j} / (1 - λ_j)`.
pub fn saffron_penalty(r: &DecisionRecord) -> f64 {
    if r.candidate {
        0.0
    } else {
        r.alpha / (1.0 - r.lambda)
    }
}

/// SAFFRON's estimate: levels spent on non-candidates, inflated by
/// `1 / (1 - λ_j)`, over `|R(t)| ∨ 1`.
pub fn fdp_hat_saffron(records: &[DecisionRecord]) -> EstimatorTrace {
    running_ratio(records, |_, r| saffron_penalty(r))
}

/// Means and standard errors over a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub fdr: f64,
    pub fdr_se: f64,
    pub power: f64,
    pub power_se: f64,
    /// Ratio of mean false rejections to mean rejections.
    pub mfdr: f64,
    pub trials: usize,
}

pub fn aggregate(trials: &[TrialResult]) -> Result<Aggregate> {
    if trials.is_empty() {
        return Err(invalid("cannot aggregate an empty list of trials"));
    }
    let (fdr, fdr_se) = mean_and_se(trials.iter().map(|t| t.fdp));
    let (power, power_se) = mean_and_se(trials.iter().map(|t| t.power));
    let false_rej: usize = trials.iter().map(|t| t.false_rejections).sum();
    let rej: usize = trials.iter().map(|t| t.rejections).sum();
    Ok(Aggregate {
        fdr,
        fdr_se,
        power,
        power_se,
        mfdr: crate::types::ratio_or_zero(false_rej, rej),
        trials: trials.len(),
    })
}

/// Sample mean and its standard error (`s / sqrt(n)`, `s` with `n - 1`);
/// the error is 0 for a single value.
pub fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::PValue;

    fn rec(index: usize, p: f64, alpha: f64, lambda: f64) -> DecisionRecord {
        DecisionRecord::decide(
            index,
            PValue::new(p).unwrap(),
            crate::types::Level { alpha, lambda },
        )
    }

    fn trial(fdp: f64, power: f64) -> TrialResult {
        TrialResult {
            fdp,
            power,
            rejections: 0,
            false_rejections: 0,
            trace: None,
        }
    }

    #[test]
    fn oracle_zero_without_nulls() {
        let records = vec![rec(1, 0.001, 0.01, 0.5), rec(2, 0.7, 0.02, 0.5)];
        let trace = fdp_oracle(&records, &[HypothesisLabel::NON_NULL; 2]).unwrap();
        assert!(trace.values().all(|v| v == 0.0));
    }

    #[test]
    fn oracle_two_nulls_one_rejection() {
        let records = vec![rec(1, 0.005, 0.01, 0.5), rec(2, 0.9, 0.02, 0.5)];
        let trace = fdp_oracle(&records, &[HypothesisLabel::NULL; 2]).unwrap();
        assert!((trace.points[1].1 - 0.03).abs() < 1e-15);
        assert!(fdp_oracle(&records, &[HypothesisLabel::NULL; 1]).is_err());
    }

    #[test]
    fn lord_single_step() {
        let trace = fdp_hat_lord(&[rec(1, 0.3, 0.005, 0.005)]);
        assert_eq!(trace.points, vec![(1, 0.005)]);
    }

    #[test]
    fn saffron_hand_example() {
        let records = vec![
            rec(1, 0.6, 0.01, 0.5),
            rec(2, 0.2, 0.02, 0.5),
            rec(3, 0.7, 0.03, 0.5),
        ];
        let trace = fdp_hat_saffron(&records);
        assert!((trace.points[2].1 - 0.08).abs() < 1e-15);
        assert!((trace.max() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn saffron_all_candidates() {
        let records: Vec<_> = (1..=5).map(|i| rec(i, 0.3, 0.01, 0.5)).collect();
        assert!(fdp_hat_saffron(&records).values().all(|v| v == 0.0));
    }

    #[test]
    fn saffron_with_lambda_equal_alpha_is_ai_spend() {
        let alphas = [0.01, 0.02, 0.004, 0.03];
        let ps = [0.5, 0.001, 0.9, 0.01];
        let records: Vec<_> = (0..4)
            .map(|i| rec(i + 1, ps[i], alphas[i], alphas[i]))
            .collect();
        let trace = fdp_hat_saffron(&records);
        let mut spent = 0.0;
        let mut rej = 0;
        for (i, r) in records.iter().enumerate() {
            if r.rejected {
                rej += 1;
            } else {
                spent += r.alpha / (1.0 - r.alpha);
            }
            let expected = spent / (rej.max(1) as f64);
            assert!((trace.points[i].1 - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn aggregate_cases() {
        assert!(aggregate(&[]).is_err());
        let one = aggregate(&[trial(0.2, 0.7)]).unwrap();
        assert_eq!(
            (one.fdr, one.fdr_se, one.power, one.power_se),
            (0.2, 0.0, 0.7, 0.0)
        );
        let two = aggregate(&[trial(0.0, 0.5), trial(0.1, 0.5)]).unwrap();
        assert!((two.fdr - 0.05).abs() < 1e-15);
        assert_eq!(two.power_se, 0.0);
    }

    #[test]
    fn aggregate_two_point_constants() {
        // 100 trials at 0 and 100 at 1: mean 1/2, s^2 = 50/199, se = sqrt(s^2/200).
        let trials: Vec<_> = (0..200).map(|i| trial((i % 2) as f64, 0.0)).collect();
        let agg = aggregate(&trials).unwrap();
        assert_eq!(agg.fdr, 0.5);
        let expected = (50.0f64 / 199.0 / 200.0).sqrt();
        assert!((agg.fdr_se - expected).abs() < 1e-15);
    }

    #[test]
    fn csv_export() {
        let trace = EstimatorTrace {
            points: vec![(1, 0.5), (2, 0.25)],
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n1,0.5\n2,0.25\n");
    }
}
