//! Offline baselines: Benjamini-Hochberg and Storey-BH.
//!
//! Both pick the largest threshold `s` whose estimated FDP
//! `n · s · π̂0 / |{i : P_i <= s}|` stays within `α` (`π̂0 = 1` for BH) and
//! reject `{i : P_i <= s}`. The estimate only changes at order statistics,
//! so the search runs over `{0} ∪ {P_(1), …, P_(n)}`.

use crate::error::{invalid, Result};
use crate::types::PValue;

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    pub threshold: f64,
    /// 0-based input positions, ascending.
    pub rejected: Vec<usize>,
    /// Null-proportion factor used in the FDP estimate (1 for BH).
    pub pi0: f64,
}

pub fn bh(pvalues: &[PValue], alpha: f64) -> Result<OfflineResult> {
    check(pvalues, alpha)?;
    Ok(step_up(pvalues, alpha, 1.0))
}

pub fn storey_bh(pvalues: &[PValue], alpha: f64, lambda: f64) -> Result<OfflineResult> {
    check(pvalues, alpha)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    Ok(step_up(pvalues, alpha, storey_pi0(pvalues, lambda)))
}

/// `π̂0 = (1 + #{P_i > λ}) / (n (1 - λ))`.
pub fn storey_pi0(pvalues: &[PValue], lambda: f64) -> f64 {
    let above = pvalues.iter().filter(|p| p.get() > lambda).count();
    (1 + above) as f64 / (pvalues.len() as f64 * (1.0 - lambda))
}

fn check(pvalues: &[PValue], alpha: f64) -> Result<()> {
    if pvalues.is_empty() {
        return Err(invalid("need at least one p-value"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn step_up(pvalues: &[PValue], alpha: f64, pi0: f64) -> OfflineResult {
    let n = pvalues.len();
    let mut sorted: Vec<f64> = pvalues.iter().map(|p| p.get()).collect();
    sorted.sort_by(f64::total_cmp);

    let mut threshold = 0.0;
    // Walk down the order statistics; `count` is |R(s)| for s = sorted[k-1],
    // taking the top of each tie group.
    let mut k = n;
    while k > 0 {
        let s = sorted[k - 1];
        if n as f64 * s * pi0 <= alpha * k as f64 {
            threshold = s;
            break;
        }
        k -= 1;
        while k > 0 && sorted[k - 1] == s {
            k -= 1;
        }
    }
    let rejected = pvalues
        .iter()
        .enumerate()
        .filter(|(_, p)| p.get() <= threshold)
        .map(|(i, _)| i)
        .collect();
    OfflineResult {
        threshold,
        rejected,
        pi0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(v: &[f64]) -> Vec<PValue> {
        v.iter().map(|&x| PValue::new(x).unwrap()).collect()
    }

    #[test]
    fn nothing_below_one() {
        let r = bh(&ps(&[1.0; 6]), 0.05).unwrap();
        assert!(r.rejected.is_empty());
        assert_eq!(r.threshold, 0.0);
    }

    #[test]
    fn single_small_pvalue() {
        assert_eq!(bh(&ps(&[0.04]), 0.05).unwrap().rejected, vec![0]);
        assert!(bh(&ps(&[0.06]), 0.05).unwrap().rejected.is_empty());
    }

    #[test]
    fn classical_step_up_example() {
        // 0.04 fails 3·0.04/2 but 0.01 passes 3·0.01/1; step-up keeps going.
        let r = bh(&ps(&[0.04, 0.01, 0.5]), 0.05).unwrap();
        assert_eq!(r.rejected, vec![1]);
        let r = bh(&ps(&[0.03, 0.01, 0.045]), 0.05).unwrap();
        assert_eq!(r.rejected, vec![0, 1, 2]);
    }

    #[test]
    fn ties_are_all_included() {
        let r = bh(&ps(&[0.02, 0.02, 0.02, 0.9]), 0.05).unwrap();
        assert_eq!(r.rejected, vec![0, 1, 2]);
    }

    #[test]
    fn storey_pi0_worked_example() {
        let p = ps(&[0.01, 0.02, 0.6, 0.8]);
        assert!((storey_pi0(&p, 0.5) - 1.5).abs() < 1e-15);
        let r = storey_bh(&p, 0.05, 0.5).unwrap();
        // 4·0.02·1.5/2 = 0.06 > 0.05; 4·0.01·1.5/1 = 0.06 > 0.05.
        assert!(r.rejected.is_empty());
        let r = storey_bh(&p, 0.1, 0.5).unwrap();
        assert_eq!(r.rejected, vec![0, 1]);
    }

    #[test]
    fn all_above_lambda() {
        let p = ps(&[0.7, 0.8, 0.9]);
        let pi0 = storey_pi0(&p, 0.5);
        assert!((pi0 - 4.0 / 1.5).abs() < 1e-15);
        assert!(pi0 >= 1.0);
    }

    #[test]
    fn argument_errors() {
        assert!(bh(&[], 0.05).is_err());
        assert!(bh(&ps(&[0.1]), 0.0).is_err());
        assert!(storey_bh(&ps(&[0.1]), 0.05, 1.0).is_err());
    }

    #[test]
    fn zero_pvalues_always_rejected() {
        let r = bh(&ps(&[0.0, 1.0, 1.0, 1.0]), 0.05).unwrap();
        assert_eq!(r.rejected, vec![0]);
    }
}
