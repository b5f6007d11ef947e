use super::{protocol_error, OnlineProcedure};
use crate::error::{invalid, Result};
use crate::gamma::GammaSequence;
use crate::types::{DecisionRecord, Level, PValue};

/// Fraction `ψ_t` of the current wealth put at risk on step `t`.
#[derive(Debug, Clone)]
pub enum SpendRule {
    Constant(f64),
    /// `ψ_t = γ(t - τ_last)`, `τ_last` the latest rejection (0 initially).
    GammaSinceRejection(GammaSequence),
}

/// The original (non-monotone) alpha-investing rule.
///
/// Wealth starts at `α`. Step `t` risks a penalty `ψ_t W` by testing at
/// `α_t = ψ_t W / (1 + ψ_t W)`, so that `α_t / (1 - α_t) = ψ_t W`. A
/// non-rejection costs `α_t / (1 - α_t)`; a rejection earns `α`.
#[derive(Debug, Clone)]
pub struct AlphaInvesting {
    alpha: f64,
    wealth: f64,
    rule: SpendRule,
    t: usize,
    last_rejection: usize,
    pending: Option<Level>,
}

impl AlphaInvesting {
    pub fn new(alpha: f64, rule: SpendRule) -> Result<Self> {
        Self::with_wealth(alpha, alpha, rule)
    }

    pub fn with_wealth(alpha: f64, wealth: f64, rule: SpendRule) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(wealth >= 0.0 && wealth.is_finite()) {
            return Err(invalid(format!(
                "wealth must be non-negative, got {wealth}"
            )));
        }
        if let SpendRule::Constant(psi) = rule {
            if !(psi > 0.0 && psi < 1.0) {
                return Err(invalid(format!(
                    "spend fraction must lie in (0, 1), got {psi}"
                )));
            }
        }
        Ok(Self {
            alpha,
            wealth,
            rule,
            t: 1,
            last_rejection: 0,
            pending: None,
        })
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }

    fn spend_fraction(&self) -> f64 {
        match &self.rule {
            SpendRule::Constant(psi) => *psi,
            SpendRule::GammaSinceRejection(g) => g.get((self.t - self.last_rejection) as u64),
        }
    }
}

impl OnlineProcedure for AlphaInvesting {
    fn step_index(&self) -> usize {
        self.t
    }

    fn next_level(&mut self) -> Level {
        if let Some(level) = self.pending {
            return level;
        }
        let penalty = self.spend_fraction() * self.wealth;
        let alpha = penalty / (1.0 + penalty);
        let level = Level {
            alpha,
            lambda: alpha,
        };
        self.pending = Some(level);
        level
    }

    fn observe(&mut self, p: PValue) -> Result<DecisionRecord> {
        let level = self.pending.take().ok_or_else(|| protocol_error(self.t))?;
        let record = DecisionRecord::decide(self.t, p, level);
        if record.rejected {
            self.wealth += self.alpha;
            self.last_rejection = self.t;
        } else {
            let cost = level.alpha / (1.0 - level.alpha);
            self.wealth = (self.wealth - cost).max(0.0);
        }
        self.t += 1;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> PValue {
        PValue::new(x).unwrap()
    }

    #[test]
    fn broke_investor_never_rejects() {
        let mut ai = AlphaInvesting::with_wealth(0.05, 0.0, SpendRule::Constant(0.1)).unwrap();
        for _ in 0..5 {
            let r = ai.test(p(0.0));
            assert_eq!(r.alpha, 0.0);
            assert!(!r.rejected);
            assert_eq!(ai.wealth(), 0.0);
        }
    }

    #[test]
    fn first_level_with_constant_fraction() {
        let mut ai = AlphaInvesting::new(0.05, SpendRule::Constant(0.1)).unwrap();
        let a = ai.next_level().alpha;
        assert!((a - 0.005 / 1.005).abs() < 1e-16);
        assert!((a - 0.0049751).abs() < 1e-7);
    }

    #[test]
    fn wealth_accounting() {
        let mut ai = AlphaInvesting::new(0.05, SpendRule::Constant(0.1)).unwrap();
        let r = ai.test(p(0.5));
        assert!((ai.wealth() - (0.05 - r.alpha / (1.0 - r.alpha))).abs() < 1e-16);
        let before = ai.wealth();
        ai.test(p(0.0));
        assert!((ai.wealth() - (before + 0.05)).abs() < 1e-16);
    }

    #[test]
    fn invalid_construction() {
        assert!(AlphaInvesting::new(0.0, SpendRule::Constant(0.1)).is_err());
        assert!(AlphaInvesting::new(0.05, SpendRule::Constant(1.0)).is_err());
        assert!(AlphaInvesting::with_wealth(0.05, -1.0, SpendRule::Constant(0.1)).is_err());
    }
}
