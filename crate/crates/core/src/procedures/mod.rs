//! Online decision procedures as incremental state machines.
//!
//! Each step is a two-phase exchange: [`OnlineProcedure::next_level`] fixes
//! the test level `α_t` and candidacy threshold `λ_t` from the past
//! decisions alone, then [`OnlineProcedure::observe`] reveals `P_t`.
//! Steps are 1-based.

mod alpha_investing;
mod lord;
mod saffron;

use std::fmt;
use std::str::FromStr;

pub use alpha_investing::{AlphaInvesting, SpendRule};
pub use lord::Lord;
pub use saffron::{LambdaRule, Saffron};

use crate::error::{invalid, FdrError, Result};
use crate::gamma::GammaSequence;
use crate::types::{DecisionRecord, Level, PValue};

pub trait OnlineProcedure: Send {
    /// Index of the step whose level `next_level` returns.
    fn step_index(&self) -> usize;

    /// Level for the current step. Repeated calls without an intervening
    /// `observe` return the same level.
    fn next_level(&mut self) -> Level;

    /// Decides the current step. Errors if `next_level` was not called first.
    fn observe(&mut self, p: PValue) -> Result<DecisionRecord>;

    /// `next_level` followed by `observe`.
    fn test(&mut self, p: PValue) -> DecisionRecord {
        self.next_level();
        self.observe(p).expect("level was just fixed")
    }
}

/// Which procedure a simulation or CLI run should build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcedureSpec {
    Saffron { lambda: f64 },
    SaffronAi,
    Lord,
    AlphaInvesting,
}

impl ProcedureSpec {
    /// Builds a fresh instance. `w0` is ignored by alpha-investing, which
    /// starts with wealth `alpha` and spends `γ_{t - τ_last}` of it.
    pub fn build(
        self,
        alpha: f64,
        w0: f64,
        gamma: &GammaSequence,
    ) -> Result<Box<dyn OnlineProcedure>> {
        Ok(match self {
            ProcedureSpec::Saffron { lambda } => Box::new(Saffron::new(
                alpha,
                w0,
                LambdaRule::Constant(lambda),
                gamma.clone(),
            )?),
            ProcedureSpec::SaffronAi => {
                Box::new(Saffron::alpha_investing(alpha, w0, gamma.clone())?)
            }
            ProcedureSpec::Lord => Box::new(Lord::new(alpha, w0, gamma.clone())?),
            ProcedureSpec::AlphaInvesting => Box::new(AlphaInvesting::new(
                alpha,
                SpendRule::GammaSinceRejection(gamma.clone()),
            )?),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ProcedureSpec::Saffron { .. } => "saffron",
            ProcedureSpec::SaffronAi => "saffron-ai",
            ProcedureSpec::Lord => "lord",
            ProcedureSpec::AlphaInvesting => "alpha-investing",
        }
    }

    /// Parses a procedure name; `lambda` is only used by `saffron`.
    pub fn parse_with_lambda(name: &str, lambda: f64) -> Result<Self> {
        match name.trim() {
            "saffron" => {
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(invalid(format!("lambda must lie in (0, 1), got {lambda}")));
                }
                Ok(ProcedureSpec::Saffron { lambda })
            }
            "saffron-ai" => Ok(ProcedureSpec::SaffronAi),
            "lord" => Ok(ProcedureSpec::Lord),
            "alpha-investing" => Ok(ProcedureSpec::AlphaInvesting),
            other => Err(invalid(format!(
                "unknown procedure {other:?} (expected saffron, saffron-ai, lord or alpha-investing)"
            ))),
        }
    }
}

impl fmt::Display for ProcedureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProcedureSpec {
    type Err = FdrError;

    /// `saffron` parses with the default `λ = 1/2`.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_lambda(s, 0.5)
    }
}

pub(crate) fn validate_levels(alpha: f64, w0: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(w0 > 0.0 && w0 <= alpha) {
        return Err(invalid(format!("w0 must lie in (0, alpha], got {w0}")));
    }
    Ok(())
}

pub(crate) fn protocol_error(step: usize) -> FdrError {
    FdrError::Protocol(format!("observe called at step {step} before next_level"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn procedure_names_round_trip() {
        for name in ["saffron", "saffron-ai", "lord", "alpha-investing"] {
            let spec: ProcedureSpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
        assert!("bonferroni".parse::<ProcedureSpec>().is_err());
        assert!(ProcedureSpec::parse_with_lambda("saffron", 1.0).is_err());
    }

    #[test]
    fn every_procedure_rejects_protocol_misuse() {
        let gamma =
            GammaSequence::with_options(crate::gamma::GammaKind::PowerLaw(2.0), 1000, 64).unwrap();
        for spec in [
            ProcedureSpec::Saffron { lambda: 0.5 },
            ProcedureSpec::SaffronAi,
            ProcedureSpec::Lord,
            ProcedureSpec::AlphaInvesting,
        ] {
            let mut proc = spec.build(0.05, 0.025, &gamma).unwrap();
            let p = PValue::new(0.3).unwrap();
            assert!(matches!(proc.observe(p), Err(FdrError::Protocol(_))));
            proc.next_level();
            proc.observe(p).unwrap();
            assert!(proc.observe(p).is_err(), "{spec}: double observe");
            assert_eq!(proc.step_index(), 2);
        }
    }
}
