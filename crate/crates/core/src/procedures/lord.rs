use super::{protocol_error, validate_levels, OnlineProcedure};
use crate::error::Result;
use crate::gamma::GammaSequence;
use crate::types::{DecisionRecord, Level, PValue};

/// LORD with wealth recycling:
///
/// ```text
/// α_t = W0 γ(t) + (α - W0) γ(t - τ1) + Σ_{j≥2} α γ(t - τj)
/// ```
///
/// Telescoping the γ-sums keeps `Σ_{j≤t} α_j <= α (|R(t)| ∨ 1)`. LORD has
/// no candidacy threshold, so records carry `λ_t = α_t`.
#[derive(Debug, Clone)]
pub struct Lord {
    alpha: f64,
    w0: f64,
    gamma: GammaSequence,
    t: usize,
    rejection_times: Vec<usize>,
    pending: Option<Level>,
}

impl Lord {
    pub fn new(alpha: f64, w0: f64, gamma: GammaSequence) -> Result<Self> {
        validate_levels(alpha, w0)?;
        Ok(Self {
            alpha,
            w0,
            gamma,
            t: 1,
            rejection_times: Vec::new(),
            pending: None,
        })
    }

    pub fn rejection_times(&self) -> &[usize] {
        &self.rejection_times
    }

    fn level(&self) -> f64 {
        let t = self.t as u64;
        let mut a = self.w0 * self.gamma.get(t);
        for (j, &tau) in self.rejection_times.iter().enumerate() {
            let weight = if j == 0 {
                self.alpha - self.w0
            } else {
                self.alpha
            };
            a += weight * self.gamma.get(t - tau as u64);
        }
        a.min(1.0)
    }
}

impl OnlineProcedure for Lord {
    fn step_index(&self) -> usize {
        self.t
    }

    fn next_level(&mut self) -> Level {
        if let Some(level) = self.pending {
            return level;
        }
        let alpha = self.level();
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
            self.rejection_times.push(self.t);
        }
        self.t += 1;
        Ok(record)
    }
}
