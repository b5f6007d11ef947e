use std::fmt;
use std::sync::Arc;

use super::{protocol_error, validate_levels, OnlineProcedure};
use crate::error::{invalid, FdrError, Result};
use crate::gamma::GammaSequence;
use crate::types::{DecisionRecord, Level, PValue};

const BISECTION_STEPS: u32 = 64;

/// How the candidacy threshold `λ_t` is chosen.
#[derive(Clone)]
pub enum LambdaRule {
    /// Fixed `λ ∈ (0, 1)`; the level is capped at `λ`.
    Constant(f64),
    /// `λ_t = α_t`, solved in closed form as `α_t = s_t / (1 + s_t)`.
    Identity,
    /// `λ_t = h(α_t)` for a non-decreasing `h: (0,1) -> (0,1)` with
    /// `h(x) >= x`; `α_t` solves `x / (1 - h(x)) = s_t` by bisection.
    Adaptive(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl LambdaRule {
    pub fn adaptive(h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let h: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(h);
        let mut prev = 0.0;
        for i in 1..1000 {
            let x = i as f64 / 1000.0;
            let y = h(x);
            if !(y >= x && y < 1.0) {
                return Err(invalid(format!("h({x}) = {y} must lie in [x, 1)")));
            }
            if y < prev {
                return Err(invalid(format!(
                    "h must be non-decreasing; h({x}) = {y} < {prev}"
                )));
            }
            prev = y;
        }
        Ok(LambdaRule::Adaptive(h))
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LambdaRule::Constant(l) if !(l > 0.0 && l < 1.0) => {
                Err(invalid(format!("lambda must lie in (0, 1), got {l}")))
            }
            _ => Ok(()),
        }
    }

    /// Maps the bracketed wealth sum `s_t` to `(α_t, λ_t)`.
    fn level(&self, s: f64) -> Level {
        match self {
            LambdaRule::Constant(lambda) => Level {
                alpha: ((1.0 - lambda) * s).min(*lambda),
                lambda: *lambda,
            },
            LambdaRule::Identity => {
                let alpha = s / (1.0 + s);
                Level {
                    alpha,
                    lambda: alpha,
                }
            }
            LambdaRule::Adaptive(h) => {
                let alpha = invert_q(h.as_ref(), s);
                Level {
                    alpha,
                    lambda: h(alpha).max(alpha),
                }
            }
        }
    }
}

/// Largest `x` (to 2^-64) with `x / (1 - h(x)) <= s`. A fixed number of
/// halvings keeps the result non-decreasing in `s`.
fn invert_q(h: &dyn Fn(f64) -> f64, s: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        let q = if hm < 1.0 {
            mid / (1.0 - hm)
        } else {
            f64::INFINITY
        };
        if q <= s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl fmt::Debug for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaRule::Constant(l) => write!(f, "Constant({l})"),
            LambdaRule::Identity => f.write_str("Identity"),
            LambdaRule::Adaptive(_) => f.write_str("Adaptive(..)"),
        }
    }
}

/// SAFFRON with constant or predictable `λ_t`.
///
/// At step `t` the bracketed sum is
///
/// ```text
/// s_t = W0 γ(t - C0) + (α - W0) γ(t - τ1 - C1) + Σ_{j≥2} α γ(t - τj - Cj)
/// ```
///
/// where `τj` is the j-th rejection time and `Cj` counts candidates in
/// `τj+1 ..= t-1` (`τ0 = 0`). Constant `λ` emits `min(λ, (1-λ) s_t)`.
#[derive(Debug, Clone)]
pub struct Saffron {
    alpha: f64,
    w0: f64,
    rule: LambdaRule,
    gamma: GammaSequence,
    t: usize,
    rejection_times: Vec<usize>,
    // entry 0 is C0, entry j is Cj for the j-th rejection
    candidates_since: Vec<u64>,
    history: Vec<(bool, bool)>,
    pending: Option<Level>,
}

impl Saffron {
    pub fn new(alpha: f64, w0: f64, rule: LambdaRule, gamma: GammaSequence) -> Result<Self> {
        validate_levels(alpha, w0)?;
        rule.validate()?;
        Ok(Self {
            alpha,
            w0,
            rule,
            gamma,
            t: 1,
            rejection_times: Vec::new(),
            candidates_since: vec![0],
            history: Vec::new(),
            pending: None,
        })
    }

    /// The monotone alpha-investing variant, `λ_t = α_t`.
    pub fn alpha_investing(alpha: f64, w0: f64, gamma: GammaSequence) -> Result<Self> {
        Self::new(alpha, w0, LambdaRule::Identity, gamma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn rule(&self) -> &LambdaRule {
        &self.rule
    }

    pub fn rejection_times(&self) -> &[usize] {
        &self.rejection_times
    }

    pub fn candidates_since(&self) -> &[u64] {
        &self.candidates_since
    }

    /// `(R_i, C_i)` for every decided step.
    pub fn history(&self) -> &[(bool, bool)] {
        &self.history
    }

    /// The bracketed sum `s_t` for the current step.
    pub fn wealth_sum(&self) -> f64 {
        let t = self.t as u64;
        let g = |tau: usize, cands: u64| self.gamma.get(t - tau as u64 - cands);
        let mut s = self.w0 * g(0, self.candidates_since[0]);
        for (j, (&tau, &c)) in self
            .rejection_times
            .iter()
            .zip(&self.candidates_since[1..])
            .enumerate()
        {
            let weight = if j == 0 {
                self.alpha - self.w0
            } else {
                self.alpha
            };
            s += weight * g(tau, c);
        }
        s
    }

    /// Records the step's indicators directly, without a p-value. Lets the
    /// level be evaluated on arbitrary feasible histories.
    pub fn observe_indicators(&mut self, rejected: bool, candidate: bool) -> Result<()> {
        if rejected && !candidate {
            return Err(invalid("a rejection must also be a candidate"));
        }
        self.pending.take().ok_or_else(|| protocol_error(self.t))?;
        self.record(rejected, candidate);
        Ok(())
    }

    fn record(&mut self, rejected: bool, candidate: bool) {
        if candidate {
            for c in &mut self.candidates_since {
                *c += 1;
            }
        }
        if rejected {
            self.rejection_times.push(self.t);
            self.candidates_since.push(0);
        }
        self.history.push((rejected, candidate));
        self.t += 1;
    }
}

impl OnlineProcedure for Saffron {
    fn step_index(&self) -> usize {
        self.t
    }

    fn next_level(&mut self) -> Level {
        if let Some(level) = self.pending {
            return level;
        }
        let level = self.rule.level(self.wealth_sum());
        self.pending = Some(level);
        level
    }

    fn observe(&mut self, p: PValue) -> Result<DecisionRecord> {
        let level = self.pending.ok_or_else(|| protocol_error(self.t))?;
        let record = DecisionRecord::decide(self.t, p, level);
        self.pending = None;
        self.record(record.rejected, record.candidate);
        Ok(record)
    }
}

impl PartialEq for LambdaRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LambdaRule::Constant(a), LambdaRule::Constant(b)) => a == b,
            (LambdaRule::Identity, LambdaRule::Identity) => true,
            (LambdaRule::Adaptive(a), LambdaRule::Adaptive(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl TryFrom<f64> for LambdaRule {
    type Error = FdrError;

    fn try_from(lambda: f64) -> Result<Self> {
        let rule = LambdaRule::Constant(lambda);
        rule.validate()?;
        Ok(rule)
    }
}
