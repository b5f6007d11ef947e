//! Positive, non-increasing weight sequences `γ_1, γ_2, …` summing to one.
//!
//! Every investing procedure pays out wealth through one of these. The raw
//! (unnormalized) shapes are
//!
//! | kind            | raw weight `f(j)`                        |
//! |-----------------|------------------------------------------|
//! | `power:s`       | `j^(-s)`, `s > 1`                        |
//! | `log-optimal`   | `ln(max(j,2)) / (j · exp(sqrt(ln j)))`   |
//! | `beta:m`        | `(ln(max(j,2)) / j)^(1/m)`, `0 < m < 1`  |
//!
//! The normalizer `Z = Σ f(j)` is the sum of the first `truncation` terms
//! plus the integral tail `∫_{N+1/2}^∞ f(x) dx` (midpoint rule, error of
//! order `f'(N)`). Where a raw shape is not monotone at small `j` the running
//! minimum is used instead, before normalizing.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, FdrError, Result};

pub const DEFAULT_TRUNCATION: u64 = 10_000_000;
pub const DEFAULT_HORIZON_HINT: usize = 1 << 16;

/// Shape of a γ-sequence, nameable as `power:<s>`, `log-optimal` or `beta:<m>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaKind {
    PowerLaw(f64),
    LogOptimal,
    BetaOptimal(f64),
}

impl GammaKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            GammaKind::PowerLaw(s) if !(s > 1.0 && s.is_finite()) => Err(invalid(format!(
                "power-law exponent must exceed 1, got {s}"
            ))),
            GammaKind::BetaOptimal(m) if !(m > 0.0 && m < 1.0) => Err(invalid(format!(
                "beta-optimal m must lie in (0, 1), got {m}"
            ))),
            k => Ok(k),
        }
    }

    /// Unnormalized weight before monotone repair.
    pub fn raw(self, j: u64) -> f64 {
        let x = j as f64;
        match self {
            GammaKind::PowerLaw(s) => x.powf(-s),
            GammaKind::LogOptimal => {
                let ln2 = (j.max(2) as f64).ln();
                ln2 / (x * x.ln().sqrt().exp())
            }
            GammaKind::BetaOptimal(m) => ((j.max(2) as f64).ln() / x).powf(1.0 / m),
        }
    }

    /// `∫_x^∞ f(y) dy` for the raw shape, valid for `x >= 2`.
    pub fn tail_integral(self, x: f64) -> f64 {
        match self {
            GammaKind::PowerLaw(s) => x.powf(1.0 - s) / (s - 1.0),
            GammaKind::LogOptimal => {
                // u = sqrt(ln y) turns the integrand into 2 u^3 e^{-u}.
                let u = x.ln().sqrt();
                2.0 * (-u).exp() * (((u + 3.0) * u + 6.0) * u + 6.0)
            }
            GammaKind::BetaOptimal(m) => beta_tail(1.0 / m, x.ln()),
        }
    }
}

/// `∫_L^∞ v^k e^{-(k-1) v} dv`, i.e. the tail of `(ln y / y)^k` in `v = ln y`.
fn beta_tail(k: f64, lower: f64) -> f64 {
    let rate = k - 1.0;
    // z = rate * (v - lower); integrand (lower + z/rate)^k e^{-z}, scaled.
    let g = |z: f64| ((lower + z / rate).ln() * k - z).exp();
    let g0 = g(0.0);
    let mut upper = 64.0;
    while g(upper) > 1e-22 * g0 {
        upper *= 2.0;
    }
    let n = 1 << 14;
    let h = upper / n as f64;
    let mut acc = g(0.0) + g(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    (-rate * lower).exp() * acc * h / 3.0 / rate
}

impl fmt::Display for GammaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaKind::PowerLaw(s) => write!(f, "power:{s}"),
            GammaKind::LogOptimal => f.write_str("log-optimal"),
            GammaKind::BetaOptimal(m) => write!(f, "beta:{m}"),
        }
    }
}

impl FromStr for GammaKind {
    type Err = FdrError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let param = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad gamma parameter in {s:?}")))
        };
        let kind = match s.split_once(':') {
            Some(("power", v)) => GammaKind::PowerLaw(param(v)?),
            Some(("beta", v)) => GammaKind::BetaOptimal(param(v)?),
            None if s == "log-optimal" => GammaKind::LogOptimal,
            _ => {
                return Err(invalid(format!(
                    "unknown gamma sequence {s:?} (expected power:<s>, log-optimal or beta:<m>)"
                )))
            }
        };
        kind.validate()
    }
}

/// A normalized γ-sequence. Cloning is cheap; values for `j <= horizon_hint`
/// are precomputed, later ones are evaluated on demand.
#[derive(Clone)]
pub struct GammaSequence {
    kind: GammaKind,
    normalizer: f64,
    truncation: u64,
    table: Arc<[f64]>,
}

impl GammaSequence {
    pub fn new(kind: GammaKind) -> Result<Self> {
        Self::with_options(kind, DEFAULT_TRUNCATION, DEFAULT_HORIZON_HINT)
    }

    pub fn power_law(s: f64) -> Result<Self> {
        Self::new(GammaKind::PowerLaw(s))
    }

    pub fn log_optimal() -> Self {
        Self::new(GammaKind::LogOptimal).expect("log-optimal has no parameters")
    }

    pub fn beta_optimal(m: f64) -> Result<Self> {
        Self::new(GammaKind::BetaOptimal(m))
    }

    /// Builds the sequence summing `truncation` raw terms before switching to
    /// the integral tail, and tabulating the first `horizon_hint` weights.
    pub fn with_options(kind: GammaKind, truncation: u64, horizon_hint: usize) -> Result<Self> {
        let kind = kind.validate()?;
        if truncation < 2 {
            return Err(invalid("gamma truncation must be at least 2"));
        }
        let horizon_hint = horizon_hint.max(1);

        let mut table = Vec::with_capacity(horizon_hint);
        let mut running_min = f64::INFINITY;
        let mut last_repair = 0u64;
        let mut sum = NeumaierSum::default();
        for j in 1..=truncation {
            let raw = kind.raw(j);
            if raw > running_min {
                last_repair = j;
            } else {
                running_min = raw;
            }
            sum.add(running_min);
            if j as usize <= horizon_hint {
                table.push(running_min);
            }
        }
        // Beyond the table the raw shape is used directly, so every repair
        // has to fall inside it.
        if last_repair as usize > horizon_hint {
            return Self::with_options(kind, truncation, last_repair as usize);
        }
        sum.add(kind.tail_integral(truncation as f64 + 0.5));
        let normalizer = sum.total();
        for v in &mut table {
            *v /= normalizer;
        }
        Ok(Self {
            kind,
            normalizer,
            truncation,
            table: table.into(),
        })
    }

    pub fn kind(&self) -> GammaKind {
        self.kind
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn horizon_hint(&self) -> usize {
        self.table.len()
    }

    /// `γ_j` for 1-based `j`.
    ///
    /// # Panics
    /// If `j == 0`.
    #[inline]
    pub fn get(&self, j: u64) -> f64 {
        assert!(j >= 1, "gamma is indexed from 1");
        match self.table.get(j as usize - 1) {
            Some(&v) => v,
            None => self.kind.raw(j) / self.normalizer,
        }
    }

    /// Estimate of `Σ_{j>n} γ_j` from the integral tail.
    pub fn tail_mass(&self, n: u64) -> f64 {
        self.kind.tail_integral(n as f64 + 0.5) / self.normalizer
    }
}

impl fmt::Debug for GammaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GammaSequence")
            .field("kind", &self.kind)
            .field("normalizer", &self.normalizer)
            .field("truncation", &self.truncation)
            .field("horizon_hint", &self.table.len())
            .finish()
    }
}

impl PartialEq for GammaSequence {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.normalizer == other.normalizer
            && self.table.len() == other.table.len()
    }
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
