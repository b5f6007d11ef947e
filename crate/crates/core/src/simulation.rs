//! Monte Carlo harness: p-value stream generators, a seeded trial runner and
//! parameter sweeps that emit one CSV row per (procedure, γ, π₁) cell.
//!
//! Trial `i` of a run with seed `s` draws from a ChaCha8 stream seeded with
//! [`trial_seed`]`(s, i)`, so every trial is reproducible on its own and the
//! output does not depend on how trials are scheduled across threads.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, FdrError, Result};
use crate::estimators::{aggregate, Aggregate};
use crate::format::{format_float, Precision};
use crate::gamma::{GammaKind, GammaSequence};
use crate::normal::upper_tail_pvalue;
use crate::procedures::{OnlineProcedure, ProcedureSpec};
use crate::types::{ratio_or_zero, tally, HypothesisLabel, PValue, TrialResult};

pub const CSV_HEADER: &str = "procedure,gamma,pi1,fdr,fdr_se,power,power_se,trials,seed";

/// Distribution of the non-null p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `Z ~ N(μ, 1)` with `μ ~ N(mu_c, 1)`, `P = Φ(-Z)`.
    GaussianMean { mu_c: f64 },
    /// `P ~ Beta(m, n)`.
    BetaAlt { m: f64, n: f64 },
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::GaussianMean { mu_c } => write!(f, "gaussian:{mu_c}"),
            ModelKind::BetaAlt { m, n } => write!(f, "beta:{m},{n}"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = FdrError;

    /// `gaussian:<mu_c>` or `beta:<m>,<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            invalid(format!(
                "bad model {s:?} (expected gaussian:<mu_c> or beta:<m>,<n>)"
            ))
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let kind = match s.trim().split_once(':') {
            Some(("gaussian", v)) => ModelKind::GaussianMean { mu_c: num(v)? },
            Some(("beta", v)) => {
                let (m, n) = v.split_once(',').ok_or_else(bad)?;
                ModelKind::BetaAlt {
                    m: num(m)?,
                    n: num(n)?,
                }
            }
            _ => return Err(bad()),
        };
        kind.validate()
    }
}

impl ModelKind {
    fn validate(self) -> Result<Self> {
        match self {
            ModelKind::GaussianMean { mu_c } if !mu_c.is_finite() => {
                Err(invalid("gaussian mean must be finite"))
            }
            ModelKind::BetaAlt { m, n }
                if !(m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite()) =>
            {
                Err(invalid(format!(
                    "beta shape parameters must be positive, got ({m}, {n})"
                )))
            }
            k => Ok(k),
        }
    }
}

/// Mixture of nulls and non-nulls: each index is non-null with probability `pi1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataModel {
    pub kind: ModelKind,
    pub pi1: f64,
    pub horizon: usize,
}

impl DataModel {
    pub fn new(kind: ModelKind, pi1: f64, horizon: usize) -> Result<Self> {
        let kind = kind.validate()?;
        if !(0.0..=1.0).contains(&pi1) {
            return Err(invalid(format!("pi1 must lie in [0, 1], got {pi1}")));
        }
        if horizon == 0 {
            return Err(invalid("stream length T must be at least 1"));
        }
        Ok(Self { kind, pi1, horizon })
    }
}

/// One simulation cell: a data model, a procedure and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: DataModel,
    pub procedure: ProcedureSpec,
    pub alpha: f64,
    pub w0: f64,
    pub gamma: GammaKind,
    pub trials: usize,
    pub seed: u64,
    /// Keep per-step decision records in each `TrialResult`.
    pub keep_trace: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `splitmix64(seed ^ splitmix64(trial_index))`.
pub fn trial_seed(seed: u64, trial_index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial_index))
}

pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, trial_index))
}

/// Draws a length-`T` stream. Each index first draws its label
/// (`u < pi1` means non-null), then its p-value.
pub fn generate_stream<R: Rng + ?Sized>(
    model: &DataModel,
    rng: &mut R,
) -> (Vec<PValue>, Vec<HypothesisLabel>) {
    let beta_parts = match model.kind {
        ModelKind::BetaAlt { m, n } => Some((
            Gamma::new(m, 1.0).expect("validated shape"),
            Gamma::new(n, 1.0).expect("validated shape"),
        )),
        ModelKind::GaussianMean { .. } => None,
    };
    let mut pvalues = Vec::with_capacity(model.horizon);
    let mut labels = Vec::with_capacity(model.horizon);
    for _ in 0..model.horizon {
        let non_null = rng.random::<f64>() < model.pi1;
        let p = match (model.kind, &beta_parts) {
            (ModelKind::GaussianMean { mu_c }, _) => {
                let mean = if non_null {
                    mu_c + rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                upper_tail_pvalue(mean + rng.sample::<f64, _>(StandardNormal))
            }
            (ModelKind::BetaAlt { .. }, Some((gm, gn))) => {
                if non_null {
                    let x = gm.sample(rng);
                    let y = gn.sample(rng);
                    if x + y > 0.0 {
                        x / (x + y)
                    } else {
                        0.0
                    }
                } else {
                    rng.random::<f64>()
                }
            }
            (ModelKind::BetaAlt { .. }, None) => unreachable!(),
        };
        pvalues.push(PValue::saturating(p));
        labels.push(HypothesisLabel { is_null: !non_null });
    }
    (pvalues, labels)
}

/// A validated config with its γ-sequence built once.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    gamma: GammaSequence,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        let gamma = GammaSequence::new(config.gamma)?;
        Self::with_gamma(config, gamma)
    }

    /// Uses a prebuilt sequence, which must match `config.gamma`.
    pub fn with_gamma(config: SimConfig, gamma: GammaSequence) -> Result<Self> {
        if gamma.kind() != config.gamma {
            return Err(invalid("gamma sequence does not match the config"));
        }
        if config.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        // Surface parameter errors before any trial runs.
        config.procedure.build(config.alpha, config.w0, &gamma)?;
        Ok(Self { config, gamma })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn run_trial(&self, trial_index: u64) -> Result<TrialResult> {
        let cfg = &self.config;
        let mut rng = trial_rng(cfg.seed, trial_index);
        let (pvalues, labels) = generate_stream(&cfg.model, &mut rng);
        let mut procedure = cfg.procedure.build(cfg.alpha, cfg.w0, &self.gamma)?;
        evaluate_stream(procedure.as_mut(), &pvalues, &labels, cfg.keep_trace)
    }

    /// All trials, in index order.
    pub fn run(&self) -> Result<Vec<TrialResult>> {
        (0..self.config.trials as u64)
            .into_par_iter()
            .map(|i| self.run_trial(i))
            .collect()
    }
}

/// Feeds a labeled stream through `procedure` and scores the decisions.
pub fn evaluate_stream(
    procedure: &mut dyn OnlineProcedure,
    pvalues: &[PValue],
    labels: &[HypothesisLabel],
    keep_trace: bool,
) -> Result<TrialResult> {
    if pvalues.len() != labels.len() {
        return Err(FdrError::LengthMismatch {
            left: pvalues.len(),
            right: labels.len(),
        });
    }
    let mut records = Vec::with_capacity(pvalues.len());
    for &p in pvalues {
        procedure.next_level();
        records.push(procedure.observe(p)?);
    }
    let [false_rej, rej, true_rej, non_null] = tally(&records, labels);
    Ok(TrialResult {
        fdp: ratio_or_zero(false_rej, rej),
        power: ratio_or_zero(true_rej, non_null),
        rejections: rej,
        false_rejections: false_rej,
        trace: keep_trace.then_some(records),
    })
}

/// Runs one trial of `config`, building its γ-sequence on the spot.
pub fn run_trial(config: &SimConfig, trial_index: u64) -> Result<TrialResult> {
    Simulator::new(config.clone())?.run_trial(trial_index)
}

/// Cross product of π₁ values, procedures and γ-sequences over shared
/// model and level settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub model: ModelKind,
    pub horizon: usize,
    pub pi1: Vec<f64>,
    pub procedures: Vec<ProcedureSpec>,
    pub gammas: Vec<GammaKind>,
    pub alpha: f64,
    pub w0: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SweepGrid {
    /// `0.1, 0.2, …, 0.9`.
    pub fn default_pi1() -> Vec<f64> {
        (1..=9).map(|i| i as f64 / 10.0).collect()
    }

    pub fn cells(&self) -> Result<Vec<SimConfig>> {
        if self.pi1.is_empty() || self.procedures.is_empty() || self.gammas.is_empty() {
            return Err(invalid("sweep grid must be nonempty"));
        }
        let mut cells = Vec::new();
        for &procedure in &self.procedures {
            for &gamma in &self.gammas {
                for &pi1 in &self.pi1 {
                    cells.push(SimConfig {
                        model: DataModel::new(self.model, pi1, self.horizon)?,
                        procedure,
                        alpha: self.alpha,
                        w0: self.w0,
                        gamma,
                        trials: self.trials,
                        seed: self.seed,
                        keep_trace: false,
                    });
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub procedure: ProcedureSpec,
    pub gamma: GammaKind,
    pub pi1: f64,
    pub summary: Aggregate,
    pub seed: u64,
}

/// Runs every cell of the grid. Rows come back in grid order (procedure,
/// then γ, then π₁) whatever the thread count.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    let cells = grid.cells()?;
    let mut sequences: HashMap<String, GammaSequence> = HashMap::new();
    for kind in &grid.gammas {
        if let Entry::Vacant(slot) = sequences.entry(kind.to_string()) {
            slot.insert(GammaSequence::new(*kind)?);
        }
    }
    let sims = cells
        .into_iter()
        .map(|cell| {
            let gamma = sequences[&cell.gamma.to_string()].clone();
            Simulator::with_gamma(cell, gamma)
        })
        .collect::<Result<Vec<_>>>()?;
    sims.par_iter()
        .map(|sim| {
            let trials = sim.run()?;
            let cfg = sim.config();
            Ok(SweepRow {
                procedure: cfg.procedure,
                gamma: cfg.gamma,
                pi1: cfg.model.pi1,
                summary: aggregate(&trials)?,
                seed: cfg.seed,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W, precision: Precision) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let f = |x: f64| format_float(x, precision);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.procedure,
            row.gamma,
            f(row.pi1),
            f(row.summary.fdr),
            f(row.summary.fdr_se),
            f(row.summary.power),
            f(row.summary.power_se),
            row.summary.trials,
            row.seed
        )?;
    }
    Ok(())
}
