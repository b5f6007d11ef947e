//! Online false discovery rate control.
//!
//! Procedures ([`Saffron`], [`Lord`], [`AlphaInvesting`]) consume a stream
//! of p-values one at a time, fixing each test level before the p-value is
//! seen. The [`estimators`] module computes the FDP estimates those levels
//! are built to control, [`offline`] holds the batch BH and Storey-BH
//! baselines, and [`simulation`] runs seeded Monte Carlo experiments.
//!
//! ```
//! use saffron_core::{GammaSequence, LambdaRule, OnlineProcedure, PValue, Saffron};
//!
//! let gamma = GammaSequence::power_law(1.6)?;
//! let mut saffron = Saffron::new(0.05, 0.025, LambdaRule::Constant(0.5), gamma)?;
//! let level = saffron.next_level();
//! let record = saffron.observe(PValue::new(1e-6)?)?;
//! assert_eq!(record.alpha, level.alpha);
//! assert!(record.rejected);
//! # Ok::<(), saffron_core::FdrError>(())
//! ```

pub mod error;
pub mod estimators;
pub mod format;
pub mod gamma;
pub mod normal;
pub mod offline;
pub mod procedures;
pub mod simulation;
pub mod types;

pub use error::{FdrError, Result};
pub use gamma::{GammaKind, GammaSequence};
pub use procedures::{
    AlphaInvesting, LambdaRule, Lord, OnlineProcedure, ProcedureSpec, Saffron, SpendRule,
};
pub use types::{fdp_of, power_of, DecisionRecord, HypothesisLabel, Level, PValue, TrialResult};
