//! Config files: flat TOML whose keys mirror the command-line flags.
//! Flags override file values; every resolved config can be written back
//! out in a canonical form that resolves to the same settings.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use saffron_core::format::Precision;
use saffron_core::simulation::{ModelKind, SweepGrid};
use saffron_core::{GammaKind, ProcedureSpec};

use crate::error::CliError;

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_GAMMA: &str = "power:1.6";
pub const DEFAULT_MODEL: &str = "gaussian:3";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// `precision = 6` or `precision = "full"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrecisionValue {
    Digits(i64),
    Name(String),
}

impl From<Precision> for PrecisionValue {
    fn from(p: Precision) -> Self {
        match p {
            Precision::Significant(d) => PrecisionValue::Digits(d.into()),
            Precision::Full => PrecisionValue::Name("full".into()),
        }
    }
}

impl PrecisionValue {
    fn resolve(&self) -> Result<Precision, CliError> {
        let text = match self {
            PrecisionValue::Digits(d) => d.to_string(),
            PrecisionValue::Name(s) => s.clone(),
        };
        parse_key("precision", &text)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub procedure: Option<OneOrMany<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<OneOrMany<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi1: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub procedure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfflineFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    toml::from_str(text).map_err(|e| e.message().to_string())
}

pub fn to_toml<T: Serialize>(file: &T) -> String {
    toml::to_string(file).expect("config fields are plain scalars and arrays")
}

fn parse_key<T: FromStr>(key: &str, text: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    text.parse()
        .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
}

fn require_alpha(flag: Option<f64>, file: Option<f64>) -> Result<f64, CliError> {
    flag.or(file).ok_or_else(|| {
        CliError::Usage(
            "--alpha is required (on the command line or as `alpha` in --config)".into(),
        )
    })
}

fn check_unit(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "{key} must lie in (0, 1), got {v}"
        )))
    }
}

fn check_levels(alpha: f64, w0: f64) -> Result<(), CliError> {
    check_unit("alpha", alpha)?;
    if !(w0 > 0.0 && w0 <= alpha) {
        return Err(CliError::Usage(format!(
            "w0 must lie in (0, alpha], got {w0}"
        )));
    }
    Ok(())
}

fn procedure_list(names: &[String], lambda: f64) -> Result<Vec<ProcedureSpec>, CliError> {
    names
        .iter()
        .map(|n| {
            ProcedureSpec::parse_with_lambda(n, lambda)
                .map_err(|e| CliError::Usage(format!("config key `procedure`: {e}")))
        })
        .collect()
}

/// Values given on the command line for `sweep`; `None`/empty means unset.
#[derive(Debug, Clone, Default)]
pub struct SweepFlags {
    pub model: Option<ModelKind>,
    pub procedure: Vec<String>,
    pub gamma: Vec<GammaKind>,
    pub pi1: Vec<f64>,
    pub alpha: Option<f64>,
    pub w0: Option<f64>,
    pub lambda: Option<f64>,
    pub horizon: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub precision: Option<Precision>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub grid: SweepGrid,
    pub lambda: f64,
    pub precision: Precision,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl SweepSettings {
    pub fn resolve(flags: SweepFlags, file: SweepFile) -> Result<Self, CliError> {
        let alpha = require_alpha(flags.alpha, file.alpha)?;
        let w0 = flags.w0.or(file.w0).unwrap_or(alpha / 2.0);
        check_levels(alpha, w0)?;
        let lambda = check_unit(
            "lambda",
            flags.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
        )?;

        let model = match (flags.model, file.model) {
            (Some(m), _) => m,
            (None, Some(s)) => parse_key("model", &s)?,
            (None, None) => DEFAULT_MODEL.parse()?,
        };
        let names = if flags.procedure.is_empty() {
            file.procedure
                .map(OneOrMany::into_vec)
                .unwrap_or_else(|| vec!["saffron".into()])
        } else {
            flags.procedure
        };
        let procedures = procedure_list(&names, lambda)?;
        let gammas = if flags.gamma.is_empty() {
            file.gamma
                .map(OneOrMany::into_vec)
                .unwrap_or_else(|| vec![DEFAULT_GAMMA.into()])
                .iter()
                .map(|g| parse_key("gamma", g))
                .collect::<Result<_, _>>()?
        } else {
            flags.gamma
        };
        let pi1 = if flags.pi1.is_empty() {
            file.pi1
                .map(OneOrMany::into_vec)
                .unwrap_or_else(SweepGrid::default_pi1)
        } else {
            flags.pi1
        };
        if let Some(&bad) = pi1.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(CliError::Usage(format!(
                "pi1 values must lie in [0, 1], got {bad}"
            )));
        }
        let horizon = flags.horizon.or(file.horizon).unwrap_or(DEFAULT_HORIZON);
        let trials = flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
        if horizon == 0 || trials == 0 {
            return Err(CliError::Usage("T and trials must be at least 1".into()));
        }
        let precision = match (flags.precision, file.precision) {
            (Some(p), _) => p,
            (None, Some(v)) => v.resolve()?,
            (None, None) => Precision::default(),
        };
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        Ok(Self {
            grid: SweepGrid {
                model,
                horizon,
                pi1,
                procedures,
                gammas,
                alpha,
                w0,
                trials,
                seed: flags.seed.or(file.seed).unwrap_or(0),
            },
            lambda,
            precision,
            threads,
            out: flags.out.or(file.out),
        })
    }

    pub fn canonical(&self) -> SweepFile {
        let g = &self.grid;
        SweepFile {
            model: Some(g.model.to_string()),
            procedure: Some(OneOrMany::Many(
                g.procedures.iter().map(|p| p.name().to_string()).collect(),
            )),
            gamma: Some(OneOrMany::Many(
                g.gammas.iter().map(|k| k.to_string()).collect(),
            )),
            pi1: Some(OneOrMany::Many(g.pi1.clone())),
            alpha: Some(g.alpha),
            w0: Some(g.w0),
            lambda: Some(self.lambda),
            horizon: Some(g.horizon),
            trials: Some(g.trials),
            seed: Some(g.seed),
            precision: Some(self.precision.into()),
            threads: self.threads,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StreamFlags {
    pub procedure: Option<String>,
    pub gamma: Option<GammaKind>,
    pub alpha: Option<f64>,
    pub w0: Option<f64>,
    pub lambda: Option<f64>,
    pub precision: Option<Precision>,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamSettings {
    pub procedure: ProcedureSpec,
    pub gamma: GammaKind,
    pub alpha: f64,
    pub w0: f64,
    pub lambda: f64,
    pub precision: Precision,
    pub input: Option<PathBuf>,
}

impl StreamSettings {
    pub fn resolve(flags: StreamFlags, file: StreamFile) -> Result<Self, CliError> {
        let alpha = require_alpha(flags.alpha, file.alpha)?;
        let w0 = flags.w0.or(file.w0).unwrap_or(alpha / 2.0);
        check_levels(alpha, w0)?;
        let lambda = check_unit(
            "lambda",
            flags.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
        )?;
        let name = flags
            .procedure
            .or(file.procedure)
            .unwrap_or_else(|| "saffron".into());
        let procedure = procedure_list(&[name], lambda)?[0];
        let gamma = match (flags.gamma, file.gamma) {
            (Some(g), _) => g,
            (None, Some(s)) => parse_key("gamma", &s)?,
            (None, None) => DEFAULT_GAMMA.parse()?,
        };
        let precision = match (flags.precision, file.precision) {
            (Some(p), _) => p,
            (None, Some(v)) => v.resolve()?,
            (None, None) => Precision::default(),
        };
        Ok(Self {
            procedure,
            gamma,
            alpha,
            w0,
            lambda,
            precision,
            input: flags.input.or(file.input),
        })
    }

    pub fn canonical(&self) -> StreamFile {
        StreamFile {
            procedure: Some(self.procedure.name().into()),
            gamma: Some(self.gamma.to_string()),
            alpha: Some(self.alpha),
            w0: Some(self.w0),
            lambda: Some(self.lambda),
            precision: Some(self.precision.into()),
            input: self.input.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bh,
    Storey,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "bh" => Ok(Method::Bh),
            "storey" => Ok(Method::Storey),
            other => Err(format!("unknown method {other:?} (expected bh or storey)")),
        }
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bh => "bh",
            Method::Storey => "storey",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OfflineFlags {
    pub method: Option<Method>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub precision: Option<Precision>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSettings {
    pub method: Method,
    pub alpha: f64,
    pub lambda: f64,
    pub precision: Precision,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl OfflineSettings {
    pub fn resolve(flags: OfflineFlags, file: OfflineFile) -> Result<Self, CliError> {
        let alpha = check_unit("alpha", require_alpha(flags.alpha, file.alpha)?)?;
        let lambda = check_unit(
            "lambda",
            flags.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
        )?;
        let method = match (flags.method, file.method) {
            (Some(m), _) => m,
            (None, Some(s)) => parse_key("method", &s)?,
            (None, None) => Method::Bh,
        };
        let precision = match (flags.precision, file.precision) {
            (Some(p), _) => p,
            (None, Some(v)) => v.resolve()?,
            (None, None) => Precision::default(),
        };
        Ok(Self {
            method,
            alpha,
            lambda,
            precision,
            input: flags.input.or(file.input),
            out: flags.out.or(file.out),
        })
    }

    pub fn canonical(&self) -> OfflineFile {
        OfflineFile {
            method: Some(self.method.name().into()),
            alpha: Some(self.alpha),
            lambda: Some(self.lambda),
            precision: Some(self.precision.into()),
            input: self.input.clone(),
            out: self.out.clone(),
        }
    }
}
