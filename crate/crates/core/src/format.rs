//! Float formatting for CSV and stream output.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, FdrError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// `%g`-style with this many significant digits.
    Significant(u8),
    /// Shortest representation that round-trips.
    Full,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Significant(6)
    }
}

impl FromStr for Precision {
    type Err = FdrError;

    fn from_str(s: &str) -> Result<Self, FdrError> {
        match s.trim() {
            "full" => Ok(Precision::Full),
            v => match v.parse::<u8>() {
                Ok(d @ 1..=17) => Ok(Precision::Significant(d)),
                _ => Err(invalid(format!(
                    "precision must be 1..=17 or \"full\", got {s:?}"
                ))),
            },
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Significant(d) => write!(f, "{d}"),
            Precision::Full => f.write_str("full"),
        }
    }
}

pub fn format_float(x: f64, precision: Precision) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    match precision {
        Precision::Full => {
            let exp = x.abs().log10().floor() as i32;
            if (-5..16).contains(&exp) {
                format!("{x}")
            } else {
                format!("{x:e}")
            }
        }
        Precision::Significant(digits) => {
            let digits = digits.max(1) as usize;
            let sci = format!("{:.*e}", digits - 1, x);
            let (mantissa, exp) = sci.split_once('e').expect("exponent form");
            let exp: i32 = exp.parse().expect("integer exponent");
            if exp < -5 || exp >= digits as i32 {
                format!("{}e{}", trim_zeros(mantissa), exp)
            } else {
                let decimals = (digits as i32 - 1 - exp).max(0) as usize;
                trim_zeros(&format!("{x:.decimals$}")).to_string()
            }
        }
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
