use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AP-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Each AP serves a random subset of users.
    Random,
    /// Largest large-scale fading: keep links whose gain beats the AP's mean.
    Llsf,
    /// Largest estimated channel gain, same mean test on `η‖ĥ‖²`.
    Lecg,
    /// LLSF followed by the mean-|LLR| refinement.
    LlrLlsf,
    /// LECG followed by the mean-|LLR| refinement.
    LlrLecg,
    /// Mean-|LLR| test over all users with every AP listening to everyone.
    LlrM,
    /// Every AP serves every user.
    AllAps,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Random,
        Strategy::Llsf,
        Strategy::Lecg,
        Strategy::LlrLlsf,
        Strategy::LlrLecg,
        Strategy::LlrM,
        Strategy::AllAps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Llsf => "llsf",
            Strategy::Lecg => "lecg",
            Strategy::LlrLlsf => "llr-llsf",
            Strategy::LlrLecg => "llr-lecg",
            Strategy::LlrM => "llr-m",
            Strategy::AllAps => "all-aps",
        }
    }

    /// Whether selection consumes stage-one local LLRs.
    pub fn needs_llrs(self) -> bool {
        matches!(self, Strategy::LlrLlsf | Strategy::LlrLecg | Strategy::LlrM)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key || (key == "allaps" && *st == Strategy::AllAps))
            .ok_or_else(|| {
                let names: Vec<&str> = Strategy::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown strategy {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("LLR_M".parse::<Strategy>().unwrap(), Strategy::LlrM);
        assert!("best".parse::<Strategy>().is_err());
    }
}
