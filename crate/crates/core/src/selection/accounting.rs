//! Fronthaul load in complex scalars and leading-term FLOP counts.
//!
//! Big-O terms are counted with unit constants.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Complex scalars sent over the fronthaul when `k` users are each served by
/// `m` APs: `K m + (m²K² + K m)/2`. Exact for all inputs.
pub fn fronthaul_load(k: u64, m: u64) -> u128 {
    let (k, m) = (k as u128, m as u128);
    let km = k * m;
    // m²K² + Km = Km(Km + 1) is always even.
    km + km * (km + 1) / 2
}

/// The same expression for a fractional average cardinality.
pub fn fronthaul_load_real(k: f64, m: f64) -> f64 {
    let km = k * m;
    km + (km * km + km) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Distributed local MMSE filters: `L N³`.
    Proposed,
    /// Centralized soft interference cancellation: `(LN)³`.
    SoftIc,
    /// Multi-branch decision feedback with `B` branches: `B (LN)³`.
    MbDf,
    /// Joint channel estimation and detection:
    /// `(2K)³ + 6K(LN)² + 4KLNn − 2K + 1`.
    Jed,
    /// Per-bit LLR evaluation: `2M_c + 2·2^{M_c} + 4`.
    LlrStage,
    /// LLR-based selection:
    /// `(K/2)(m² + m) + (m³ − m)/3 + m² + 2(M_c + 2^{M_c}) + 4`.
    LlrSelection,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Proposed,
        Scheme::SoftIc,
        Scheme::MbDf,
        Scheme::Jed,
        Scheme::LlrStage,
        Scheme::LlrSelection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::SoftIc => "soft-ic",
            Scheme::MbDf => "mb-df",
            Scheme::Jed => "jed",
            Scheme::LlrStage => "llr-stage",
            Scheme::LlrSelection => "llr-selection",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dimensions entering the FLOP expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopParams {
    pub l: u64,
    pub n: u64,
    pub k: u64,
    /// Bits per constellation symbol.
    pub m_c: u32,
    /// Serving APs per user.
    pub m: f64,
    /// Decision-feedback branches.
    pub branches: u64,
    /// LLR block size.
    pub block: u64,
}

pub fn flop_count(scheme: Scheme, p: &FlopParams) -> f64 {
    let ln = (p.l * p.n) as f64;
    let k = p.k as f64;
    let mc = p.m_c as f64;
    let constellation = 2f64.powi(p.m_c as i32);
    match scheme {
        Scheme::Proposed => p.l as f64 * (p.n as f64).powi(3),
        Scheme::SoftIc => ln.powi(3),
        Scheme::MbDf => p.branches as f64 * ln.powi(3),
        Scheme::Jed => {
            (2.0 * k).powi(3) + 6.0 * k * ln * ln + 4.0 * k * ln * p.block as f64 - 2.0 * k + 1.0
        }
        Scheme::LlrStage => 2.0 * mc + 2.0 * constellation + 4.0,
        Scheme::LlrSelection => {
            let m = p.m;
            (k / 2.0) * (m * m + m)
                + (m * m * m - m) / 3.0
                + m * m
                + 2.0 * (mc + constellation)
                + 4.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: u64, n: u64, k: u64, m: f64) -> FlopParams {
        FlopParams {
            l,
            n,
            k,
            m_c: 2,
            m,
            branches: 8,
            block: 256,
        }
    }

    #[test]
    fn fronthaul_examples() {
        assert_eq!(fronthaul_load(10, 9), 4185);
        assert_eq!(fronthaul_load(10, 25), 31625);
        assert_eq!(fronthaul_load(0, 7), 0);
        assert_eq!(fronthaul_load(7, 0), 0);
        assert_eq!(fronthaul_load_real(10.0, 9.0), 4185.0);
    }

    #[test]
    fn flop_examples() {
        assert_eq!(flop_count(Scheme::LlrStage, &params(1, 1, 1, 1.0)), 16.0);
        assert_eq!(
            flop_count(Scheme::LlrSelection, &params(1, 1, 10, 1.0)),
            27.0
        );
        assert_eq!(flop_count(Scheme::SoftIc, &params(2, 4, 1, 1.0)), 512.0);
        assert_eq!(flop_count(Scheme::Proposed, &params(2, 4, 1, 1.0)), 128.0);
        assert_eq!(flop_count(Scheme::MbDf, &params(2, 4, 1, 1.0)), 8.0 * 512.0);
    }
}
