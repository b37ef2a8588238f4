use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical scenario parameters.
///
/// Keys in configuration files use the field names below; `L`, `N` and `K`
/// are accepted as aliases for the three size parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of access points (L).
    #[serde(alias = "L")]
    pub ap_count: usize,
    /// Antennas per access point (N).
    #[serde(alias = "N")]
    pub antennas: usize,
    /// Number of single-antenna users (K).
    #[serde(alias = "K")]
    pub user_count: usize,
    /// Side of the square coverage area in meters.
    pub area_side: f64,
    /// Height difference between APs and users in meters.
    pub ap_user_height_delta: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// Coherence block length in symbols.
    pub tau_c: usize,
    /// Uplink data symbols per coherence block.
    pub tau_u: usize,
    /// Angular standard deviation of the local scattering model, degrees.
    pub asd_deg: f64,
    pub shadow_std_db: f64,
    pub p_max_mw: f64,
    pub fpc_exponent: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            ap_count: 16,
            antennas: 2,
            user_count: 8,
            area_side: 1000.0,
            ap_user_height_delta: 10.0,
            carrier_hz: 2e9,
            bandwidth_hz: 2e7,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 5.0,
            tau_c: 140,
            tau_u: 128,
            asd_deg: 15.0,
            shadow_std_db: 4.0,
            p_max_mw: 100.0,
            fpc_exponent: 0.5,
        }
    }
}

impl ScenarioConfig {
    pub fn with_size(ap_count: usize, antennas: usize, user_count: usize) -> Self {
        Self {
            ap_count,
            antennas,
            user_count,
            ..Self::default()
        }
    }

    /// Pilot length, `tau_c - tau_u`.
    pub fn tau_p(&self) -> usize {
        self.tau_c.saturating_sub(self.tau_u)
    }

    /// Thermal noise power in mW over the configured bandwidth.
    pub fn noise_power_mw(&self) -> f64 {
        let dbm = self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db;
        10f64.powf(dbm / 10.0)
    }

    pub fn asd_rad(&self) -> f64 {
        self.asd_deg.to_radians()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.ap_count == 0 || self.antennas == 0 || self.user_count == 0 {
            return bad("L, N and K must all be at least 1");
        }
        if self.tau_u >= self.tau_c {
            return bad("tau_p = tau_c - tau_u must be positive");
        }
        if !(self.area_side > 0.0) {
            return bad("area_side must be positive");
        }
        if !(self.p_max_mw > 0.0) || !(self.bandwidth_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return bad("powers, bandwidth and carrier must be positive");
        }
        if self.asd_deg < 0.0 {
            return Err(Error::NegativeAngularSpread(self.asd_deg));
        }
        if self.shadow_std_db < 0.0 || self.ap_user_height_delta < 0.0 {
            return bad("shadowing std and height delta must be non-negative");
        }
        if !self.fpc_exponent.is_finite() {
            return bad("fpc_exponent must be finite");
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. Missing keys keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
