use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codec::DEFAULT_CODE_LENGTH;
use crate::error::{Error, Result};
use crate::netmodel::ScenarioConfig;
use crate::selection::Strategy;

/// Output tables a run can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emit {
    Ber,
    SeCdf,
    Fronthaul,
    Flops,
    Cardinality,
}

impl Emit {
    pub const ALL: [Emit; 5] = [
        Emit::Ber,
        Emit::SeCdf,
        Emit::Fronthaul,
        Emit::Flops,
        Emit::Cardinality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emit::Ber => "ber",
            Emit::SeCdf => "se-cdf",
            Emit::Fronthaul => "fronthaul",
            Emit::Flops => "flops",
            Emit::Cardinality => "cardinality",
        }
    }
}

impl fmt::Display for Emit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Emit::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown output {s:?}")))
    }
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// L=16, N=2, K=8, 200 trials: minutes on a laptop.
    Desk,
    /// L=K=100, N=4, 10⁴ trials.
    Paper,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Profile::Desk),
            "paper" | "full" => Ok(Profile::Paper),
            other => Err(Error::InvalidConfig(format!(
                "unknown profile {other:?}; expected desk or paper"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub strategies: Vec<Strategy>,
    pub snr_points_db: Vec<f64>,
    pub trials: u64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub n_stat: usize,
    /// Soft interference cancellation at the APs in later outer iterations.
    pub soft_ic: bool,
    pub master_seed: u64,
    pub code_length: usize,
    pub code_seed: u64,
    pub workers: usize,
    pub output_path: PathBuf,
    pub emit: BTreeSet<Emit>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::profile(Profile::Desk)
    }
}

impl ExperimentConfig {
    pub fn profile(profile: Profile) -> Self {
        let (scenario, trials) = match profile {
            Profile::Desk => (ScenarioConfig::default(), 200),
            Profile::Paper => (ScenarioConfig::with_size(100, 4, 100), 10_000),
        };
        Self {
            scenario,
            strategies: Strategy::ALL.to_vec(),
            snr_points_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            trials,
            n_outer: 3,
            n_inner: 20,
            n_stat: 500,
            soft_ic: true,
            master_seed: 1,
            code_length: DEFAULT_CODE_LENGTH,
            code_seed: 2024,
            workers: 1,
            output_path: PathBuf::from("results"),
            emit: Emit::ALL.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_points_db.is_empty() || self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return bad("the SNR list must be non-empty and finite".into());
        }
        if self.strategies.is_empty() {
            return bad("at least one strategy is required".into());
        }
        if self.n_outer == 0 || self.n_stat == 0 {
            return bad("n_outer and n_stat must be at least 1".into());
        }
        if self.code_length == 0 || !self.code_length.is_multiple_of(2) {
            return bad(format!(
                "code_length {} must be positive and even",
                self.code_length
            ));
        }
        if self.code_length / 2 != self.scenario.tau_u {
            return bad(format!(
                "a frame of {} code bits needs {} data symbols, but tau_u is {}",
                self.code_length,
                self.code_length / 2,
                self.scenario.tau_u
            ));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. Experiment keys
    /// are listed below; every other key must be a scenario field.
    pub fn apply_kv_str(&mut self, text: &str) -> Result<()> {
        let mut table: toml::Table = toml::from_str(text)?;
        let mut take = |key: &str| table.remove(key);
        let invalid =
            |key: &str, v: &toml::Value| Error::InvalidConfig(format!("bad value for {key}: {v}"));

        if let Some(v) = take("profile") {
            let name = v.as_str().ok_or_else(|| invalid("profile", &v))?;
            let base = Self::profile(name.parse()?);
            self.scenario = base.scenario;
            self.trials = base.trials;
        }
        if let Some(v) = take("strategies").or_else(|| take("strategy")) {
            self.strategies =
                parse_list(&v, |s| s.parse()).map_err(|_| invalid("strategies", &v))?;
        }
        if let Some(v) = take("snr_db").or_else(|| take("snr_points_db")) {
            self.snr_points_db = match &v {
                toml::Value::String(s) => parse_snr_spec(s)?,
                other => parse_list(other, |s| s.parse::<f64>().map_err(|_| ()))
                    .map_err(|_| invalid("snr_db", &v))?,
            };
        }
        if let Some(v) = take("emit") {
            self.emit = parse_list(&v, |s| s.parse())
                .map_err(|_| invalid("emit", &v))?
                .into_iter()
                .collect();
        }
        let int = |v: toml::Value, key: &str| -> Result<u64> {
            v.as_integer()
                .filter(|i| *i >= 0)
                .map(|i| i as u64)
                .ok_or_else(|| invalid(key, &v))
        };
        if let Some(v) = take("trials") {
            self.trials = int(v, "trials")?;
        }
        if let Some(v) = take("n_outer") {
            self.n_outer = int(v, "n_outer")? as usize;
        }
        if let Some(v) = take("n_inner") {
            self.n_inner = int(v, "n_inner")? as usize;
        }
        if let Some(v) = take("n_stat") {
            self.n_stat = int(v, "n_stat")? as usize;
        }
        if let Some(v) = take("seed").or_else(|| take("master_seed")) {
            self.master_seed = int(v, "seed")?;
        }
        if let Some(v) = take("code_length") {
            self.code_length = int(v, "code_length")? as usize;
        }
        if let Some(v) = take("code_seed") {
            self.code_seed = int(v, "code_seed")?;
        }
        if let Some(v) = take("workers") {
            self.workers = int(v, "workers")? as usize;
        }
        if let Some(v) = take("soft_ic") {
            self.soft_ic = v.as_bool().ok_or_else(|| invalid("soft_ic", &v))?;
        }
        if let Some(v) = take("out").or_else(|| take("output_path")) {
            self.output_path = PathBuf::from(v.as_str().ok_or_else(|| invalid("out", &v))?);
        }

        if !table.is_empty() {
            // Remaining keys override scenario fields.
            let mut merged = toml::Table::try_from(&self.scenario)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            for (k, v) in table {
                let canonical = match k.as_str() {
                    "L" => "ap_count".to_owned(),
                    "N" => "antennas".to_owned(),
                    "K" => "user_count".to_owned(),
                    _ => k,
                };
                merged.insert(canonical, v);
            }
            self.scenario = toml::Value::Table(merged).try_into()?;
        }
        self.validate()
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv_str(text)?;
        Ok(cfg)
    }
}

fn parse_list<T, E>(
    v: &toml::Value,
    parse: impl Fn(&str) -> std::result::Result<T, E>,
) -> std::result::Result<Vec<T>, ()> {
    match v {
        toml::Value::String(s) => s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| parse(p.trim()).map_err(|_| ()))
            .collect(),
        toml::Value::Array(items) => items
            .iter()
            .map(|item| match item {
                toml::Value::String(s) => parse(s).map_err(|_| ()),
                toml::Value::Integer(i) => parse(&i.to_string()).map_err(|_| ()),
                toml::Value::Float(f) => parse(&f.to_string()).map_err(|_| ()),
                _ => Err(()),
            })
            .collect(),
        toml::Value::Integer(i) => parse(&i.to_string()).map(|x| vec![x]).map_err(|_| ()),
        toml::Value::Float(f) => parse(&f.to_string()).map(|x| vec![x]).map_err(|_| ()),
        _ => Err(()),
    }
}

/// Parses `"a,b,c"` or an inclusive range `"start:step:stop"`.
pub fn parse_snr_spec(spec: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::InvalidConfig(format!(
            "bad SNR specification {spec:?}; use a,b,c or start:step:stop"
        ))
    };
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    let points: Vec<f64> = spec
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if points.is_empty() {
        return Err(bad());
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
        assert_eq!(ExperimentConfig::default().trials, 200);
    }

    #[test]
    fn paper_profile_scale() {
        let c = ExperimentConfig::profile(Profile::Paper);
        assert_eq!(
            (
                c.scenario.ap_count,
                c.scenario.user_count,
                c.scenario.antennas
            ),
            (100, 100, 4)
        );
        assert_eq!(c.trials, 10_000);
    }

    #[test]
    fn snr_specs() {
        assert_eq!(parse_snr_spec("-5, 0,5").unwrap(), vec![-5.0, 0.0, 5.0]);
        assert_eq!(
            parse_snr_spec("0:2.5:10").unwrap(),
            vec![0.0, 2.5, 5.0, 7.5, 10.0]
        );
        assert!(parse_snr_spec("0:0:10").is_err());
        assert!(parse_snr_spec("").is_err());
    }

    #[test]
    fn flat_file_overrides() {
        let text = "trials = 3\nstrategies = \"llsf, all-aps\"\nsnr_db = [0, 10]\nK = 4\nasd_deg = 5.0\nsoft_ic = false\n";
        let c = ExperimentConfig::from_kv_str(text).unwrap();
        assert_eq!(c.trials, 3);
        assert_eq!(c.strategies, vec![Strategy::Llsf, Strategy::AllAps]);
        assert_eq!(c.snr_points_db, vec![0.0, 10.0]);
        assert_eq!(c.scenario.user_count, 4);
        assert_eq!(c.scenario.asd_deg, 5.0);
        assert!(!c.soft_ic);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_kv_str("colour = 3").is_err());
        assert!(ExperimentConfig::from_kv_str("trials = 0").is_err());
        assert!(ExperimentConfig::from_kv_str("strategies = \"best\"").is_err());
    }
}
