//! `key = value` configuration files and flag overrides.

use std::path::Path;

use clap::{Args, ValueEnum};

use crate::error::{Error, Result};
use crate::protocol::{ExperimentConfig, LabelResolution, LossAccounting, NuPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NuPolicyArg {
    Distinct,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelsArg {
    Resolved,
    Summed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossAccountingArg {
    PerConfiguration,
    Traced,
}

/// Flags describing one configuration; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Total photon number, star photon included.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// Star-photon occupancy per coherence interval.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Indistinguishability of the ground photons, comma separated; a single
    /// value applies to all of them.
    #[arg(long)]
    pub indist: Option<String>,
    #[arg(long, value_enum)]
    pub nu_policy: Option<NuPolicyArg>,
    #[arg(long)]
    pub lambda_nm: Option<f64>,
    #[arg(long = "L0-km", value_name = "KM")]
    pub l0_km: Option<f64>,
    /// Baseline in attenuation lengths.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Relative phase in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Whether detectors resolve internal labels.
    #[arg(long, value_enum)]
    pub labels: Option<LabelsArg>,
    /// How lost ground photons enter the outcome space.
    #[arg(long, value_enum)]
    pub loss_accounting: Option<LossAccountingArg>,
}

/// Partially specified configuration, before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub indist: Option<Vec<f64>>,
    pub nu_policy: Option<NuPolicy>,
    pub lambda_nm: Option<f64>,
    pub l0_km: Option<f64>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub labels: Option<LabelResolution>,
    pub loss_accounting: Option<LossAccounting>,
}

fn invalid(msg: String) -> Error {
    Error::ConfigInvalid(msg)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| invalid(format!("{key}: expected a number, got '{v}'")))
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let values = v
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(invalid(format!("{key}: empty list")));
    }
    Ok(values)
}

fn parse_nu_policy(v: &str) -> Result<NuPolicy> {
    match v.trim() {
        "distinct" | "DistinctNu" => Ok(NuPolicy::DistinctNu),
        "shared" | "SharedNu" => Ok(NuPolicy::SharedNu),
        other => Err(invalid(format!("nu_policy: expected distinct or shared, got '{other}'"))),
    }
}

fn parse_labels(v: &str) -> Result<LabelResolution> {
    match v.trim() {
        "resolved" => Ok(LabelResolution::Resolved),
        "summed" => Ok(LabelResolution::Summed),
        other => Err(invalid(format!("labels: expected resolved or summed, got '{other}'"))),
    }
}

fn parse_loss(v: &str) -> Result<LossAccounting> {
    match v.trim() {
        "per-configuration" => Ok(LossAccounting::PerConfiguration),
        "traced" => Ok(LossAccounting::Traced),
        other => Err(invalid(format!(
            "loss_accounting: expected per-configuration or traced, got '{other}'"
        ))),
    }
}

impl ConfigLayer {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "N" => {
                    layer.n = Some(
                        value
                            .parse()
                            .map_err(|_| invalid(format!("N: expected an integer, got '{value}'")))?,
                    )
                }
                "epsilon" => layer.epsilon = Some(parse_f64(key, value)?),
                "indist" => layer.indist = Some(parse_list(key, value)?),
                "nu_policy" => layer.nu_policy = Some(parse_nu_policy(value)?),
                "lambda_nm" => layer.lambda_nm = Some(parse_f64(key, value)?),
                "L0_km" => layer.l0_km = Some(parse_f64(key, value)?),
                "alpha" => layer.alpha = Some(parse_f64(key, value)?),
                "phi" => layer.phi = Some(parse_f64(key, value)?),
                "labels" => layer.labels = Some(parse_labels(value)?),
                "loss_accounting" => layer.loss_accounting = Some(parse_loss(value)?),
                other => return Err(invalid(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_args(args: &ConfigArgs) -> Result<Self> {
        Ok(ConfigLayer {
            n: args.n,
            epsilon: args.epsilon,
            indist: args.indist.as_deref().map(|v| parse_list("indist", v)).transpose()?,
            nu_policy: args.nu_policy.map(|p| match p {
                NuPolicyArg::Distinct => NuPolicy::DistinctNu,
                NuPolicyArg::Shared => NuPolicy::SharedNu,
            }),
            lambda_nm: args.lambda_nm,
            l0_km: args.l0_km,
            alpha: args.alpha,
            phi: args.phi,
            labels: args.labels.map(|l| match l {
                LabelsArg::Resolved => LabelResolution::Resolved,
                LabelsArg::Summed => LabelResolution::Summed,
            }),
            loss_accounting: args.loss_accounting.map(|l| match l {
                LossAccountingArg::PerConfiguration => LossAccounting::PerConfiguration,
                LossAccountingArg::Traced => LossAccounting::Traced,
            }),
        })
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            n: other.n.or(self.n),
            epsilon: other.epsilon.or(self.epsilon),
            indist: other.indist.or(self.indist),
            nu_policy: other.nu_policy.or(self.nu_policy),
            lambda_nm: other.lambda_nm.or(self.lambda_nm),
            l0_km: other.l0_km.or(self.l0_km),
            alpha: other.alpha.or(self.alpha),
            phi: other.phi.or(self.phi),
            labels: other.labels.or(self.labels),
            loss_accounting: other.loss_accounting.or(self.loss_accounting),
        }
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let n = self.n.unwrap_or(d.n);
        let indist = match self.indist {
            None => vec![1.0; n.saturating_sub(1)],
            Some(v) if v.len() == 1 => vec![v[0]; n.saturating_sub(1)],
            Some(v) => v,
        };
        let config = ExperimentConfig {
            n,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            indist,
            nu_policy: self.nu_policy.unwrap_or(d.nu_policy),
            wavelength_m: self.lambda_nm.map_or(d.wavelength_m, |v| v * 1e-9),
            attenuation_length_m: self.l0_km.map_or(d.attenuation_length_m, |v| v * 1e3),
            alpha: self.alpha.unwrap_or(d.alpha),
            phi: self.phi.unwrap_or(d.phi),
            observation: crate::protocol::Observation {
                labels: self.labels.unwrap_or(d.observation.labels),
                loss: self.loss_accounting.unwrap_or(d.observation.loss),
            },
        };
        config.validate()?;
        Ok(config)
    }
}

/// Configuration from an optional file overlaid with flags.
pub fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let base = match &args.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    base.overridden_by(ConfigLayer::from_args(args)?).resolve()
}

/// The configuration as `key = value` pairs, in file order.
pub fn config_echo(config: &ExperimentConfig) -> Vec<(String, String)> {
    let indist: Vec<String> = config.indist.iter().map(|v| v.to_string()).collect();
    vec![
        ("N".into(), config.n.to_string()),
        ("epsilon".into(), config.epsilon.to_string()),
        ("indist".into(), indist.join(",")),
        (
            "nu_policy".into(),
            match config.nu_policy {
                NuPolicy::DistinctNu => "distinct",
                NuPolicy::SharedNu => "shared",
            }
            .into(),
        ),
        ("lambda_nm".into(), (config.wavelength_m * 1e9).to_string()),
        ("L0_km".into(), (config.attenuation_length_m / 1e3).to_string()),
        ("alpha".into(), config.alpha.to_string()),
        ("phi".into(), config.phi.to_string()),
        (
            "labels".into(),
            match config.observation.labels {
                LabelResolution::Resolved => "resolved",
                LabelResolution::Summed => "summed",
            }
            .into(),
        ),
        (
            "loss_accounting".into(),
            match config.observation.loss {
                LossAccounting::PerConfiguration => "per-configuration",
                LossAccounting::Traced => "traced",
            }
            .into(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = ConfigLayer::parse("# comment\nN = 3\nepsilon = 0.5\nindist = 0.9, 0.8\nphi = 0.1 # trailing\n").unwrap();
        let flags = ConfigLayer {
            epsilon: Some(0.25),
            ..Default::default()
        };
        let cfg = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.epsilon, 0.25);
        assert_eq!(cfg.indist, vec![0.9, 0.8]);
        assert_eq!(cfg.phi, 0.1);
        assert_eq!(cfg.alpha, 4.0);
    }

    #[test]
    fn broadcast_and_units() {
        let cfg = ConfigLayer::parse("N = 4\nindist = 0.96\nlambda_nm = 500\nL0_km = 20\nnu_policy = shared")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(cfg.indist, vec![0.96; 3]);
        assert!((cfg.wavelength_m - 500e-9).abs() < 1e-20);
        assert_eq!(cfg.attenuation_length_m, 20e3);
        assert_eq!(cfg.nu_policy, NuPolicy::SharedNu);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigLayer::parse("bogus = 1").is_err());
        assert!(ConfigLayer::parse("N 3").is_err());
        assert!(ConfigLayer::parse("epsilon = x").is_err());
        assert!(ConfigLayer::parse("N = 3\nindist = 1,1,1").unwrap().resolve().is_err());
        assert!(ConfigLayer::parse("epsilon = 2").unwrap().resolve().is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ConfigLayer::parse("N = 3\nepsilon = 0.3\nindist = 0.5,0.25\nalpha = 2.5\nphi = -1")
            .unwrap()
            .resolve()
            .unwrap();
        let text: String = config_echo(&cfg).iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let again = ConfigLayer::parse(&text).unwrap().resolve().unwrap();
        assert!((cfg.wavelength_m - again.wavelength_m).abs() < 1e-20);
        assert_eq!(
            ExperimentConfig {
                wavelength_m: 0.0,
                ..cfg
            },
            ExperimentConfig {
                wavelength_m: 0.0,
                ..again
            }
        );
    }
}
