//! Run configuration: defaults, an optional JSON file, then command-line
//! flags, each layer overriding the previous one.

use std::fs;
use std::path::Path;

use kljn_core::experiment::{ExperimentConfig, DEFAULT_SEED};
use kljn_core::{CaseLabel, NonlinearityParams, ResistorPair};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default sweep range: six decades centred on the operating temperature.
pub const DEFAULT_TEFF_MIN: f64 = 1e15;
pub const DEFAULT_TEFF_MAX: f64 = 1e21;
pub const DEFAULT_PER_DECADE: usize = 6;
pub const DEFAULT_SCATTER_POINTS: usize = 2000;
pub const DEFAULT_DISTORTION_GAMMA: usize = 1_000_000;

/// Every tunable, all optional. This is both the config-file schema and the
/// config echo stored in run manifests.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub teff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol_faithful: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub teff_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub teff_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_decade: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub situation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeat: Option<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Manifest { config: RunConfig },
    Plain(RunConfig),
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    /// Reads a plain config object or the `config` member of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|source| LabError::ConfigFile {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(match file {
            ConfigFile::Manifest { config } | ConfigFile::Plain(config) => config,
        })
    }

    /// Values set in `other` replace ours.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        overlay!(self, other; rh, rl, teff, bandwidth, case, b, c, gamma, repeats, seed,
            protocol_faithful, teff_min, teff_max, per_decade, points, situation, repeat);
        self
    }

    pub fn case(&self) -> Result<Option<CaseLabel>> {
        self.case
            .as_deref()
            .map(|s| s.parse().map_err(|e| LabError::Config(format!("--case {s}: {e}"))))
            .transpose()
    }

    /// Cases a command should cover: the requested one, the case implied by
    /// explicit coefficients, or `fallback`.
    pub fn cases(&self, fallback: &[CaseLabel]) -> Result<Vec<CaseLabel>> {
        match (self.case()?, self.b.is_some() || self.c.is_some()) {
            (Some(case), _) => Ok(vec![case]),
            (None, true) => Ok(vec![CaseLabel::classify(&self.params_for(CaseLabel::Ideal)?)]),
            (None, false) => Ok(fallback.to_vec()),
        }
    }

    /// The case's reference coefficients with any `b`/`c` overrides applied.
    pub fn params_for(&self, case: CaseLabel) -> Result<NonlinearityParams> {
        let base = case.params();
        Ok(NonlinearityParams::with_unit_gain(
            self.b.unwrap_or(base.b()),
            self.c.unwrap_or(base.c()),
        )?)
    }

    pub fn gammas(&self, fallback: &[usize]) -> Vec<usize> {
        self.gamma.map_or_else(|| fallback.to_vec(), |g| vec![g])
    }

    /// A validated cell for `case`. `gamma` defaults to 1000.
    pub fn experiment(&self, case: CaseLabel) -> Result<ExperimentConfig> {
        let reference = ExperimentConfig::reference(case);
        let pair = ResistorPair::new(
            self.rh.unwrap_or(reference.pair.r_h()),
            self.rl.unwrap_or(reference.pair.r_l()),
        )?;
        let config = ExperimentConfig {
            pair,
            t_eff: self.teff.unwrap_or(reference.t_eff),
            bandwidth: self.bandwidth.unwrap_or(reference.bandwidth),
            params: self.params_for(case)?,
            gamma: self.gamma.unwrap_or(reference.gamma),
            repeats: self.repeats.unwrap_or(reference.repeats),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            case,
            protocol_faithful: self.protocol_faithful.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_later_layer() {
        let file = RunConfig {
            seed: Some(1),
            gamma: Some(20),
            ..Default::default()
        };
        let flags = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.gamma, Some(20));
    }

    #[test]
    fn coefficient_overrides_and_mismatch() {
        let neg = RunConfig {
            case: Some("d2".into()),
            b: Some(-6e-3),
            ..Default::default()
        };
        assert_eq!(neg.experiment(CaseLabel::D2).unwrap().params.b(), -6e-3);
        let bad = RunConfig {
            case: Some("d2".into()),
            c: Some(1e-5),
            ..Default::default()
        };
        assert_eq!(bad.experiment(CaseLabel::D2).unwrap_err().exit_code(), 2);
        let implied = RunConfig {
            c: Some(1e-5),
            ..Default::default()
        };
        assert_eq!(implied.cases(&CaseLabel::ALL).unwrap(), vec![CaseLabel::D3]);
    }

    #[test]
    fn parses_plain_and_manifest_files() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("plain.json");
        fs::write(&plain, r#"{"seed": 5, "case": "d3"}"#).unwrap();
        let cfg = RunConfig::load(&plain).unwrap();
        assert_eq!(cfg.seed, Some(5));
        assert_eq!(cfg.case().unwrap(), Some(CaseLabel::D3));

        let manifest = dir.path().join("m.manifest");
        fs::write(&manifest, r#"{"command": "table1", "config": {"repeats": 7}}"#).unwrap();
        assert_eq!(RunConfig::load(&manifest).unwrap().repeats, Some(7));

        let bad = dir.path().join("bad.json");
        fs::write(&bad, r#"{"sed": 5}"#).unwrap();
        assert_eq!(RunConfig::load(&bad).unwrap_err().exit_code(), 2);
    }
}
