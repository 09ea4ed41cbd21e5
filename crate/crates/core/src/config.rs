//! Run configuration: one TOML document covering the system, stochastic
//! models, costs, screening data and search settings.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{DesignConfig, PsoParams, SearchSettings};
use crate::profiles::{read_timeseries, LoadModel, PvModel, Source, SystemProfiles, WtModel};
use crate::reliability::{FleetOutage, ReliabilitySettings};
use crate::selection::{illustrative_technologies, DerCostSpec, QfdMatrix};
use crate::sizing::{BessSpec, CostSpecs};

const INIT_HEADER: &str = "\
# Microgrid capacity design configuration.
#
# Cost figures under [costs] and [[selection.technologies]] are illustrative
# placeholders, not calibrated to any published study. Replace them with
# project-specific estimates before drawing conclusions from absolute costs.
#
# Each of load, pv and wind needs exactly one source: its model table here,
# or a CSV trace path under [inputs] (first line `dt_hours=1`, then one MW
# value per line). Relative paths resolve against this file's directory.

";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub biomass_capacity_mw: f64,
    pub alpha: f64,
    pub lole_target_days_per_year: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    pub capacity_factor_grid: Vec<f64>,
    pub technologies: Vec<DerCostSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub plg: Vec<f64>,
    pub prm_grid: Vec<f64>,
    /// Battery held fixed along the curves.
    pub bess: BessSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: Format,
    /// `error`, `warn`, `info`, `debug` or `trace`.
    pub log_level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<LoadModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv: Option<PvModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind: Option<WtModel>,
    #[serde(default)]
    pub inputs: Inputs,
    pub outage: FleetOutage,
    pub reliability: ReliabilitySettings,
    pub search: SearchSettings,
    pub pso: PsoParams,
    pub costs: CostSpecs,
    pub selection: SelectionSection,
    pub qfd: QfdMatrix,
    pub sweep: SweepSection,
    pub curve: CurveSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let design = DesignConfig::default();
        Self {
            system: SystemSection {
                biomass_capacity_mw: design.biomass_capacity_mw,
                alpha: design.alpha,
                lole_target_days_per_year: design.lole_target_days_per_year,
            },
            load: Some(LoadModel::default()),
            pv: Some(PvModel::default()),
            wind: Some(WtModel::default()),
            inputs: Inputs::default(),
            outage: design.outage,
            reliability: design.reliability,
            search: design.search,
            pso: design.pso,
            costs: design.costs,
            selection: SelectionSection {
                capacity_factor_grid: (1..=20).map(|i| f64::from(i) / 20.0).collect(),
                technologies: illustrative_technologies(),
            },
            qfd: QfdMatrix::community_microgrid(),
            sweep: SweepSection {
                alphas: vec![0.0, 0.2, 0.5, 0.8, 0.9, 1.0],
            },
            curve: CurveSection {
                plg: vec![0.2, 0.5, 0.9],
                prm_grid: (0..10).map(|i| f64::from(i) / 10.0).collect(),
                bess: BessSpec::default(),
            },
            output: OutputSection {
                dir: PathBuf::from("out"),
                format: Format::Both,
                log_level: "info".into(),
            },
        }
    }
}

fn source<M>(
    name: &str,
    model: &Option<M>,
    trace: &Option<PathBuf>,
    base: &Path,
) -> Result<Source<M>>
where
    M: Clone,
{
    match (model, trace) {
        (Some(m), None) => Ok(Source::Model(m.clone())),
        (None, Some(path)) => {
            let path = base.join(path);
            let file = File::open(&path).map_err(|e| {
                Error::Config(format!(
                    "inputs.{name}: cannot open {}: {e}",
                    path.display()
                ))
            })?;
            let ts = read_timeseries(BufReader::new(file))
                .map_err(|e| Error::Config(format!("inputs.{name} ({}): {e}", path.display())))?;
            Ok(Source::Trace(ts))
        }
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "`{name}` has both a model table and inputs.{name}; give exactly one"
        ))),
        (None, None) => Err(Error::Config(format!(
            "`{name}` needs a model table [{name}] or a trace path inputs.{name}"
        ))),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The document written by `init`: every setting spelled out.
    pub fn init_document() -> Result<String> {
        Ok(format!(
            "{INIT_HEADER}{}",
            Self::default().to_toml_string()?
        ))
    }

    /// Signal sources, reading any CSV traces relative to `base_dir`.
    pub fn profiles(&self, base_dir: &Path) -> Result<SystemProfiles> {
        let profiles = SystemProfiles {
            load: source("load", &self.load, &self.inputs.load, base_dir)?,
            pv: source("pv", &self.pv, &self.inputs.pv, base_dir)?,
            wind: source("wind", &self.wind, &self.inputs.wind, base_dir)?,
        };
        profiles.validate()?;
        Ok(profiles)
    }

    pub fn design_config(&self, base_dir: &Path) -> Result<DesignConfig> {
        let cfg = DesignConfig {
            profiles: self.profiles(base_dir)?,
            biomass_capacity_mw: self.system.biomass_capacity_mw,
            alpha: self.system.alpha,
            lole_target_days_per_year: self.system.lole_target_days_per_year,
            costs: self.costs.clone(),
            outage: self.outage,
            reliability: self.reliability.clone(),
            search: self.search,
            pso: self.pso,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
        let init = RunConfig::init_document().unwrap();
        assert_eq!(RunConfig::from_toml_str(&init).unwrap(), cfg);
    }

    #[test]
    fn missing_section_is_named() {
        let text = RunConfig::default().to_toml_string().unwrap();
        let mut doc: toml::Table = toml::from_str(&text).unwrap();
        doc.remove("qfd");
        let err = RunConfig::from_toml_str(&toml::to_string(&doc).unwrap()).unwrap_err();
        assert!(
            matches!(&err, Error::Config(m) if m.contains("qfd")),
            "{err}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = RunConfig::default().to_toml_string().unwrap() + "\n[extra]\nx = 1\n";
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn exactly_one_source_per_signal() {
        let dir = std::env::temp_dir();
        let mut cfg = RunConfig::default();
        cfg.inputs.pv = Some(PathBuf::from("pv.csv"));
        assert!(matches!(cfg.profiles(&dir), Err(Error::Config(m)) if m.contains("both")));
        cfg.pv = None;
        cfg.inputs.pv = None;
        assert!(matches!(cfg.profiles(&dir), Err(Error::Config(m)) if m.contains("inputs.pv")));
    }

    #[test]
    fn design_config_matches_defaults() {
        let cfg = RunConfig::default().design_config(Path::new(".")).unwrap();
        let reference = DesignConfig::default();
        assert_eq!(cfg.alpha, reference.alpha);
        assert_eq!(cfg.profiles, reference.profiles);
        assert_eq!(cfg.costs, reference.costs);
    }
}
