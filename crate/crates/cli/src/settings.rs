//! Parameter resolution (flag > config file > default) and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use dii_core::impact::{DEFAULT_CELL_SIZE, DEFAULT_TAU};
use dii_core::{Connectivity, DilateTarget, PipelineConfig, ScenarioConfig, TruthRule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Flags shared by every analysis subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Grid cell edge length in pixels [default: 256]
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Impact threshold on the cell index, inclusive [default: 0.01]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Dilation disk radius in pixels [default: 5]
    #[arg(long)]
    pub dilation_radius: Option<u32>,
    /// Mask to dilate before differencing: pre, post or none [default: pre]
    #[arg(long)]
    pub dilate_target: Option<DilateTarget>,
    /// Change components smaller than this many pixels are dropped [default: 1000]
    #[arg(long)]
    pub min_component: Option<usize>,
    /// Pixel adjacency for components: 4 or 8 [default: 8]
    #[arg(long)]
    pub connectivity: Option<Connectivity>,
    /// Ground-truth gridding rule: dii-threshold or any-pixel [default: dii-threshold]
    #[arg(long)]
    pub truth_rule: Option<TruthRule>,
    /// Flat TOML file with any of the parameters above
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Contents of a TOML config file. Keys mirror the long flag names with
/// underscores; the optional `[synth]` table configures `dii synth`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid_size: Option<usize>,
    pub tau: Option<f64>,
    pub dilation_radius: Option<u32>,
    pub dilate_target: Option<DilateTarget>,
    pub min_component: Option<usize>,
    pub connectivity: Option<Connectivity>,
    pub truth_rule: Option<TruthRule>,
    pub synth: Option<ScenarioConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    Config,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved<T> {
    pub value: T,
    pub source: Source,
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> Resolved<T> {
    match (flag, file) {
        (Some(value), _) => Resolved {
            value,
            source: Source::Flag,
        },
        (None, Some(value)) => Resolved {
            value,
            source: Source::Config,
        },
        (None, None) => Resolved {
            value: default,
            source: Source::Default,
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub grid_size: Resolved<usize>,
    pub tau: Resolved<f64>,
    pub dilation_radius: Resolved<u32>,
    pub dilate_target: Resolved<DilateTarget>,
    pub min_component: Resolved<usize>,
    pub connectivity: Resolved<Connectivity>,
    pub truth_rule: Resolved<TruthRule>,
}

impl Settings {
    pub fn resolve(flags: &Flags, file: &FileConfig) -> anyhow::Result<Self> {
        let defaults = PipelineConfig::default();
        let settings = Settings {
            grid_size: pick(flags.grid_size, file.grid_size, DEFAULT_CELL_SIZE),
            tau: pick(flags.tau, file.tau, DEFAULT_TAU),
            dilation_radius: pick(flags.dilation_radius, file.dilation_radius, defaults.dilation_radius),
            dilate_target: pick(flags.dilate_target, file.dilate_target, defaults.dilate_target),
            min_component: pick(flags.min_component, file.min_component, defaults.min_component),
            connectivity: pick(flags.connectivity, file.connectivity, defaults.connectivity),
            truth_rule: pick(flags.truth_rule, file.truth_rule, TruthRule::default()),
        };
        if settings.grid_size.value == 0 {
            bail!("invalid value for `grid_size`: must be at least 1");
        }
        let tau = settings.tau.value;
        if !(tau.is_finite() && tau >= 0.0) {
            bail!("invalid value for `tau`: must be a finite value >= 0, got {tau}");
        }
        Ok(settings)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            dilation_radius: self.dilation_radius.value,
            dilate_target: self.dilate_target.value,
            min_component: self.min_component.value,
            connectivity: self.connectivity.value,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

impl InputRecord {
    pub fn of(path: &Path) -> anyhow::Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Everything needed to repeat a run. Contains no timestamps or absolute
/// output locations, so identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: BTreeMap<&'static str, InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_file: Option<InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Settings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: "dii",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: BTreeMap::new(),
            config_file: None,
            parameters: None,
            scenario: None,
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_when_nothing_given() {
        let s = Settings::resolve(&Flags::default(), &FileConfig::default()).unwrap();
        assert_eq!(s.dilation_radius, Resolved { value: 5, source: Source::Default });
        assert_eq!(s.min_component.value, 1000);
        assert_eq!(s.grid_size.value, 256);
        assert_eq!(s.tau.value, 0.01);
        assert_eq!(s.pipeline(), PipelineConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("tau = 0.5\ngrid_size = 64\ndilate_target = \"post\"\nconnectivity = 4\n").unwrap();
        let flags = Flags {
            tau: Some(0.2),
            ..Flags::default()
        };
        let s = Settings::resolve(&flags, &file).unwrap();
        assert_eq!(s.tau, Resolved { value: 0.2, source: Source::Flag });
        assert_eq!(s.grid_size, Resolved { value: 64, source: Source::Config });
        assert_eq!(s.dilate_target.value, DilateTarget::Post);
        assert_eq!(s.connectivity.value, Connectivity::Four);
        assert_eq!(s.truth_rule.source, Source::Default);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(toml::from_str::<FileConfig>("connectivity = 6\n").is_err());
        assert!(toml::from_str::<FileConfig>("unknown_key = 1\n").is_err());
        let flags = Flags {
            tau: Some(-1.0),
            ..Flags::default()
        };
        assert!(Settings::resolve(&flags, &FileConfig::default()).is_err());
        let flags = Flags {
            grid_size: Some(0),
            ..Flags::default()
        };
        assert!(Settings::resolve(&flags, &FileConfig::default()).is_err());
    }

    #[test]
    fn synth_table_parses() {
        let file: FileConfig = toml::from_str(
            "[synth]\nwidth = 512\nheight = 256\nfeature_kind = \"buildings\"\nfootprint_cells = [[0, 1]]\njitter = [1, 0]\n",
        )
        .unwrap();
        let synth = file.synth.unwrap();
        assert_eq!((synth.width, synth.height), (512, 256));
        assert_eq!(synth.footprint_cells, vec![[0, 1]]);
        assert_eq!(synth.removal_prob, ScenarioConfig::default().removal_prob);
    }
}
