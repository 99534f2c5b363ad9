//! The experiment configuration document.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use srrb::harness::SweepAxis;
use srrb::{Instance, InstanceSpec, PolicyConfig};

use crate::error::{CliError, CliResult};

/// Inline instance document or a path to one, relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    File(PathBuf),
    Inline(InstanceSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPolicy {
    pub label: String,
    #[serde(flatten)]
    pub config: PolicyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub policies: Vec<LabeledPolicy>,
    /// Must match the instance horizon when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
}

/// A config with its instance loaded and every field checked.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub base_dir: PathBuf,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses an instance document; schema errors exit 2, invalid contents 3.
pub fn load_instance(path: &Path) -> CliResult<Instance> {
    let spec: InstanceSpec = read_json(path)?;
    Ok(Instance::from_spec(spec)?)
}

fn label_is_safe(label: &str) -> bool {
    !label.is_empty()
        && !label.starts_with('.')
        && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<ResolvedConfig> {
        let config: ExperimentConfig = read_json(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve(base_dir)
    }

    pub fn resolve(self, base_dir: PathBuf) -> CliResult<ResolvedConfig> {
        if self.policies.is_empty() {
            return Err(CliError::Config("at least one policy is required".into()));
        }
        let mut seen = HashSet::new();
        for p in &self.policies {
            if !label_is_safe(&p.label) {
                return Err(CliError::Config(format!(
                    "label {:?} must be non-empty and use only [A-Za-z0-9._-]",
                    p.label
                )));
            }
            if !seen.insert(p.label.as_str()) {
                return Err(CliError::Config(format!("duplicate policy label {:?}", p.label)));
            }
        }
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        if self.stride == Some(0) {
            return Err(CliError::Config("stride must be at least 1".into()));
        }
        if let Some(axis) = &self.sweep {
            if axis.is_empty() {
                return Err(CliError::Config("sweep grid is empty".into()));
            }
        }
        let instance = match &self.instance {
            InstanceSource::Inline(spec) => Instance::from_spec(spec.clone())?,
            InstanceSource::File(p) => load_instance(&base_dir.join(p))?,
        };
        if let Some(h) = self.horizon {
            if h != instance.horizon() {
                return Err(CliError::Config(format!(
                    "horizon {h} does not match the instance horizon {}",
                    instance.horizon()
                )));
            }
        }
        for p in &self.policies {
            p.config
                .validate(instance.horizon())
                .map_err(|e| CliError::Config(format!("policy {:?}: {e}", p.label)))?;
            srrb::harness::check_compatible(&instance, &p.config)
                .map_err(|e| CliError::Config(format!("policy {:?}: {e}", p.label)))?;
        }
        Ok(ResolvedConfig { config: self, instance, base_dir })
    }
}
