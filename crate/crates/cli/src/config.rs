//! Run configuration: defaults, overlaid by an optional JSON file, overlaid
//! by command-line flags.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sigpde_core::{Error, KernelConfig, Result, Scheme, StaticKernel};

pub const DEFAULT_LAMBDA: u32 = 4;

/// Contents of a `--config` file. Every field is optional; unknown keys are
/// rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub static_kernel: Option<String>,
    pub sigma: Option<f64>,
    pub lambda: Option<u32>,
    pub scheme: Option<Scheme>,
    pub rescale: Option<bool>,
    pub time_augment: Option<bool>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::File {
            path: path.to_path_buf(),
            message: format!("invalid config: {e}"),
        })
    }
}

/// The effective configuration of a run, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub kernel: KernelConfig,
    /// Prepend a normalized time channel to every input path.
    pub time_augment: bool,
    pub threads: usize,
    pub seed: u64,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub static_kernel: Option<String>,
    pub sigma: Option<f64>,
    pub lambda: Option<u32>,
    pub scheme: Option<Scheme>,
    pub rescale: Option<bool>,
    pub time_augment: Option<bool>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, flags: Overrides) -> Result<Self> {
        let kind = flags
            .static_kernel
            .or(file.static_kernel)
            .unwrap_or_else(|| "linear".into());
        let sigma = flags.sigma.or(file.sigma);
        let static_kernel = match kind.as_str() {
            "linear" => {
                if sigma.is_some() {
                    return Err(Error::Input("--sigma only applies to the rbf kernel".into()));
                }
                StaticKernel::Linear
            }
            "rbf" => StaticKernel::rbf(sigma.ok_or_else(|| {
                Error::Input("the rbf kernel needs a bandwidth (--sigma)".into())
            })?)?,
            other => {
                return Err(Error::Input(format!(
                    "unknown static kernel {other:?} (expected linear or rbf)"
                )))
            }
        };
        let kernel = KernelConfig {
            static_kernel,
            lambda: flags.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
            scheme: flags.scheme.or(file.scheme).unwrap_or_default(),
            rescale: flags.rescale.or(file.rescale).unwrap_or(true),
        };
        if kernel.lambda > sigpde_core::pde::DEFAULT_MAX_LAMBDA {
            return Err(Error::Input(format!(
                "lambda {} exceeds the maximum of {}",
                kernel.lambda,
                sigpde_core::pde::DEFAULT_MAX_LAMBDA
            )));
        }
        Ok(RunConfig {
            kernel,
            time_augment: flags.time_augment.or(file.time_augment).unwrap_or(false),
            threads: flags.threads.or(file.threads).unwrap_or(0),
            seed: flags.seed.or(file.seed).unwrap_or(0),
        })
    }

    /// One-line JSON record for `#` provenance headers. The thread count is
    /// left out so that outputs do not depend on it.
    pub fn provenance(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("threads");
        }
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"lambda": 2, "scheme": "implicit", "seed": 9}"#).unwrap();
        let flags = Overrides {
            lambda: Some(5),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file, flags).unwrap();
        assert_eq!(cfg.kernel.lambda, 5);
        assert_eq!(cfg.kernel.scheme, Scheme::Implicit);
        assert_eq!(cfg.seed, 9);
        assert!(cfg.kernel.rescale);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"lamda": 2}"#).is_err());
    }

    #[test]
    fn rbf_needs_sigma() {
        let flags = Overrides {
            static_kernel: Some("rbf".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(ConfigFile::default(), flags).is_err());
        let flags = Overrides {
            sigma: Some(1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(ConfigFile::default(), flags).is_err());
    }
}
