use std::path::{Path, PathBuf};

use mqtt_ids::classifiers::ClassifierSpec;
use mqtt_ids::dataset::FeatureLevel;
use serde::{Deserialize, Serialize};

/// Everything needed to rerun a command, copied into each output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub inputs: Vec<String>,
    pub level: Option<FeatureLevel>,
    pub rules: Vec<String>,
    pub classifier: Option<ClassifierSpec>,
    pub seed: Option<u64>,
    /// Remaining command settings, with defaults filled in.
    pub settings: serde_json::Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: Vec::new(),
            level: None,
            rules: Vec::new(),
            classifier: None,
            seed: None,
            settings: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, p: &Path) -> Self {
        self.inputs.push(path_str(p));
        self
    }

    pub fn output(mut self, p: &Path) -> Self {
        self.outputs.push(path_str(p));
        self
    }
}

/// JSON results carry the manifest inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<R> {
    pub manifest: RunManifest,
    pub report: R,
}

pub fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// `<out>.manifest.json`, written beside binary and CSV outputs.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
