use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layer::{validate_stack, LayerSpec};
use super::network::{LayerParams, Network, NetworkParams};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = ".ckpt.json";

/// Versioned JSON snapshot of a network, plus free-form metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub layer_specs: Vec<LayerSpec>,
    pub arrays: Vec<LayerParams>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl Checkpoint {
    pub fn new(specs: &[LayerSpec], params: &NetworkParams) -> Result<Self> {
        validate_stack(specs)?;
        params.check_shapes(specs)?;
        if let Some(i) = params.first_non_finite() {
            return Err(Error::State(format!(
                "layer {i} holds non-finite parameters"
            )));
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            layer_specs: specs.to_vec(),
            arrays: params.layers.clone(),
            meta: BTreeMap::new(),
        })
    }

    /// Checkpoint of free-standing parameter arrays with no layer stack.
    pub fn parameters_only(arrays: Vec<LayerParams>) -> Result<Self> {
        if arrays
            .iter()
            .any(|a| !a.weights.is_finite() || !a.biases.is_finite())
        {
            return Err(Error::State("parameters hold non-finite values".into()));
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            layer_specs: Vec::new(),
            arrays,
            meta: BTreeMap::new(),
        })
    }

    pub fn from_network(net: &Network) -> Result<Self> {
        Self::new(&net.specs, &net.params)
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        self.meta
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn meta_as<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<T> {
        let v = self
            .meta
            .get(key)
            .ok_or_else(|| Error::Input(format!("checkpoint has no '{key}' entry")))?;
        Ok(serde_json::from_value(v.clone())?)
    }

    pub fn params(&self) -> NetworkParams {
        NetworkParams {
            layers: self.arrays.clone(),
        }
    }

    pub fn network(&self) -> Result<Network> {
        Network::from_parts(self.layer_specs.clone(), self.params())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format_version != FORMAT_VERSION {
            return Err(Error::Input(format!(
                "unsupported checkpoint format version {}",
                ck.format_version
            )));
        }
        if !ck.layer_specs.is_empty() {
            validate_stack(&ck.layer_specs)?;
            ck.params().check_shapes(&ck.layer_specs)?;
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if !path.to_string_lossy().ends_with(EXTENSION) {
            return Err(Error::Config(format!(
                "checkpoint path {} must end with {EXTENSION}",
                path.display()
            )));
        }
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
