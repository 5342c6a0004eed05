//! Channel spec files: the JSON format the CLI ingests to describe a channel.

use nalgebra::Matrix2;
use serde::Deserialize;

use crate::channel::{ancilla_to_channel, eta_model, KrausChannel};
use crate::error::{Error, Result};
use crate::qubit::c;

/// {"kind": "kraus", "ops": [...]} with each op a 2×2 row-major complex
/// matrix of [re, im] pairs; or {"kind": "builtin", "name": ..., "l": ...};
/// or {"kind": "eta", "eta": ...}.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Kraus { ops: Vec<[[[f64; 2]; 2]; 2]> },
    Builtin {
        name: String,
        #[serde(default)]
        l: Option<f64>,
    },
    Eta { eta: f64 },
}

impl ChannelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecParse(e.to_string()))
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Kraus { ops } => {
                let mats = ops
                    .iter()
                    .map(|op| {
                        Matrix2::new(
                            c(op[0][0][0], op[0][0][1]),
                            c(op[0][1][0], op[0][1][1]),
                            c(op[1][0][0], op[1][0][1]),
                            c(op[1][1][0], op[1][1][1]),
                        )
                    })
                    .collect();
                KrausChannel::new(mats)
            }
            ChannelSpec::Builtin { name, l } => match name.as_str() {
                "identity" => Ok(KrausChannel::identity()),
                "unot" => Ok(KrausChannel::unot()),
                "zrot" => {
                    let l = l.ok_or_else(|| {
                        Error::SpecParse("builtin 'zrot' requires field 'l'".into())
                    })?;
                    Ok(KrausChannel::z_rotation(l))
                }
                other => Err(Error::SpecParse(format!(
                    "unknown builtin channel '{other}' (expected identity|unot|zrot)"
                ))),
            },
            ChannelSpec::Eta { eta } => ancilla_to_channel(&eta_model(*eta)?),
        }
    }
}

pub fn load_channel(path: &std::path::Path) -> Result<KrausChannel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::SpecParse(format!("cannot read {}: {e}", path.display())))?;
    ChannelSpec::from_json(&text)?.to_channel()
}
