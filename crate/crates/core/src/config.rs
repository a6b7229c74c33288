//! Pulse/scenario presets: built-ins plus TOML files with per-preset keys
//! `kind`, `T_w_ns`, `f_c_GHz`, `Theta_ns`, `Theta1_ns`, `Theta2_ns`.

use crate::error::{Error, Result};
use crate::pulse::{EstimationSetup, PulseSpec};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// A pulse and the estimation scenario it is evaluated in.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub pulse: PulseSpec,
    pub setup: EstimationSetup,
}

#[derive(Debug, Deserialize)]
struct RawPreset {
    kind: String,
    #[serde(rename = "T_w_ns")]
    t_w_ns: f64,
    #[serde(rename = "f_c_GHz", default)]
    f_c_ghz: Option<f64>,
    #[serde(rename = "Theta_ns", default)]
    theta_ns: f64,
    #[serde(rename = "Theta1_ns")]
    theta1_ns: f64,
    #[serde(rename = "Theta2_ns")]
    theta2_ns: f64,
}

const NS: f64 = 1e-9;
const GHZ: f64 = 1e9;

impl RawPreset {
    fn build(&self) -> Result<Preset> {
        let pulse = match self.kind.as_str() {
            "baseband_gaussian" => PulseSpec::baseband_gaussian(self.t_w_ns * NS)?,
            "passband_gaussian" => {
                let f_c = self.f_c_ghz.ok_or_else(|| {
                    Error::Config("passband preset needs f_c_GHz".into())
                })?;
                PulseSpec::passband_gaussian(self.t_w_ns * NS, f_c * GHZ)?
            }
            other => {
                return Err(Error::Config(format!("unknown pulse kind '{other}'")))
            }
        };
        let setup = EstimationSetup::new(
            self.theta_ns * NS,
            self.theta1_ns * NS,
            self.theta2_ns * NS,
        )?;
        Ok(Preset { pulse, setup })
    }
}

/// Parse presets from TOML text: one `[name]` table per preset.
pub fn parse_presets(toml_text: &str) -> Result<BTreeMap<String, Preset>> {
    let raw: BTreeMap<String, RawPreset> = toml::from_str(toml_text)
        .map_err(|e| Error::Config(format!("preset file: {e}")))?;
    raw.iter()
        .map(|(name, r)| Ok((name.clone(), r.build()?)))
        .collect()
}

/// Load presets from a TOML file.
pub fn load_presets(path: &Path) -> Result<BTreeMap<String, Preset>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_presets(&text)
}

/// Built-in presets: `baseband` (T_w = 1 ns over [−2, 2] ns) and
/// `passband` (T_w = 2 ns, f_c = 6.85 GHz over [−2T_w, 1.5T_w]).
pub fn builtin(name: &str) -> Option<Preset> {
    match name {
        "baseband" => Some(Preset {
            pulse: PulseSpec::baseband_gaussian(1e-9).unwrap(),
            setup: EstimationSetup::new(0.0, -2e-9, 2e-9).unwrap(),
        }),
        "passband" => {
            let t_w = 2e-9;
            Some(Preset {
                pulse: PulseSpec::passband_gaussian(t_w, 6.85e9).unwrap(),
                setup: EstimationSetup::new(0.0, -2.0 * t_w, 1.5 * t_w).unwrap(),
            })
        }
        _ => None,
    }
}
