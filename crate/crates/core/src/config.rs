//! JSON run configuration and `key=value` overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::RegimeThresholds;
use crate::circuit::{CouplingKind, CouplingSpec, NetworkConfig, OscillatorParams, SimConfig};
use crate::cpg::GaitSection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Seconds dropped before analysis. `None` applies the default rule
    /// (10 ms or 20 periods, whichever is longer).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_transient: Option<f64>,
    pub thresholds: RegimeThresholds,
}

/// How a preset's parameters were tuned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// Noiseless switching frequency targeted for each oscillator, hertz.
    pub target_hz: Vec<f64>,
    /// `r_s` of the second oscillator relative to the first, if tuned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_s_scale: Option<f64>,
    pub method: String,
}

/// A complete run description: network, integration and analysis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub oscillators: Vec<OscillatorParams>,
    #[serde(default)]
    pub couplings: Vec<CouplingSpec>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gait: Option<GaitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

impl Config {
    pub fn from_network(net: NetworkConfig) -> Self {
        Self {
            name: None,
            description: None,
            oscillators: net.oscillators,
            couplings: net.couplings,
            sim: SimConfig::default(),
            analysis: AnalysisConfig::default(),
            gait: None,
            calibration: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            oscillators: self.oscillators.clone(),
            couplings: self.couplings.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network().validate()?;
        self.sim.validate()?;
        if let Some(skip) = self.analysis.skip_transient {
            if !(skip >= 0.0 && skip < self.sim.duration) {
                return Err(Error::Config(format!(
                    "analysis.skip_transient must lie in [0, duration) (got {skip})"
                )));
            }
        }
        Ok(())
    }

    /// Replaces every coupling between `i` and `j` with a single one.
    pub fn set_coupling(&mut self, i: usize, j: usize, kind: CouplingKind, value: f64) {
        self.couplings
            .retain(|c| !((c.i == i && c.j == j) || (c.i == j && c.j == i)));
        self.couplings.push(match kind {
            CouplingKind::Resistive => CouplingSpec::resistive(i, j, value),
            CouplingKind::Capacitive => CouplingSpec::capacitive(i, j, value),
        });
    }

    /// Applies a dotted override such as `sim.duration`, `v_dd`,
    /// `osc1.r_s`, `noise.peak_amplitude` or `analysis.flatness`.
    ///
    /// Oscillator fields without an `oscN.` prefix apply to every oscillator.
    /// Switch and noise fields may be named directly or through `switch.` /
    /// `noise.`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let mut doc = serde_json::to_value(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(unknown(key));
        }
        match parts[0] {
            "sim" => set_leaf(&mut doc["sim"], &parts[1..], value, key)?,
            "analysis" => {
                let rest = &parts[1..];
                let a = &mut doc["analysis"];
                if rest == ["skip_transient"] {
                    a["skip_transient"] = Value::from(value);
                } else if rest.first() == Some(&"thresholds") {
                    set_leaf(&mut a["thresholds"], &rest[1..], value, key)?;
                } else {
                    set_leaf(&mut a["thresholds"], rest, value, key)?;
                }
            }
            head if osc_index(head).is_some() => {
                let k = osc_index(head).unwrap();
                let osc = doc["oscillators"]
                    .get_mut(k)
                    .ok_or_else(|| Error::Config(format!("{key}: no oscillator {k}")))?;
                set_osc_field(osc, &parts[1..], value, key)?;
            }
            _ => {
                let oscs = doc["oscillators"].as_array_mut().expect("oscillator list");
                if oscs.is_empty() {
                    return Err(unknown(key));
                }
                for osc in oscs {
                    set_osc_field(osc, &parts, value, key)?;
                }
            }
        }
        *self = serde_json::from_value(doc).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        Ok(())
    }
}

fn unknown(key: &str) -> Error {
    Error::Config(format!("unknown setting {key:?}"))
}

fn osc_index(head: &str) -> Option<usize> {
    head.strip_prefix("osc")?.parse().ok()
}

fn set_osc_field(osc: &mut Value, path: &[&str], value: f64, key: &str) -> Result<()> {
    match path {
        [] => Err(unknown(key)),
        ["switch", rest @ ..] => set_osc_field(osc, rest, value, key),
        ["noise", rest @ ..] => set_leaf(&mut osc["switch"]["noise"], rest, value, key),
        // optional field, absent from the serialized form when unset
        ["r_on_fixed"] => {
            osc["switch"]["r_on_fixed"] = Value::from(value);
            Ok(())
        }
        [field] => {
            if osc["switch"]["noise"].get(*field).is_some() {
                set_leaf(&mut osc["switch"]["noise"], path, value, key)
            } else if osc["switch"].get(*field).is_some() {
                set_leaf(&mut osc["switch"], path, value, key)
            } else {
                set_leaf(osc, path, value, key)
            }
        }
        _ => Err(unknown(key)),
    }
}

fn set_leaf(node: &mut Value, path: &[&str], value: f64, key: &str) -> Result<()> {
    let [field] = path else {
        return Err(unknown(key));
    };
    let slot = node
        .get_mut(*field)
        .filter(|v| v.is_number())
        .ok_or_else(|| unknown(key))?;
    *slot = if slot.is_u64() {
        if !(value >= 0.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
            return Err(Error::Config(format!(
                "{key} takes a non-negative integer (got {value})"
            )));
        }
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Config {
        Config::from_network(NetworkConfig {
            oscillators: vec![OscillatorParams::default(); 2],
            couplings: vec![],
        })
    }

    #[test]
    fn json_round_trip() {
        let c = pair();
        assert_eq!(Config::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn partial_document_fills_defaults() {
        let c = Config::from_json(r#"{"oscillators": [{"v_dd": 62}]}"#).unwrap();
        assert_eq!(c.oscillators[0].v_dd, 62.0);
        assert_eq!(c.oscillators[0].r_s, 50e3);
        assert_eq!(c.sim, SimConfig::default());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(Config::from_json(r#"{"oscillators": [], "simm": {}}"#).is_err());
        assert!(Config::from_json(r#"{"oscillators": [{"vdd": 3}]}"#).is_err());
    }

    #[test]
    fn overrides() {
        let mut c = pair();
        c.set("v_dd", 62.0).unwrap();
        assert!(c.oscillators.iter().all(|o| o.v_dd == 62.0));
        c.set("osc1.r_s", 49e3).unwrap();
        assert_eq!(c.oscillators[0].r_s, 50e3);
        assert_eq!(c.oscillators[1].r_s, 49e3);
        c.set("v_th", 1.5).unwrap();
        c.set("switch.v_h", 0.6).unwrap();
        assert_eq!(c.oscillators[1].switch.v_th, 1.5);
        assert_eq!(c.oscillators[1].switch.v_h, 0.6);
        c.set("noise.peak_amplitude", 0.0).unwrap();
        c.set("alpha", 1.5).unwrap();
        assert_eq!(c.oscillators[0].switch.noise.peak_amplitude, 0.0);
        assert_eq!(c.oscillators[0].switch.noise.alpha, 1.5);
        c.set("sim.duration", 0.5).unwrap();
        c.set("sim.master_seed", 7.0).unwrap();
        assert_eq!(c.sim.duration, 0.5);
        assert_eq!(c.sim.master_seed, 7);
        c.set("analysis.flatness", 0.4).unwrap();
        c.set("analysis.skip_transient", 0.02).unwrap();
        assert_eq!(c.analysis.thresholds.flatness, 0.4);
        assert_eq!(c.analysis.skip_transient, Some(0.02));
        c.set("r_on_fixed", 100.0).unwrap();
        assert_eq!(c.oscillators[0].switch.r_on_fixed, Some(100.0));
    }

    #[test]
    fn bad_overrides() {
        let mut c = pair();
        for key in ["bogus", "sim.bogus", "osc5.v_dd", "sim", "v_dd.x", "", "noise"] {
            assert!(c.set(key, 1.0).is_err(), "{key}");
        }
        assert!(c.set("sim.record_every", 2.5).is_err());
        assert!(c.set("sim.master_seed", -1.0).is_err());
    }

    #[test]
    fn coupling_slot_replaced() {
        let mut c = pair();
        c.set_coupling(0, 1, CouplingKind::Resistive, 2.4e3);
        c.set_coupling(1, 0, CouplingKind::Capacitive, 1e-6);
        assert_eq!(c.couplings.len(), 1);
        assert_eq!(c.couplings[0].kind, CouplingKind::Capacitive);
    }
}
