//! Four-oscillator central pattern generator with quadruped gait presets.
//!
//! Oscillators are numbered as limbs: 0 left fore, 1 right fore, 2 left hind,
//! 3 right hind. Phases are reported relative to oscillator 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{circular_distance, circular_stats, phase_difference};
use crate::circuit::{
    default_transient, simulate, CouplingSpec, NetworkConfig, OscillatorParams, SimConfig, Waveform,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::presets;

pub const N_LIMBS: usize = 4;
pub const DEFAULT_TOLERANCE_DEG: f64 = 20.0;
/// Periods at the end of a run over which limb phases are averaged.
pub const PHASE_AVERAGE_PERIODS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Gait {
    Step,
    Trot,
    Amble,
}

impl Gait {
    pub const ALL: [Gait; 3] = [Gait::Step, Gait::Trot, Gait::Amble];

    pub fn as_str(self) -> &'static str {
        match self {
            Gait::Step => "STEP",
            Gait::Trot => "TROT",
            Gait::Amble => "AMBLE",
        }
    }

    pub fn preset_name(self) -> &'static str {
        match self {
            Gait::Step => "gait-step",
            Gait::Trot => "gait-trot",
            Gait::Amble => "gait-amble",
        }
    }

    /// Standard limb phases: successive quarter-period lags for the walk,
    /// diagonal pairs together for the trot, lateral pairs together for the
    /// amble.
    pub fn standard_template(self) -> [f64; N_LIMBS] {
        match self {
            Gait::Step => [0.0, 90.0, 180.0, 270.0],
            Gait::Trot => [0.0, 180.0, 180.0, 0.0],
            Gait::Amble => [0.0, 180.0, 0.0, 180.0],
        }
    }
}

impl fmt::Display for Gait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gait {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "STEP" => Ok(Gait::Step),
            "TROT" => Ok(Gait::Trot),
            "AMBLE" => Ok(Gait::Amble),
            _ => Err(Error::Config(format!(
                "unknown gait {s:?} (expected step, trot or amble)"
            ))),
        }
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE_DEG
}

/// The `gait` section of a configuration document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitSection {
    pub name: Gait,
    pub template: [f64; N_LIMBS],
    #[serde(default = "default_tolerance")]
    pub tolerance_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSpec {
    pub name: Gait,
    pub oscillators: Vec<OscillatorParams>,
    pub couplings: Vec<CouplingSpec>,
    pub template: [f64; N_LIMBS],
    pub tolerance_deg: f64,
}

impl GaitSpec {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let g = cfg
            .gait
            .ok_or_else(|| Error::Config("configuration has no gait section".into()))?;
        let spec = Self {
            name: g.name,
            oscillators: cfg.oscillators.clone(),
            couplings: cfg.couplings.clone(),
            template: g.template,
            tolerance_deg: g.tolerance_deg,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The shipped preset for `gait`.
    pub fn preset(gait: Gait) -> Result<Self> {
        Self::from_config(&presets::load(gait.preset_name())?)
    }

    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            oscillators: self.oscillators.clone(),
            couplings: self.couplings.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.oscillators.len() != N_LIMBS {
            return Err(Error::InvalidParams(format!(
                "a gait network has {N_LIMBS} oscillators (got {})",
                self.oscillators.len()
            )));
        }
        if self.template[0] != 0.0 {
            return Err(Error::InvalidParams("gait template must start at 0°".into()));
        }
        if self.template.iter().any(|&p| !(0.0..360.0).contains(&p)) {
            return Err(Error::InvalidParams("gait template phases must lie in [0, 360)".into()));
        }
        if !(self.tolerance_deg > 0.0) {
            return Err(Error::InvalidParams("gait tolerance must be positive".into()));
        }
        self.network().validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaitRun {
    pub waveform: Waveform,
    /// Limb phases relative to oscillator 0, degrees.
    pub phases: [f64; N_LIMBS],
    /// Circular standard deviation of each phase over the averaging span.
    pub phase_spread_deg: [f64; N_LIMBS],
    pub frequency_hz: [f64; N_LIMBS],
}

/// Voltage across the current-sense resistor `r_i` of oscillator `osc`.
pub fn current_sense(wf: &Waveform, osc: usize) -> Vec<f64> {
    let r_i = wf.net.oscillators[osc].r_i;
    wf.channels[osc].i.iter().map(|i| i * r_i).collect()
}

/// Simulates the gait network and measures limb phases over the last
/// [`PHASE_AVERAGE_PERIODS`] periods. The phase marker is the rising edge of
/// the current-sense pulse, which coincides with the ON switching event.
pub fn run_gait(gait: &GaitSpec, sim: &SimConfig) -> Result<GaitRun> {
    gait.validate()?;
    let wf = simulate(&gait.network(), sim)?;
    let skip = default_transient(&wf);
    let tail_start = wf.duration() - 0.25 * (wf.duration() - skip);
    let mut frequency_hz = [0.0; N_LIMBS];
    for (k, f) in frequency_hz.iter_mut().enumerate() {
        let on = wf.on_times(k);
        if !on.iter().any(|&t| t >= tail_start) {
            return Err(Error::Death(k));
        }
        *f = wf.event_frequency(k, skip).unwrap_or(0.0);
    }
    let mut phases = [0.0; N_LIMBS];
    let mut spread = [0.0; N_LIMBS];
    for b in 1..N_LIMBS {
        let d = phase_difference(&wf, 0, b, skip)?;
        let tail: Vec<f64> = d[d.len().saturating_sub(PHASE_AVERAGE_PERIODS)..]
            .iter()
            .map(|p| p.1)
            .collect();
        (phases[b], spread[b]) = circular_stats(&tail);
    }
    Ok(GaitRun {
        waveform: wf,
        phases,
        phase_spread_deg: spread,
        frequency_hz,
    })
}

/// Largest circular distance between measured phases and a template, both
/// taken relative to their first entry.
pub fn max_circular_error(measured: &[f64; N_LIMBS], template: &[f64; N_LIMBS]) -> f64 {
    (0..N_LIMBS)
        .map(|k| circular_distance(measured[k] - measured[0], template[k] - template[0]))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GaitMatch {
    Step,
    Trot,
    Amble,
    NoMatch,
}

impl From<Gait> for GaitMatch {
    fn from(g: Gait) -> Self {
        match g {
            Gait::Step => GaitMatch::Step,
            Gait::Trot => GaitMatch::Trot,
            Gait::Amble => GaitMatch::Amble,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitClassification {
    pub name: GaitMatch,
    /// Error against the closest template (also reported on NO_MATCH).
    pub max_error_deg: f64,
    /// Closest candidate, whether or not it is within tolerance.
    pub nearest: Option<Gait>,
}

/// Picks the candidate whose template minimises the maximum circular phase
/// error. Equal errors go to the earlier candidate. If the best error exceeds
/// that candidate's tolerance the result is NO_MATCH.
pub fn classify_gait(measured: &[f64; N_LIMBS], gaits: &[GaitSpec]) -> GaitClassification {
    let mut best: Option<(&GaitSpec, f64)> = None;
    for g in gaits {
        let e = max_circular_error(measured, &g.template);
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((g, e));
        }
    }
    match best {
        Some((g, e)) if e <= g.tolerance_deg => GaitClassification {
            name: g.name.into(),
            max_error_deg: e,
            nearest: Some(g.name),
        },
        Some((g, e)) => GaitClassification {
            name: GaitMatch::NoMatch,
            max_error_deg: e,
            nearest: Some(g.name),
        },
        None => GaitClassification {
            name: GaitMatch::NoMatch,
            max_error_deg: f64::INFINITY,
            nearest: None,
        },
    }
}

/// Contents of `gait_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitReport {
    pub gait: Gait,
    pub template_deg: [f64; N_LIMBS],
    pub tolerance_deg: f64,
    pub measured_phases_deg: [f64; N_LIMBS],
    pub phase_spread_deg: [f64; N_LIMBS],
    pub frequency_hz: [f64; N_LIMBS],
    pub periods_averaged: usize,
    pub classification: GaitClassification,
}

impl GaitReport {
    pub fn new(spec: &GaitSpec, run: &GaitRun, classification: GaitClassification) -> Self {
        Self {
            gait: spec.name,
            template_deg: spec.template,
            tolerance_deg: spec.tolerance_deg,
            measured_phases_deg: run.phases,
            phase_spread_deg: run.phase_spread_deg,
            frequency_hz: run.frequency_hz,
            periods_averaged: PHASE_AVERAGE_PERIODS,
            classification,
        }
    }
}
