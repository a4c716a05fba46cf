//! One-parameter sweeps over a single coupling element.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{classify_regime, Regime, RegimeThresholds};
use crate::circuit::{default_transient, simulate, CouplingKind, NetworkConfig, SimConfig};
use crate::error::{Error, Result};

/// Upper limit on the per-point duration when a run is too short to analyse.
pub const MAX_POINT_DURATION: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub thresholds: RegimeThresholds,
    /// Fixed transient skip; `None` uses [`default_transient`].
    pub skip_transient: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub f1_per_osc: Vec<f64>,
    /// NaN when the phase difference is undefined (DEATH or failure).
    pub delta_phi_mean_deg: f64,
    pub delta_phi_circstd_deg: f64,
    /// `None` if the point failed; see `error`.
    pub regime: Option<Regime>,
    pub phase_failures: usize,
    /// Simulated duration, longer than requested if the point was extended.
    pub duration: f64,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn succeeded(&self) -> bool {
        self.regime.is_some()
    }

    pub fn regime_label(&self) -> &'static str {
        self.regime.map_or("FAILED", Regime::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZoneBoundaries {
    /// Largest resistance that synchronizes and largest that kills the
    /// oscillation.
    Resistive {
        sync_onset: Option<f64>,
        death_onset: Option<f64>,
    },
    /// Smallest capacitance giving chaos, and the smallest capacitance above
    /// it that synchronizes again.
    Capacitive {
        weak_to_chaos: Option<f64>,
        chaos_to_strong: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: CouplingKind,
    pub pair: (usize, usize),
    /// Sorted ascending.
    pub param_values: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub zone_boundaries: ZoneBoundaries,
}

impl SweepResult {
    pub fn success_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.succeeded()).count() as f64 / self.points.len() as f64
    }

    /// `param,f1_osc0,f1_osc1,delta_phi_deg,regime`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,f1_osc0,f1_osc1,delta_phi_deg,regime\n");
        for p in &self.points {
            let f = |k: usize| p.f1_per_osc.get(k).copied().unwrap_or(f64::NAN);
            writeln!(
                s,
                "{:e},{},{},{},{}",
                p.param,
                f(0),
                f(1),
                p.delta_phi_mean_deg,
                p.regime_label()
            )
            .unwrap();
        }
        s
    }

    pub fn boundaries_json(&self) -> String {
        serde_json::to_string_pretty(&self.zone_boundaries).expect("boundaries serialize")
    }
}

/// Index of the single coupling of `kind` in `net`.
fn sweep_slot(net: &NetworkConfig, kind: CouplingKind) -> Result<usize> {
    let slots: Vec<usize> = net
        .couplings
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == kind)
        .map(|(k, _)| k)
        .collect();
    match slots[..] {
        [k] => Ok(k),
        _ => Err(Error::InvalidParams(format!(
            "sweep needs exactly one {kind:?} coupling, found {}",
            slots.len()
        ))),
    }
}

pub fn sweep_r(
    net: &NetworkConfig,
    r_values: &[f64],
    sim: &SimConfig,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    sweep(net, CouplingKind::Resistive, r_values, sim, opts)
}

pub fn sweep_c(
    net: &NetworkConfig,
    c_values: &[f64],
    sim: &SimConfig,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    sweep(net, CouplingKind::Capacitive, c_values, sim, opts)
}

/// Runs one simulation and classification per value of the `kind` coupling.
///
/// Points run in parallel on the current rayon pool. Every point uses the
/// same seed, so results do not depend on evaluation order. A point whose
/// simulation or classification fails is recorded as failed; only invalid
/// input aborts the sweep.
pub fn sweep(
    net: &NetworkConfig,
    kind: CouplingKind,
    values: &[f64],
    sim: &SimConfig,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    net.validate()?;
    sim.validate()?;
    let slot = sweep_slot(net, kind)?;
    if values.is_empty() {
        return Err(Error::InvalidParams("empty sweep range".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParams(format!("sweep value must be positive (got {v})")));
    }
    let mut param_values = values.to_vec();
    param_values.sort_by(f64::total_cmp);
    param_values.dedup();
    let pair = (net.couplings[slot].i, net.couplings[slot].j);

    let points: Vec<SweepPoint> = param_values
        .par_iter()
        .map(|&v| {
            let mut n = net.clone();
            n.couplings[slot].value = v;
            run_point(&n, pair, v, sim, opts)
        })
        .collect();

    let zone_boundaries = boundaries(kind, &points);
    Ok(SweepResult {
        kind,
        pair,
        param_values,
        points,
        zone_boundaries,
    })
}

fn run_point(
    net: &NetworkConfig,
    pair: (usize, usize),
    param: f64,
    sim: &SimConfig,
    opts: &SweepOptions,
) -> SweepPoint {
    let mut sim = *sim;
    loop {
        let outcome = simulate(net, &sim).and_then(|wf| {
            let skip = opts.skip_transient.unwrap_or_else(|| default_transient(&wf));
            classify_regime(&wf, pair, skip, &opts.thresholds)
        });
        match outcome {
            Ok(r) => {
                let undefined = r.regime == Regime::Death;
                return SweepPoint {
                    param,
                    f1_per_osc: r.f1_per_osc,
                    delta_phi_mean_deg: if undefined { f64::NAN } else { r.delta_phi_mean_deg },
                    delta_phi_circstd_deg: if undefined { f64::NAN } else { r.delta_phi_circstd_deg },
                    regime: Some(r.regime),
                    phase_failures: r.phase_failures,
                    duration: sim.duration,
                    error: None,
                };
            }
            // slow points need more periods for the spectrum
            Err(Error::Insufficient(_)) if sim.duration * 2.0 <= MAX_POINT_DURATION => {
                sim.duration *= 2.0;
            }
            Err(e) => {
                return SweepPoint {
                    param,
                    f1_per_osc: vec![f64::NAN; 2],
                    delta_phi_mean_deg: f64::NAN,
                    delta_phi_circstd_deg: f64::NAN,
                    regime: None,
                    phase_failures: 0,
                    duration: sim.duration,
                    error: Some(e.to_string()),
                }
            }
        }
    }
}

/// Zone boundaries from points sorted by ascending parameter.
pub fn boundaries(kind: CouplingKind, points: &[SweepPoint]) -> ZoneBoundaries {
    let with = |r: Regime| points.iter().filter(move |p| p.regime == Some(r));
    match kind {
        CouplingKind::Resistive => ZoneBoundaries::Resistive {
            sync_onset: with(Regime::Synchronized).map(|p| p.param).next_back(),
            death_onset: with(Regime::Death).map(|p| p.param).next_back(),
        },
        CouplingKind::Capacitive => {
            let weak_to_chaos = with(Regime::Chaotic).map(|p| p.param).next();
            let chaos_to_strong = weak_to_chaos.and_then(|c0| {
                with(Regime::Synchronized)
                    .map(|p| p.param)
                    .find(|&c| c > c0)
            });
            ZoneBoundaries::Capacitive {
                weak_to_chaos,
                chaos_to_strong,
            }
        }
    }
}
