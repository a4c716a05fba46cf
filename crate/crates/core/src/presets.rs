//! Shipped configurations and the routines used to calibrate them.
//!
//! The JSON files under `presets/` are frozen outputs of the calibration
//! routines below; tests check that they still reproduce their targets.

use crate::circuit::{simulate, NetworkConfig, OscillatorParams, SimConfig};
use crate::config::Config;
use crate::device::SwitchParams;
use crate::error::{Error, Result};

const NETWORKS: &[(&str, &str)] = &[
    ("paper-fig8a", include_str!("../presets/paper-fig8a.json")),
    ("paper-calibrated", include_str!("../presets/paper-calibrated.json")),
    ("paper-pair", include_str!("../presets/paper-pair.json")),
    ("gait-step", include_str!("../presets/gait-step.json")),
    ("gait-trot", include_str!("../presets/gait-trot.json")),
    ("gait-amble", include_str!("../presets/gait-amble.json")),
];

const SWITCHES: &[(&str, &str)] = &[("paper-fig5", include_str!("../presets/paper-fig5.json"))];

/// Names accepted by [`load`].
pub fn names() -> Vec<&'static str> {
    NETWORKS.iter().map(|(n, _)| *n).collect()
}

/// Alternative names accepted by [`load`].
const ALIASES: &[(&str, &str)] = &[("paper-asymmetric", "paper-pair")];

pub fn load(name: &str) -> Result<Config> {
    let name = ALIASES
        .iter()
        .find(|(a, _)| *a == name)
        .map_or(name, |(_, n)| *n);
    let (_, text) = NETWORKS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset {name:?} (available: {})",
                names().join(", ")
            ))
        })?;
    Config::from_json(text)
}

/// Device-only presets.
pub fn switch(name: &str) -> Result<SwitchParams> {
    let (_, text) = SWITCHES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown switch preset {name:?}")))?;
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Length of the noiseless runs used for calibration.
pub const CALIBRATION_RUN: f64 = 40e-3;
const CALIBRATION_SKIP: f64 = 10e-3;

/// Switching frequency of `osc` alone with its noise disabled, or 0 if it
/// does not oscillate.
pub fn noiseless_frequency(osc: &OscillatorParams) -> Result<f64> {
    let net = NetworkConfig::single(*osc).without_noise();
    let sim = SimConfig {
        duration: CALIBRATION_RUN,
        ..SimConfig::default()
    };
    Ok(simulate(&net, &sim)?
        .event_frequency(0, CALIBRATION_SKIP)
        .unwrap_or(0.0))
}

/// Bisection for `x` in `[lo, hi]` with `f(x) = target`, `f` decreasing.
fn bisect_decreasing(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo >= target && target >= f_hi) {
        return Err(Error::InvalidParams(format!(
            "target {target} Hz not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    while (hi - lo) > 1e-7 * hi.abs() {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `v_th` in `[lo, hi]` giving a noiseless frequency of `target` hertz.
pub fn calibrate_v_th(osc: &OscillatorParams, target: f64, lo: f64, hi: f64) -> Result<f64> {
    bisect_decreasing(lo, hi, target, |v| {
        let mut o = *osc;
        o.switch.v_th = v;
        noiseless_frequency(&o)
    })
}

/// `r_s` in `[lo, hi]` giving a noiseless frequency of `target` hertz.
pub fn calibrate_r_s(osc: &OscillatorParams, target: f64, lo: f64, hi: f64) -> Result<f64> {
    bisect_decreasing(lo, hi, target, |r| {
        let mut o = *osc;
        o.r_s = r;
        noiseless_frequency(&o)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_load_and_validate() {
        for name in names() {
            let c = load(name).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.name.as_deref(), Some(name));
        }
        assert!(load("nope").is_err());
        assert_eq!(load("paper-asymmetric").unwrap(), load("paper-pair").unwrap());
    }

    #[test]
    fn fig5_switch_is_the_default_device() {
        assert_eq!(switch("paper-fig5").unwrap(), SwitchParams::default());
        assert!(switch("nope").is_err());
    }

    #[test]
    fn fig8a_is_the_default_oscillator() {
        let c = load("paper-fig8a").unwrap();
        assert_eq!(c.oscillators, vec![OscillatorParams::default()]);
    }

    #[test]
    fn calibrated_preset_hits_7khz() {
        let c = load("paper-calibrated").unwrap();
        let f = noiseless_frequency(&c.oscillators[0]).unwrap();
        assert!((f / 7000.0 - 1.0).abs() < 2e-3, "{f}");
        // only the hysteresis window differs from the equivalent circuit
        let mut o = c.oscillators[0];
        o.switch.v_th = 1.4;
        o.switch.v_h = 0.58;
        assert_eq!(o, OscillatorParams::default());
    }

    #[test]
    fn pair_preset_hits_targets() {
        let c = load("paper-pair").unwrap();
        let cal = c.calibration.as_ref().unwrap();
        for (osc, &target) in c.oscillators.iter().zip(&cal.target_hz) {
            let f = noiseless_frequency(osc).unwrap();
            assert!((f / target - 1.0).abs() < 2e-3, "{f} vs {target}");
        }
        let scale = c.oscillators[1].r_s / c.oscillators[0].r_s;
        assert!((scale - cal.r_s_scale.unwrap()).abs() < 1e-6);
        assert_eq!(c.oscillators[0].switch, c.oscillators[1].switch);
    }

    #[test]
    fn bisection_recovers_a_stored_value() {
        let c = load("paper-pair").unwrap();
        let r = calibrate_r_s(&c.oscillators[0], 6970.0, 45e3, 50e3).unwrap();
        assert!((r / c.oscillators[1].r_s - 1.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn unbracketed_target_is_an_error() {
        let o = OscillatorParams::default();
        assert!(calibrate_r_s(&o, 1e6, 45e3, 50e3).is_err());
    }

    #[test]
    fn gait_presets_share_topology() {
        let nets: Vec<Config> = ["gait-step", "gait-trot", "gait-amble"]
            .iter()
            .map(|n| load(n).unwrap())
            .collect();
        for c in &nets[1..] {
            assert_eq!(c.oscillators, nets[0].oscillators);
            assert_eq!(c.couplings.len(), nets[0].couplings.len());
            for (a, b) in c.couplings.iter().zip(&nets[0].couplings) {
                assert_eq!((a.i, a.j, a.kind), (b.i, b.j, b.kind));
            }
        }
    }
}
