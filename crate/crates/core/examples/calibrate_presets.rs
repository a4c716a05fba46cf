//! Regenerates the JSON files in `presets/`.
//!
//! `cargo run --release --example calibrate_presets -- presets`

use std::path::{Path, PathBuf};

use vo2osc::circuit::{CouplingSpec, OscillatorParams};
use vo2osc::config::{Calibration, Config};
use vo2osc::cpg::{Gait, GaitSection, DEFAULT_TOLERANCE_DEG};
use vo2osc::device::SwitchParams;
use vo2osc::presets::{calibrate_r_s, calibrate_v_th, noiseless_frequency};

const V_H: f64 = 0.5507;
const SINGLE_HZ: f64 = 7000.0;
const PAIR_HZ: [f64; 2] = [6610.0, 6970.0];

fn write(dir: &Path, name: &str, text: String) {
    std::fs::write(dir.join(format!("{name}.json")), text + "\n").unwrap();
    println!("wrote {name}");
}

fn named(mut c: Config, name: &str, description: &str) -> Config {
    c.name = Some(name.into());
    c.description = Some(description.into());
    c
}

fn gait(g: Gait) -> Config {
    let oscillators: Vec<_> = (0..4)
        .map(|k| OscillatorParams {
            r_s: 50e3 * (1.0 + 5e-4 * k as f64),
            ..OscillatorParams::default()
        })
        .collect();
    // (pair, C, R) for every pair; 10 pF and 2 MΩ act as open links
    let (strong_c, weak_c, open_c, link_r, open_r) = (10e-9, 3e-9, 10e-12, 3e3, 2e6);
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut couplings = vec![];
    for (i, j) in pairs {
        let diagonal = matches!((i, j), (0, 2) | (1, 3));
        let anti = matches!((i, j), (0, 3) | (1, 2));
        let (c, r) = match g {
            Gait::Step if diagonal => (strong_c, open_r),
            Gait::Step => (weak_c, open_r),
            Gait::Trot if anti => (open_c, link_r),
            Gait::Trot => (5e-9, open_r),
            Gait::Amble if diagonal => (open_c, link_r),
            Gait::Amble => (5e-9, open_r),
        };
        couplings.push(CouplingSpec::capacitive(i, j, c));
        couplings.push(CouplingSpec::resistive(i, j, r));
    }
    let mut c = Config::from_network(vo2osc::circuit::NetworkConfig {
        oscillators,
        couplings,
    });
    c.gait = Some(GaitSection {
        name: g,
        template: g.standard_template(),
        tolerance_deg: DEFAULT_TOLERANCE_DEG,
    });
    named(
        c,
        g.preset_name(),
        &format!("four-oscillator network locking into the {g} pattern"),
    )
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).expect("output directory"));

    write(
        &dir,
        "paper-fig5",
        serde_json::to_string_pretty(&SwitchParams::default()).unwrap(),
    );

    let base = OscillatorParams::default();
    let c = Config::from_network(vo2osc::circuit::NetworkConfig::single(base));
    write(
        &dir,
        "paper-fig8a",
        named(c, "paper-fig8a", "single oscillator, reference component values").to_json(),
    );

    let mut osc = base;
    osc.switch.v_h = V_H;
    osc.switch.v_th = calibrate_v_th(&osc, SINGLE_HZ, 1.40, 1.60).unwrap();
    println!("single v_th = {} ({} Hz)", osc.switch.v_th, noiseless_frequency(&osc).unwrap());
    let mut c = Config::from_network(vo2osc::circuit::NetworkConfig::single(osc));
    c.calibration = Some(Calibration {
        target_hz: vec![SINGLE_HZ],
        r_s_scale: None,
        method: "v_th bisection on noiseless frequency, v_h fixed".into(),
    });
    write(
        &dir,
        "paper-calibrated",
        named(c, "paper-calibrated", "single oscillator tuned to 7 kHz").to_json(),
    );

    let mut a = base;
    a.switch.v_h = V_H;
    a.switch.v_th = calibrate_v_th(&a, PAIR_HZ[0], 1.40, 1.60).unwrap();
    let mut b = a;
    b.r_s = calibrate_r_s(&a, PAIR_HZ[1], 45e3, 50e3).unwrap();
    println!("pair v_th = {}, r_s1 = {}", a.switch.v_th, b.r_s);
    let mut c = Config::from_network(vo2osc::circuit::NetworkConfig {
        oscillators: vec![a, b],
        couplings: vec![],
    });
    c.calibration = Some(Calibration {
        target_hz: PAIR_HZ.to_vec(),
        r_s_scale: Some(b.r_s / a.r_s),
        method: "v_th bisection for oscillator 0, then r_s bisection for oscillator 1".into(),
    });
    write(
        &dir,
        "paper-pair",
        named(c, "paper-pair", "detuned pair, uncoupled; add a coupling element").to_json(),
    );

    for g in Gait::ALL {
        write(&dir, g.preset_name(), gait(g).to_json());
    }
}
