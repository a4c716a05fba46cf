use vo2osc::circuit::{CouplingSpec, NetworkConfig, SimConfig};
use vo2osc::presets;
use vo2osc::sweep::{sweep_r, SweepOptions, ZoneBoundaries};

fn pair() -> NetworkConfig {
    let mut net = presets::load("paper-pair").unwrap().network();
    net.couplings.push(CouplingSpec::resistive(0, 1, 10e3));
    net
}

fn sim(dt: f64) -> SimConfig {
    SimConfig {
        dt,
        duration: 0.12,
        ..SimConfig::default()
    }
}

#[test]
fn results_independent_of_order_and_threads() {
    let values = [2.0e3, 2.4e3, 3.2e3, 10e3];
    let shuffled = [3.2e3, 10e3, 2.0e3, 2.4e3, 3.2e3];
    let opts = SweepOptions::default();
    let a = sweep_r(&pair(), &values, &sim(100e-9), &opts).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = one.install(|| sweep_r(&pair(), &shuffled, &sim(100e-9), &opts).unwrap());
    assert_eq!(a.param_values, b.param_values);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.boundaries_json(), b.boundaries_json());
}

#[test]
fn boundaries_stable_under_halved_step() {
    let grid: Vec<f64> = (0..8).map(|k| 1.8e3 + 200.0 * k as f64).collect();
    let opts = SweepOptions::default();
    let coarse = sweep_r(&pair(), &grid, &sim(100e-9), &opts).unwrap();
    let fine = sweep_r(&pair(), &grid, &sim(50e-9), &opts).unwrap();
    let (
        ZoneBoundaries::Resistive { sync_onset: s0, death_onset: d0 },
        ZoneBoundaries::Resistive { sync_onset: s1, death_onset: d1 },
    ) = (coarse.zone_boundaries, fine.zone_boundaries)
    else {
        panic!("resistive sweep reported capacitive boundaries");
    };
    let index = |v: Option<f64>| v.map(|x| grid.iter().position(|&g| g == x).unwrap() as i64);
    for (a, b) in [(s0, s1), (d0, d1)] {
        assert!(a.is_some() && b.is_some(), "{a:?} {b:?}");
        assert!((index(a).unwrap() - index(b).unwrap()).abs() <= 1, "{a:?} vs {b:?}");
    }
}
