use vo2osc::circuit::SimConfig;
use vo2osc::cpg::{classify_gait, run_gait, Gait, GaitMatch, GaitSpec};

#[test]
fn gaits_survive_longer_runs() {
    let specs: Vec<GaitSpec> = Gait::ALL.iter().map(|&g| GaitSpec::preset(g).unwrap()).collect();
    let sim = SimConfig {
        duration: 0.5,
        ..SimConfig::default()
    };
    for g in &specs {
        let run = run_gait(g, &sim).unwrap();
        let c = classify_gait(&run.phases, &specs);
        assert_eq!(c.name, GaitMatch::from(g.name), "{:?}", run.phases);
        assert!(c.max_error_deg <= g.tolerance_deg, "{c:?}");
    }
}

#[test]
fn limbs_share_one_frequency() {
    let g = GaitSpec::preset(Gait::Trot).unwrap();
    let run = run_gait(&g, &SimConfig::default()).unwrap();
    let f0 = run.frequency_hz[0];
    assert!(f0 > 0.0);
    for f in run.frequency_hz {
        assert!((f / f0 - 1.0).abs() < 1e-3, "{:?}", run.frequency_hz);
    }
}
