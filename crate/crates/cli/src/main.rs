//! `vo2osc` command-line driver.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.

mod output;
mod parse;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vo2osc::analysis::{
    classify_regime, peak_metrics, phase_difference, phase_portrait, spectrum, PeakMetrics,
    SyncReport, PORTRAIT_PERIODS,
};
use vo2osc::circuit::{default_transient, dynamic_iv, simulate, CouplingKind, CouplingSpec, Waveform};
use vo2osc::config::Config;
use vo2osc::cpg::{classify_gait, run_gait, Gait, GaitReport, GaitSpec};
use vo2osc::sweep::{self, SweepOptions};
use vo2osc::{io, presets};

use output::{Outputs, Override, RunManifest, MANIFEST};
use parse::{parse_coupling, parse_kind, parse_pair, parse_range, parse_set, CouplingFlag};

const SEED_ENV: &str = "VO2_OSC_SEED";
/// Fraction of sweep points that must succeed for exit code 0.
const SWEEP_SUCCESS_FRACTION: f64 = 0.9;

#[derive(Parser)]
#[command(name = "vo2osc", version, about = "Simulate and analyse VO2-switch oscillator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one oscillator: waveform, spectrum, peak metrics, dynamic I-V.
    Single(SingleArgs),
    /// Simulate a coupled network and classify the joint regime of a pair.
    Coupled(CoupledArgs),
    /// Sweep one coupling element and locate the regime boundaries.
    Sweep(SweepArgs),
    /// Run a four-oscillator gait preset and classify the resulting gait.
    Cpg(CpgArgs),
    /// Re-run the analysis on a saved waveform CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Shipped preset name.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a setting, e.g. `v_dd=62`, `osc1.r_s=49k`, `sim.duration=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CoupledArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Coupling element `r:VALUE` or `c:VALUE`, optionally `@I-J` (default 0-1).
    #[arg(long = "coupling", value_name = "KIND:VALUE[@I-J]")]
    coupling: Vec<String>,
    /// Oscillator pair to analyse.
    #[arg(long, default_value = "0-1")]
    pair: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// `r` or `c`.
    kind: String,
    /// `lo:hi:logN`, `lo:hi:linN` or a comma-separated list.
    range: String,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Fixed coupling elements added before sweeping.
    #[arg(long = "coupling", value_name = "KIND:VALUE[@I-J]")]
    coupling: Vec<String>,
    /// Pair joined by the swept element when the configuration has none.
    #[arg(long, default_value = "0-1")]
    pair: String,
    /// Worker threads (default: available cores).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CpgArgs {
    /// `step`, `trot` or `amble`.
    gait: String,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Waveform CSV as written by `single` or `coupled`.
    waveform: PathBuf,
    /// Events CSV; without it events are rebuilt from the state columns.
    #[arg(long)]
    events: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, default_value = "0-1")]
    pair: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

type CmdResult<T> = Result<T, Failure>;

/// A configuration after preset loading, seed override and `--set`.
struct Loaded {
    config: Config,
    overrides: Vec<Override>,
    seed_from_env: Option<u64>,
}

fn load_config(args: &ConfigArgs, default_preset: Option<&str>) -> CmdResult<Loaded> {
    let config = match (&args.preset, &args.config, default_preset) {
        (Some(name), _, _) => presets::load(name).map_err(usage)?,
        (None, Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            Config::from_json(&text).map_err(usage)?
        }
        (None, None, Some(name)) => presets::load(name).map_err(usage)?,
        (None, None, None) => Config::from_network(vo2osc::circuit::NetworkConfig {
            oscillators: Vec::new(),
            couplings: Vec::new(),
        }),
    };
    finish_config(config, &args.set)
}

fn finish_config(mut config: Config, sets: &[String]) -> CmdResult<Loaded> {
    let seed_from_env = match std::env::var(SEED_ENV) {
        Ok(s) => {
            let seed: u64 = s
                .trim()
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV} must be a non-negative integer (got {s:?})")))?;
            config.sim.master_seed = seed;
            Some(seed)
        }
        Err(_) => None,
    };
    let mut overrides = Vec::new();
    for s in sets {
        let (key, value) = parse_set(s).map_err(usage)?;
        config.set(&key, value).map_err(usage)?;
        overrides.push(Override { key, value });
    }
    Ok(Loaded {
        config,
        overrides,
        seed_from_env,
    })
}

/// Applies `--coupling` flags. Two flags on the same pair are a conflict.
fn apply_couplings(config: &mut Config, flags: &[String]) -> CmdResult<()> {
    let parsed: Vec<CouplingFlag> = flags
        .iter()
        .map(|s| parse_coupling(s))
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    let mut seen = HashSet::new();
    for f in &parsed {
        let key = (f.pair.0.min(f.pair.1), f.pair.0.max(f.pair.1));
        if !seen.insert(key) {
            return Err(usage(format!(
                "conflicting --coupling flags for oscillators {}-{}",
                key.0, key.1
            )));
        }
        config.set_coupling(f.pair.0, f.pair.1, f.kind, f.value);
    }
    Ok(())
}

fn skip_for(config: &Config, wf: &Waveform) -> f64 {
    config
        .analysis
        .skip_transient
        .unwrap_or_else(|| default_transient(wf))
}

fn collect_warnings(out: &mut Outputs, config: &Config, wf: Option<&Waveform>) {
    for (k, o) in config.oscillators.iter().enumerate() {
        for w in o.load_line_warnings() {
            out.warn(format!("oscillator {k}: {w}"));
        }
    }
    if let Some(wf) = wf {
        for w in &wf.warnings {
            out.warn(format!("validity_check ({:?}): {}", w.level, w.message));
        }
    }
}

fn check_pair(config: &Config, pair: (usize, usize)) -> CmdResult<()> {
    let n = config.oscillators.len();
    if pair.0 >= n || pair.1 >= n {
        return Err(usage(format!(
            "pair {}-{} is out of range for {n} oscillators",
            pair.0, pair.1
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SingleReport {
    osc: usize,
    #[serde(flatten)]
    peak: PeakMetrics,
    df: f64,
    /// Mean ON-event rate.
    event_frequency_hz: Option<f64>,
    /// Mean ON-phase duration (discharge current pulse).
    pulse_width_mean_s: Option<f64>,
    skip_transient_s: f64,
}

fn single_report(wf: &Waveform, osc: usize, skip: f64) -> vo2osc::Result<(SingleReport, String)> {
    let spec = spectrum(wf, osc, skip)?;
    let peak = peak_metrics(&spec)?;
    let widths = wf.pulse_widths(osc, skip);
    let report = SingleReport {
        osc,
        peak,
        df: spec.df,
        event_frequency_hz: wf.event_frequency(osc, skip),
        pulse_width_mean_s: (!widths.is_empty())
            .then(|| widths.iter().sum::<f64>() / widths.len() as f64),
        skip_transient_s: skip,
    };
    Ok((report, io::spectrum_csv(&spec)))
}

fn cmd_single(args: &SingleArgs, out: &mut Outputs) -> CmdResult<Loaded> {
    let loaded = load_config(&args.cfg, Some("paper-calibrated"))?;
    let config = &loaded.config;
    config.validate().map_err(usage)?;
    if config.oscillators.len() != 1 {
        return Err(usage(format!(
            "single needs exactly one oscillator (configuration has {})",
            config.oscillators.len()
        )));
    }
    let wf = simulate(&config.network(), &config.sim).map_err(runtime)?;
    let skip = skip_for(config, &wf);
    let (report, spectrum_csv) = single_report(&wf, 0, skip).map_err(runtime)?;
    let iv = dynamic_iv(&wf, 0).map_err(runtime)?;
    out.add("waveform.csv", io::waveform_csv(&wf));
    out.add("events.csv", io::events_csv(&wf.events));
    out.add("spectrum.csv", spectrum_csv);
    out.add_json("peak_metrics.json", &report);
    out.add("dynamic_iv.csv", io::iv_csv(&iv));
    collect_warnings(out, config, Some(&wf));
    Ok(loaded)
}

/// Per-oscillator spectra; oscillators too short-lived for a spectrum are
/// skipped with a warning.
fn add_spectra(out: &mut Outputs, wf: &Waveform, skip: f64) {
    for k in 0..wf.n_osc() {
        match spectrum(wf, k, skip) {
            Ok(s) => out.add(format!("spectrum_osc{k}.csv"), io::spectrum_csv(&s)),
            Err(e) => out.warn(format!("no spectrum for oscillator {k}: {e}")),
        }
    }
}

fn coupled_products(
    out: &mut Outputs,
    wf: &Waveform,
    pair: (usize, usize),
    skip: f64,
    config: &Config,
) -> vo2osc::Result<SyncReport> {
    let report = classify_regime(wf, pair, skip, &config.analysis.thresholds)?;
    add_spectra(out, wf, skip);
    out.add_json("sync_report.json", &report);
    match phase_difference(wf, pair.0, pair.1, skip) {
        Ok(d) => out.add("phase_difference.csv", io::phase_csv(&d)),
        Err(e) => out.warn(format!("no phase difference: {e}")),
    }
    // shorter runs get a portrait over the periods they have
    let available = wf
        .event_frequency(pair.0, skip)
        .map_or(0, |f| ((wf.duration() - skip) * f).floor() as usize);
    let periods = PORTRAIT_PERIODS.min(available.saturating_sub(1));
    if periods < PORTRAIT_PERIODS {
        out.warn(format!("phase portrait covers {periods} periods, not {PORTRAIT_PERIODS}"));
    }
    match phase_portrait(wf, pair.0, pair.1, periods.max(1), skip) {
        Ok(p) => out.add("phase_portrait.csv", io::portrait_csv(&p)),
        Err(e) => out.warn(format!("no phase portrait: {e}")),
    }
    Ok(report)
}

fn cmd_coupled(args: &CoupledArgs, out: &mut Outputs) -> CmdResult<Loaded> {
    let mut loaded = load_config(&args.cfg, Some("paper-pair"))?;
    apply_couplings(&mut loaded.config, &args.coupling)?;
    let config = &loaded.config.clone();
    config.validate().map_err(usage)?;
    let pair = parse_pair(&args.pair).map_err(usage)?;
    check_pair(config, pair)?;
    let mut sim = config.sim;
    loop {
        let wf = simulate(&config.network(), &sim).map_err(runtime)?;
        let skip = skip_for(config, &wf);
        let mut attempt = Outputs::default();
        match coupled_products(&mut attempt, &wf, pair, skip, config) {
            // slow (strongly coupled) networks need more periods for the spectrum
            Err(e @ vo2osc::Error::Insufficient(_))
                if sim.duration * 2.0 <= sweep::MAX_POINT_DURATION =>
            {
                sim.duration *= 2.0;
                out.warn(format!("run extended to {} s: {e}", sim.duration));
            }
            Err(e) => return Err(runtime(e)),
            Ok(_) => {
                out.add("waveform.csv", io::waveform_csv(&wf));
                out.add("events.csv", io::events_csv(&wf.events));
                out.absorb(attempt);
                collect_warnings(out, config, Some(&wf));
                loaded.config.sim = sim;
                return Ok(loaded);
            }
        }
    }
}

fn cmd_sweep(args: &SweepArgs, out: &mut Outputs) -> CmdResult<Loaded> {
    let kind = parse_kind(&args.kind).map_err(usage)?;
    let values = parse_range(&args.range).map_err(usage)?;
    let mut loaded = load_config(&args.cfg, Some("paper-pair"))?;
    apply_couplings(&mut loaded.config, &args.coupling)?;
    let pair = parse_pair(&args.pair).map_err(usage)?;
    let config = &mut loaded.config;
    check_pair(config, pair)?;
    if !config.couplings.iter().any(|c| c.kind == kind) {
        config.couplings.push(match kind {
            CouplingKind::Resistive => CouplingSpec::resistive(pair.0, pair.1, values[0]),
            CouplingKind::Capacitive => CouplingSpec::capacitive(pair.0, pair.1, values[0]),
        });
    }
    config.validate().map_err(usage)?;
    let opts = SweepOptions {
        thresholds: config.analysis.thresholds,
        skip_transient: config.analysis.skip_transient,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0) as usize)
        .build()
        .map_err(runtime)?;
    let net = config.network();
    let result = pool
        .install(|| sweep::sweep(&net, kind, &values, &config.sim, &opts))
        .map_err(usage)?;
    for p in result.points.iter().filter(|p| !p.succeeded()) {
        out.warn(format!(
            "point {:e} failed: {}",
            p.param,
            p.error.as_deref().unwrap_or("unknown error")
        ));
    }
    for p in result.points.iter().filter(|p| p.duration > config.sim.duration) {
        out.warn(format!("point {:e} extended to {} s", p.param, p.duration));
    }
    out.add("sweep.csv", result.to_csv());
    out.add("boundaries.json", result.boundaries_json() + "\n");
    out.add_json("sweep_points.json", &result);
    collect_warnings(out, config, None);
    let ok = result.success_fraction();
    if ok < SWEEP_SUCCESS_FRACTION {
        return Err(runtime(format!(
            "only {:.0}% of sweep points succeeded",
            100.0 * ok
        )));
    }
    Ok(loaded)
}

fn cmd_cpg(args: &CpgArgs, out: &mut Outputs) -> CmdResult<Loaded> {
    let gait: Gait = args.gait.parse().map_err(|_| {
        usage(format!(
            "unknown gait {:?} (available: step, trot, amble)",
            args.gait
        ))
    })?;
    let base = presets::load(gait.preset_name()).map_err(usage)?;
    let loaded = finish_config(base, &args.set)?;
    let config = &loaded.config;
    config.validate().map_err(usage)?;
    let spec = GaitSpec::from_config(config).map_err(usage)?;
    let candidates: Vec<GaitSpec> = Gait::ALL
        .iter()
        .map(|&g| if g == gait { Ok(spec.clone()) } else { GaitSpec::preset(g) })
        .collect::<Result<_, _>>()
        .map_err(runtime)?;
    let run = run_gait(&spec, &config.sim).map_err(runtime)?;
    let classification = classify_gait(&run.phases, &candidates);
    out.add("waveform.csv", io::sense_csv(&run.waveform));
    out.add("events.csv", io::events_csv(&run.waveform.events));
    out.add_json("gait_report.json", &GaitReport::new(&spec, &run, classification));
    collect_warnings(out, config, Some(&run.waveform));
    Ok(loaded)
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut Outputs) -> CmdResult<Loaded> {
    let given = args.cfg.preset.is_some() || args.cfg.config.is_some();
    let loaded = load_config(&args.cfg, None)?;
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))
    };
    let events = match &args.events {
        Some(p) => Some(io::read_events_csv(&read(p)?).map_err(usage)?),
        None => None,
    };
    let net = given.then(|| loaded.config.network());
    let wf = io::read_waveform_csv(&read(&args.waveform)?, events, net).map_err(usage)?;
    let skip = skip_for(&loaded.config, &wf);
    let mut reports = Vec::new();
    for k in 0..wf.n_osc() {
        let (r, csv) = single_report(&wf, k, skip).map_err(runtime)?;
        out.add(format!("spectrum_osc{k}.csv"), csv);
        reports.push(r);
    }
    out.add_json("peak_metrics.json", &reports);
    if wf.n_osc() >= 2 {
        let pair = parse_pair(&args.pair).map_err(usage)?;
        if pair.0 >= wf.n_osc() || pair.1 >= wf.n_osc() {
            return Err(usage(format!("pair {}-{} not in waveform", pair.0, pair.1)));
        }
        let report = classify_regime(&wf, pair, skip, &loaded.config.analysis.thresholds)
            .map_err(runtime)?;
        out.add_json("sync_report.json", &report);
        if let Ok(d) = phase_difference(&wf, pair.0, pair.1, skip) {
            out.add("phase_difference.csv", io::phase_csv(&d));
        }
    }
    Ok(loaded)
}

fn run(cli: &Cli, argv: Vec<String>) -> CmdResult<()> {
    let started = Instant::now();
    let mut out = Outputs::default();
    let (name, dir, result) = match &cli.command {
        Command::Single(a) => ("single", &a.out, cmd_single(a, &mut out)),
        Command::Coupled(a) => ("coupled", &a.out, cmd_coupled(a, &mut out)),
        Command::Sweep(a) => ("sweep", &a.out, cmd_sweep(a, &mut out)),
        Command::Cpg(a) => ("cpg", &a.out, cmd_cpg(a, &mut out)),
        Command::Analyze(a) => ("analyze", &a.out, cmd_analyze(a, &mut out)),
    };
    let loaded = result?;
    let mut outputs = out.names();
    outputs.push(MANIFEST.to_string());
    let manifest = RunManifest {
        command: name.to_string(),
        args: argv,
        seed: loaded.config.sim.master_seed,
        config: loaded.config,
        overrides: loaded.overrides,
        seed_from_env: loaded.seed_from_env,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
        warnings: out.warnings.clone(),
    };
    out.add_json(MANIFEST, &manifest);
    out.write(dir)
        .map_err(|e| runtime(format!("cannot write to {}: {e}", dir.display())))?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
