//! Spectral, phase and regime analysis of simulated waveforms.
//!
//! Phases are taken from ON-switching events rather than from an analytic
//! signal: relaxation waveforms are pulse-like and the switching instant is
//! the natural phase marker.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::circuit::{default_transient, Waveform};
use crate::device::Direction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum Window {
    Rect,
    #[default]
    Hann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    /// Single-sided amplitude spectrum, volts.
    pub magnitude: Vec<f64>,
    pub df: f64,
    pub window: Window,
}

/// Options for [`spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub skip_transient: f64,
    pub window: Window,
    /// Trim the segment to span a whole number of periods of the analysed
    /// oscillator (first to last ON event). With a rectangular window this
    /// puts a strictly periodic signal's harmonics exactly on bins.
    pub period_aligned: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            skip_transient: 10e-3,
            window: Window::Hann,
            period_aligned: false,
        }
    }
}

/// Minimum number of expected periods in an analysed segment.
pub const MIN_PERIODS: f64 = 50.0;

/// Hann-windowed amplitude spectrum of the voltage channel after
/// `skip_transient` seconds.
pub fn spectrum(wf: &Waveform, osc: usize, skip_transient: f64) -> Result<Spectrum> {
    spectrum_with(
        wf,
        osc,
        &SpectrumOptions {
            skip_transient,
            ..SpectrumOptions::default()
        },
    )
}

pub fn spectrum_with(wf: &Waveform, osc: usize, opts: &SpectrumOptions) -> Result<Spectrum> {
    check_osc(wf, osc)?;
    let on: Vec<f64> = wf
        .on_times(osc)
        .into_iter()
        .filter(|&t| t >= opts.skip_transient)
        .collect();
    let (t0, t1) = if opts.period_aligned && on.len() >= 2 {
        (on[0], on[on.len() - 1])
    } else {
        (opts.skip_transient, wf.duration())
    };
    let i0 = wf.index_at(t0);
    let i1 = wf.index_at(t1).min(wf.len());
    if i1 <= i0 + 16 {
        return Err(Error::Insufficient(format!(
            "segment [{t0:.4e}, {t1:.4e}] s holds too few samples"
        )));
    }
    let seg_dur = (i1 - i0) as f64 * wf.sample_interval;
    if on.len() >= 2 {
        let period = (on[on.len() - 1] - on[0]) / (on.len() - 1) as f64;
        if seg_dur < MIN_PERIODS * period * (1.0 - 1e-9) {
            return Err(Error::Insufficient(format!(
                "segment of {seg_dur:.4e} s covers fewer than {MIN_PERIODS} periods of {period:.4e} s"
            )));
        }
    }
    Ok(amplitude_spectrum(
        &wf.channels[osc].v[i0..i1],
        1.0 / wf.sample_interval,
        opts.window,
    ))
}

/// Single-sided amplitude spectrum of a uniformly sampled signal, with the
/// mean removed before windowing.
pub fn amplitude_spectrum(x: &[f64], fs: f64, window: Window) -> Spectrum {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = match window {
        Window::Rect => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect(),
    };
    let gain: f64 = w.iter().sum();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .zip(&w)
        .map(|(&v, &wk)| Complex::new((v - mean) * wk, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let df = fs / n as f64;
    let magnitude = buf[..half]
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let scale = if k == 0 || (n % 2 == 0 && k == n / 2) { 1.0 } else { 2.0 };
            scale * c.norm() / gain
        })
        .collect();
    Spectrum {
        freqs: (0..half).map(|k| k as f64 * df).collect(),
        magnitude,
        df,
        window,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakMetrics {
    pub f1: f64,
    pub delta_f1: f64,
    pub rel_fluct: f64,
    pub peak_height: f64,
}

/// Relative height at which the fundamental's width is measured.
pub const PEAK_WIDTH_LEVEL: f64 = 0.01;

/// Fundamental and the width of the contiguous band around it where the
/// magnitude stays at or above 1% of the peak. A lone bin has width `df`.
pub fn peak_metrics(spec: &Spectrum) -> Result<PeakMetrics> {
    let mags = &spec.magnitude;
    let (k1, &peak) = mags
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Insufficient("spectrum has no bins above DC".into()))?;
    if !(peak > 0.0) {
        return Err(Error::Insufficient("spectrum is zero above DC".into()));
    }
    let level = PEAK_WIDTH_LEVEL * peak;
    let mut lo = k1;
    while lo > 1 && mags[lo - 1] >= level {
        lo -= 1;
    }
    let mut hi = k1;
    while hi + 1 < mags.len() && mags[hi + 1] >= level {
        hi += 1;
    }
    let f1 = spec.freqs[k1];
    let delta_f1 = (hi - lo + 1) as f64 * spec.df;
    Ok(PeakMetrics {
        f1,
        delta_f1,
        rel_fluct: delta_f1 / f1,
        peak_height: peak,
    })
}

/// Spectral flatness (geometric over arithmetic mean of power) over
/// `[f_lo, f_hi]`. Power is first averaged over groups of adjacent bins so
/// that a white spectrum scores close to 1.
pub fn spectral_flatness(spec: &Spectrum, f_lo: f64, f_hi: f64) -> f64 {
    const GROUP: usize = 16;
    let power: Vec<f64> = spec
        .freqs
        .iter()
        .zip(&spec.magnitude)
        .filter(|(&f, _)| f >= f_lo && f <= f_hi && f > 0.0)
        .map(|(_, &m)| m * m)
        .collect();
    if power.is_empty() {
        return 0.0;
    }
    let group = if power.len() >= 4 * GROUP { GROUP } else { 1 };
    let blocks: Vec<f64> = power
        .chunks(group)
        .filter(|c| c.len() == group)
        .map(|c| c.iter().sum::<f64>() / group as f64)
        .collect();
    let am = blocks.iter().sum::<f64>() / blocks.len() as f64;
    if !(am > 0.0) {
        return 0.0;
    }
    let floor = am * 1e-300_f64.max(f64::MIN_POSITIVE);
    let gm = (blocks.iter().map(|&p| p.max(floor).ln()).sum::<f64>() / blocks.len() as f64).exp();
    (gm / am).clamp(0.0, 1.0)
}

/// `(t, Δφ)` samples: for each ON event of `osc_a` at `t_k` with following
/// period `T_k`, `Δφ = 360°·(t_b − t_k)/T_k mod 360` where `t_b` is the first
/// ON event of `osc_b` at or after `t_k`.
pub fn phase_difference(
    wf: &Waveform,
    osc_a: usize,
    osc_b: usize,
    skip_transient: f64,
) -> Result<Vec<(f64, f64)>> {
    check_osc(wf, osc_a)?;
    check_osc(wf, osc_b)?;
    let on_a = post(wf.on_times(osc_a), skip_transient);
    let on_b = post(wf.on_times(osc_b), skip_transient);
    for (osc, on) in [(osc_a, &on_a), (osc_b, &on_b)] {
        if on.len() < 10 {
            return Err(Error::Death(osc));
        }
    }
    let mut out = Vec::with_capacity(on_a.len());
    let mut jb = 0;
    for w in on_a.windows(2) {
        let (tk, period) = (w[0], w[1] - w[0]);
        while jb < on_b.len() && on_b[jb] < tk {
            jb += 1;
        }
        let Some(&tb) = on_b.get(jb) else { break };
        out.push((tk, (360.0 * (tb - tk) / period).rem_euclid(360.0)));
    }
    Ok(out)
}

fn post(times: Vec<f64>, skip: f64) -> Vec<f64> {
    times.into_iter().filter(|&t| t >= skip).collect()
}

fn check_osc(wf: &Waveform, osc: usize) -> Result<()> {
    if osc >= wf.n_osc() {
        return Err(Error::InvalidParams(format!(
            "oscillator {osc} not in waveform ({} channels)",
            wf.n_osc()
        )));
    }
    Ok(())
}

/// Circular mean (degrees in `[0, 360)`) and circular standard deviation
/// (degrees) of a set of angles.
pub fn circular_stats(deg: &[f64]) -> (f64, f64) {
    if deg.is_empty() {
        return (0.0, 0.0);
    }
    let (s, c) = deg.iter().fold((0.0, 0.0), |(s, c), &d| {
        let r = d.to_radians();
        (s + r.sin(), c + r.cos())
    });
    let n = deg.len() as f64;
    let (s, c) = (s / n, c / n);
    let r = (s * s + c * c).sqrt().min(1.0);
    let mean = s.atan2(c).to_degrees().rem_euclid(360.0);
    let std = if r > 0.0 {
        (-2.0 * r.ln()).sqrt().to_degrees()
    } else {
        f64::INFINITY
    };
    // rem_euclid can round up to exactly 360
    (if mean >= 360.0 { 0.0 } else { mean }, std)
}

/// Smallest angle between two phases, degrees in `[0, 180]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFailure {
    pub t_start: f64,
    /// Index into the phase-difference series where the excursion begins.
    pub start: usize,
    /// Periods until the phase is back at its locked value.
    pub recovery_periods: usize,
    /// Largest deviation from the locked value during the episode, degrees.
    pub depth_deg: f64,
}

/// Thresholds for [`phase_failures`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FailureThresholds {
    /// Deviation from the locked phase that opens an episode.
    pub depart_deg: f64,
    /// Deviation under which the phase counts as restored.
    pub return_deg: f64,
    /// Consecutive restored periods needed to close an episode.
    pub settle_periods: usize,
}

impl Default for FailureThresholds {
    fn default() -> Self {
        Self {
            depart_deg: 45.0,
            return_deg: 20.0,
            settle_periods: 3,
        }
    }
}

/// Episodes where the phase difference leaves its locked value and later
/// returns to it. The locked value is the circular median of the series.
/// An excursion still open at the end of the series is not counted.
pub fn phase_failures(dphi: &[(f64, f64)], th: &FailureThresholds) -> Vec<PhaseFailure> {
    let Some(locked) = circular_median(dphi.iter().map(|p| p.1)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < dphi.len() {
        let d = circular_distance(dphi[k].1, locked);
        if d <= th.depart_deg {
            k += 1;
            continue;
        }
        let start = k;
        let mut depth = d;
        let mut settled_at = None;
        let mut run = 0;
        let mut j = k + 1;
        while j < dphi.len() {
            let dj = circular_distance(dphi[j].1, locked);
            depth = depth.max(dj);
            if dj <= th.return_deg {
                run += 1;
                if run == th.settle_periods {
                    settled_at = Some(j + 1 - th.settle_periods);
                    break;
                }
            } else {
                run = 0;
            }
            j += 1;
        }
        match settled_at {
            Some(end) => {
                out.push(PhaseFailure {
                    t_start: dphi[start].0,
                    start,
                    recovery_periods: end - start,
                    depth_deg: depth,
                });
                k = j + 1;
            }
            None => break,
        }
    }
    out
}

/// Angle minimising the summed circular distance, searched over the samples
/// themselves (coarsened to at most 720 candidates).
fn circular_median(angles: impl Iterator<Item = f64>) -> Option<f64> {
    let a: Vec<f64> = angles.collect();
    if a.is_empty() {
        return None;
    }
    let stride = (a.len() / 720).max(1);
    a.iter()
        .step_by(stride)
        .map(|&c| (c, a.iter().map(|&x| circular_distance(x, c)).sum::<f64>()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(c, _)| c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Uncoupled,
    QuasiPeriodic,
    Synchronized,
    Chaotic,
    Death,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Uncoupled => "UNCOUPLED",
            Regime::QuasiPeriodic => "QUASI_PERIODIC",
            Regime::Synchronized => "SYNCHRONIZED",
            Regime::Chaotic => "CHAOTIC",
            Regime::Death => "DEATH",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "UNCOUPLED" => Regime::Uncoupled,
            "QUASI_PERIODIC" => Regime::QuasiPeriodic,
            "SYNCHRONIZED" => Regime::Synchronized,
            "CHAOTIC" => Regime::Chaotic,
            "DEATH" => Regime::Death,
            other => return Err(Error::Config(format!("unknown regime {other:?}"))),
        })
    }
}

/// Regime classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Post-transient window must be at least this long, seconds.
    pub min_window: f64,
    /// Trailing fraction of the window that must still contain ON events.
    pub death_tail: f64,
    pub freq_match: f64,
    pub sync_circstd_deg: f64,
    pub flatness: f64,
    /// Harmonics of f1 included in the flatness band.
    pub flatness_harmonics: f64,
    pub period_cv: f64,
    pub sideband: f64,
    /// Half-width, relative to f1, of the exclusion zone around harmonics
    /// when searching for sidebands.
    pub harmonic_guard: f64,
    pub failures: FailureThresholds,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            min_window: 0.1,
            death_tail: 0.25,
            freq_match: 0.01,
            sync_circstd_deg: 30.0,
            flatness: 0.35,
            flatness_harmonics: 5.0,
            period_cv: 0.25,
            sideband: 0.10,
            harmonic_guard: 0.03,
            failures: FailureThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub pair: (usize, usize),
    /// Switching frequency of each oscillator (mean ON-event rate).
    pub f1_per_osc: Vec<f64>,
    /// Frequency of the largest spectral peak of each voltage channel.
    pub spectral_f1_per_osc: Vec<f64>,
    pub delta_phi_mean_deg: f64,
    pub delta_phi_circstd_deg: f64,
    pub regime: Regime,
    pub phase_failures: usize,
    pub flatness: Vec<f64>,
    pub period_cv: Vec<f64>,
    /// Largest non-harmonic peak relative to the fundamental, per oscillator.
    pub sideband_ratio: Vec<f64>,
    pub skip_transient: f64,
    pub thresholds: RegimeThresholds,
}

/// Coefficient of variation of the ON-to-ON intervals.
pub fn period_cv(on: &[f64]) -> f64 {
    if on.len() < 3 {
        return 0.0;
    }
    let p: Vec<f64> = on.windows(2).map(|w| w[1] - w[0]).collect();
    let m = p.iter().sum::<f64>() / p.len() as f64;
    let var = p.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / p.len() as f64;
    var.sqrt() / m
}

/// Largest local maximum in `[0.5·f1, 5·f1]` lying outside the guard zones
/// around the harmonics of `f1` (and of the partner oscillator's `f_partner`,
/// whose own tones leak through the coupling), relative to the largest peak.
/// What remains are cross-modulation products.
pub fn sideband_ratio(spec: &Spectrum, f1: f64, f_partner: Option<f64>, guard: f64) -> f64 {
    let mags = &spec.magnitude;
    let peak = mags.iter().skip(1).cloned().fold(0.0, f64::max);
    if !(peak > 0.0) || !(f1 > 0.0) {
        return 0.0;
    }
    let mut best = 0.0_f64;
    for k in 1..mags.len().saturating_sub(1) {
        let f = spec.freqs[k];
        if f < 0.5 * f1 || f > 5.0 * f1 {
            continue;
        }
        if !(mags[k] >= mags[k - 1] && mags[k] >= mags[k + 1]) {
            continue;
        }
        let near_harmonic = |base: f64| {
            let h = (f / base).round();
            h >= 1.0 && (f - h * base).abs() <= guard * f1
        };
        if near_harmonic(f1) || f_partner.is_some_and(|fp| fp > 0.0 && near_harmonic(fp)) {
            continue;
        }
        best = best.max(mags[k]);
    }
    best / peak
}

/// Classifies the joint behaviour of oscillators `a` and `b`.
///
/// Rules are applied in order: DEATH, SYNCHRONIZED, CHAOTIC,
/// QUASI_PERIODIC, UNCOUPLED.
pub fn classify_regime(
    wf: &Waveform,
    pair: (usize, usize),
    skip_transient: f64,
    th: &RegimeThresholds,
) -> Result<SyncReport> {
    let (a, b) = pair;
    check_osc(wf, a)?;
    check_osc(wf, b)?;
    let t_end = wf.duration();
    let window = t_end - skip_transient;
    if window < th.min_window * (1.0 - 1e-9) {
        return Err(Error::Insufficient(format!(
            "analysis window {window:.4e} s is shorter than {:.4e} s",
            th.min_window
        )));
    }
    let tail_start = t_end - th.death_tail * window;
    let ons = [
        post(wf.on_times(a), skip_transient),
        post(wf.on_times(b), skip_transient),
    ];
    let mut report = SyncReport {
        pair,
        f1_per_osc: vec![0.0; 2],
        spectral_f1_per_osc: vec![0.0; 2],
        delta_phi_mean_deg: 0.0,
        delta_phi_circstd_deg: 0.0,
        regime: Regime::Death,
        phase_failures: 0,
        flatness: vec![0.0; 2],
        period_cv: vec![0.0; 2],
        sideband_ratio: vec![0.0; 2],
        skip_transient,
        thresholds: *th,
    };
    for (k, on) in ons.iter().enumerate() {
        if on.len() >= 2 {
            report.f1_per_osc[k] = (on.len() - 1) as f64 / (on[on.len() - 1] - on[0]);
        }
        report.period_cv[k] = period_cv(on);
    }
    if ons.iter().any(|on| !on.iter().any(|&t| t >= tail_start)) || ons.iter().any(|on| on.len() < 10) {
        return Ok(report);
    }
    for (k, &osc) in [a, b].iter().enumerate() {
        let spec = spectrum(wf, osc, skip_transient)?;
        let pm = peak_metrics(&spec)?;
        report.spectral_f1_per_osc[k] = pm.f1;
        let f1 = report.f1_per_osc[k];
        report.flatness[k] = spectral_flatness(&spec, 0.0, th.flatness_harmonics * f1);
        let partner = report.f1_per_osc[1 - k];
        report.sideband_ratio[k] = sideband_ratio(&spec, f1, Some(partner), th.harmonic_guard);
    }
    let dphi = phase_difference(wf, a, b, skip_transient)?;
    let angles: Vec<f64> = dphi.iter().map(|p| p.1).collect();
    let (mean, std) = circular_stats(&angles);
    report.delta_phi_mean_deg = mean;
    report.delta_phi_circstd_deg = std;
    report.phase_failures = phase_failures(&dphi, &th.failures).len();

    let (fa, fb) = (report.f1_per_osc[0], report.f1_per_osc[1]);
    report.regime = if (fa - fb).abs() / fa < th.freq_match && std < th.sync_circstd_deg {
        Regime::Synchronized
    } else if report.flatness.iter().any(|&x| x > th.flatness)
        || report.period_cv.iter().any(|&x| x > th.period_cv)
    {
        Regime::Chaotic
    } else if report.sideband_ratio.iter().any(|&x| x >= th.sideband) {
        Regime::QuasiPeriodic
    } else {
        Regime::Uncoupled
    };
    Ok(report)
}

/// [`classify_regime`] with default thresholds and transient skip.
pub fn classify(wf: &Waveform, pair: (usize, usize)) -> Result<SyncReport> {
    classify_regime(wf, pair, default_transient(wf), &RegimeThresholds::default())
}

/// Median slope of the node voltage over the last 5% of the period before
/// each ON event.
pub fn slew_rate_at_switch(wf: &Waveform, osc: usize) -> Result<f64> {
    slew_rate_before(wf, osc, Direction::On, 0.05)
}

/// Median slope of the node voltage over the `fraction` of the period
/// preceding each event of the given direction. The period is the spacing
/// of the surrounding events of that direction.
pub fn slew_rate_before(wf: &Waveform, osc: usize, direction: Direction, fraction: f64) -> Result<f64> {
    check_osc(wf, osc)?;
    let times: Vec<f64> = wf
        .events
        .iter()
        .filter(|e| e.osc == osc && e.direction == direction)
        .map(|e| e.t)
        .collect();
    if times.len() < 5 {
        return Err(Error::Insufficient(format!(
            "slew rate needs at least 5 {} events (oscillator {osc} has {})",
            direction.as_str(),
            times.len()
        )));
    }
    let v = &wf.channels[osc].v;
    let mut slopes: Vec<f64> = times
        .windows(2)
        .filter_map(|w| {
            let period = w[1] - w[0];
            let t_end = w[1];
            let t_start = t_end - fraction * period;
            // last sample strictly before the event
            let i1 = wf.index_at(t_end).checked_sub(1)?;
            let i0 = wf.index_at(t_start);
            if i1 <= i0 {
                return None;
            }
            Some((v[i1] - v[i0]) / (wf.t[i1] - wf.t[i0]))
        })
        .collect();
    if slopes.is_empty() {
        return Err(Error::Insufficient(
            "periods too short for the sampling interval".into(),
        ));
    }
    slopes.sort_by(f64::total_cmp);
    let m = slopes.len();
    Ok(if m % 2 == 1 {
        slopes[m / 2]
    } else {
        0.5 * (slopes[m / 2 - 1] + slopes[m / 2])
    })
}

/// Default number of periods for phase portraits.
pub const PORTRAIT_PERIODS: usize = 1300;

/// `(v_a, v_b)` pairs covering `n_periods` periods of `osc_a` after the
/// transient, decimated to at most 100k points.
pub fn phase_portrait(
    wf: &Waveform,
    osc_a: usize,
    osc_b: usize,
    n_periods: usize,
    skip_transient: f64,
) -> Result<Vec<(f64, f64)>> {
    check_osc(wf, osc_a)?;
    check_osc(wf, osc_b)?;
    let on = post(wf.on_times(osc_a), skip_transient);
    if on.len() < 2 {
        return Err(Error::Insufficient(format!(
            "oscillator {osc_a} has no periods after the transient"
        )));
    }
    let period = (on[on.len() - 1] - on[0]) / (on.len() - 1) as f64;
    let t0 = skip_transient;
    let t1 = t0 + n_periods as f64 * period;
    if t1 > wf.duration() + 1e-12 {
        return Err(Error::Insufficient(format!(
            "{n_periods} periods need {:.4e} s after the transient, waveform has {:.4e} s",
            t1 - t0,
            wf.duration() - t0
        )));
    }
    let (i0, i1) = (wf.index_at(t0), wf.index_at(t1).min(wf.len()));
    let stride = ((i1 - i0) / 100_000).max(1);
    let (va, vb) = (&wf.channels[osc_a].v, &wf.channels[osc_b].v);
    Ok((i0..i1).step_by(stride).map(|k| (va[k], vb[k])).collect())
}

/// Fraction of cells of a `grid × grid` lattice over the bounding box that
/// contain at least one point.
pub fn occupancy(points: &[(f64, f64)], grid: usize) -> f64 {
    if points.is_empty() || grid == 0 {
        return 0.0;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let cell = |v: f64, lo: f64, hi: f64| -> usize {
        if hi > lo {
            (((v - lo) / (hi - lo)) * grid as f64).floor().min(grid as f64 - 1.0) as usize
        } else {
            0
        }
    };
    let mut seen = vec![false; grid * grid];
    for &(x, y) in points {
        seen[cell(y, y0, y1) * grid + cell(x, x0, x1)] = true;
    }
    seen.iter().filter(|&&s| s).count() as f64 / (grid * grid) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(f: f64, fs: f64, dur: f64) -> Vec<f64> {
        let n = (fs * dur) as usize;
        (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * f * k as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn sine_peak_location() {
        let spec = amplitude_spectrum(&sine(7000.0, 100e3, 1.0), 100e3, Window::Hann);
        let pm = peak_metrics(&spec).unwrap();
        assert!((pm.f1 - 7000.0).abs() <= spec.df);
        assert!((pm.peak_height - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_bin_width_is_df() {
        let spec = amplitude_spectrum(&sine(100.0, 1000.0, 1.0), 1000.0, Window::Rect);
        let pm = peak_metrics(&spec).unwrap();
        assert_eq!(pm.delta_f1, spec.df);
        assert!((pm.f1 - 100.0).abs() < 1e-9);
    }

    #[test]
    fn contiguity_ignores_disjoint_peaks() {
        let df = 1.0;
        let mut mag = vec![0.0; 100];
        mag[20] = 1.0;
        mag[21] = 0.5;
        mag[50] = 0.8;
        mag[51] = 0.8;
        mag[52] = 0.8;
        let spec = Spectrum {
            freqs: (0..100).map(|k| k as f64 * df).collect(),
            magnitude: mag,
            df,
            window: Window::Rect,
        };
        let pm = peak_metrics(&spec).unwrap();
        assert_eq!(pm.f1, 20.0);
        assert_eq!(pm.delta_f1, 2.0);
    }

    #[test]
    fn zero_spectrum_errors() {
        let spec = amplitude_spectrum(&vec![3.0; 256], 1000.0, Window::Hann);
        assert!(peak_metrics(&spec).is_err());
    }

    #[test]
    fn circular_helpers() {
        let (m, s) = circular_stats(&[350.0, 10.0]);
        assert!(circular_distance(m, 0.0) < 1e-9);
        assert!(s > 0.0 && s < 15.0);
        assert_eq!(circular_distance(10.0, 350.0), 20.0);
        let (m, s) = circular_stats(&[130.0; 50]);
        assert!((m - 130.0).abs() < 1e-9);
        assert!(s < 1e-6);
    }

    #[test]
    fn failure_detection() {
        let mut series: Vec<(f64, f64)> = (0..200).map(|k| (k as f64, 130.0)).collect();
        for (j, v) in [60.0, 20.0, 40.0, 80.0, 100.0, 120.0, 125.0, 128.0, 130.0]
            .iter()
            .enumerate()
        {
            series[50 + j].1 = *v;
        }
        let f = phase_failures(&series, &FailureThresholds::default());
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].start, 50);
        assert_eq!(f[0].recovery_periods, 5);
        assert!((f[0].depth_deg - 110.0).abs() < 1e-9);
        // an excursion that never returns is not a failure-and-recovery
        let mut tail = series.clone();
        for p in tail.iter_mut().skip(190) {
            p.1 = 10.0;
        }
        assert_eq!(phase_failures(&tail, &FailureThresholds::default()).len(), 1);
    }

    #[test]
    fn flatness_bounds() {
        let spec = amplitude_spectrum(&sine(1000.0, 64e3, 1.0), 64e3, Window::Hann);
        assert!(spectral_flatness(&spec, 0.0, 32e3) < 0.05);
    }

    #[test]
    fn occupancy_extremes() {
        let diag: Vec<(f64, f64)> = (0..10_000).map(|k| (k as f64, k as f64)).collect();
        assert!((occupancy(&diag, 64) - 64.0 / 4096.0).abs() < 1e-12);
        let full: Vec<(f64, f64)> = (0..64 * 64)
            .map(|k| ((k % 64) as f64, (k / 64) as f64))
            .collect();
        assert_eq!(occupancy(&full, 64), 1.0);
    }
}
