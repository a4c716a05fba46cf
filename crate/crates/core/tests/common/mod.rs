//! Reference computations shared by the oracle and acceptance targets.
#![allow(dead_code)]

use rustfft::{num_complex::Complex, FftPlanner};

use vo2osc::circuit::{dynamic_iv, simulate, NetworkConfig, OscillatorParams, SimConfig};
use vo2osc::device::{FlickerNoise, NoiseParams};

pub fn quiet() -> OscillatorParams {
    let mut o = OscillatorParams::default();
    o.switch.noise = NoiseParams::disabled();
    o
}

/// Welch PSD estimate: Hann segments, 50% overlap.
fn welch(x: &[f64], fs: f64, seg: usize) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = (0..seg)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / seg as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; seg / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let chunk = &x[start..start + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        let mut buf: Vec<Complex<f64>> =
            chunk.iter().zip(&w).map(|(v, wk)| Complex::new((v - mean) * wk, 0.0)).collect();
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += seg / 2;
    }
    let freqs = (0..acc.len()).map(|k| k as f64 * fs / seg as f64).collect();
    (freqs, acc.iter().map(|a| a / count as f64).collect())
}

/// Least-squares slope of log10 PSD against log10 f over log-spaced bins.
fn log_slope(freqs: &[f64], psd: &[f64], f_lo: f64, f_hi: f64) -> f64 {
    let n_bins = 16;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|k| f_lo * (f_hi / f_lo).powf(k as f64 / n_bins as f64))
        .collect();
    let mut pts = Vec::new();
    for e in edges.windows(2) {
        let sel: Vec<(f64, f64)> = freqs
            .iter()
            .zip(psd)
            .filter(|(&f, _)| f >= e[0] && f < e[1])
            .map(|(&f, &p)| (f.log10(), p.log10()))
            .collect();
        if !sel.is_empty() {
            let n = sel.len() as f64;
            pts.push((sel.iter().map(|p| p.0).sum::<f64>() / n, sel.iter().map(|p| p.1).sum::<f64>() / n));
        }
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// PSD slope of the noise source over 10 s at 100 kS/s.
pub fn noise_psd_slope(alpha: f64, seed: u64) -> f64 {
    let p = NoiseParams {
        alpha,
        seed,
        ..NoiseParams::default()
    };
    let mut gen = FlickerNoise::new(p);
    let fs = 100e3;
    let x: Vec<f64> = (0..1_000_000).map(|k| gen.sample(k as f64 / fs)).collect();
    let (f, psd) = welch(&x, fs, 1 << 16);
    log_slope(&f, &psd, 4.0, 400.0)
}

/// Period of the single oscillator with a constant ON resistance, from the
/// two exponential segments of the piecewise-linear circuit.
pub fn reference_period(o: &OscillatorParams, r_on: f64) -> f64 {
    let c = o.c_par;
    let seg = |r_branch: f64| {
        let v_inf = o.v_dd * r_branch / (o.r_s + r_branch);
        let tau = c * o.r_s * r_branch / (o.r_s + r_branch);
        (v_inf, tau)
    };
    let (v_off, tau_off) = seg(o.switch.r_off + o.r_i);
    let (v_on, tau_on) = seg(r_on + o.r_i);
    let (v_th, v_h) = (o.switch.v_th, o.switch.v_h);
    tau_off * ((v_off - v_h) / (v_off - v_th)).ln() + tau_on * ((v_th - v_on) / (v_h - v_on)).ln()
}

pub fn simulated_period(o: &OscillatorParams, dt: f64) -> f64 {
    let wf = simulate(
        &NetworkConfig::single(*o),
        &SimConfig {
            dt,
            duration: 6e-3,
            record_every: 100,
            ..SimConfig::default()
        },
    )
    .unwrap();
    let on = wf.on_times(0);
    let on = &on[3..];
    (on[on.len() - 1] - on[0]) / (on.len() - 1) as f64
}

/// Largest relative deviation of ON samples from `v/(r_on(v) + r_i)` and the
/// fitted OFF-branch slope.
pub fn dynamic_iv_check(o: &OscillatorParams) -> (f64, f64) {
    let wf = simulate(
        &NetworkConfig::single(*o),
        &SimConfig {
            duration: 5e-3,
            record_every: 1,
            ..SimConfig::default()
        },
    )
    .unwrap();
    let iv = dynamic_iv(&wf, 0).unwrap();
    let i0 = wf.index_at(wf.on_times(0)[0]);
    let sw = &o.switch;
    let mut worst_on = 0.0_f64;
    let mut off = Vec::new();
    for (n, &(v, i)) in iv.iter().enumerate() {
        let k = i0 + n;
        // skip samples next to a switching event
        if k == 0 || k + 1 >= wf.len() || wf.channels[0].state[k - 1] != wf.channels[0].state[k + 1] {
            continue;
        }
        if wf.channels[0].state[k] == 1 {
            let g = (sw.a * v + sw.b) * v + sw.c;
            let r_on = (v / g).clamp(sw.r_on_floor, sw.r_on_ceiling);
            let expect = v / (r_on + o.r_i);
            worst_on = worst_on.max((i - expect).abs() / expect);
        } else {
            off.push((v, i));
        }
    }
    let n = off.len() as f64;
    let (mv, mi) = (off.iter().map(|p| p.0).sum::<f64>() / n, off.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = off.iter().map(|p| (p.0 - mv) * (p.1 - mi)).sum::<f64>()
        / off.iter().map(|p| (p.0 - mv).powi(2)).sum::<f64>();
    (worst_on, slope)
}

