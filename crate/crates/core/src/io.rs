//! CSV export of waveforms and analysis products, and the waveform reader
//! used to re-analyse saved runs.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! reading a file back reproduces the values bit for bit.

use std::fmt::Write as _;

use crate::analysis::Spectrum;
use crate::circuit::{Channel, NetworkConfig, OscillatorParams, SimConfig, Waveform};
use crate::device::{Direction, SwitchEvent};
use crate::error::{Error, Result};

/// `t,osc0_v,osc0_i,osc0_state,osc1_v,...`
pub fn waveform_csv(wf: &Waveform) -> String {
    let mut s = String::from("t");
    for k in 0..wf.n_osc() {
        write!(s, ",osc{k}_v,osc{k}_i,osc{k}_state").unwrap();
    }
    s.push('\n');
    for (n, t) in wf.t.iter().enumerate() {
        write!(s, "{t}").unwrap();
        for ch in &wf.channels {
            write!(s, ",{},{},{}", ch.v[n], ch.i[n], ch.state[n]).unwrap();
        }
        s.push('\n');
    }
    s
}

/// `t,osc0_sense,...`: voltage across each current-sense resistor.
pub fn sense_csv(wf: &Waveform) -> String {
    let r_i: Vec<f64> = wf.net.oscillators.iter().map(|o| o.r_i).collect();
    let mut s = String::from("t");
    for k in 0..wf.n_osc() {
        write!(s, ",osc{k}_sense").unwrap();
    }
    s.push('\n');
    for (n, t) in wf.t.iter().enumerate() {
        write!(s, "{t}").unwrap();
        for (ch, r) in wf.channels.iter().zip(&r_i) {
            write!(s, ",{}", ch.i[n] * r).unwrap();
        }
        s.push('\n');
    }
    s
}

/// `t,osc,direction`
pub fn events_csv(events: &[SwitchEvent]) -> String {
    let mut s = String::from("t,osc,direction\n");
    for e in events {
        writeln!(s, "{},{},{}", e.t, e.osc, e.direction.as_str()).unwrap();
    }
    s
}

/// `freq_hz,magnitude`
pub fn spectrum_csv(spec: &Spectrum) -> String {
    pairs_csv("freq_hz,magnitude", spec.freqs.iter().copied().zip(spec.magnitude.iter().copied()))
}

/// `t,delta_phi_deg`
pub fn phase_csv(dphi: &[(f64, f64)]) -> String {
    pairs_csv("t,delta_phi_deg", dphi.iter().copied())
}

/// `v_a,v_b`
pub fn portrait_csv(points: &[(f64, f64)]) -> String {
    pairs_csv("v_a,v_b", points.iter().copied())
}

/// `v,i`
pub fn iv_csv(points: &[(f64, f64)]) -> String {
    pairs_csv("v,i", points.iter().copied())
}

fn pairs_csv(header: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = format!("{header}\n");
    for (a, b) in rows {
        writeln!(s, "{a},{b}").unwrap();
    }
    s
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: bad number {field:?}")))
}

pub fn read_events_csv(text: &str) -> Result<Vec<SwitchEvent>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "t,osc,direction" => {}
        _ => return Err(Error::Config("events CSV must start with t,osc,direction".into())),
    }
    let mut out = Vec::new();
    for (n, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let [t, osc, dir] = f[..] else {
            return Err(Error::Config(format!("line {}: expected 3 fields", n + 1)));
        };
        let direction = match dir.trim() {
            "ON" => Direction::On,
            "OFF" => Direction::Off,
            other => return Err(Error::Config(format!("line {}: bad direction {other:?}", n + 1))),
        };
        out.push(SwitchEvent {
            t: parse_f64(t, n + 1)?,
            osc: osc
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad oscillator {osc:?}", n + 1)))?,
            direction,
        });
    }
    Ok(out)
}

/// Parses a waveform CSV written by [`waveform_csv`].
///
/// Events are taken from `events` when given, otherwise reconstructed from
/// the state columns at sample resolution. `net` supplies the circuit
/// parameters (default oscillators when absent); it must have one oscillator
/// per channel.
pub fn read_waveform_csv(
    text: &str,
    events: Option<Vec<SwitchEvent>>,
    net: Option<NetworkConfig>,
) -> Result<Waveform> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Config("empty waveform CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") || (cols.len() - 1) % 3 != 0 || cols.len() < 4 {
        return Err(Error::Config(format!("unrecognised waveform header {header:?}")));
    }
    let n_osc = (cols.len() - 1) / 3;
    for k in 0..n_osc {
        let want = [format!("osc{k}_v"), format!("osc{k}_i"), format!("osc{k}_state")];
        if cols[1 + 3 * k..4 + 3 * k] != want {
            return Err(Error::Config(format!("unrecognised waveform header {header:?}")));
        }
    }
    let mut t = Vec::new();
    let mut channels = vec![
        Channel {
            v: Vec::new(),
            i: Vec::new(),
            state: Vec::new(),
        };
        n_osc
    ];
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::Config(format!(
                "line {}: expected {} fields, found {}",
                n + 1,
                cols.len(),
                f.len()
            )));
        }
        t.push(parse_f64(f[0], n + 1)?);
        for (k, ch) in channels.iter_mut().enumerate() {
            ch.v.push(parse_f64(f[1 + 3 * k], n + 1)?);
            ch.i.push(parse_f64(f[2 + 3 * k], n + 1)?);
            let s = f[3 + 3 * k].trim();
            ch.state.push(match s {
                "0" => 0,
                "1" => 1,
                _ => return Err(Error::Config(format!("line {}: bad state {s:?}", n + 1))),
            });
        }
    }
    if t.len() < 2 {
        return Err(Error::Insufficient("waveform CSV has fewer than 2 samples".into()));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("waveform times must increase".into()));
    }
    let net = net.unwrap_or_else(|| NetworkConfig {
        oscillators: vec![OscillatorParams::default(); n_osc],
        couplings: Vec::new(),
    });
    if net.len() != n_osc {
        return Err(Error::Config(format!(
            "configuration has {} oscillators, waveform has {n_osc}",
            net.len()
        )));
    }
    let events = match events {
        Some(mut e) => {
            if let Some(bad) = e.iter().find(|e| e.osc >= n_osc) {
                return Err(Error::Config(format!("event for missing oscillator {}", bad.osc)));
            }
            e.sort_by(|a, b| a.t.total_cmp(&b.t));
            e
        }
        None => events_from_states(&t, &channels),
    };
    let sample_interval = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let sim = SimConfig {
        duration: t[t.len() - 1],
        ..SimConfig::default()
    };
    Ok(Waveform {
        t,
        channels,
        events,
        sample_interval,
        net,
        sim,
        warnings: Vec::new(),
    })
}

/// One event per state change, stamped with the first sample in the new state.
pub fn events_from_states(t: &[f64], channels: &[Channel]) -> Vec<SwitchEvent> {
    let mut out = Vec::new();
    for (osc, ch) in channels.iter().enumerate() {
        for n in 1..ch.state.len() {
            if ch.state[n] != ch.state[n - 1] {
                out.push(SwitchEvent {
                    osc,
                    t: t[n],
                    direction: if ch.state[n] == 1 { Direction::On } else { Direction::Off },
                });
            }
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::simulate;

    fn run() -> Waveform {
        let net = NetworkConfig::single(OscillatorParams::default());
        simulate(
            &net,
            &SimConfig {
                duration: 2e-3,
                ..SimConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn waveform_round_trip() {
        let wf = run();
        let csv = waveform_csv(&wf);
        assert!(csv.starts_with("t,osc0_v,osc0_i,osc0_state\n"));
        let events = read_events_csv(&events_csv(&wf.events)).unwrap();
        assert_eq!(events, wf.events);
        let back = read_waveform_csv(&csv, Some(events), Some(wf.net.clone())).unwrap();
        assert_eq!(back.t, wf.t);
        assert_eq!(back.channels, wf.channels);
        assert_eq!(back.events, wf.events);
    }

    #[test]
    fn states_give_events_within_a_sample() {
        let wf = run();
        let back = read_waveform_csv(&waveform_csv(&wf), None, None).unwrap();
        // the very first sample may already be past an event
        let exact: Vec<_> = wf.events.iter().filter(|e| e.t > wf.t[0]).collect();
        assert_eq!(back.events.len(), exact.len());
        for (a, b) in back.events.iter().zip(exact) {
            assert_eq!((a.osc, a.direction), (b.osc, b.direction));
            assert!(a.t >= b.t && a.t - b.t <= wf.sample_interval * 1.0001);
        }
    }

    #[test]
    fn malformed_input() {
        assert!(read_waveform_csv("", None, None).is_err());
        assert!(read_waveform_csv("t,x\n0,1\n", None, None).is_err());
        assert!(read_waveform_csv("t,osc0_v,osc0_i,osc0_state\n0,1,2,0\n1e-6,1,2\n", None, None).is_err());
        assert!(read_waveform_csv("t,osc0_v,osc0_i,osc0_state\n0,1,2,0\n0,1,2,0\n", None, None).is_err());
        assert!(read_waveform_csv("t,osc0_v,osc0_i,osc0_state\n0,1,2,7\n1,1,2,0\n", None, None).is_err());
        assert!(read_events_csv("t,osc,direction\n0,0,UP\n").is_err());
        assert!(read_events_csv("a,b\n").is_err());
    }

    #[test]
    fn pair_writers() {
        assert_eq!(portrait_csv(&[(1.0, 0.5)]), "v_a,v_b\n1,0.5\n");
        assert_eq!(iv_csv(&[(1.5, 1e-3)]), "v,i\n1.5,0.001\n");
        assert_eq!(phase_csv(&[]), "t,delta_phi_deg\n");
    }
}
