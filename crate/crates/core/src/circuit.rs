//! Oscillator networks as a switched linear ODE `M·dV/dt = s − G(states, V)·V`
//! and a deterministic fixed-step integrator with event localisation.
//!
//! Each node `k` has a supply `v_dd` behind `r_s`, a grounded capacitor
//! `c_par`, and the VO₂ switch in series with the current-sense resistor
//! `r_i`. Couplings stamp either a conductance (resistive) or a capacitance
//! (capacitive) between two nodes.

use serde::{Deserialize, Serialize};

use crate::device::{
    self, conductance_unchecked, crosses, switch_update, validity_check, FlickerNoise, Phase,
    SwitchEvent, SwitchParams, SwitchState, ValidityWarning,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorParams {
    pub v_dd: f64,
    pub r_s: f64,
    pub c_par: f64,
    pub r_i: f64,
    pub switch: SwitchParams,
}

impl Default for OscillatorParams {
    /// Single oscillator of the equivalent circuit (82 V, 50 kΩ, 100 nF, 10 Ω).
    fn default() -> Self {
        Self {
            v_dd: 82.0,
            r_s: 50e3,
            c_par: 100e-9,
            r_i: 10.0,
            switch: SwitchParams::default(),
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("v_dd", self.v_dd),
            ("r_s", self.r_s),
            ("c_par", self.c_par),
            ("r_i", self.r_i),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive (got {x})")));
            }
        }
        self.switch.validate()
    }

    /// Open-circuit node voltage with the switch OFF.
    pub fn off_asymptote(&self) -> f64 {
        let r = self.switch.r_off + self.r_i;
        self.v_dd * r / (self.r_s + r)
    }

    /// Advisory load-line check: the supply must be able to push the OFF
    /// node past `v_th`, and the ON branch at `v_h` must draw more than the
    /// supply delivers. Returns human-readable warnings.
    pub fn load_line_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let sw = &self.switch;
        if self.off_asymptote() < sw.v_th {
            out.push(format!(
                "OFF-state asymptote {:.4} V is below v_th = {} V: switch stays OFF",
                self.off_asymptote(),
                sw.v_th
            ));
        }
        let supply = (self.v_dd - sw.v_h) / self.r_s;
        let on_at_h = sw.v_h / (device::r_on_unchecked(sw, sw.v_h) + self.r_i);
        if supply >= on_at_h {
            out.push(format!(
                "supply current {:.4e} A at v_h exceeds ON-branch current {:.4e} A: \
                 switch stays ON",
                supply, on_at_h
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CouplingKind {
    Resistive,
    Capacitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub i: usize,
    pub j: usize,
    pub kind: CouplingKind,
    /// Ohms for resistive couplings, farads for capacitive ones.
    pub value: f64,
    /// Film resistance between the two switches; in parallel with a
    /// resistive coupling, ignored for a capacitive one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_ox: Option<f64>,
}

impl CouplingSpec {
    pub fn resistive(i: usize, j: usize, r_ext: f64) -> Self {
        Self {
            i,
            j,
            kind: CouplingKind::Resistive,
            value: r_ext,
            r_ox: None,
        }
    }

    pub fn capacitive(i: usize, j: usize, c: f64) -> Self {
        Self {
            i,
            j,
            kind: CouplingKind::Capacitive,
            value: c,
            r_ox: None,
        }
    }

    pub fn with_r_ox(mut self, r_ox: f64) -> Self {
        self.r_ox = Some(r_ox);
        self
    }

    /// `R_ext ∥ R_ox` for resistive couplings.
    pub fn effective_resistance(&self) -> Option<f64> {
        match self.kind {
            CouplingKind::Resistive => Some(match self.r_ox {
                Some(r_ox) => parallel(self.value, r_ox),
                None => self.value,
            }),
            CouplingKind::Capacitive => None,
        }
    }
}

pub fn parallel(a: f64, b: f64) -> f64 {
    a * b / (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub oscillators: Vec<OscillatorParams>,
    #[serde(default)]
    pub couplings: Vec<CouplingSpec>,
}

impl NetworkConfig {
    pub fn single(osc: OscillatorParams) -> Self {
        Self {
            oscillators: vec![osc],
            couplings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.oscillators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oscillators.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.oscillators.is_empty() {
            return Err(Error::InvalidParams("network has no oscillators".into()));
        }
        for (k, o) in self.oscillators.iter().enumerate() {
            o.validate()
                .map_err(|e| Error::InvalidParams(format!("oscillator {k}: {e}")))?;
        }
        let n = self.oscillators.len();
        let mut seen = std::collections::HashSet::new();
        for c in &self.couplings {
            if c.i >= n || c.j >= n {
                return Err(Error::InvalidParams(format!(
                    "coupling ({}, {}) references a missing oscillator (n = {n})",
                    c.i, c.j
                )));
            }
            if c.i == c.j {
                return Err(Error::InvalidParams(format!(
                    "coupling connects oscillator {} to itself",
                    c.i
                )));
            }
            if !(c.value > 0.0 && c.value.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "coupling ({}, {}) value must be positive (got {})",
                    c.i, c.j, c.value
                )));
            }
            if let Some(r) = c.r_ox {
                if !(r > 0.0) {
                    return Err(Error::InvalidParams(format!("r_ox must be positive (got {r})")));
                }
            }
            let key = (c.i.min(c.j), c.i.max(c.j), c.kind);
            if !seen.insert(key) {
                return Err(Error::InvalidParams(format!(
                    "duplicate {:?} coupling between {} and {}",
                    c.kind, key.0, key.1
                )));
            }
        }
        Ok(())
    }

    /// Same network with every oscillator's noise switched off.
    pub fn without_noise(&self) -> Self {
        let mut out = self.clone();
        for o in &mut out.oscillators {
            o.switch.noise.peak_amplitude = 0.0;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub record_every: usize,
    pub event_tol: f64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 100e-9,
            duration: 0.2,
            record_every: 10,
            event_tol: 1e-9,
            master_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.event_tol > 0.0 && self.event_tol < self.dt) {
            return Err(Error::InvalidParams(format!(
                "event_tol must lie in (0, dt) (got {})",
                self.event_tol
            )));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "duration must be >= dt (got {})",
                self.duration
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.record_every as f64
    }
}

/// Immutable description of an assembled network.
#[derive(Debug, Clone)]
pub struct System {
    n: usize,
    /// Row-major N×N capacitance matrix.
    cap: Vec<f64>,
    /// Resistive stamps `(i, j, conductance)`.
    links: Vec<(usize, usize, f64)>,
    osc: Vec<OscillatorParams>,
}

pub fn build_system(net: &NetworkConfig) -> Result<System> {
    net.validate()?;
    let n = net.len();
    let mut cap = vec![0.0; n * n];
    for (k, o) in net.oscillators.iter().enumerate() {
        cap[k * n + k] = o.c_par;
    }
    let mut links = Vec::new();
    for c in &net.couplings {
        match c.kind {
            CouplingKind::Capacitive => {
                cap[c.i * n + c.i] += c.value;
                cap[c.j * n + c.j] += c.value;
                cap[c.i * n + c.j] -= c.value;
                cap[c.j * n + c.i] -= c.value;
            }
            CouplingKind::Resistive => {
                let r = c.effective_resistance().unwrap_or(c.value);
                links.push((c.i, c.j, 1.0 / r));
            }
        }
    }
    let sys = System {
        n,
        cap,
        links,
        osc: net.oscillators.clone(),
    };
    if !is_positive_definite(&sys.cap, n) {
        return Err(Error::Singular(
            "capacitance matrix is not positive definite".into(),
        ));
    }
    Ok(sys)
}

/// Cholesky-based positive-definiteness test for a symmetric row-major matrix.
pub fn is_positive_definite(m: &[f64], n: usize) -> bool {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

/// Per-run integration state.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub v: Vec<f64>,
    pub switches: Vec<SwitchState>,
    noise: Vec<FlickerNoise>,
    scratch: Scratch,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    g_branch: Vec<f64>,
    a: Vec<f64>,
    rhs: Vec<f64>,
    trial: Vec<f64>,
    probe: Vec<f64>,
}

impl SimState {
    pub fn noise_at(&mut self, osc: usize, t: f64) -> f64 {
        self.noise[osc].sample(t)
    }
}

impl System {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn oscillators(&self) -> &[OscillatorParams] {
        &self.osc
    }

    /// Capacitance matrix entry `M[i][j]`.
    pub fn capacitance(&self, i: usize, j: usize) -> f64 {
        self.cap[i * self.n + j]
    }

    pub fn capacitance_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.cap[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Effective coupling resistances `(i, j, ohms)`.
    pub fn resistive_links(&self) -> Vec<(usize, usize, f64)> {
        self.links.iter().map(|&(i, j, g)| (i, j, 1.0 / g)).collect()
    }

    /// All nodes at 0 V with every switch OFF. Noise streams are seeded with
    /// `master_seed ^ index`.
    pub fn initial_state(&self, master_seed: u64) -> SimState {
        let n = self.n;
        SimState {
            t: 0.0,
            v: vec![0.0; n],
            switches: vec![SwitchState::default(); n],
            noise: self
                .osc
                .iter()
                .enumerate()
                .map(|(k, o)| FlickerNoise::with_seed(o.switch.noise, master_seed ^ k as u64))
                .collect(),
            scratch: Scratch {
                g_branch: vec![0.0; n],
                a: vec![0.0; n * n],
                rhs: vec![0.0; n],
                trial: vec![0.0; n],
                probe: vec![0.0; n],
            },
        }
    }

    /// Conductance of the switch + `r_i` branch of oscillator `k`.
    #[inline]
    pub fn branch_conductance(&self, k: usize, phase: Phase, v: f64) -> f64 {
        let o = &self.osc[k];
        let g = conductance_unchecked(&o.switch, phase, v);
        g / (1.0 + o.r_i * g)
    }

    /// Right-hand side `f(V)` of `M·dV/dt = f(V)` for the given switch phases.
    pub fn rhs(&self, v: &[f64], phases: &[Phase]) -> Vec<f64> {
        let mut f: Vec<f64> = (0..self.n)
            .map(|k| {
                let o = &self.osc[k];
                (o.v_dd - v[k]) / o.r_s - v[k] * self.branch_conductance(k, phases[k], v[k])
            })
            .collect();
        for &(i, j, g) in &self.links {
            let cur = g * (v[j] - v[i]);
            f[i] += cur;
            f[j] -= cur;
        }
        f
    }

    /// Backward-Euler solve over `h` with the branch conductances in
    /// `scratch.g_branch` held fixed: `(M + h·G)·V' = M·V + h·s`.
    fn solve_frozen(&self, v0: &[f64], h: f64, scratch: &mut Scratch, out_probe: bool) -> Result<()> {
        let n = self.n;
        let Scratch {
            g_branch,
            a,
            rhs,
            trial,
            probe,
        } = scratch;
        for i in 0..n {
            let mut r = 0.0;
            for j in 0..n {
                let m = self.cap[i * n + j];
                a[i * n + j] = m;
                r += m * v0[j];
            }
            let o = &self.osc[i];
            a[i * n + i] += h * (1.0 / o.r_s + g_branch[i]);
            rhs[i] = r + h * o.v_dd / o.r_s;
        }
        for &(i, j, g) in &self.links {
            a[i * n + i] += h * g;
            a[j * n + j] += h * g;
            a[i * n + j] -= h * g;
            a[j * n + i] -= h * g;
        }
        let x = if out_probe { probe } else { trial };
        gauss_solve(a, rhs, x, n)
    }

    fn freeze_conductances(&self, state: &mut SimState) {
        for k in 0..self.n {
            state.scratch.g_branch[k] =
                self.branch_conductance(k, state.switches[k].phase, state.v[k]);
        }
    }

    /// Advances `state` by `dt`, localising every switching event inside the
    /// step by bisection to within `event_tol`. Events are appended to
    /// `events` in time order; ties within `event_tol` go to the lower index.
    pub fn step(
        &self,
        state: &mut SimState,
        dt: f64,
        event_tol: f64,
        events: &mut Vec<SwitchEvent>,
    ) -> Result<()> {
        let n = self.n;
        let t_end = state.t + dt;
        let mut remaining = dt;
        // A pathological network could chatter forever; bound the work.
        for _ in 0..(4 * n + 16) {
            self.freeze_conductances(state);
            let v0 = state.v.clone();
            self.solve_frozen(&v0, remaining, &mut state.scratch, false)
                .map_err(|e| Error::Integration {
                    t: state.t,
                    reason: e.to_string(),
                })?;
            let t1 = state.t + remaining;
            let mut first: Option<(f64, usize)> = None;
            for k in 0..n {
                let sw = &self.osc[k].switch;
                let noise = state.noise[k].sample(t1);
                if !crosses(sw, state.switches[k].phase, state.scratch.trial[k] + noise) {
                    continue;
                }
                let s = self.locate(state, &v0, k, remaining, event_tol)?;
                match first {
                    Some((s0, _)) if s >= s0 - event_tol => {}
                    _ => first = Some((s, k)),
                }
            }
            let Some((s_first, k_first)) = first else {
                state.v.copy_from_slice(&state.scratch.trial);
                state.t = t_end;
                return Ok(());
            };
            self.solve_frozen(&v0, s_first, &mut state.scratch, true)
                .map_err(|e| Error::Integration {
                    t: state.t,
                    reason: e.to_string(),
                })?;
            state.v.copy_from_slice(&state.scratch.probe);
            let t_ev = state.t + s_first;
            let sw = &self.osc[k_first].switch;
            let v_eff = state.v[k_first] + state.noise[k_first].sample(t_ev);
            let (next, ev) = switch_update(sw, state.switches[k_first], v_eff, t_ev, k_first);
            // the bracket end satisfies the crossing by construction
            let ev = ev.ok_or_else(|| Error::Integration {
                t: t_ev,
                reason: format!("lost switching event of oscillator {k_first}"),
            })?;
            state.switches[k_first] = next;
            events.push(ev);
            state.t = t_ev;
            remaining = t_end - t_ev;
            if remaining <= 0.0 {
                state.t = t_end;
                return Ok(());
            }
        }
        Err(Error::Integration {
            t: state.t,
            reason: "too many switching events within one step".into(),
        })
    }

    /// Smallest sub-step `s ∈ (0, h]` (to within `tol`) at which oscillator
    /// `k` meets its switching condition under the frozen dynamics.
    fn locate(&self, state: &mut SimState, v0: &[f64], k: usize, h: f64, tol: f64) -> Result<f64> {
        let sw = self.osc[k].switch;
        let phase = state.switches[k].phase;
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            self.solve_frozen(v0, mid, &mut state.scratch, true)
                .map_err(|e| Error::Integration {
                    t: state.t,
                    reason: e.to_string(),
                })?;
            let v_eff = state.scratch.probe[k] + state.noise[k].sample(state.t + mid);
            if crosses(&sw, phase, v_eff) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Gaussian elimination with partial pivoting; `a` and `b` are overwritten.
fn gauss_solve(a: &mut [f64], b: &mut [f64], x: &mut [f64], n: usize) -> Result<()> {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return Err(Error::Singular(format!("zero pivot in column {col}")));
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r * n + c] * x[c];
        }
        x[r] = s / a[r * n + r];
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub v: Vec<f64>,
    pub i: Vec<f64>,
    pub state: Vec<u8>,
}

/// Decimated multi-channel record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub t: Vec<f64>,
    pub channels: Vec<Channel>,
    pub events: Vec<SwitchEvent>,
    /// Spacing of `t`.
    pub sample_interval: f64,
    pub net: NetworkConfig,
    pub sim: SimConfig,
    #[serde(default)]
    pub warnings: Vec<ValidityWarning>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn n_osc(&self) -> usize {
        self.channels.len()
    }

    pub fn duration(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    /// ON-event times of oscillator `osc`.
    pub fn on_times(&self, osc: usize) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.osc == osc && e.direction == device::Direction::On)
            .map(|e| e.t)
            .collect()
    }

    pub fn off_times(&self, osc: usize) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.osc == osc && e.direction == device::Direction::Off)
            .map(|e| e.t)
            .collect()
    }

    /// Sample index of the first sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.t.partition_point(|&x| x < t)
    }

    /// Mean oscillation frequency from ON events after `skip` seconds.
    pub fn event_frequency(&self, osc: usize, skip: f64) -> Option<f64> {
        let on: Vec<f64> = self.on_times(osc).into_iter().filter(|&t| t >= skip).collect();
        if on.len() < 2 {
            return None;
        }
        Some((on.len() - 1) as f64 / (on[on.len() - 1] - on[0]))
    }

    /// ON-phase durations (ON event to the following OFF event).
    pub fn pulse_widths(&self, osc: usize, skip: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut on_at = None;
        for e in self.events.iter().filter(|e| e.osc == osc) {
            match e.direction {
                device::Direction::On => on_at = Some(e.t),
                device::Direction::Off => {
                    if let Some(t0) = on_at.take() {
                        if t0 >= skip {
                            out.push(e.t - t0);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Runs a full simulation from the power-on state.
pub fn simulate(net: &NetworkConfig, sim: &SimConfig) -> Result<Waveform> {
    sim.validate()?;
    let system = build_system(net)?;
    let mut state = system.initial_state(sim.master_seed);
    let n = system.len();
    let steps = sim.steps();
    let n_rec = (steps / sim.record_every as u64 + 1) as usize;
    let mut t_rec = Vec::with_capacity(n_rec);
    let mut channels: Vec<Channel> = (0..n)
        .map(|_| Channel {
            v: Vec::with_capacity(n_rec),
            i: Vec::with_capacity(n_rec),
            state: Vec::with_capacity(n_rec),
        })
        .collect();
    let mut events = Vec::new();
    let record = |state: &SimState, t: f64, t_rec: &mut Vec<f64>, channels: &mut [Channel]| {
        t_rec.push(t);
        for (k, ch) in channels.iter_mut().enumerate() {
            let v = state.v[k];
            let phase = state.switches[k].phase;
            ch.v.push(v);
            ch.i.push(v * system.branch_conductance(k, phase, v));
            ch.state.push(phase.as_bit());
        }
    };
    record(&state, 0.0, &mut t_rec, &mut channels);
    for s in 1..=steps {
        system.step(&mut state, sim.dt, sim.event_tol, &mut events)?;
        // pin the clock to the grid so long runs do not drift
        let t = s as f64 * sim.dt;
        state.t = t;
        if s % sim.record_every as u64 == 0 {
            record(&state, t, &mut t_rec, &mut channels);
        }
    }
    let mut wf = Waveform {
        t: t_rec,
        channels,
        events,
        sample_interval: sim.sample_interval(),
        net: net.clone(),
        sim: *sim,
        warnings: Vec::new(),
    };
    let skip = default_transient(&wf);
    for k in 0..n {
        if let Some(f) = wf.event_frequency(k, skip) {
            wf.warnings.extend(validity_check(f));
        }
    }
    Ok(wf)
}

/// Default analysis skip: the longer of 10 ms and 20 periods, capped at half
/// the record.
pub fn default_transient(wf: &Waveform) -> f64 {
    let mut skip = 10e-3_f64;
    for k in 0..wf.n_osc() {
        if let Some(f) = wf.event_frequency(k, 0.0) {
            skip = skip.max(20.0 / f);
        }
    }
    skip.min(0.5 * wf.duration())
}

/// Closed-form period of a single oscillator with a constant ON resistance.
///
/// Charging runs with the switch OFF towards the divider asymptote
/// `v_dd·(r_off + r_i)/(r_s + r_off + r_i)` with time constant
/// `(r_s ∥ (r_off + r_i))·c_par`; discharging runs with the switch ON towards
/// `v_dd·(r_on + r_i)/(r_s + r_on + r_i)` with `(r_s ∥ (r_on + r_i))·c_par`.
/// As `r_off → ∞` the charging term reduces to `r_s·c·ln((v_dd−v_h)/(v_dd−v_th))`.
pub fn analytic_period(osc: &OscillatorParams, r_on_fixed: f64) -> Result<f64> {
    let (t_charge, t_discharge) = analytic_phases(osc, r_on_fixed)?;
    Ok(t_charge + t_discharge)
}

/// `(t_charge, t_discharge)` of [`analytic_period`].
pub fn analytic_phases(osc: &OscillatorParams, r_on_fixed: f64) -> Result<(f64, f64)> {
    let sw = &osc.switch;
    if !(r_on_fixed > 0.0) {
        return Err(Error::InvalidParams(format!(
            "r_on_fixed must be positive (got {r_on_fixed})"
        )));
    }
    let r_off = sw.r_off + osc.r_i;
    let v_inf_off = osc.v_dd * r_off / (osc.r_s + r_off);
    let tau_off = parallel(osc.r_s, r_off) * osc.c_par;
    let r_on = r_on_fixed + osc.r_i;
    let v_inf_on = osc.v_dd * r_on / (osc.r_s + r_on);
    let tau_on = parallel(osc.r_s, r_on) * osc.c_par;
    if !(v_inf_off > sw.v_th) {
        return Err(Error::NoOscillation(format!(
            "OFF asymptote {v_inf_off:.4} V does not exceed v_th = {} V",
            sw.v_th
        )));
    }
    if !(v_inf_on < sw.v_h) {
        return Err(Error::NoOscillation(format!(
            "ON asymptote {v_inf_on:.4} V is not below v_h = {} V",
            sw.v_h
        )));
    }
    let t_charge = tau_off * ((v_inf_off - sw.v_h) / (v_inf_off - sw.v_th)).ln();
    let t_discharge = tau_on * ((sw.v_th - v_inf_on) / (sw.v_h - v_inf_on)).ln();
    Ok((t_charge, t_discharge))
}

/// `(v_node, i_switch)` trajectory of `osc` over the whole number of periods
/// between its first and last ON events.
pub fn dynamic_iv(wf: &Waveform, osc: usize) -> Result<Vec<(f64, f64)>> {
    if osc >= wf.n_osc() {
        return Err(Error::InvalidParams(format!("no oscillator {osc}")));
    }
    let on = wf.on_times(osc);
    if on.len() < 2 {
        return Err(Error::Insufficient(format!(
            "dynamic I-V needs at least 2 ON events (oscillator {osc} has {})",
            on.len()
        )));
    }
    let i0 = wf.index_at(on[0]);
    let i1 = wf.index_at(on[on.len() - 1]).min(wf.len());
    let ch = &wf.channels[osc];
    Ok((i0..i1).map(|k| (ch.v[k], ch.i[k])).collect())
}
