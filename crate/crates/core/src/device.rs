//! The VO₂ switch: a two-state hysteretic element with a voltage-dependent
//! metal-phase resistance and additive sub-threshold flicker noise.
//!
//! The switch is modelled quasi-statically. In the insulating (OFF) phase it
//! is an ohmic `r_off`; in the metallic (ON) phase its static resistance
//! follows `R_on(V) = V / (a·V² + b·V + c)`, i.e. the ON-branch current is the
//! quadratic `a·V² + b·V + c`. Transitions happen when the sensed control
//! voltage (node voltage plus noise) reaches `v_th` from below or `v_h` from
//! above.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the ON/OFF transition times of the device, in seconds.
pub const SWITCHING_TIME_BOUND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    /// Spectral exponent of the 1/f^α density.
    pub alpha: f64,
    /// Clamp level in volts. Zero disables the noise.
    pub peak_amplitude: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// Seed of a standalone generator. Simulations ignore it and derive
    /// `master_seed ^ index` per oscillator.
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            peak_amplitude: 1e-3,
            band_lo: 1.0,
            band_hi: 1000.0,
            seed: 0,
        }
    }
}

impl NoiseParams {
    pub fn disabled() -> Self {
        Self {
            peak_amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.band_lo > 0.0 && self.band_lo < self.band_hi && self.band_hi.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "noise band must satisfy 0 < band_lo < band_hi (got {} .. {})",
                self.band_lo, self.band_hi
            )));
        }
        if !(self.peak_amplitude >= 0.0 && self.peak_amplitude.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "noise peak_amplitude must be >= 0 (got {})",
                self.peak_amplitude
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidParams(format!(
                "noise alpha must lie in (0, 2) (got {})",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchParams {
    pub v_th: f64,
    pub v_h: f64,
    pub r_off: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r_on_floor: f64,
    pub r_on_ceiling: f64,
    /// Replaces the quadratic ON law with a constant resistance when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_on_fixed: Option<f64>,
    pub noise: NoiseParams,
}

impl Default for SwitchParams {
    /// The planar switch of the static I-V measurement ("paper-fig5").
    fn default() -> Self {
        Self {
            v_th: 1.4,
            v_h: 0.58,
            r_off: 1100.0,
            a: -0.031,
            b: 0.079,
            c: -0.032,
            r_on_floor: 40.0,
            r_on_ceiling: 1100.0,
            r_on_fixed: None,
            noise: NoiseParams::default(),
        }
    }
}

impl SwitchParams {
    pub fn new(
        v_th: f64,
        v_h: f64,
        r_off: f64,
        (a, b, c): (f64, f64, f64),
        noise: NoiseParams,
    ) -> Result<Self> {
        let p = Self {
            v_th,
            v_h,
            r_off,
            a,
            b,
            c,
            r_on_floor: 40.0,
            r_on_ceiling: r_off,
            r_on_fixed: None,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_h > 0.0 && self.v_h < self.v_th) {
            return Err(Error::InvalidParams(format!(
                "thresholds must satisfy 0 < v_h < v_th (got v_h = {}, v_th = {})",
                self.v_h, self.v_th
            )));
        }
        if !(self.r_on_floor > 0.0
            && self.r_on_floor <= self.r_on_ceiling
            && self.r_on_ceiling <= self.r_off)
        {
            return Err(Error::InvalidParams(format!(
                "resistances must satisfy r_off >= r_on_ceiling >= r_on_floor > 0 \
                 (got {} / {} / {})",
                self.r_off, self.r_on_ceiling, self.r_on_floor
            )));
        }
        if let Some(r) = self.r_on_fixed {
            if !(r > 0.0 && r < self.r_off) {
                return Err(Error::InvalidParams(format!(
                    "r_on_fixed must lie in (0, r_off) (got {r})"
                )));
            }
        } else {
            let (lo, hi) = self.denominator_interval().ok_or_else(|| {
                Error::InvalidParams(
                    "ON-law denominator a·V² + b·V + c has no positive interval \
                     between two real roots"
                        .into(),
                )
            })?;
            if !(lo < self.v_h && self.v_th < hi) {
                return Err(Error::InvalidParams(format!(
                    "hysteresis window [{}, {}] must lie inside the positive-denominator \
                     interval ({lo:.4}, {hi:.4})",
                    self.v_h, self.v_th
                )));
            }
        }
        self.noise.validate()
    }

    /// Open interval on which `a·V² + b·V + c > 0`, when it is bounded by two
    /// real roots (requires `a < 0`).
    pub fn denominator_interval(&self) -> Option<(f64, f64)> {
        if !(self.a < 0.0) {
            return None;
        }
        let disc = self.b * self.b - 4.0 * self.a * self.c;
        if !(disc > 0.0) {
            return None;
        }
        let sq = disc.sqrt();
        let r1 = (-self.b + sq) / (2.0 * self.a);
        let r2 = (-self.b - sq) / (2.0 * self.a);
        Some((r1.min(r2), r1.max(r2)))
    }

    /// Unclamped ON-branch current `a·V² + b·V + c`.
    #[inline]
    pub fn on_current_law(&self, v: f64) -> f64 {
        (self.a * v + self.b) * v + self.c
    }
}

/// Metal-phase static resistance at control voltage `v_c`.
pub fn r_on(params: &SwitchParams, v_c: f64) -> Result<f64> {
    if !(v_c > 0.0) {
        return Err(Error::Domain(format!(
            "r_on requires a positive control voltage (got {v_c})"
        )));
    }
    Ok(r_on_unchecked(params, v_c))
}

/// `r_on` without the domain check; non-positive voltages map to the ceiling.
#[inline]
pub(crate) fn r_on_unchecked(params: &SwitchParams, v_c: f64) -> f64 {
    if let Some(r) = params.r_on_fixed {
        return r;
    }
    let den = params.on_current_law(v_c);
    // The quadratic is only positive between its roots; outside, the nearer
    // endpoint limit is +inf and so maps to the ceiling.
    if !(v_c > 0.0) || !(den > 0.0) {
        return params.r_on_ceiling;
    }
    (v_c / den).clamp(params.r_on_floor, params.r_on_ceiling)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Phase {
    Off,
    On,
}

impl Phase {
    pub fn as_bit(self) -> u8 {
        match self {
            Phase::Off => 0,
            Phase::On => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchState {
    pub phase: Phase,
    pub last_transition_time: f64,
}

impl Default for SwitchState {
    fn default() -> Self {
        Self {
            phase: Phase::Off,
            last_transition_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    /// OFF → ON (threshold reached).
    On,
    /// ON → OFF (holding voltage reached).
    Off,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::On => "ON",
            Direction::Off => "OFF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub osc: usize,
    pub direction: Direction,
    pub t: f64,
}

/// True when `v_eff` would make a switch in `phase` change state.
#[inline]
pub fn crosses(params: &SwitchParams, phase: Phase, v_eff: f64) -> bool {
    match phase {
        Phase::Off => v_eff >= params.v_th,
        Phase::On => v_eff <= params.v_h,
    }
}

/// Applies the hysteresis rule to the sensed voltage `v_eff` at time `t`.
pub fn switch_update(
    params: &SwitchParams,
    state: SwitchState,
    v_eff: f64,
    t: f64,
    osc: usize,
) -> (SwitchState, Option<SwitchEvent>) {
    if !crosses(params, state.phase, v_eff) {
        return (state, None);
    }
    let (phase, direction) = match state.phase {
        Phase::Off => (Phase::On, Direction::On),
        Phase::On => (Phase::Off, Direction::Off),
    };
    (
        SwitchState {
            phase,
            last_transition_time: t,
        },
        Some(SwitchEvent { osc, direction, t }),
    )
}

/// Switch conductance (without the series current resistor).
pub fn conductance(params: &SwitchParams, phase: Phase, v_c: f64) -> Result<f64> {
    match phase {
        Phase::Off => Ok(1.0 / params.r_off),
        Phase::On => r_on(params, v_c).map(|r| 1.0 / r),
    }
}

#[inline]
pub(crate) fn conductance_unchecked(params: &SwitchParams, phase: Phase, v_c: f64) -> f64 {
    match phase {
        Phase::Off => 1.0 / params.r_off,
        Phase::On => 1.0 / r_on_unchecked(params, v_c),
    }
}

/// Threshold powers `(P_th, P_h)`; diagnostic only.
pub fn threshold_powers(params: &SwitchParams) -> (f64, f64) {
    let p_th = params.v_th * params.v_th / params.r_off;
    let p_h = params.v_h * params.v_h / r_on_unchecked(params, params.v_h);
    (p_th, p_h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarningLevel {
    Soft,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityWarning {
    pub level: WarningLevel,
    pub frequency: f64,
    pub message: String,
}

/// Checks an oscillation frequency against the quasi-static model's range.
///
/// Periods shorter than 100 switching-time bounds warn softly, shorter than
/// 10 bounds strongly. Never blocks a run.
pub fn validity_check(f_expected: f64) -> Vec<ValidityWarning> {
    if !(f_expected > 0.0) {
        return Vec::new();
    }
    let period = 1.0 / f_expected;
    let level = if period < 10.0 * SWITCHING_TIME_BOUND {
        WarningLevel::Strong
    } else if period < 100.0 * SWITCHING_TIME_BOUND {
        WarningLevel::Soft
    } else {
        return Vec::new();
    };
    let message = match level {
        WarningLevel::Strong => format!(
            "oscillation at {f_expected:.4e} Hz is outside the quasi-static switch model's \
             range; switching transients are comparable to the period"
        ),
        WarningLevel::Soft => format!(
            "oscillation at {f_expected:.4e} Hz approaches the switching-time bound; \
             neglected transients may shift the period"
        ),
    };
    vec![ValidityWarning {
        level,
        frequency: f_expected,
        message,
    }]
}

/// Streaming 1/f^α noise source.
///
/// Octave-spaced one-pole low-pass filters, each driven by its own white
/// Gaussian stream, are summed with weights `f_k^(-α/2)`. The sum is generated
/// on an internal grid and linearly interpolated, so the value at a time `t`
/// does not depend on how often it is queried. Output is clamped at
/// `±peak_amplitude`; the unclamped standard deviation is a third of that.
#[derive(Debug, Clone)]
pub struct FlickerNoise {
    params: NoiseParams,
    rng: ChaCha8Rng,
    coeffs: Vec<f64>,
    weights: Vec<f64>,
    states: Vec<f64>,
    scale: f64,
    fs: f64,
    // samples at grid indices (index - 2, index - 1, index)
    history: [f64; 3],
    index: u64,
}

/// Internal grid rate relative to the band's upper edge.
const GRID_OVERSAMPLE: f64 = 20.0;

impl FlickerNoise {
    pub fn new(params: NoiseParams) -> Self {
        Self::with_seed(params, params.seed)
    }

    pub fn with_seed(params: NoiseParams, seed: u64) -> Self {
        let fs = GRID_OVERSAMPLE * params.band_hi;
        // Corners extend one octave past each band edge so the slope holds
        // across the whole band.
        let mut corners = Vec::new();
        let mut f = params.band_lo / 2.0;
        while f <= 2.0 * params.band_hi * 1.0001 {
            corners.push(f);
            f *= 2.0;
        }
        let coeffs: Vec<f64> = corners
            .iter()
            .map(|&fk| 1.0 - (-2.0 * std::f64::consts::PI * fk / fs).exp())
            .collect();
        let weights: Vec<f64> = corners
            .iter()
            .map(|&fk| fk.powf(-params.alpha / 2.0))
            .collect();
        let variance: f64 = coeffs
            .iter()
            .zip(&weights)
            .map(|(&c, &w)| w * w * c / (2.0 - c))
            .sum();
        let scale = if params.peak_amplitude > 0.0 {
            params.peak_amplitude / 3.0 / variance.sqrt()
        } else {
            0.0
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Start each filter from its stationary distribution.
        let states = coeffs
            .iter()
            .zip(&weights)
            .map(|(&c, &w)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * w * (c / (2.0 - c)).sqrt()
            })
            .collect();
        let mut gen = Self {
            params,
            rng,
            coeffs,
            weights,
            states,
            scale,
            fs,
            history: [0.0; 3],
            index: 0,
        };
        let x0 = gen.current();
        gen.history = [x0; 3];
        gen
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    fn current(&self) -> f64 {
        self.states.iter().sum::<f64>() * self.scale
    }

    fn tick(&mut self) {
        for ((y, &c), &w) in self.states.iter_mut().zip(&self.coeffs).zip(&self.weights) {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *y += c * (w * z - *y);
        }
        self.history = [self.history[1], self.history[2], self.current()];
        self.index += 1;
    }

    /// Noise voltage at time `t`. Successive calls must not move back by more
    /// than one grid interval.
    pub fn sample(&mut self, t: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let pos = (t.max(0.0) * self.fs).max(0.0);
        let needed = pos.ceil() as u64;
        while self.index < needed {
            self.tick();
        }
        self.value_at(pos)
    }

    fn value_at(&self, pos: f64) -> f64 {
        // history[2] sits at grid index `self.index`
        let base = self.index as f64 - 2.0;
        let rel = (pos - base).clamp(0.0, 2.0);
        let (lo, frac) = if rel >= 1.0 { (1, rel - 1.0) } else { (0, rel) };
        let v = self.history[lo] + frac * (self.history[lo + 1] - self.history[lo]);
        let peak = self.params.peak_amplitude;
        v.clamp(-peak, peak)
    }
}

/// Free-function form of [`FlickerNoise::sample`].
pub fn noise_sample(gen: &mut FlickerNoise, t: f64) -> f64 {
    gen.sample(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn r_on_matches_direct_evaluation() {
        let p = SwitchParams::default();
        // 1.4 / (-0.031*1.96 + 0.079*1.4 - 0.032) = 1.4 / 0.01784
        assert_relative_eq!(r_on(&p, 1.4).unwrap(), 1.4 / 0.01784, max_relative = 1e-9);
        assert!((r_on(&p, 1.4).unwrap() - 78.5).abs() < 0.1);
        // 0.58 / 0.0033916
        assert!((r_on(&p, 0.58).unwrap() - 171.0).abs() < 0.1);
    }

    #[test]
    fn r_on_denominator_roots_and_clamp() {
        let p = SwitchParams::default();
        let (lo, hi) = p.denominator_interval().unwrap();
        assert!((lo - 0.505).abs() < 1e-3, "{lo}");
        assert!((hi - 2.043).abs() < 1e-3, "{hi}");
        assert_eq!(r_on(&p, 0.3).unwrap(), p.r_on_ceiling);
        assert_eq!(r_on(&p, 2.5).unwrap(), p.r_on_ceiling);
        assert_eq!(r_on(&p, 0.506).unwrap(), p.r_on_ceiling);
        // floor kicks in near the maximum of the law? the law's minimum R is
        // ~60 Ω for these coefficients, so the floor is not active
        let min = (5..200)
            .map(|k| r_on(&p, k as f64 * 0.01 + 0.5).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min >= p.r_on_floor);
    }

    #[test]
    fn r_on_stays_in_published_range_over_hysteresis_window() {
        let p = SwitchParams::default();
        for k in 0..=100 {
            let v = p.v_h + (p.v_th - p.v_h) * k as f64 / 100.0;
            let r = r_on(&p, v).unwrap();
            assert!((40.0..=200.0).contains(&r), "r_on({v}) = {r}");
        }
    }

    #[test]
    fn r_on_rejects_non_positive_voltage() {
        let p = SwitchParams::default();
        assert!(matches!(r_on(&p, 0.0), Err(Error::Domain(_))));
        assert!(matches!(r_on(&p, -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            conductance(&p, Phase::On, -0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn construction_validates_invariants() {
        let n = NoiseParams::default();
        assert!(SwitchParams::new(1.4, 0.58, 1100.0, (-0.031, 0.079, -0.032), n).is_ok());
        assert!(SwitchParams::new(0.5, 0.58, 1100.0, (-0.031, 0.079, -0.032), n).is_err());
        // window leaves the positive-denominator interval
        assert!(SwitchParams::new(2.2, 0.58, 1100.0, (-0.031, 0.079, -0.032), n).is_err());
        // a > 0 has no bounded positive interval
        assert!(SwitchParams::new(1.4, 0.58, 1100.0, (0.031, 0.079, -0.032), n).is_err());
        let bad_noise = NoiseParams {
            band_lo: 10.0,
            band_hi: 5.0,
            ..n
        };
        assert!(SwitchParams::new(1.4, 0.58, 1100.0, (-0.031, 0.079, -0.032), bad_noise).is_err());
    }

    #[test]
    fn switch_update_thresholds() {
        let p = SwitchParams::default();
        let off = SwitchState::default();
        let (s, e) = switch_update(&p, off, 1.39, 1e-3, 0);
        assert_eq!(s.phase, Phase::Off);
        assert!(e.is_none());

        let (s, e) = switch_update(&p, off, 1.40, 1e-3, 0);
        assert_eq!(s.phase, Phase::On);
        assert_eq!(
            e,
            Some(SwitchEvent {
                osc: 0,
                direction: Direction::On,
                t: 1e-3
            })
        );
        assert_eq!(s.last_transition_time, 1e-3);

        let (s2, e) = switch_update(&p, s, 0.58, 2e-3, 3);
        assert_eq!(s2.phase, Phase::Off);
        assert_eq!(e.unwrap().direction, Direction::Off);
        assert_eq!(e.unwrap().osc, 3);

        // inside the window nothing happens in either phase
        assert!(switch_update(&p, s, 1.0, 0.0, 0).1.is_none());
        assert!(switch_update(&p, off, 1.0, 0.0, 0).1.is_none());
    }

    #[test]
    fn conductance_branches() {
        let p = SwitchParams::default();
        assert_eq!(conductance(&p, Phase::Off, 5.0).unwrap(), 1.0 / 1100.0);
        assert_relative_eq!(
            conductance(&p, Phase::On, 1.4).unwrap(),
            0.01784 / 1.4,
            max_relative = 1e-9
        );
        let g = conductance(&p, Phase::On, 3.0).unwrap();
        assert!(g.is_finite());
        assert_eq!(g, 1.0 / p.r_on_ceiling);
    }

    #[test]
    fn threshold_powers_default_device() {
        let p = SwitchParams::default();
        let (p_th, p_h) = threshold_powers(&p);
        // 1.96 / 1100 and 0.58 * 0.0033916
        assert_relative_eq!(p_th, 1.96 / 1100.0, max_relative = 1e-12);
        assert!((p_th - 1.78e-3).abs() < 0.01e-3);
        assert!((p_h - 1.97e-3).abs() < 0.01e-3);
        assert!((p_th / p_h - 1.0).abs() < 0.25);

        let tiny = SwitchParams {
            v_th: 1e-6,
            v_h: 5e-7,
            ..p
        };
        assert!(threshold_powers(&tiny).0 < 1e-14);
    }

    #[test]
    fn validity_warnings() {
        assert!(validity_check(7e3).is_empty());
        let soft = validity_check(50e3);
        assert_eq!(soft.len(), 1);
        assert_eq!(soft[0].level, WarningLevel::Soft);
        let strong = validity_check(2e6);
        assert_eq!(strong[0].level, WarningLevel::Strong);
    }

    #[test]
    fn disabled_noise_is_zero() {
        let mut g = FlickerNoise::new(NoiseParams::disabled());
        for k in 0..1000 {
            assert_eq!(g.sample(k as f64 * 1e-5), 0.0);
        }
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let p = NoiseParams {
            seed: 42,
            ..NoiseParams::default()
        };
        let mut a = FlickerNoise::new(p);
        let mut b = FlickerNoise::new(p);
        let mut c = FlickerNoise::with_seed(p, 43);
        let mut differs = false;
        for k in 0..20_000 {
            let t = k as f64 * 1e-5;
            let (x, y, z) = (a.sample(t), b.sample(t), c.sample(t));
            assert_eq!(x.to_bits(), y.to_bits());
            assert!(x.abs() <= p.peak_amplitude);
            differs |= x != z;
        }
        assert!(differs);
    }

    #[test]
    fn noise_value_independent_of_query_rate() {
        let p = NoiseParams::default();
        let mut coarse = FlickerNoise::new(p);
        let mut fine = FlickerNoise::new(p);
        for k in 0..1000 {
            let t = k as f64 * 1e-4;
            for j in 0..10 {
                fine.sample(t - 1e-4 + j as f64 * 1e-5);
            }
            assert_eq!(coarse.sample(t).to_bits(), fine.sample(t).to_bits());
        }
    }
}
