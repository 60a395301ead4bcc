//! Behavioral model of a single-photon avalanche detector.
//!
//! The detector is a state machine driven by an [`OpticalTimeline`]. It is
//! dead for a fixed time after every click and blinded while the total
//! CW power on it is at or above `blind_power`; otherwise it is armed. Pulses at or above
//! `fake_energy` force a click in any state except dead. Dark counts are a
//! Poisson process gated off while dead or blinded; electrical noise is a
//! separate Poisson process gated only by dead time.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{uniform_offset, OpticalTimeline, PhotonSource, PulseSource};
use crate::rng::RandomStream;
use crate::time::Time;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    /// Probability that an absorbed photon fires an armed detector.
    pub efficiency: f64,
    /// Dark counts per second.
    pub dark_rate: f64,
    /// Electrical noise clicks per second; these ignore blinding.
    pub noise_rate: f64,
    pub dead_time: Time,
    pub afterpulse_prob: f64,
    /// Mean exponential delay of an afterpulse after the dead time expires.
    pub afterpulse_tau: Time,
    /// Minimum CW power that holds the detector blinded, watts.
    pub blind_power: f64,
    /// Minimum pulse energy that forces a click from a blinded detector, joules.
    pub fake_energy: f64,
    /// Probability of a click when CW power falls through `blind_power`.
    pub recovery_click_prob: f64,
    /// Documented saturation count rate, per second. Validation only.
    pub max_rate_ref: f64,
}

impl Default for DetectorParams {
    /// InGaAs detector operated at 5e4 clicks/s; see [`crate::engine::presets`]
    /// for how `dead_time` and `efficiency` are calibrated.
    fn default() -> Self {
        DetectorParams {
            efficiency: 0.5,
            dark_rate: 7e3,
            noise_rate: 5.3,
            dead_time: Time::from_ns(480),
            afterpulse_prob: 0.4,
            afterpulse_tau: Time::from_us(1),
            blind_power: 500e-12,
            fake_energy: 1e-15,
            recovery_click_prob: 0.0,
            max_rate_ref: 5e5,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        let probability = |field: &str, v: f64, upper_open: bool| -> Result<()> {
            let ok = v >= 0.0 && if upper_open { v < 1.0 } else { v <= 1.0 };
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("{v} is not a valid probability")))
            }
        };
        probability("detector.efficiency", self.efficiency, false)?;
        probability("detector.afterpulse_prob", self.afterpulse_prob, true)?;
        probability("detector.recovery_click_prob", self.recovery_click_prob, false)?;
        for (field, v) in [
            ("detector.dark_rate", self.dark_rate),
            ("detector.noise_rate", self.noise_rate),
            ("detector.max_rate_ref", self.max_rate_ref),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid(field, format!("{v} must be finite and >= 0")));
            }
        }
        if self.dead_time == Time::ZERO {
            return Err(Error::invalid("detector.dead_time", "must be > 0"));
        }
        for (field, v) in [("detector.blind_power", self.blind_power), ("detector.fake_energy", self.fake_energy)] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::invalid(field, format!("{v} must be finite and > 0")));
            }
        }
        Ok(())
    }

    /// Mean armed waiting time until the next click, given the rate of
    /// primary (non-afterpulse) clicks an armed detector sees.
    ///
    /// After re-arming, a pending afterpulse (probability `afterpulse_prob`)
    /// with exponential delay races the primary Poisson clock.
    pub fn mean_armed_wait(&self, primary_rate: f64) -> f64 {
        let p = self.afterpulse_prob;
        let tau = self.afterpulse_tau.as_secs();
        let afterpulse_term = if tau == 0.0 { 0.0 } else { p / (primary_rate + 1.0 / tau) };
        if primary_rate == 0.0 {
            return f64::INFINITY;
        }
        (1.0 - p) / primary_rate + afterpulse_term
    }

    /// Steady-state click rate of an unblinded detector: the inverse of the
    /// mean renewal cycle (dead time plus armed wait).
    pub fn steady_click_rate(&self, primary_rate: f64) -> f64 {
        1.0 / (self.dead_time.as_secs() + self.mean_armed_wait(primary_rate))
    }

    /// Primary click rate (signal, dark and noise) that yields `click_rate`
    /// total clicks per second including afterpulses.
    pub fn primary_rate_for_click_rate(&self, click_rate: f64) -> Result<f64> {
        if click_rate < 0.0 || !click_rate.is_finite() {
            return Err(Error::invalid("click_rate", format!("{click_rate} must be finite and >= 0")));
        }
        if click_rate == 0.0 {
            return Ok(0.0);
        }
        let wait = 1.0 / click_rate - self.dead_time.as_secs();
        if wait <= 0.0 {
            return Err(Error::Infeasible(format!(
                "{click_rate} clicks/s is beyond saturation 1/dead_time = {}",
                1.0 / self.dead_time.as_secs()
            )));
        }
        // mean_armed_wait is strictly decreasing in the primary rate.
        let (mut lo, mut hi) = (1e-12_f64, 1.0 / wait);
        while self.mean_armed_wait(hi) > wait {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.mean_armed_wait(mid) > wait {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= hi * 1e-15 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Incident signal photon rate needed for `click_rate` total clicks/s,
    /// after subtracting dark and noise counts under the renewal model.
    pub fn photon_rate_for_click_rate(&self, click_rate: f64) -> Result<f64> {
        let primary = self.primary_rate_for_click_rate(click_rate)?;
        let photon_clicks = primary - self.dark_rate - self.noise_rate;
        if photon_clicks < 0.0 {
            return Err(Error::Infeasible(format!("dark and noise counts alone exceed {click_rate} clicks/s")));
        }
        if photon_clicks > 0.0 && self.efficiency == 0.0 {
            return Err(Error::Infeasible("zero efficiency cannot produce photon clicks".into()));
        }
        Ok(if photon_clicks == 0.0 { 0.0 } else { photon_clicks / self.efficiency })
    }
}

/// Dead time at which a detector clicking `click_rate` times per second spends
/// `target_armed_fraction` of its time armed.
///
/// Iterates the renewal cycle: for a trial dead time the primary rate that
/// reproduces `click_rate` is solved, the mean cycle (dead time plus armed
/// wait) recomputed, and the dead time set to the unarmed share of it.
pub fn calibrate_dead_time(params: &DetectorParams, target_armed_fraction: f64, click_rate: f64) -> Result<Time> {
    if !(target_armed_fraction > 0.0 && target_armed_fraction < 1.0) {
        return Err(Error::Infeasible(format!(
            "armed fraction {target_armed_fraction} must lie strictly between 0 and 1"
        )));
    }
    if click_rate < 0.0 || !click_rate.is_finite() {
        return Err(Error::invalid("click_rate", format!("{click_rate} must be finite and >= 0")));
    }
    if click_rate == 0.0 {
        return Ok(Time::TICK);
    }
    let mut trial = params.clone();
    let mut dead = (1.0 - target_armed_fraction) / click_rate;
    for _ in 0..64 {
        trial.dead_time = Time::from_secs(dead).max(Time::TICK);
        let primary = trial.primary_rate_for_click_rate(click_rate)?;
        let cycle = trial.dead_time.as_secs() + trial.mean_armed_wait(primary);
        let next = (1.0 - target_armed_fraction) * cycle;
        if (next - dead).abs() <= 1e-15 {
            dead = next;
            break;
        }
        dead = next;
    }
    if dead.is_nan() || dead <= 0.0 {
        return Err(Error::Infeasible(format!("no positive dead time reaches armed fraction {target_armed_fraction}")));
    }
    Ok(Time::from_secs(dead).max(Time::TICK))
}

/// Ground-truth cause of a click. Never visible to self-test decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClickCause {
    Signal,
    Dark,
    Afterpulse,
    Salt,
    Flag,
    Fake,
    Recovery,
    Noise,
}

impl ClickCause {
    pub const ALL: [ClickCause; 8] = [
        ClickCause::Signal,
        ClickCause::Dark,
        ClickCause::Afterpulse,
        ClickCause::Salt,
        ClickCause::Flag,
        ClickCause::Fake,
        ClickCause::Recovery,
        ClickCause::Noise,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub time: Time,
    pub cause: ClickCause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorMode {
    Armed,
    DeadUntil(Time),
    Blinded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    /// End of the dead time started by the most recent click.
    pub dead_until: Time,
    pub incident_cw_power: f64,
    pub pending_afterpulse: Option<Time>,
}

impl DetectorState {
    fn new() -> Self {
        DetectorState { dead_until: Time::ZERO, incident_cw_power: 0.0, pending_afterpulse: None }
    }

    pub fn is_blinded(&self, params: &DetectorParams) -> bool {
        self.incident_cw_power >= params.blind_power
    }

    pub fn is_dead(&self, now: Time) -> bool {
        now < self.dead_until
    }

    pub fn mode(&self, now: Time, params: &DetectorParams) -> DetectorMode {
        if self.is_blinded(params) {
            DetectorMode::Blinded
        } else if self.is_dead(now) {
            DetectorMode::DeadUntil(self.dead_until)
        } else {
            DetectorMode::Armed
        }
    }
}

/// Poisson clock that advances in floating seconds to avoid rounding drift.
struct PoissonClock {
    gap: Option<Exp<f64>>,
    clock: f64,
    next: Option<Time>,
    rng: RandomStream,
}

impl PoissonClock {
    fn new(rate: f64, rng: RandomStream) -> Self {
        let gap = (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
        let mut clock = PoissonClock { gap, clock: 0.0, next: None, rng };
        clock.advance();
        clock
    }

    fn advance(&mut self) {
        self.next = self.gap.map(|gap| {
            self.clock += gap.sample(&mut self.rng);
            Time::try_from_secs(self.clock).unwrap_or(Time::MAX)
        });
    }
}

#[derive(Debug, Clone, Copy)]
enum Stimulus {
    Bright(ClickCause),
    Edge(f64),
    Photon(ClickCause),
}

impl Stimulus {
    // Ordering among simultaneous stimuli: bright pulses, then power edges, then photons.
    fn priority(&self) -> u8 {
        match self {
            Stimulus::Bright(_) => 0,
            Stimulus::Edge(_) => 1,
            Stimulus::Photon(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Internal {
    Dark,
    Noise,
    Afterpulse,
}

struct Simulation<'a> {
    params: &'a DetectorParams,
    state: DetectorState,
    clicks: Vec<ClickRecord>,
    photon_rng: RandomStream,
    afterpulse_rng: RandomStream,
    recovery_rng: RandomStream,
    afterpulse_delay: Option<Exp<f64>>,
}

impl Simulation<'_> {
    fn click(&mut self, now: Time, cause: ClickCause) {
        if self.state.is_dead(now) {
            return;
        }
        self.clicks.push(ClickRecord { time: now, cause });
        self.state.dead_until = now + self.params.dead_time;
        // A new avalanche replaces any afterpulse still pending.
        let spawn = self.afterpulse_rng.random::<f64>() < self.params.afterpulse_prob;
        self.state.pending_afterpulse = spawn.then(|| {
            let delay = match &self.afterpulse_delay {
                Some(exp) => Time::from_secs(exp.sample(&mut self.afterpulse_rng)),
                None => Time::ZERO,
            };
            self.state.dead_until.saturating_add(delay)
        });
    }

    fn armed(&self, now: Time) -> bool {
        !self.state.is_dead(now) && !self.state.is_blinded(self.params)
    }

    fn stimulus(&mut self, now: Time, stimulus: Stimulus) {
        match stimulus {
            Stimulus::Bright(cause) => self.click(now, cause),
            Stimulus::Edge(power) => {
                let was_blinded = self.state.is_blinded(self.params);
                self.state.incident_cw_power = power;
                if was_blinded && !self.state.is_blinded(self.params) {
                    let u: f64 = self.recovery_rng.random();
                    if u < self.params.recovery_click_prob {
                        self.click(now, ClickCause::Recovery);
                    }
                }
            }
            Stimulus::Photon(cause) => {
                // One draw per photon keeps photon streams coupled across parameter changes.
                let u: f64 = self.photon_rng.random();
                if self.armed(now) && u < self.params.efficiency {
                    self.click(now, cause);
                }
            }
        }
    }

    fn internal(&mut self, now: Time, kind: Internal) {
        match kind {
            Internal::Dark => {
                if self.armed(now) {
                    self.click(now, ClickCause::Dark);
                }
            }
            Internal::Noise => self.click(now, ClickCause::Noise),
            Internal::Afterpulse => {
                self.state.pending_afterpulse = None;
                if self.armed(now) {
                    self.click(now, ClickCause::Afterpulse);
                }
            }
        }
    }
}

/// Runs the detector over a timeline and returns every click in `[0, duration)`.
pub fn process_timeline(
    params: &DetectorParams,
    timeline: &OpticalTimeline,
    rng: &mut RandomStream,
) -> Result<Vec<ClickRecord>> {
    params.validate()?;
    timeline.validate()?;

    let mut pulse_rng = rng.fork(1);
    let mut dark = PoissonClock::new(params.dark_rate, rng.fork(2));
    let mut noise = PoissonClock::new(params.noise_rate, rng.fork(3));
    let mut sim = Simulation {
        params,
        state: DetectorState::new(),
        clicks: Vec::new(),
        photon_rng: rng.fork(4),
        afterpulse_rng: rng.fork(5),
        recovery_rng: rng.fork(6),
        afterpulse_delay: (params.afterpulse_tau > Time::ZERO)
            .then(|| Exp::new(1.0 / params.afterpulse_tau.as_secs()).expect("positive tau")),
    };

    let mut stimuli: Vec<(Time, Stimulus)> =
        Vec::with_capacity(timeline.photons.len() + timeline.pulses.len() + 2 * timeline.cw_segments.len());
    for photon in &timeline.photons {
        let cause = match photon.source {
            PhotonSource::Signal => ClickCause::Signal,
            PhotonSource::Salt => ClickCause::Salt,
        };
        stimuli.push((photon.time, Stimulus::Photon(cause)));
    }
    for pulse in &timeline.pulses {
        let cause = match pulse.source {
            PulseSource::Fake => ClickCause::Fake,
            PulseSource::Flag => ClickCause::Flag,
        };
        if pulse.energy() >= params.fake_energy {
            stimuli.push((pulse.start, Stimulus::Bright(cause)));
        } else {
            // Sub-threshold pulses act as a few photons spread over the pulse.
            for _ in 0..pulse.photons {
                let at = pulse.start + uniform_offset(pulse.width, &mut pulse_rng);
                if at < timeline.duration {
                    stimuli.push((at, Stimulus::Photon(cause)));
                }
            }
        }
    }
    for (at, power) in timeline.power_edges() {
        if at < timeline.duration {
            stimuli.push((at, Stimulus::Edge(power)));
        }
    }
    stimuli.sort_by_key(|(t, s)| (*t, s.priority()));

    let next_internal = |sim: &Simulation<'_>, dark: &PoissonClock, noise: &PoissonClock| {
        [
            (dark.next, Internal::Dark),
            (noise.next, Internal::Noise),
            (sim.state.pending_afterpulse, Internal::Afterpulse),
        ]
        .into_iter()
        .filter_map(|(t, kind)| t.map(|t| (t, kind)))
        .min_by_key(|(t, _)| *t)
    };

    let run_internal_until =
        |sim: &mut Simulation<'_>, dark: &mut PoissonClock, noise: &mut PoissonClock, limit: Time| {
            while let Some((t, kind)) = next_internal(sim, dark, noise) {
                if t >= limit {
                    break;
                }
                match kind {
                    Internal::Dark => dark.advance(),
                    Internal::Noise => noise.advance(),
                    Internal::Afterpulse => {}
                }
                sim.internal(t, kind);
            }
        };

    for (at, stimulus) in stimuli {
        run_internal_until(&mut sim, &mut dark, &mut noise, at);
        sim.stimulus(at, stimulus);
    }
    run_internal_until(&mut sim, &mut dark, &mut noise, timeline.duration);

    Ok(sim.clicks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{CwSegment, CwSource, Photon, Pulse};

    fn quiet() -> DetectorParams {
        DetectorParams { dark_rate: 0.0, noise_rate: 0.0, afterpulse_prob: 0.0, ..DetectorParams::default() }
    }

    #[test]
    fn empty_timeline_without_noise_is_silent() {
        let timeline = OpticalTimeline::empty(Time::from_secs(0.2));
        for seed in 0..20 {
            let clicks = process_timeline(&quiet(), &timeline, &mut RandomStream::from_seed(seed)).unwrap();
            assert!(clicks.is_empty());
        }
    }

    #[test]
    fn dark_counts_match_rate() {
        // Without afterpulsing the dead time thins a Poisson(1400) count by 1/(1 + rate * dead).
        let params = DetectorParams { dark_rate: 7e3, ..quiet() };
        let timeline = OpticalTimeline::empty(Time::from_secs(0.2));
        let seeds = 40;
        let total: usize = (0..seeds)
            .map(|s| process_timeline(&params, &timeline, &mut RandomStream::from_seed(s)).unwrap().len())
            .sum();
        let mean = total as f64 / seeds as f64;
        let expected = 1400.0 / (1.0 + 7e3 * params.dead_time.as_secs());
        let sigma = (expected / seeds as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * sigma, "mean {mean} expected {expected}");
        assert!((mean - 1400.0).abs() < 4.0 * sigma + 10.0);
    }

    #[test]
    fn blinded_detector_ignores_single_photons() {
        let duration = Time::from_us(200);
        let mut timeline = OpticalTimeline::empty(duration);
        timeline.cw_segments.push(CwSegment {
            start: Time::ZERO,
            end: duration,
            power: 500e-12,
            source: CwSource::AttackBlind,
        });
        timeline.photons.push(Photon { time: Time::from_us(100), source: PhotonSource::Signal });
        let params = DetectorParams { efficiency: 1.0, dark_rate: 7e3, ..quiet() };
        for seed in 0..50 {
            let clicks = process_timeline(&params, &timeline, &mut RandomStream::from_seed(seed)).unwrap();
            assert!(clicks.is_empty(), "{clicks:?}");
        }
    }

    #[test]
    fn fake_pulse_fires_blinded_detector_once() {
        let duration = Time::from_us(200);
        let mut timeline = OpticalTimeline::empty(duration);
        timeline.cw_segments.push(CwSegment {
            start: Time::ZERO,
            end: duration,
            power: 500e-12,
            source: CwSource::AttackBlind,
        });
        let at = Time::from_us(50);
        timeline.pulses.push(Pulse {
            start: at,
            width: Time::from_ns(2),
            peak_power: 3e-6,
            source: PulseSource::Fake,
            photons: 0,
        });
        let params = DetectorParams { afterpulse_prob: 0.9, ..quiet() };
        let clicks = process_timeline(&params, &timeline, &mut RandomStream::from_seed(3)).unwrap();
        assert_eq!(clicks, vec![ClickRecord { time: at, cause: ClickCause::Fake }]);
    }

    #[test]
    fn sub_threshold_pulse_is_ignored_when_blinded() {
        let duration = Time::from_us(10);
        let mut timeline = OpticalTimeline::empty(duration);
        timeline.cw_segments.push(CwSegment {
            start: Time::ZERO,
            end: duration,
            power: 1e-9,
            source: CwSource::AttackBlind,
        });
        timeline.pulses.push(Pulse {
            start: Time::from_us(5),
            width: Time::from_ns(25),
            peak_power: 30e-12,
            source: PulseSource::Flag,
            photons: 50,
        });
        let params = DetectorParams { efficiency: 1.0, ..quiet() };
        assert!(process_timeline(&params, &timeline, &mut RandomStream::from_seed(1)).unwrap().is_empty());
    }

    #[test]
    fn recovery_click_on_downward_crossing() {
        let duration = Time::from_us(10);
        let mut timeline = OpticalTimeline::empty(duration);
        timeline.cw_segments.push(CwSegment {
            start: Time::ZERO,
            end: Time::from_us(4),
            power: 600e-12,
            source: CwSource::AttackBlind,
        });
        let params = DetectorParams { recovery_click_prob: 1.0, ..quiet() };
        let clicks = process_timeline(&params, &timeline, &mut RandomStream::from_seed(1)).unwrap();
        assert_eq!(clicks, vec![ClickRecord { time: Time::from_us(4), cause: ClickCause::Recovery }]);

        // A second contribution that keeps the total above threshold suppresses it.
        timeline.cw_segments.push(CwSegment {
            start: Time::from_us(2),
            end: Time::from_us(8),
            power: 5e-9,
            source: CwSource::LeBlind,
        });
        let clicks = process_timeline(&params, &timeline, &mut RandomStream::from_seed(1)).unwrap();
        assert_eq!(clicks, vec![ClickRecord { time: Time::from_us(8), cause: ClickCause::Recovery }]);
    }

    #[test]
    fn unordered_timeline_is_rejected() {
        let mut timeline = OpticalTimeline::empty(Time::from_us(10));
        timeline.photons.push(Photon { time: Time::from_us(5), source: PhotonSource::Signal });
        timeline.photons.push(Photon { time: Time::from_us(4), source: PhotonSource::Signal });
        let err = process_timeline(&quiet(), &timeline, &mut RandomStream::from_seed(1)).unwrap_err();
        assert_eq!(err, Error::Unordered { list: "photons", index: 1 });
    }

    #[test]
    fn params_validation() {
        let bad = DetectorParams { dead_time: Time::ZERO, ..DetectorParams::default() };
        assert!(bad.validate().is_err());
        let bad = DetectorParams { afterpulse_prob: 1.0, ..DetectorParams::default() };
        assert!(bad.validate().is_err());
        let bad = DetectorParams { efficiency: 1.5, ..DetectorParams::default() };
        assert!(bad.validate().is_err());
        let bad = DetectorParams { blind_power: 0.0, ..DetectorParams::default() };
        assert!(bad.validate().is_err());
        DetectorParams::default().validate().unwrap();
    }

    #[test]
    fn closed_form_dead_time_without_afterpulsing() {
        let params = DetectorParams { afterpulse_prob: 0.0, ..DetectorParams::default() };
        let dead = calibrate_dead_time(&params, 0.9, 5e4).unwrap();
        assert_eq!(dead, Time::from_us(2));
    }

    #[test]
    fn idle_detector_needs_no_dead_time() {
        assert_eq!(calibrate_dead_time(&DetectorParams::default(), 0.999_999, 0.0).unwrap(), Time::TICK);
    }

    #[test]
    fn infeasible_armed_fraction() {
        for target in [0.0, 1.0, -0.1, 1.2, f64::NAN] {
            assert!(matches!(calibrate_dead_time(&DetectorParams::default(), target, 5e4), Err(Error::Infeasible(_))));
        }
    }

    #[test]
    fn primary_rate_inverts_steady_rate() {
        let params = DetectorParams::default();
        for rate in [1e3, 5e4, 5e5, 1.5e6] {
            let primary = params.primary_rate_for_click_rate(rate).unwrap();
            let back = params.steady_click_rate(primary);
            assert!((back / rate - 1.0).abs() < 1e-9, "{rate} -> {primary} -> {back}");
        }
        assert!(params.primary_rate_for_click_rate(1.0 / params.dead_time.as_secs()).is_err());
    }

    #[test]
    fn mode_reports_blinding_first() {
        let params = DetectorParams::default();
        let mut state = DetectorState::new();
        assert_eq!(state.mode(Time::ZERO, &params), DetectorMode::Armed);
        state.dead_until = Time::from_ns(10);
        assert_eq!(state.mode(Time::ZERO, &params), DetectorMode::DeadUntil(Time::from_ns(10)));
        state.incident_cw_power = params.blind_power;
        assert_eq!(state.mode(Time::ZERO, &params), DetectorMode::Blinded);
    }
}
