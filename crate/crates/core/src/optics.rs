//! Optical stimuli seen by the detector and the sources that produce them.
//!
//! A timeline holds three kinds of stimulus: discrete photons (legitimate
//! signal or salt light from the local emitter), piecewise-constant CW power
//! (remote blinding or local self-blinding) and short bright pulses (fake
//! states or emitter flag pulses).

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::detector::DetectorParams;
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::selftest::{SelfTestPlan, Strategy};
use crate::time::Time;

/// Width of the flag pulse that models the intense onset edge of self-blinding light.
pub const ONSET_WIDTH: Time = Time::from_ns(1);
/// Photon content of the onset edge; large enough that an armed detector always fires.
pub const ONSET_PHOTONS: u32 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhotonSource {
    Signal,
    Salt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CwSource {
    AttackBlind,
    LeBlind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PulseSource {
    Fake,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Photon {
    pub time: Time,
    pub source: PhotonSource,
}

/// CW power contribution over `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwSegment {
    pub start: Time,
    pub end: Time,
    /// Watts.
    pub power: f64,
    pub source: CwSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub start: Time,
    pub width: Time,
    /// Watts.
    pub peak_power: f64,
    pub source: PulseSource,
    /// Photon number seen by an armed detector when the pulse is below the
    /// fake-state energy. Ignored for pulses at or above that energy.
    pub photons: u32,
}

impl Pulse {
    /// Pulse energy in joules.
    pub fn energy(&self) -> f64 {
        self.peak_power * self.width.as_secs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTimeline {
    pub duration: Time,
    pub photons: Vec<Photon>,
    pub cw_segments: Vec<CwSegment>,
    pub pulses: Vec<Pulse>,
}

impl OpticalTimeline {
    pub fn empty(duration: Time) -> Self {
        OpticalTimeline { duration, photons: Vec::new(), cw_segments: Vec::new(), pulses: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.photons.is_empty() && self.cw_segments.is_empty() && self.pulses.is_empty()
    }

    /// Checks that every stimulus is ordered and lies inside the horizon.
    pub fn validate(&self) -> Result<()> {
        let horizon = |at: Time| -> Result<()> {
            if at >= self.duration {
                return Err(Error::OutOfHorizon { at: at.to_string(), duration: self.duration.to_string() });
            }
            Ok(())
        };
        for (i, pair) in self.photons.windows(2).enumerate() {
            if pair[1].time < pair[0].time {
                return Err(Error::Unordered { list: "photons", index: i + 1 });
            }
        }
        if let Some(last) = self.photons.last() {
            horizon(last.time)?;
        }
        for (i, pair) in self.pulses.windows(2).enumerate() {
            if pair[1].start < pair[0].start {
                return Err(Error::Unordered { list: "pulses", index: i + 1 });
            }
        }
        for pulse in &self.pulses {
            horizon(pulse.start)?;
            if pulse.width == Time::ZERO {
                return Err(Error::invalid("pulse.width", "must be > 0"));
            }
            if pulse.peak_power < 0.0 || !pulse.peak_power.is_finite() {
                return Err(Error::invalid("pulse.peak_power", "must be finite and >= 0"));
            }
        }
        for seg in &self.cw_segments {
            horizon(seg.start)?;
            if seg.end <= seg.start || seg.end > self.duration {
                return Err(Error::invalid("cw_segment", format!("bad interval [{}, {})", seg.start, seg.end)));
            }
            if seg.power < 0.0 || !seg.power.is_finite() {
                return Err(Error::invalid("cw_segment.power", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Total CW power after each segment boundary, in time order.
    ///
    /// Power is zero before the first edge. Overlapping segments add.
    pub fn power_edges(&self) -> Vec<(Time, f64)> {
        let mut segments = self.cw_segments.clone();
        sort_segments(&mut segments);
        let mut bounds: Vec<Time> = segments.iter().flat_map(|s| [s.start, s.end]).collect();
        bounds.sort_unstable();
        bounds.dedup();
        bounds
            .into_iter()
            .map(|t| {
                let power = segments.iter().filter(|s| s.start <= t && t < s.end).map(|s| s.power).sum();
                (t, power)
            })
            .collect()
    }

    /// Total CW power at instant `t`.
    pub fn power_at(&self, t: Time) -> f64 {
        let mut segments = self.cw_segments.clone();
        sort_segments(&mut segments);
        segments.iter().filter(|s| s.start <= t && t < s.end).map(|s| s.power).sum()
    }
}

fn sort_segments(segments: &mut [CwSegment]) {
    segments
        .sort_by(|a, b| (a.start, a.end, a.source).cmp(&(b.start, b.end, b.source)).then(a.power.total_cmp(&b.power)));
}

/// Time-ordered merge of fragments sharing one horizon.
///
/// The result is canonical: merging the same fragments in any order yields the
/// same timeline. CW contributions stay as separate tagged segments.
pub fn merge_timelines(fragments: &[OpticalTimeline]) -> Result<OpticalTimeline> {
    let first = fragments.first().ok_or_else(|| Error::invalid("fragments", "nothing to merge"))?;
    let mut merged = OpticalTimeline::empty(first.duration);
    for fragment in fragments {
        if fragment.duration != first.duration {
            return Err(Error::DurationMismatch(first.duration.to_string(), fragment.duration.to_string()));
        }
        merged.photons.extend_from_slice(&fragment.photons);
        merged.cw_segments.extend_from_slice(&fragment.cw_segments);
        merged.pulses.extend_from_slice(&fragment.pulses);
    }
    merged.photons.sort_by_key(|p| (p.time, p.source));
    sort_segments(&mut merged.cw_segments);
    merged.pulses.sort_by(|a, b| {
        (a.start, a.width, a.source, a.photons)
            .cmp(&(b.start, b.width, b.source, b.photons))
            .then(a.peak_power.total_cmp(&b.peak_power))
    });
    Ok(merged)
}

/// Homogeneous Poisson arrival times in `[start, end)`.
pub(crate) fn poisson_arrivals(rate: f64, start: Time, end: Time, rng: &mut RandomStream) -> Result<Vec<Time>> {
    if rate < 0.0 || !rate.is_finite() {
        return Err(Error::invalid("rate", format!("must be finite and >= 0, got {rate}")));
    }
    let mut out = Vec::new();
    if rate == 0.0 || end <= start {
        return Ok(out);
    }
    out.reserve((rate * (end - start).as_secs() * 1.1) as usize + 4);
    let gap = Exp::new(rate).expect("positive rate");
    let mut t = start.as_secs();
    let end_s = end.as_secs();
    loop {
        t += gap.sample(rng);
        if t >= end_s {
            break;
        }
        let at = Time::from_secs(t);
        if at >= end {
            break;
        }
        out.push(at);
    }
    Ok(out)
}

/// Legitimate signal photons as a Poisson process over `[0, duration)`.
pub fn gen_signal_photons(rate: f64, duration: Time, rng: &mut RandomStream) -> Result<Vec<Photon>> {
    Ok(poisson_arrivals(rate, Time::ZERO, duration, rng)?
        .into_iter()
        .map(|time| Photon { time, source: PhotonSource::Signal })
        .collect())
}

/// Remote blinding and fake-state light.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackScenario {
    /// CW power applied by the attacker, watts. Zero means no blinding.
    pub blind_power_level: f64,
    /// Mean rate of fake-state pulses, per second.
    pub fake_pulse_rate: f64,
    pub fake_peak_power: f64,
    pub fake_width: Time,
    /// Instant at which the attacker stops blinding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_blind_at: Option<Time>,
    /// Send fake states even without blinding light.
    #[serde(default)]
    pub fakes_without_blinding: bool,
}

impl AttackScenario {
    pub fn none() -> Self {
        AttackScenario {
            blind_power_level: 0.0,
            fake_pulse_rate: 0.0,
            fake_peak_power: 0.0,
            fake_width: Time::from_ns(2),
            stop_blind_at: None,
            fakes_without_blinding: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("attack.blind_power_level", self.blind_power_level),
            ("attack.fake_pulse_rate", self.fake_pulse_rate),
            ("attack.fake_peak_power", self.fake_peak_power),
        ] {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::invalid(field, "must be finite and >= 0"));
            }
        }
        if self.fake_pulse_rate > 0.0 && self.fake_width == Time::ZERO {
            return Err(Error::invalid("attack.fake_width", "must be > 0"));
        }
        Ok(())
    }

    pub fn is_blinding(&self) -> bool {
        self.blind_power_level > 0.0
    }

    pub fn sends_fakes(&self) -> bool {
        self.fake_pulse_rate > 0.0 && (self.is_blinding() || self.fakes_without_blinding)
    }
}

/// Attacker light over `[0, duration)`.
///
/// Blinding runs from zero until `stop_blind_at` (or the horizon). Fake states
/// form a Poisson process while blinding is on, or over the whole horizon when
/// `fakes_without_blinding` is set.
pub fn gen_attack(scenario: &AttackScenario, duration: Time, rng: &mut RandomStream) -> Result<OpticalTimeline> {
    scenario.validate()?;
    let mut fragment = OpticalTimeline::empty(duration);
    let blind_end = scenario.stop_blind_at.unwrap_or(duration).min(duration);
    if scenario.is_blinding() && blind_end > Time::ZERO {
        fragment.cw_segments.push(CwSegment {
            start: Time::ZERO,
            end: blind_end,
            power: scenario.blind_power_level,
            source: CwSource::AttackBlind,
        });
    }
    if scenario.sends_fakes() {
        let end = if scenario.is_blinding() && !scenario.fakes_without_blinding { blind_end } else { duration };
        fragment.pulses = poisson_arrivals(scenario.fake_pulse_rate, Time::ZERO, end, rng)?
            .into_iter()
            .map(|start| Pulse {
                start,
                width: scenario.fake_width,
                peak_power: scenario.fake_peak_power,
                source: PulseSource::Fake,
                photons: 0,
            })
            .collect();
    }
    Ok(fragment)
}

/// Local light emitter schedule for one self-test.
pub fn gen_le_schedule(
    plan: &SelfTestPlan,
    duration: Time,
    params: &DetectorParams,
    rng: &mut RandomStream,
) -> Result<OpticalTimeline> {
    let mut fragment = OpticalTimeline::empty(duration);
    let start = plan.test_start;
    if start >= duration && plan.test_duration > Time::ZERO {
        return Err(Error::OutOfHorizon { at: start.to_string(), duration: duration.to_string() });
    }
    let end = start.saturating_add(plan.test_duration).min(duration);
    match plan.strategy {
        Strategy::Salt => {
            fragment.photons = poisson_arrivals(plan.salt_rate, start, end, rng)?
                .into_iter()
                .map(|time| Photon { time, source: PhotonSource::Salt })
                .collect();
        }
        Strategy::FlagPulse => {
            let pulse = Pulse {
                start,
                width: plan.test_duration,
                peak_power: plan.flag_peak_power,
                source: PulseSource::Flag,
                photons: plan.flag_photons,
            };
            check_below_fake(&pulse, params)?;
            fragment.pulses.push(pulse);
        }
        Strategy::SelfBlind => {
            if plan.le_blind_power < params.blind_power {
                return Err(Error::invalid(
                    "plan.le_blind_power",
                    format!(
                        "{} W cannot blind a detector whose threshold is {} W",
                        plan.le_blind_power, params.blind_power
                    ),
                ));
            }
            let onset = Pulse {
                start,
                width: ONSET_WIDTH,
                peak_power: plan.le_blind_power,
                source: PulseSource::Flag,
                photons: ONSET_PHOTONS,
            };
            check_below_fake(&onset, params)?;
            fragment.pulses.push(onset);
            let blind_start = start + ONSET_WIDTH;
            if blind_start < end {
                fragment.cw_segments.push(CwSegment {
                    start: blind_start,
                    end,
                    power: plan.le_blind_power,
                    source: CwSource::LeBlind,
                });
            }
        }
    }
    Ok(fragment)
}

fn check_below_fake(pulse: &Pulse, params: &DetectorParams) -> Result<()> {
    if pulse.energy() >= params.fake_energy {
        return Err(Error::invalid(
            "plan.flag_peak_power",
            format!(
                "emitter pulse energy {:e} J reaches the fake-state threshold {:e} J",
                pulse.energy(),
                params.fake_energy
            ),
        ));
    }
    Ok(())
}

/// Draws a uniformly distributed offset in `[0, width)`.
pub(crate) fn uniform_offset(width: Time, rng: &mut RandomStream) -> Time {
    if width.0 <= 1 {
        return Time::ZERO;
    }
    Time(rng.random_range(0..width.0))
}
