//! Detector self-tests driven by the receiver's local light emitter.
//!
//! Three strategies share one plan type:
//!
//! * **Salt**: the emitter adds weak light for an interval `T`; an unblinded
//!   detector shows clearly more clicks than usual.
//! * **Flag pulse**: a short few-photon pulse fires an armed detector with
//!   near certainty; a blinded one stays silent.
//! * **Self-blind**: the emitter blinds the detector itself. The onset edge
//!   should produce a flag click and the rest of the interval should be
//!   silent; later clicks betray injected fake states.
//!
//! Decisions only ever look at click timestamps and the plan.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detector::ClickRecord;
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stats::{binomial_tail, poisson_tail, CountDistribution, Tail};
use crate::time::Time;

/// Range after a test's start within which the first click delay is recorded.
pub const RESPONSE_TRACE: Time = Time::from_ns(200);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    Salt,
    FlagPulse,
    SelfBlind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfTestPlan {
    pub strategy: Strategy,
    /// Drawn by [`schedule_tests`]; ignored in templates.
    #[serde(default)]
    pub test_start: Time,
    /// Interval `T` for salt and self-blind tests, pulse width for flag pulses.
    pub test_duration: Time,
    /// Incident salt photon rate, per second (salt only).
    #[serde(default)]
    pub salt_rate: f64,
    /// Acceptance window after the pulse or onset edge.
    pub response_window: Time,
    /// Minimum salt-interval count accepted as normal.
    pub count_threshold: u64,
    /// Photon number of a flag pulse.
    pub flag_photons: u32,
    /// Peak power of a flag pulse, watts.
    pub flag_peak_power: f64,
    /// CW power of the self-blinding light, watts.
    pub le_blind_power: f64,
}

impl SelfTestPlan {
    pub fn new(strategy: Strategy) -> Self {
        SelfTestPlan {
            strategy,
            test_start: Time::ZERO,
            test_duration: match strategy {
                Strategy::FlagPulse => Time::from_ns(25),
                Strategy::Salt | Strategy::SelfBlind => Time::from_us(200),
            },
            salt_rate: 0.0,
            response_window: Time::from_ns(60),
            count_threshold: 50,
            flag_photons: 5,
            flag_peak_power: 30e-12,
            le_blind_power: 5e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.salt_rate < 0.0 || !self.salt_rate.is_finite() {
            return Err(Error::invalid("plan.salt_rate", "must be finite and >= 0"));
        }
        for (field, v) in [("plan.flag_peak_power", self.flag_peak_power), ("plan.le_blind_power", self.le_blind_power)]
        {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid(field, "must be finite and >= 0"));
            }
        }
        if self.strategy == Strategy::FlagPulse && self.test_duration == Time::ZERO {
            return Err(Error::invalid("plan.test_duration", "flag pulse width must be > 0"));
        }
        Ok(())
    }

    /// Checks that the count threshold sits between the calibrated means.
    pub fn validate_threshold(&self, manipulated_mean: f64, normal_mean: f64) -> Result<()> {
        let t = self.count_threshold as f64;
        if manipulated_mean < t && t <= normal_mean {
            Ok(())
        } else {
            Err(Error::invalid(
                "plan.count_threshold",
                format!("{t} is not between calibrated means {manipulated_mean} and {normal_mean}"),
            ))
        }
    }

    /// Time the test occupies, including the response window.
    pub fn slot(&self) -> Time {
        self.test_duration.max(self.response_window)
    }

    pub fn end(&self) -> Time {
        self.test_start.saturating_add(self.test_duration)
    }
}

/// Places non-overlapping tests in `[window_start, window_end)`.
///
/// The number of tests is `round(duty_cycle * span / slot)`. Given that
/// number, start times are uniform over all non-overlapping placements: the
/// free time is split at sorted uniform points.
pub fn schedule_tests(
    template: &SelfTestPlan,
    window_start: Time,
    window_end: Time,
    duty_cycle: f64,
    rng: &mut RandomStream,
) -> Result<Vec<SelfTestPlan>> {
    template.validate()?;
    if !(0.0..1.0).contains(&duty_cycle) {
        return Err(Error::invalid("duty_cycle", format!("{duty_cycle} must lie in [0, 1)")));
    }
    let slot = template.slot();
    if slot == Time::ZERO {
        return Err(Error::invalid("plan.test_duration", "test occupies no time"));
    }
    let span = window_end.saturating_sub(window_start);
    let n = (duty_cycle * span.as_ps() as f64 / slot.as_ps() as f64).round() as u64;
    if n == 0 {
        return Ok(Vec::new());
    }
    let busy = n.checked_mul(slot.as_ps()).filter(|&b| b <= span.as_ps()).ok_or_else(|| {
        Error::Infeasible(format!("{n} tests of {slot} do not fit in {span} at duty cycle {duty_cycle}"))
    })?;
    let free = span.as_ps() - busy;
    let mut offsets: Vec<u64> = (0..n).map(|_| rng.random_range(0..=free)).collect();
    offsets.sort_unstable();
    Ok(offsets
        .into_iter()
        .enumerate()
        .map(|(i, offset)| SelfTestPlan {
            test_start: window_start + Time(offset + i as u64 * slot.as_ps()),
            ..template.clone()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Normal,
    NegativeManipulation,
    PositiveManipulation,
    Both,
    Inconclusive,
}

impl Decision {
    pub fn is_manipulation(self) -> bool {
        matches!(self, Decision::NegativeManipulation | Decision::PositiveManipulation | Decision::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    /// Clicks in the test interval (salt), the response window (flag pulse),
    /// or the whole interval (self-blind).
    pub observed_count: u64,
    pub flag_seen: bool,
    pub in_blind_clicks: u64,
    /// Probability of the observation under normal operation.
    pub p_value: f64,
    /// Delay of the first click within [`RESPONSE_TRACE`] of the test start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_response: Option<Time>,
}

impl Verdict {
    fn inconclusive() -> Self {
        Verdict {
            decision: Decision::Inconclusive,
            observed_count: 0,
            flag_seen: false,
            in_blind_clicks: 0,
            p_value: 1.0,
            first_response: None,
        }
    }
}

fn count_in(clicks: &[ClickRecord], start: Time, end: Time) -> u64 {
    clicks.iter().filter(|c| c.time >= start && c.time < end).count() as u64
}

fn first_response(clicks: &[ClickRecord], start: Time) -> Option<Time> {
    let end = start.saturating_add(RESPONSE_TRACE);
    clicks.iter().map(|c| c.time).filter(|&t| t >= start && t < end).min().map(|t| t - start)
}

/// Salt test: enough clicks in the interval certify an unblinded detector.
///
/// `p_value` is the lower tail `P(X <= observed)` of the calibrated
/// normal-operation count distribution.
pub fn evaluate_salt(plan: &SelfTestPlan, null: &CountDistribution, clicks: &[ClickRecord]) -> Verdict {
    debug_assert_eq!(plan.strategy, Strategy::Salt);
    if plan.test_duration == Time::ZERO {
        return Verdict::inconclusive();
    }
    let observed = count_in(clicks, plan.test_start, plan.end());
    Verdict {
        decision: if observed >= plan.count_threshold { Decision::Normal } else { Decision::NegativeManipulation },
        observed_count: observed,
        flag_seen: false,
        in_blind_clicks: 0,
        p_value: if null.is_calibrated() { null.cdf(observed) } else { f64::NAN },
        first_response: None,
    }
}

/// Single flag pulse: any click inside the response window witnesses an
/// unblinded detector. `normal_response` is the calibrated response
/// probability of a normal detector.
pub fn evaluate_flag_pulse(plan: &SelfTestPlan, normal_response: f64, clicks: &[ClickRecord]) -> Verdict {
    debug_assert_eq!(plan.strategy, Strategy::FlagPulse);
    if plan.test_duration == Time::ZERO {
        return Verdict::inconclusive();
    }
    let window_end = plan.test_start.saturating_add(plan.response_window);
    let observed = count_in(clicks, plan.test_start, window_end);
    let seen = observed > 0;
    Verdict {
        decision: if seen { Decision::Normal } else { Decision::NegativeManipulation },
        observed_count: observed,
        flag_seen: seen,
        in_blind_clicks: 0,
        p_value: if seen { 1.0 } else { 1.0 - normal_response },
        first_response: first_response(clicks, plan.test_start),
    }
}

/// Pooled verdict over many flag pulses.
///
/// The pulse series is declared normal when the number of responses reaches
/// the threshold that minimises the larger of the two error rates for
/// response probabilities `normal_response` and `manipulated_response`.
pub fn aggregate_flag_responses(
    responses: u64,
    pulses: u64,
    normal_response: f64,
    manipulated_response: f64,
) -> Result<(Verdict, u64)> {
    if responses > pulses {
        return Err(Error::invalid("responses", "exceeds number of pulses"));
    }
    if pulses == 0 {
        return Ok((Verdict::inconclusive(), 0));
    }
    let calibration =
        Calibration::Responses { trials: pulses, normal: normal_response, manipulated: manipulated_response };
    let (threshold, _) = optimal_threshold(Strategy::FlagPulse, &calibration)?;
    let verdict = Verdict {
        decision: if responses >= threshold { Decision::Normal } else { Decision::NegativeManipulation },
        observed_count: responses,
        flag_seen: responses > 0,
        in_blind_clicks: 0,
        p_value: binomial_tail(pulses, normal_response, responses, Tail::Lower),
        first_response: None,
    };
    Ok((verdict, threshold))
}

/// Normal-operation expectations for the self-blind test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfBlindNull {
    /// Probability that the onset edge produces a flag click.
    pub onset_prob: f64,
    /// Mean clicks per run after the response window while self-blinded.
    pub in_blind_mean: f64,
}

/// Self-blind test: onset flag plus silence under local blinding.
///
/// | flag | later clicks | decision |
/// |------|--------------|----------|
/// | yes  | none         | normal |
/// | no   | none         | negative manipulation |
/// | yes  | some         | positive manipulation |
/// | no   | some         | both |
pub fn evaluate_self_blind(plan: &SelfTestPlan, null: &SelfBlindNull, clicks: &[ClickRecord]) -> Verdict {
    debug_assert_eq!(plan.strategy, Strategy::SelfBlind);
    if plan.test_duration == Time::ZERO {
        return Verdict::inconclusive();
    }
    let window_end = plan.test_start.saturating_add(plan.response_window).min(plan.end());
    let flag_seen = count_in(clicks, plan.test_start, window_end) > 0;
    let in_blind = count_in(clicks, window_end, plan.end());
    let decision = match (flag_seen, in_blind > 0) {
        (true, false) => Decision::Normal,
        (false, false) => Decision::NegativeManipulation,
        (true, true) => Decision::PositiveManipulation,
        (false, true) => Decision::Both,
    };
    let flag_likelihood = if flag_seen { null.onset_prob } else { 1.0 - null.onset_prob };
    Verdict {
        decision,
        observed_count: count_in(clicks, plan.test_start, plan.end()),
        flag_seen,
        in_blind_clicks: in_blind,
        p_value: (flag_likelihood * poisson_tail(null.in_blind_mean, in_blind, Tail::Upper)).clamp(0.0, 1.0),
        first_response: first_response(clicks, plan.test_start),
    }
}

/// Calibrated statistics under normal operation and under manipulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Calibration {
    /// Salt-interval click counts.
    Counts { normal: CountDistribution, manipulated: CountDistribution },
    /// Per-stimulus response probabilities over `trials` flag pulses or onsets.
    Responses { trials: u64, normal: f64, manipulated: f64 },
}

/// Error probabilities of a threshold test that looks for the emitter's
/// response (salt excess, flag click).
///
/// `false_alarm` is the probability that a manipulated detector still shows
/// the response, so the test wrongly reports it present. `miss` is the
/// probability that a normal detector fails to show it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub false_alarm: f64,
    pub miss: f64,
}

impl ErrorRates {
    pub fn worst(&self) -> f64 {
        self.false_alarm.max(self.miss)
    }
}

/// Exact tail probabilities of a threshold test: the detector is declared
/// normal when the statistic is at least `threshold`.
pub fn decision_error_rates(strategy: Strategy, calibration: &Calibration, threshold: u64) -> Result<ErrorRates> {
    match (strategy, calibration) {
        (Strategy::Salt, Calibration::Counts { normal, manipulated }) => {
            if !normal.is_calibrated() || !manipulated.is_calibrated() {
                return Err(Error::Uncalibrated("empty count distribution".into()));
            }
            Ok(ErrorRates {
                false_alarm: manipulated.sf(threshold),
                miss: if threshold == 0 { 0.0 } else { normal.cdf(threshold - 1) },
            })
        }
        (Strategy::FlagPulse | Strategy::SelfBlind, Calibration::Responses { trials, normal, manipulated }) => {
            for p in [normal, manipulated] {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Uncalibrated(format!("response probability {p} outside [0, 1]")));
                }
            }
            if *trials == 0 {
                return Err(Error::Uncalibrated("no stimuli to respond to".into()));
            }
            Ok(ErrorRates {
                false_alarm: binomial_tail(*trials, *manipulated, threshold, Tail::Upper),
                miss: if threshold == 0 { 0.0 } else { binomial_tail(*trials, *normal, threshold - 1, Tail::Lower) },
            })
        }
        (strategy, _) => Err(Error::Uncalibrated(format!("calibration kind does not match strategy {strategy:?}"))),
    }
}

/// Threshold minimising `max(false_alarm, miss)`.
pub fn optimal_threshold(strategy: Strategy, calibration: &Calibration) -> Result<(u64, ErrorRates)> {
    let upper = match calibration {
        Calibration::Counts { normal, manipulated } => normal.support_bound().max(manipulated.support_bound()) + 1,
        Calibration::Responses { trials, .. } => trials + 1,
    };
    let rates = |t: u64| decision_error_rates(strategy, calibration, t);
    // false_alarm falls and miss rises with the threshold: find the crossing.
    let (mut lo, mut hi) = (0u64, upper);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let r = rates(mid)?;
        if r.miss >= r.false_alarm {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut best = (lo, rates(lo)?);
    if lo > 0 {
        let before = rates(lo - 1)?;
        if before.worst() <= best.1.worst() {
            best = (lo - 1, before);
        }
    }
    Ok(best)
}
