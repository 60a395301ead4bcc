//! Experiment composition: scenario timelines, detector runs, scheduled
//! self-tests and aggregated results.
//!
//! A trial is a pure function of `(config, trial index)`. Every module draws
//! from its own substream addressed by `(master seed, trial index, tag)`, so
//! trials can run in any order or in parallel and still serialize to the same
//! bytes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{process_timeline, ClickCause, DetectorParams};
use crate::error::{Error, Result};
use crate::optics::{
    gen_attack, gen_le_schedule, gen_signal_photons, merge_timelines, AttackScenario, OpticalTimeline,
};
use crate::rng::{RandomStream, StreamTag};
use crate::selftest::{
    evaluate_flag_pulse, evaluate_salt, evaluate_self_blind, schedule_tests, Decision, SelfBlindNull, SelfTestPlan,
    Strategy, Verdict, RESPONSE_TRACE,
};
use crate::stats::{count_distribution_oracle, CountDistribution, Histogram};
use crate::time::Time;

/// Bin width of time-resolved response histograms.
pub const RESPONSE_BIN: Time = Time::from_ns(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scenario {
    Normal,
    Manipulated,
    RecoveryAttack,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(with = "seed_format")]
    pub seed: u64,
    pub trials: u64,
    pub trial_duration: Time,
    /// Tests are only scheduled after this lead-in.
    pub warmup: Time,
    pub duty_cycle: f64,
    /// Incident legitimate photon rate, per second.
    pub signal_rate: f64,
    /// Trials used to calibrate the salt-test null distribution; 0 falls back
    /// to a Poisson proxy with the renewal-model mean.
    pub calibration_trials: u64,
    pub detector: DetectorParams,
    pub attack: AttackScenario,
    pub plan: SelfTestPlan,
}

mod seed_format {
    use serde::{Deserialize, Deserializer, Serializer};

    // TOML integers are signed 64-bit; larger seeds are written as strings.
    pub fn serialize<S: Serializer>(seed: &u64, serializer: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => serializer.serialize_i64(v),
            Err(_) => serializer.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<u64, D::Error> {
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => u64::try_from(v).map_err(|_| serde::de::Error::custom("seed must be >= 0")),
            Repr::Str(s) => s.trim().parse().map_err(serde::de::Error::custom),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if self.signal_rate < 0.0 || !self.signal_rate.is_finite() {
            return Err(Error::invalid("signal_rate", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.duty_cycle) {
            return Err(Error::invalid("duty_cycle", "must lie in [0, 1)"));
        }
        self.detector.validate()?;
        self.attack.validate()?;
        self.plan.validate()?;
        Ok(())
    }

    /// The decision a correct self-test should reach for this configuration.
    pub fn expects_manipulation(&self) -> bool {
        self.attack.is_blinding() || self.attack.sends_fakes()
    }

    /// Sets the numeric field addressed by a dotted path such as
    /// `detector.dead_time` or `plan.count_threshold`.
    pub fn set_path(&mut self, path: &str, value: f64) -> Result<()> {
        let mut tree = toml::Value::try_from(&*self).map_err(|e| Error::invalid(path, e.to_string()))?;
        let full = resolve_path(&tree, path)?;
        let mut node = &mut tree;
        for key in full.split('.') {
            node =
                node.as_table_mut().and_then(|t| t.get_mut(key)).ok_or_else(|| Error::UnknownPath(path.to_string()))?;
        }
        *node = match node {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::invalid(path, format!("{value} is not a non-negative integer")));
                }
                toml::Value::Integer(value as i64)
            }
            _ => return Err(Error::UnknownPath(path.to_string())),
        };
        let updated: ExperimentConfig =
            tree.try_into().map_err(|e: toml::de::Error| Error::invalid(path, e.message().to_string()))?;
        *self = updated;
        Ok(())
    }
}

/// Expands a bare field name such as `salt_rate` to its unique dotted path.
fn resolve_path(tree: &toml::Value, path: &str) -> Result<String> {
    fn walk(value: &toml::Value, prefix: &str, leaf: &str, found: &mut Vec<String>) {
        if let Some(table) = value.as_table() {
            for (key, child) in table {
                let here = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                if key == leaf && !child.is_table() {
                    found.push(here.clone());
                }
                walk(child, &here, leaf, found);
            }
        }
    }
    if path.contains('.') {
        return Ok(path.to_string());
    }
    let mut found = Vec::new();
    walk(tree, "", path, &mut found);
    match found.len() {
        1 => Ok(found.remove(0)),
        _ => Err(Error::UnknownPath(path.to_string())),
    }
}

/// Normal-operation expectations used for p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub salt: CountDistribution,
    pub flag_response: f64,
    pub self_blind: SelfBlindNull,
}

impl NullCalibration {
    /// Derives the null from the detector model: renewal-model armed fraction
    /// for flag and onset responses, noise for in-blind clicks, and (when
    /// `calibration_trials > 0`) a brute-force salt count histogram.
    pub fn for_config(config: &ExperimentConfig) -> Result<Self> {
        let params = &config.detector;
        let primary = config.signal_rate * params.efficiency + params.dark_rate + params.noise_rate;
        let rate = if primary > 0.0 { params.steady_click_rate(primary) } else { 0.0 };
        let armed = (1.0 - rate * params.dead_time.as_secs()).clamp(0.0, 1.0);
        let flag_detect = 1.0 - (1.0 - params.efficiency).powf(f64::from(config.plan.flag_photons));
        let in_blind_window = config.plan.test_duration.saturating_sub(config.plan.response_window);

        let salt_photons = config.signal_rate + config.plan.salt_rate;
        let salt = if config.calibration_trials > 0 && config.plan.strategy == Strategy::Salt {
            let mut rng = RandomStream::for_trial(config.seed, 0, StreamTag::Calibration);
            CountDistribution::Empirical {
                histogram: count_distribution_oracle(
                    params,
                    salt_photons,
                    config.plan.test_duration,
                    config.calibration_trials,
                    &mut rng,
                )?,
            }
        } else {
            let primary = salt_photons * params.efficiency + params.dark_rate + params.noise_rate;
            let mean = if primary > 0.0 {
                params.steady_click_rate(primary) * config.plan.test_duration.as_secs()
            } else {
                0.0
            };
            CountDistribution::Poisson { mean }
        };
        Ok(NullCalibration {
            salt,
            flag_response: armed * flag_detect,
            self_blind: SelfBlindNull {
                onset_prob: armed,
                in_blind_mean: params.noise_rate * in_blind_window.as_secs(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub strategy: Strategy,
    pub test_start: Time,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub total_clicks: u64,
    pub cause_counts: BTreeMap<ClickCause, u64>,
    pub tests: Vec<TestOutcome>,
}

/// A validated configuration with its null calibration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub null: NullCalibration,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let null = NullCalibration::for_config(&config)?;
        Ok(Experiment { config, null })
    }

    /// Optical timeline and test plans of one trial.
    pub fn build_trial(&self, trial: u64) -> Result<(OpticalTimeline, Vec<SelfTestPlan>)> {
        let c = &self.config;
        let stream = |tag| RandomStream::for_trial(c.seed, trial, tag);
        let duration = c.trial_duration;
        let window_start = c.warmup.min(duration);
        let plans = schedule_tests(&c.plan, window_start, duration, c.duty_cycle, &mut stream(StreamTag::Schedule))?;

        let mut signal = OpticalTimeline::empty(duration);
        signal.photons = gen_signal_photons(c.signal_rate, duration, &mut stream(StreamTag::Signal))?;
        let attack = gen_attack(&c.attack, duration, &mut stream(StreamTag::Attack))?;
        let mut fragments = vec![signal, attack];
        let mut emitter = stream(StreamTag::Emitter);
        for plan in &plans {
            fragments.push(gen_le_schedule(plan, duration, &c.detector, &mut emitter)?);
        }
        Ok((merge_timelines(&fragments)?, plans))
    }

    pub fn run_trial(&self, trial: u64) -> Result<TrialResult> {
        let c = &self.config;
        let (timeline, plans) = self.build_trial(trial)?;
        let clicks =
            process_timeline(&c.detector, &timeline, &mut RandomStream::for_trial(c.seed, trial, StreamTag::Detector))?;
        let mut cause_counts: BTreeMap<ClickCause, u64> = ClickCause::ALL.iter().map(|&c| (c, 0)).collect();
        for click in &clicks {
            *cause_counts.entry(click.cause).or_default() += 1;
        }
        let tests = plans
            .iter()
            .map(|plan| TestOutcome {
                strategy: plan.strategy,
                test_start: plan.test_start,
                verdict: match plan.strategy {
                    Strategy::Salt => evaluate_salt(plan, &self.null.salt, &clicks),
                    Strategy::FlagPulse => evaluate_flag_pulse(plan, self.null.flag_response, &clicks),
                    Strategy::SelfBlind => evaluate_self_blind(plan, &self.null.self_blind, &clicks),
                },
            })
            .collect();
        Ok(TrialResult {
            trial,
            seed: RandomStream::trial_seed(c.seed, trial),
            total_clicks: clicks.len() as u64,
            cause_counts,
            tests,
        })
    }

    /// Runs every trial. `threads` sizes a dedicated pool; results are
    /// ordered by trial index regardless of scheduling.
    pub fn run(&self, threads: Option<usize>) -> Result<ExperimentOutput> {
        let indices = 0..self.config.trials;
        let trials: Vec<TrialResult> = match threads {
            Some(1) => indices.map(|i| self.run_trial(i)).collect::<Result<_>>()?,
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?
                .install(|| indices.into_par_iter().map(|i| self.run_trial(i)).collect::<Result<_>>())?,
            None => indices.into_par_iter().map(|i| self.run_trial(i)).collect::<Result<_>>()?,
        };
        let summary = Summary::from_trials(&self.config, &trials);
        Ok(ExperimentOutput { trials, summary })
    }
}

/// Convenience wrapper: prepares the experiment and runs one trial.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    Experiment::prepare(config.clone())?.run_trial(trial)
}

pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    Experiment::prepare(config.clone())?.run(threads)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialResult>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub histograms: BTreeMap<String, Histogram>,
    pub metrics: BTreeMap<String, f64>,
}

impl Summary {
    /// Histograms:
    /// * `test_counts`: salt-interval counts, flag-window counts or in-blind clicks.
    /// * `response_delay`: first click after the test start, 10 ns bins.
    pub fn from_trials(config: &ExperimentConfig, trials: &[TrialResult]) -> Self {
        let tests: Vec<&TestOutcome> = trials.iter().flat_map(|t| &t.tests).collect();
        let n_tests = tests.len() as f64;
        let counts: Vec<u64> = tests
            .iter()
            .map(|t| match t.strategy {
                Strategy::SelfBlind => t.verdict.in_blind_clicks,
                Strategy::Salt | Strategy::FlagPulse => t.verdict.observed_count,
            })
            .collect();
        let mut histograms = BTreeMap::new();
        let count_hist = Histogram::from_counts(counts.iter().copied());
        let bins = (RESPONSE_TRACE.as_ps() / RESPONSE_BIN.as_ps()) as usize;
        let delay_hist = if matches!(config.plan.strategy, Strategy::Salt) || tests.is_empty() {
            Histogram::empty()
        } else {
            Histogram::from_values(
                tests.iter().filter_map(|t| t.verdict.first_response).map(|d| d.as_secs()),
                0.0,
                RESPONSE_BIN.as_secs(),
                bins,
            )
        };

        let mut metrics = BTreeMap::new();
        metrics.insert("trials".into(), trials.len() as f64);
        metrics.insert("tests".into(), n_tests);
        let total_clicks: u64 = trials.iter().map(|t| t.total_clicks).sum();
        metrics.insert("clicks_per_trial".into(), ratio(total_clicks as f64, trials.len() as f64));
        if !count_hist.is_empty() {
            metrics.insert("mean_count".into(), count_hist.mean());
            if count_hist.total > 1 {
                metrics.insert("variance_count".into(), count_hist.variance());
            }
        }
        let fraction =
            |pred: &dyn Fn(&TestOutcome) -> bool| ratio(tests.iter().filter(|t| pred(t)).count() as f64, n_tests);
        metrics.insert("flag_fraction".into(), fraction(&|t| t.verdict.flag_seen));
        metrics.insert("in_blind_fraction".into(), fraction(&|t| t.verdict.in_blind_clicks > 0));
        for (name, decision) in [
            ("normal", Decision::Normal),
            ("negative", Decision::NegativeManipulation),
            ("positive", Decision::PositiveManipulation),
            ("both", Decision::Both),
            ("inconclusive", Decision::Inconclusive),
        ] {
            metrics.insert(format!("decision_{name}"), fraction(&|t| t.verdict.decision == decision));
        }
        let expects = config.expects_manipulation();
        let decided: Vec<&&TestOutcome> =
            tests.iter().filter(|t| t.verdict.decision != Decision::Inconclusive).collect();
        let correct = decided.iter().filter(|t| t.verdict.decision.is_manipulation() == expects).count();
        metrics.insert("accuracy".into(), ratio(correct as f64, decided.len() as f64));
        let flagged = tests.iter().filter(|t| t.verdict.decision.is_manipulation()).count() as f64;
        let (false_alarm, miss) =
            if expects { (f64::NAN, ratio(n_tests - flagged, n_tests)) } else { (ratio(flagged, n_tests), f64::NAN) };
        metrics.insert("false_alarm_rate".into(), false_alarm);
        metrics.insert("miss_rate".into(), miss);

        histograms.insert("test_counts".into(), count_hist);
        histograms.insert("response_delay".into(), delay_hist);
        Summary { histograms, metrics }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: BTreeMap<String, f64>,
}

/// One experiment per value of the numeric field at `path`.
pub fn sweep(config: &ExperimentConfig, path: &str, values: &[f64], threads: Option<usize>) -> Result<Vec<SweepRow>> {
    // Reject unknown paths before running anything.
    config.clone().set_path(path, values.first().copied().unwrap_or(0.0))?;
    values
        .iter()
        .map(|&value| {
            let mut point = config.clone();
            point.set_path(path, value)?;
            let output = run_experiment(&point, threads)?;
            Ok(SweepRow { value, metrics: output.summary.metrics })
        })
        .collect()
}

pub mod presets {
    //! Operating points matching the reference InGaAs detector experiment.
    //!
    //! * total click rate 5e4/s (mean 10 clicks in 200 us), afterpulsing 40 %
    //! * 500 pW remote blinding, 2 ns fake states at 3 uW peak
    //! * salt light raising the interval mean to about 100 clicks
    //! * onset-flag probability 0.976 and flag-pulse response 0.934
    //!
    //! The onset edge fires any armed detector, so its probability is the armed
    //! fraction; the dead time is calibrated to that. The flag pulse also has to
    //! be detected, which fixes the efficiency through `1 - (1 - eta)^k`.

    use super::*;
    use crate::detector::calibrate_dead_time;

    pub const OPERATING_CLICK_RATE: f64 = 5e4;
    pub const SALT_CLICK_RATE: f64 = 5e5;
    pub const ONSET_RESPONSE: f64 = 0.976;
    pub const FLAG_RESPONSE: f64 = 0.934;
    pub const FLAG_PHOTONS: u32 = 5;
    pub const TEST_INTERVAL: Time = Time::from_us(200);
    pub const RESPONSE_WINDOW: Time = Time::from_ns(60);
    /// Residual in-blind runs of a normal detector, out of `RESIDUAL_RUNS`.
    pub const RESIDUAL_EVENTS: f64 = 8.0;
    pub const RESIDUAL_RUNS: f64 = 7608.0;

    /// Trial counts of the reference measurements.
    pub fn reference_trials(scenario: Scenario, strategy: Strategy) -> u64 {
        match (strategy, scenario) {
            (Strategy::Salt, Scenario::Manipulated) => 7686,
            (Strategy::Salt, _) => 7432,
            (Strategy::FlagPulse, Scenario::Manipulated) => 12380,
            (Strategy::FlagPulse, _) => 12542,
            (Strategy::SelfBlind, Scenario::Manipulated) => 7658,
            (Strategy::SelfBlind, Scenario::RecoveryAttack) => 1000,
            (Strategy::SelfBlind, _) => 7608,
        }
    }

    /// Detector calibrated to the reference operating point.
    pub fn detector() -> DetectorParams {
        let base = DetectorParams::default();
        let dead_time = calibrate_dead_time(&base, ONSET_RESPONSE, OPERATING_CLICK_RATE)
            .expect("reference operating point is feasible");
        let efficiency = 1.0 - (1.0 - FLAG_RESPONSE / ONSET_RESPONSE).powf(1.0 / f64::from(FLAG_PHOTONS));
        let in_blind = (TEST_INTERVAL - RESPONSE_WINDOW).as_secs();
        let noise_rate = -(1.0 - RESIDUAL_EVENTS / RESIDUAL_RUNS).ln() / in_blind;
        DetectorParams { dead_time, efficiency, noise_rate, ..base }
    }

    pub fn signal_rate(detector: &DetectorParams) -> f64 {
        detector.photon_rate_for_click_rate(OPERATING_CLICK_RATE).expect("reference operating point is feasible")
    }

    /// Extra salt photon rate that lifts the click rate to `SALT_CLICK_RATE`.
    pub fn salt_rate(detector: &DetectorParams) -> f64 {
        let high = detector.primary_rate_for_click_rate(SALT_CLICK_RATE).expect("feasible");
        let low = detector.primary_rate_for_click_rate(OPERATING_CLICK_RATE).expect("feasible");
        (high - low) / detector.efficiency
    }

    pub fn blinding_attack() -> AttackScenario {
        AttackScenario {
            blind_power_level: 500e-12,
            fake_pulse_rate: OPERATING_CLICK_RATE,
            fake_peak_power: 3e-6,
            fake_width: Time::from_ns(2),
            stop_blind_at: None,
            fakes_without_blinding: false,
        }
    }

    pub fn plan(strategy: Strategy, detector: &DetectorParams) -> SelfTestPlan {
        let mut plan = SelfTestPlan::new(strategy);
        plan.response_window = RESPONSE_WINDOW;
        plan.flag_photons = FLAG_PHOTONS;
        if strategy == Strategy::Salt {
            plan.salt_rate = salt_rate(detector);
        }
        plan
    }

    /// Preset experiment with one test per trial.
    pub fn experiment(scenario: Scenario, strategy: Strategy) -> ExperimentConfig {
        let detector = detector();
        let plan = plan(strategy, &detector);
        let warmup = Time::from_us(50);
        let (trial_duration, duty_cycle) = match strategy {
            Strategy::Salt | Strategy::SelfBlind => (Time::from_us(300), 0.8),
            Strategy::FlagPulse => (Time::from_us(60), 0.005),
        };
        let mut config = ExperimentConfig {
            scenario,
            seed: 20_240_601,
            trials: reference_trials(scenario, strategy),
            trial_duration,
            warmup,
            duty_cycle,
            signal_rate: signal_rate(&detector),
            calibration_trials: 2000,
            detector,
            attack: AttackScenario::none(),
            plan,
        };
        match scenario {
            Scenario::Normal | Scenario::Custom => {}
            Scenario::Manipulated => config.attack = blinding_attack(),
            Scenario::RecoveryAttack => {
                // The test interval exactly fills the window after warm-up and
                // the attacker lets go of the detector half way through it.
                config.trial_duration = warmup + plan_interval(&config.plan);
                config.duty_cycle = 0.9;
                config.detector.recovery_click_prob = 1.0;
                config.attack = AttackScenario {
                    fake_pulse_rate: 0.0,
                    stop_blind_at: Some(warmup + Time(plan_interval(&config.plan).as_ps() / 2)),
                    ..blinding_attack()
                };
            }
        }
        config
    }

    fn plan_interval(plan: &SelfTestPlan) -> Time {
        plan.slot()
    }

    /// Normal-operation count statistics without any emitter light.
    pub fn baseline_counts(trials: u64) -> ExperimentConfig {
        let mut config = experiment(Scenario::Normal, Strategy::Salt);
        config.plan.salt_rate = 0.0;
        config.calibration_trials = 0;
        config.trials = trials;
        config
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: Scenario, strategy: Strategy) -> ExperimentConfig {
        let mut config = presets::experiment(scenario, strategy);
        config.trials = 20;
        config.calibration_trials = 50;
        config
    }

    #[test]
    fn preset_calibration_values() {
        let d = presets::detector();
        assert_eq!(d.dead_time, Time::from_ns(480));
        assert!((d.efficiency - 0.4669).abs() < 1e-3, "{}", d.efficiency);
        assert!((d.noise_rate - 5.26).abs() < 0.01, "{}", d.noise_rate);
        let rate = d.steady_click_rate(presets::signal_rate(&d) * d.efficiency + d.dark_rate + d.noise_rate);
        assert!((rate - 5e4).abs() < 1e-6 * 5e4);
    }

    #[test]
    fn one_test_per_preset_trial() {
        for strategy in [Strategy::Salt, Strategy::FlagPulse, Strategy::SelfBlind] {
            for scenario in [Scenario::Normal, Scenario::Manipulated] {
                let result = run_trial(&small(scenario, strategy), 3).unwrap();
                assert_eq!(result.tests.len(), 1, "{strategy:?} {scenario:?}");
            }
        }
        let recovery = small(Scenario::RecoveryAttack, Strategy::SelfBlind);
        let result = run_trial(&recovery, 0).unwrap();
        assert_eq!(result.tests[0].test_start, recovery.warmup);
    }

    #[test]
    fn cause_counts_sum_to_total() {
        let result = run_trial(&small(Scenario::Normal, Strategy::Salt), 1).unwrap();
        assert_eq!(result.cause_counts.values().sum::<u64>(), result.total_clicks);
        assert_eq!(result.cause_counts.len(), ClickCause::ALL.len());
    }

    #[test]
    fn trial_is_reproducible() {
        let config = small(Scenario::Manipulated, Strategy::SelfBlind);
        let a = serde_json::to_string(&run_trial(&config, 7).unwrap()).unwrap();
        let b = serde_json::to_string(&run_trial(&config, 7).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_duration_trials_give_empty_histograms() {
        let mut config = small(Scenario::Normal, Strategy::Salt);
        config.trial_duration = Time::ZERO;
        let out = run_experiment(&config, Some(1)).unwrap();
        assert!(out.summary.histograms.values().all(Histogram::is_empty));
        assert!(out.trials.iter().all(|t| t.tests.is_empty() && t.total_clicks == 0));
    }

    #[test]
    fn set_path_updates_fields() {
        let mut config = small(Scenario::Normal, Strategy::Salt);
        config.set_path("plan.count_threshold", 42.0).unwrap();
        assert_eq!(config.plan.count_threshold, 42);
        config.set_path("detector.dead_time", 1e-6).unwrap();
        assert_eq!(config.detector.dead_time, Time::from_us(1));
        config.set_path("attack.fake_pulse_rate", 0.0).unwrap();
        assert_eq!(config.attack.fake_pulse_rate, 0.0);
        config.set_path("salt_rate", 0.0).unwrap();
        assert_eq!(config.plan.salt_rate, 0.0);
        assert!(matches!(config.set_path("detector.nope", 1.0), Err(Error::UnknownPath(_))));
        assert!(matches!(config.set_path("scenario", 1.0), Err(Error::UnknownPath(_))));
        assert!(config.set_path("plan.count_threshold", 4.5).is_err());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut config = small(Scenario::Normal, Strategy::Salt);
        config.trials = 0;
        assert!(Experiment::prepare(config).is_err());
    }
}
