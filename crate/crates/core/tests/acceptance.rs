//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs at the reference trial counts. Build with optimisation (the workspace
//! test profile already does).

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use blindsim::detector::{calibrate_dead_time, process_timeline, ClickCause, DetectorParams};
use blindsim::engine::{presets, run_experiment, Experiment, ExperimentOutput, Scenario};
use blindsim::optics::{
    gen_attack, gen_signal_photons, merge_timelines, AttackScenario, CwSegment, CwSource, OpticalTimeline,
};
use blindsim::rng::{RandomStream, StreamTag};
use blindsim::selftest::{
    decision_error_rates, evaluate_flag_pulse, evaluate_salt, evaluate_self_blind, Calibration, Decision, Strategy,
};
use blindsim::stats::{ks_exponential, CountDistribution};
use blindsim::Time;
use common::{poisson_lower, poisson_upper, relative_error};
use rand::seq::SliceRandom;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset_run(scenario: Scenario, strategy: Strategy) -> ExperimentOutput {
    run_experiment(&presets::experiment(scenario, strategy), None).expect("preset runs")
}

fn metric(output: &ExperimentOutput, name: &str) -> f64 {
    output.summary.metrics[name]
}

fn criterion_1() -> Outcome {
    let config = presets::baseline_counts(10_000);
    let start = Instant::now();
    let output = run_experiment(&config, Some(1)).expect("baseline runs");
    let elapsed = start.elapsed().as_secs_f64();
    let hist = &output.summary.histograms["test_counts"];
    let (mean, var) = (hist.mean(), hist.variance());
    outcome(
        hist.total >= 10_000 && (mean - 10.0).abs() <= 1.0 && var > mean && elapsed < 30.0,
        format!("{} intervals, mean {mean:.3}, variance {var:.3}, {elapsed:.2} s single-threaded", hist.total),
    )
}

fn criterion_2() -> Outcome {
    let normal = preset_run(Scenario::Normal, Strategy::Salt);
    let manipulated = preset_run(Scenario::Manipulated, Strategy::Salt);
    let hn = &normal.summary.histograms["test_counts"];
    let hm = &manipulated.summary.histograms["test_counts"];
    let above = 1.0 - hn.cdf(50.0);
    let below = hm.cdf(49.0);
    let (q01, q99) = (hn.quantile(0.01), hm.quantile(0.99));
    outcome(
        hn.total == 7432 && hm.total == 7686 && above >= 0.999 && below >= 0.999 && q01 > 60.0 && q99 < 40.0,
        format!(
            "normal {} runs, {:.4} above 50, 1st pct {q01}, min {}; manipulated {} runs, {:.4} below 50, 99th pct {q99}, max {}",
            hn.total,
            above,
            hn.min_value().unwrap_or(f64::NAN),
            hm.total,
            below,
            hm.max_value().unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_3() -> Outcome {
    let detector = presets::detector();
    let calibrated =
        calibrate_dead_time(&DetectorParams::default(), presets::ONSET_RESPONSE, presets::OPERATING_CLICK_RATE)
            .expect("feasible");
    let normal = preset_run(Scenario::Normal, Strategy::FlagPulse);
    let manipulated = preset_run(Scenario::Manipulated, Strategy::FlagPulse);
    let (pn, pm) = (metric(&normal, "flag_fraction"), metric(&manipulated, "flag_fraction"));
    let (nn, nm) = (metric(&normal, "tests"), metric(&manipulated, "tests"));
    outcome(
        calibrated == detector.dead_time && nn == 12542.0 && nm == 12380.0 && (pn - 0.934).abs() <= 0.015 && pm <= 0.01,
        format!(
            "dead time {calibrated}, normal response {pn:.4} over {nn} pulses, manipulated {pm:.4} over {nm} pulses"
        ),
    )
}

fn criterion_4() -> Outcome {
    let normal = preset_run(Scenario::Normal, Strategy::SelfBlind);
    let manipulated = preset_run(Scenario::Manipulated, Strategy::SelfBlind);
    let onset_n = metric(&normal, "flag_fraction");
    let in_blind_n = metric(&normal, "in_blind_fraction");
    let onset_m = metric(&manipulated, "flag_fraction");
    let in_blind_m = metric(&manipulated, "in_blind_fraction");
    let (nn, nm) = (metric(&normal, "tests"), metric(&manipulated, "tests"));
    outcome(
        nn == 7608.0
            && nm == 7658.0
            && (onset_n - 0.976).abs() <= 0.01
            && in_blind_n <= 0.005
            && in_blind_m >= 0.999
            && onset_m <= 0.01,
        format!(
            "normal onset {onset_n:.4}, in-blind runs {in_blind_n:.4} ({nn} runs); manipulated onset {onset_m:.4}, in-blind runs {in_blind_m:.4} ({nm} runs)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let config = presets::experiment(Scenario::RecoveryAttack, Strategy::SelfBlind);
    let stop = config.attack.stop_blind_at.expect("recovery attack stops blinding");
    let output = run_experiment(&config, None).expect("recovery runs");
    let tests: Vec<_> = output.trials.iter().flat_map(|t| &t.tests).collect();
    let inside = tests.iter().all(|t| t.test_start < stop && stop < t.test_start + config.plan.test_duration);
    let suppressed = output.trials.iter().all(|t| t.cause_counts[&ClickCause::Recovery] == 0);
    let negative = tests.iter().all(|t| matches!(t.verdict.decision, Decision::NegativeManipulation | Decision::Both));

    // Control: the same attack without the local blind does produce the click.
    let mut control = config.clone();
    control.duty_cycle = 0.0;
    let control = run_experiment(&control, None).expect("control runs");
    let fired = control.trials.iter().all(|t| t.cause_counts[&ClickCause::Recovery] == 1);
    outcome(
        output.trials.len() == 1000 && tests.len() == 1000 && inside && suppressed && negative && fired,
        format!(
            "{} trials, stop inside interval {inside}, recovery suppressed {suppressed}, all NEGATIVE/BOTH {negative}, control fires {fired}",
            output.trials.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let calibration = Calibration::Counts {
        normal: CountDistribution::Poisson { mean: 100.0 },
        manipulated: CountDistribution::Poisson { mean: 10.0 },
    };
    let rates = decision_error_rates(Strategy::Salt, &calibration, 50).expect("calibrated");
    let fa_ref = poisson_upper(10, 1, 50);
    let miss_ref = poisson_lower(100, 1, 49);
    let (efa, emiss) = (relative_error(rates.false_alarm, fa_ref), relative_error(rates.miss, miss_ref));
    outcome(
        rates.false_alarm < 1e-15 && rates.miss < 1e-7 && efa < 1e-10 && emiss < 1e-10,
        format!(
            "false_alarm {:.6e} (rel err {efa:.1e}), miss {:.6e} (rel err {emiss:.1e})",
            rates.false_alarm, rates.miss
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_blindsim"))
        .args(args)
        .env_remove("BLINDSIM_SEED")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn result_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("output directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.toml"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).expect("readable")))
        .collect();
    files.sort();
    files
}

fn criterion_7() -> Outcome {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    let (a, b, c) = (dir("a"), dir("b"), dir("c"));
    let mut ok = run_cli(&[
        "simulate",
        "--scenario",
        "manipulated",
        "--protocol",
        "self-blind",
        "--trials",
        "400",
        "--seed",
        "77",
        "--threads",
        "1",
        "--out",
        &a,
    ]);
    let manifest = format!("{a}/manifest.toml");
    ok &= run_cli(&["simulate", "--config", &manifest, "--threads", "4", "--out", &b]);
    ok &= run_cli(&["simulate", "--config", &manifest, "--out", &c]);
    if !ok {
        return outcome(false, "CLI run failed".into());
    }
    let (fa, fb, fc) = (result_files(Path::new(&a)), result_files(Path::new(&b)), result_files(Path::new(&c)));
    let digests = |d: &str| {
        let text = fs::read_to_string(format!("{d}/manifest.toml")).unwrap_or_default();
        text.lines().filter(|l| l.contains("sha256:")).map(str::to_string).collect::<Vec<_>>()
    };
    let same = !fa.is_empty() && fa == fb && fa == fc && digests(&a) == digests(&b);
    outcome(
        same,
        format!("{} result files byte-identical across re-runs with 1, 4 and default threads: {same}", fa.len()),
    )
}

fn criterion_8() -> Vec<(&'static str, Outcome)> {
    let mut checks = Vec::new();

    // Dead-time exclusion over at least a million clicks.
    let params = presets::detector();
    let mut clicks_seen = 0usize;
    let mut violations = 0usize;
    let mut chunk = 0u64;
    while clicks_seen < 1_000_000 {
        let duration = Time::from_us(200_000);
        let mut signal = OpticalTimeline::empty(duration);
        signal.photons =
            gen_signal_photons(2e6, duration, &mut RandomStream::for_trial(1, chunk, StreamTag::Signal)).unwrap();
        let attack =
            AttackScenario { fakes_without_blinding: true, fake_pulse_rate: 1e5, ..presets::blinding_attack() };
        let mut attack = gen_attack(
            &AttackScenario { stop_blind_at: Some(Time::from_us(50_000)), ..attack },
            duration,
            &mut RandomStream::for_trial(1, chunk, StreamTag::Attack),
        )
        .unwrap();
        attack.cw_segments.push(CwSegment {
            start: Time::from_us(120_000),
            end: Time::from_us(121_000),
            power: 1e-9,
            source: CwSource::LeBlind,
        });
        let timeline = merge_timelines(&[signal, attack]).unwrap();
        let p = DetectorParams { recovery_click_prob: 1.0, ..params.clone() };
        let clicks =
            process_timeline(&p, &timeline, &mut RandomStream::for_trial(1, chunk, StreamTag::Detector)).unwrap();
        violations += clicks.windows(2).filter(|w| w[1].time - w[0].time < p.dead_time).count();
        clicks_seen += clicks.len();
        chunk += 1;
    }
    checks.push((
        "dead-time exclusion",
        outcome(violations == 0, format!("{clicks_seen} clicks, {violations} violations")),
    ));

    // Blinding suppression: no click at all under CW power at threshold.
    let quiet = DetectorParams { noise_rate: 0.0, ..params.clone() };
    let mut blind_clicks = 0usize;
    for trial in 0..200 {
        let duration = Time::from_us(1000);
        let mut timeline = OpticalTimeline::empty(duration);
        timeline.photons =
            gen_signal_photons(1e7, duration, &mut RandomStream::for_trial(2, trial, StreamTag::Signal)).unwrap();
        timeline.cw_segments.push(CwSegment {
            start: Time::ZERO,
            end: duration,
            power: quiet.blind_power,
            source: CwSource::AttackBlind,
        });
        blind_clicks +=
            process_timeline(&quiet, &timeline, &mut RandomStream::for_trial(2, trial, StreamTag::Detector))
                .unwrap()
                .len();
    }
    checks.push((
        "blinding suppression",
        outcome(blind_clicks == 0, format!("{blind_clicks} clicks in 200 blinded ms at 1e7 photons/s")),
    ));

    // Poisson generator gaps.
    let rate = 5e4;
    let photons = gen_signal_photons(rate, Time::from_secs(2.5), &mut RandomStream::from_seed(3)).unwrap();
    let gaps: Vec<f64> = photons.windows(2).take(100_000).map(|w| (w[1].time - w[0].time).as_secs()).collect();
    let ks = ks_exponential(&gaps, rate);
    checks.push((
        "Poisson KS",
        outcome(
            gaps.len() == 100_000 && ks.p_value > 0.01,
            format!("{} gaps, D = {:.5}, p = {:.3}", gaps.len(), ks.statistic, ks.p_value),
        ),
    ));

    // Hidden labels never reach the verdicts.
    let mut changed = 0usize;
    let mut compared = 0usize;
    let mut shuffle_rng = RandomStream::from_seed(4);
    for (scenario, strategy) in [
        (Scenario::Normal, Strategy::Salt),
        (Scenario::Manipulated, Strategy::Salt),
        (Scenario::Normal, Strategy::FlagPulse),
        (Scenario::Manipulated, Strategy::SelfBlind),
    ] {
        let experiment = Experiment::prepare(presets::experiment(scenario, strategy)).unwrap();
        let c = &experiment.config;
        for trial in 0..200 {
            let (timeline, plans) = experiment.build_trial(trial).unwrap();
            let mut clicks = process_timeline(
                &c.detector,
                &timeline,
                &mut RandomStream::for_trial(c.seed, trial, StreamTag::Detector),
            )
            .unwrap();
            let verdicts = |clicks: &[_]| {
                plans
                    .iter()
                    .map(|plan| match plan.strategy {
                        Strategy::Salt => evaluate_salt(plan, &experiment.null.salt, clicks),
                        Strategy::FlagPulse => evaluate_flag_pulse(plan, experiment.null.flag_response, clicks),
                        Strategy::SelfBlind => evaluate_self_blind(plan, &experiment.null.self_blind, clicks),
                    })
                    .collect::<Vec<_>>()
            };
            let before = verdicts(&clicks);
            let mut labels: Vec<ClickCause> = clicks.iter().map(|c| c.cause).collect();
            labels.shuffle(&mut shuffle_rng);
            for (click, label) in clicks.iter_mut().zip(labels) {
                click.cause = label;
            }
            compared += before.len();
            changed += (before != verdicts(&clicks)) as usize;
        }
    }
    checks.push(("label-shuffle invariance", outcome(changed == 0, format!("{compared} verdicts, {changed} changed"))));
    checks
}

fn main() {
    let mut results: Vec<(String, Outcome)> = vec![
        ("1 normal count distribution".into(), criterion_1()),
        ("2 salt-test separation".into(), criterion_2()),
        ("3 flag-pulse probabilities".into(), criterion_3()),
        ("4 self-blind test".into(), criterion_4()),
        ("5 recovery-attack coverage".into(), criterion_5()),
        ("6 decision-error mathematics".into(), criterion_6()),
        ("7 determinism".into(), criterion_7()),
    ];
    let properties = criterion_8();
    let all = properties.iter().all(|(_, o)| o.pass);
    let detail = properties
        .iter()
        .map(|(name, o)| format!("{name}: {} ({})", if o.pass { "ok" } else { "FAILED" }, o.detail))
        .collect::<Vec<_>>()
        .join("; ");
    results.push(("8 property suites".into(), outcome(all, detail)));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
