//! Command implementations behind the `blindsim` binary.
//!
//! Configuration files are flat `dotted.key = value` text (TOML syntax) in SI
//! units. Keys overlay the preset selected by `scenario` and `plan.strategy`,
//! so a file only needs the fields it changes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{presets, run_experiment, sweep, ExperimentConfig, ExperimentOutput, Scenario, TrialResult};
use crate::error::Error;
use crate::selftest::{Decision, Strategy};
use crate::stats::{clopper_pearson_interval, Histogram};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "BLINDSIM_SEED";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TRIALS_FILE: &str = "trials.jsonl";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Model(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest {}: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },
}

impl HarnessError {
    /// 1 for usage and configuration problems, 2 for I/O and stored results.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Model(_) => 1,
            HarnessError::Io { .. } | HarnessError::Manifest { .. } => 2,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

// ---------------------------------------------------------------------------
// Configuration text

fn flatten(value: &toml::Value, prefix: &str, out: &mut Vec<(String, toml::Value)>) {
    match value.as_table() {
        Some(table) => {
            for (key, child) in table {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(child, &path, out);
            }
        }
        None => out.push((prefix.to_string(), value.clone())),
    }
}

fn flat_pairs(value: &toml::Value) -> Vec<(String, toml::Value)> {
    let mut out = Vec::new();
    flatten(value, "", &mut out);
    out
}

fn insert_path(tree: &mut toml::Value, path: &str, value: toml::Value) -> HarnessResult<()> {
    let mut keys: Vec<&str> = path.split('.').collect();
    let leaf = keys.pop().unwrap_or_default();
    let mut node = tree;
    for key in keys {
        let table = node.as_table_mut().ok_or_else(|| config_err(format!("{path}: not a table")))?;
        node = table.entry(key.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node.as_table_mut().ok_or_else(|| config_err(format!("{path}: not a table")))?;
    // Integers are accepted wherever a float is expected.
    let value = match (table.get(leaf), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    table.insert(leaf.to_string(), value);
    Ok(())
}

/// Renders a configuration as sorted `dotted.key = value` lines.
pub fn config_to_text(config: &ExperimentConfig) -> HarnessResult<String> {
    let tree = toml::Value::try_from(config).map_err(|e| config_err(e.to_string()))?;
    let mut text = String::new();
    for (key, value) in flat_pairs(&tree) {
        let _ = writeln!(text, "{key} = {value}");
    }
    Ok(text)
}

fn scenario_from_value(value: &toml::Value) -> HarnessResult<Scenario> {
    value.clone().try_into().map_err(|e: toml::de::Error| config_err(format!("scenario: {}", e.message())))
}

fn strategy_from_value(value: &toml::Value) -> HarnessResult<Strategy> {
    value.clone().try_into().map_err(|e: toml::de::Error| config_err(format!("plan.strategy: {}", e.message())))
}

/// Builds a configuration from flat key/value text over a preset.
///
/// `scenario` and `strategy` pick the preset when the text does not name them.
pub fn config_from_text(text: &str, scenario: Scenario, strategy: Strategy) -> HarnessResult<ExperimentConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
    // A manifest carries its configuration under [config].
    if let Some(toml::Value::Table(inner)) = table.remove("config") {
        table = inner;
    }
    let user = flat_pairs(&toml::Value::Table(table));
    let lookup = |key: &str| user.iter().find(|(k, _)| k == key).map(|(_, v)| v);
    let scenario = lookup("scenario").map(scenario_from_value).transpose()?.unwrap_or(scenario);
    let strategy = lookup("plan.strategy").map(strategy_from_value).transpose()?.unwrap_or(strategy);

    let base = presets::experiment(scenario, strategy);
    let mut tree = toml::Value::try_from(&base).map_err(|e| config_err(e.to_string()))?;
    let base_keys = flat_pairs(&tree);
    for (key, value) in &user {
        insert_path(&mut tree, key, value.clone())?;
    }
    let config: ExperimentConfig = tree.try_into().map_err(|e: toml::de::Error| {
        // Prefer naming the full dotted path of a key the preset does not have.
        match user.iter().find(|(k, _)| !base_keys.iter().any(|(b, _)| b == k)) {
            Some((key, _)) => config_err(format!("{key}: {}", e.message())),
            None => config_err(e.message().to_string()),
        }
    })?;

    let known = flat_pairs(&toml::Value::try_from(&config).map_err(|e| config_err(e.to_string()))?);
    if let Some((key, _)) = user.iter().find(|(k, _)| !known.iter().any(|(kk, _)| kk == k)) {
        return Err(config_err(format!("{key}: unknown field")));
    }
    Ok(config)
}

pub fn load_config(path: &Path, scenario: Scenario, strategy: Strategy) -> HarnessResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    config_from_text(&text, scenario, strategy).map_err(|e| match e {
        HarnessError::Config(msg) => config_err(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Options shared by the commands that run experiments.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub scenario: Option<Scenario>,
    pub protocol: Option<Strategy>,
    /// Already merged with the seed environment variable by the caller.
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn resolve(&self) -> HarnessResult<ExperimentConfig> {
        let scenario = self.scenario.unwrap_or(Scenario::Normal);
        let strategy = self.protocol.unwrap_or(Strategy::Salt);
        let mut config = match &self.config {
            Some(path) => load_config(path, scenario, strategy)?,
            None => presets::experiment(scenario, strategy),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Seed precedence: command line, then environment, then configuration.
pub fn merge_seed(cli: Option<u64>, env: Option<&str>) -> HarnessResult<Option<u64>> {
    if cli.is_some() {
        return Ok(cli);
    }
    env.map(|s| s.trim().parse::<u64>().map_err(|e| config_err(format!("{SEED_ENV}: {e}")))).transpose()
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub digests: BTreeMap<String, String>,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn to_text(&self) -> HarnessResult<String> {
        let mut text = String::new();
        let _ = writeln!(text, "version = {}", toml::Value::String(self.version.clone()));
        let _ = writeln!(text, "seed = \"{}\"", self.seed);
        let _ = writeln!(text, "started_unix = {}", toml::Value::Float(self.started_unix));
        let _ = writeln!(text, "finished_unix = {}", toml::Value::Float(self.finished_unix));
        let _ = writeln!(text, "\n[digests]");
        for (file, digest) in &self.digests {
            let _ = writeln!(text, "{} = \"sha256:{digest}\"", toml::Value::String(file.clone()));
        }
        let _ = writeln!(text, "\n[config]");
        text.push_str(&config_to_text(&self.config)?);
        Ok(text)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let bad = |reason: String| HarnessError::Manifest { path: path.to_path_buf(), reason };
        let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        let string = |table: &toml::Table, key: &str| {
            table
                .get(key)
                .and_then(toml::Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| bad(format!("missing {key}")))
        };
        let float = |table: &toml::Table, key: &str| {
            table.get(key).and_then(toml::Value::as_float).ok_or_else(|| bad(format!("missing {key}")))
        };
        let version = string(&table, "version")?;
        let seed = string(&table, "seed")?.parse().map_err(|e| bad(format!("seed: {e}")))?;
        let started_unix = float(&table, "started_unix")?;
        let finished_unix = float(&table, "finished_unix")?;
        let mut digests = BTreeMap::new();
        if let Some(toml::Value::Table(d)) = table.remove("digests") {
            for (file, value) in d {
                let digest = value
                    .as_str()
                    .and_then(|s| s.strip_prefix("sha256:"))
                    .ok_or_else(|| bad(format!("digest of {file}")))?;
                digests.insert(file, digest.to_string());
            }
        }
        let config_table = match table.remove("config") {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(bad("missing [config]".into())),
        };
        let config: ExperimentConfig =
            toml::Value::Table(config_table).try_into().map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        Ok(RunManifest { version, seed, started_unix, finished_unix, digests, config })
    }

    /// Checks every recorded digest against the files in `dir`.
    pub fn verify(&self, dir: &Path) -> HarnessResult<()> {
        for (file, expected) in &self.digests {
            let path = dir.join(file);
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            if sha256_hex(&bytes) != *expected {
                return Err(HarnessError::Manifest {
                    path: dir.join(MANIFEST_FILE),
                    reason: format!("digest mismatch for {file}"),
                });
            }
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn write_file(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn create_dir(path: &Path) -> HarnessResult<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

// ---------------------------------------------------------------------------
// Result files

pub fn trials_to_jsonl(trials: &[TrialResult]) -> String {
    let mut text = String::new();
    for trial in trials {
        text.push_str(&serde_json::to_string(trial).expect("trial results serialize"));
        text.push('\n');
    }
    text
}

pub fn trials_from_jsonl(text: &str) -> std::result::Result<Vec<TrialResult>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

pub fn metrics_to_csv(metrics: &BTreeMap<String, f64>) -> String {
    let mut text = String::from("metric,value\n");
    for (name, value) in metrics {
        let _ = writeln!(text, "{name},{value:e}");
    }
    text
}

/// Writes all result files plus the manifest to `out`.
pub fn write_results(
    out: &Path,
    config: &ExperimentConfig,
    output: &ExperimentOutput,
    started_unix: f64,
) -> HarnessResult<RunManifest> {
    create_dir(out)?;
    let mut files: Vec<(String, String)> = vec![
        (TRIALS_FILE.into(), trials_to_jsonl(&output.trials)),
        (METRICS_FILE.into(), metrics_to_csv(&output.summary.metrics)),
    ];
    for (name, hist) in &output.summary.histograms {
        files.push((format!("hist_{name}.csv"), hist.to_csv()));
    }
    let mut digests = BTreeMap::new();
    for (name, body) in &files {
        write_file(&out.join(name), body.as_bytes())?;
        digests.insert(name.clone(), sha256_hex(body.as_bytes()));
    }
    let manifest = RunManifest {
        version: VERSION.to_string(),
        seed: config.seed,
        started_unix,
        finished_unix: unix_now(),
        digests,
        config: config.clone(),
    };
    write_file(&out.join(MANIFEST_FILE), manifest.to_text()?.as_bytes())?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Commands

pub fn cmd_simulate(options: &RunOptions, out: &Path, stdout: &mut dyn Write) -> HarnessResult<RunManifest> {
    let config = options.resolve()?;
    let started = unix_now();
    let output = run_experiment(&config, options.threads)?;
    let manifest = write_results(out, &config, &output, started)?;
    let metric = |name: &str| output.summary.metrics.get(name).copied().unwrap_or(f64::NAN);
    let _ = writeln!(
        stdout,
        "{} trials, {} tests, mean count {:.3}, accuracy {:.6} -> {}",
        output.trials.len(),
        metric("tests"),
        metric("mean_count"),
        metric("accuracy"),
        out.display()
    );
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
}

impl std::str::FromStr for Figure {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig3b" => Ok(Figure::Fig3b),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            _ => Err(config_err(format!("unknown figure {s:?}; expected fig3b, fig4, fig5 or fig6"))),
        }
    }
}

fn figure_run(
    scenario: Scenario,
    strategy: Strategy,
    seed: Option<u64>,
    threads: Option<usize>,
) -> HarnessResult<ExperimentOutput> {
    let mut config = presets::experiment(scenario, strategy);
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(run_experiment(&config, threads)?)
}

fn hist(output: &ExperimentOutput, name: &str) -> Histogram {
    output.summary.histograms.get(name).cloned().unwrap_or_else(Histogram::empty)
}

fn metric(output: &ExperimentOutput, name: &str) -> f64 {
    output.summary.metrics.get(name).copied().unwrap_or(f64::NAN)
}

/// Runs the preset experiments behind one figure and writes its CSV files.
pub fn cmd_figure(
    figure: Figure,
    out: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    stdout: &mut dyn Write,
) -> HarnessResult<Vec<PathBuf>> {
    create_dir(out)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> HarnessResult<()> {
        let path = out.join(name);
        write_file(&path, body.as_bytes())?;
        written.push(path);
        Ok(())
    };
    match figure {
        Figure::Fig3b => {
            let mut config = presets::baseline_counts(10_000);
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let output = run_experiment(&config, threads)?;
            let counts = hist(&output, "test_counts");
            emit("fig3b_counts.csv", counts.to_csv())?;
            let _ = writeln!(
                stdout,
                "fig3b: {} intervals, mean {:.3}, variance {:.3}",
                counts.total,
                counts.mean(),
                counts.variance()
            );
        }
        Figure::Fig4 => {
            for (label, scenario) in [("normal", Scenario::Normal), ("manipulated", Scenario::Manipulated)] {
                let output = figure_run(scenario, Strategy::Salt, seed, threads)?;
                let counts = hist(&output, "test_counts");
                emit(&format!("fig4_{label}.csv"), counts.to_csv())?;
                let _ = writeln!(
                    stdout,
                    "fig4 {label}: {} tests, mean {:.2}, range [{}, {}]",
                    counts.total,
                    counts.mean(),
                    counts.min_value().unwrap_or(f64::NAN),
                    counts.max_value().unwrap_or(f64::NAN)
                );
            }
        }
        Figure::Fig5 => {
            let normal = figure_run(Scenario::Normal, Strategy::FlagPulse, seed, threads)?;
            let manipulated = figure_run(Scenario::Manipulated, Strategy::FlagPulse, seed, threads)?;
            let (hn, hm) = (hist(&normal, "response_delay"), hist(&manipulated, "response_delay"));
            emit("fig5_normal.csv", hn.to_csv())?;
            emit("fig5_manipulated.csv", hm.to_csv())?;
            emit(
                "fig5_probability.csv",
                response_probability_csv(&hn, metric(&normal, "tests"), &hm, metric(&manipulated, "tests")),
            )?;
            let _ = writeln!(
                stdout,
                "fig5: response within window normal {:.4} ({} pulses), manipulated {:.4} ({} pulses)",
                metric(&normal, "flag_fraction"),
                metric(&normal, "tests"),
                metric(&manipulated, "flag_fraction"),
                metric(&manipulated, "tests")
            );
        }
        Figure::Fig6 => {
            let normal = figure_run(Scenario::Normal, Strategy::SelfBlind, seed, threads)?;
            let manipulated = figure_run(Scenario::Manipulated, Strategy::SelfBlind, seed, threads)?;
            emit("fig6_in_blind_normal.csv", hist(&normal, "test_counts").to_csv())?;
            emit("fig6_in_blind_manipulated.csv", hist(&manipulated, "test_counts").to_csv())?;
            emit(
                "fig6_onset.csv",
                response_probability_csv(
                    &hist(&normal, "response_delay"),
                    metric(&normal, "tests"),
                    &hist(&manipulated, "response_delay"),
                    metric(&manipulated, "tests"),
                ),
            )?;
            let mut table = String::from("scenario,runs,onset_probability,in_blind_fraction,mean_in_blind\n");
            for (label, output) in [("normal", &normal), ("manipulated", &manipulated)] {
                let _ = writeln!(
                    table,
                    "{label},{},{:e},{:e},{:e}",
                    metric(output, "tests"),
                    metric(output, "flag_fraction"),
                    metric(output, "in_blind_fraction"),
                    metric(output, "mean_count")
                );
                let _ = writeln!(
                    stdout,
                    "fig6 {label}: {} runs, onset {:.4}, in-blind clicks in {:.4} of runs, mean {:.3}",
                    metric(output, "tests"),
                    metric(output, "flag_fraction"),
                    metric(output, "in_blind_fraction"),
                    metric(output, "mean_count")
                );
            }
            emit("fig6_summary.csv", table)?;
        }
    }
    Ok(written)
}

/// Per-bin and cumulative first-response probabilities of two runs.
fn response_probability_csv(normal: &Histogram, normal_tests: f64, manip: &Histogram, manip_tests: f64) -> String {
    let mut text = String::from("t_low,t_high,p_normal,p_manipulated,cumulative_normal,cumulative_manipulated\n");
    let (mut cn, mut cm) = (0u64, 0u64);
    let manip_counts: Vec<u64> = manip.bins().map(|(_, _, c)| c).collect();
    for (i, (low, high, count)) in normal.bins().enumerate() {
        let m = manip_counts.get(i).copied().unwrap_or(0);
        cn += count;
        cm += m;
        let _ = writeln!(
            text,
            "{low:e},{high:e},{:e},{:e},{:e},{:e}",
            count as f64 / normal_tests,
            m as f64 / manip_tests,
            cn as f64 / normal_tests,
            cm as f64 / manip_tests
        );
    }
    text
}

/// Verdict accuracy and error-rate estimates for a stored run.
pub fn analyze_report(dir: &Path) -> HarnessResult<String> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = RunManifest::load(&manifest_path)?;
    manifest.verify(dir)?;
    let trials_path = dir.join(TRIALS_FILE);
    let text = fs::read_to_string(&trials_path).map_err(io_err(&trials_path))?;
    let trials = trials_from_jsonl(&text).map_err(|reason| HarnessError::Manifest { path: trials_path, reason })?;

    let config = &manifest.config;
    let verdicts: Vec<Decision> = trials.iter().flat_map(|t| t.tests.iter().map(|o| o.verdict.decision)).collect();
    let n = verdicts.len() as u64;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "scenario {:?}, protocol {:?}, seed {}, trials {}, tests {}",
        config.scenario,
        config.plan.strategy,
        config.seed,
        trials.len(),
        n
    );
    let _ = writeln!(report, "{:<24}{:>10}{:>12}", "decision", "count", "fraction");
    for decision in [
        Decision::Normal,
        Decision::NegativeManipulation,
        Decision::PositiveManipulation,
        Decision::Both,
        Decision::Inconclusive,
    ] {
        let count = verdicts.iter().filter(|&&d| d == decision).count() as u64;
        let name = serde_json::to_value(decision).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(report, "{name:<24}{count:>10}{:>12.6}", fraction(count, n));
    }
    let expects = config.expects_manipulation();
    let decided: Vec<&Decision> = verdicts.iter().filter(|&&d| d != Decision::Inconclusive).collect();
    let correct = decided.iter().filter(|d| d.is_manipulation() == expects).count() as u64;
    let _ = writeln!(report, "truth: {}", if expects { "manipulated" } else { "normal" });
    let _ = writeln!(report, "accuracy {correct}/{} = {:.6}", decided.len(), fraction(correct, decided.len() as u64));
    let flagged = verdicts.iter().filter(|d| d.is_manipulation()).count() as u64;
    let (false_alarms, misses) = if expects { (None, Some(n - flagged)) } else { (Some(flagged), None) };
    for (label, errors) in [("false_alarm", false_alarms), ("miss", misses)] {
        match errors {
            Some(k) if n > 0 => {
                let (lo, hi) = clopper_pearson_interval(k, n, CONFIDENCE);
                let _ = writeln!(
                    report,
                    "{label} {k}/{n} = {:.6e}  {:.0}% CI [{lo:.6e}, {hi:.6e}]",
                    fraction(k, n),
                    CONFIDENCE * 100.0
                );
            }
            _ => {
                let _ = writeln!(report, "{label} n/a");
            }
        }
    }
    Ok(report)
}

fn fraction(k: u64, n: u64) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        k as f64 / n as f64
    }
}

pub fn cmd_analyze(dir: &Path, stdout: &mut dyn Write) -> HarnessResult<()> {
    let report = analyze_report(dir)?;
    let _ = stdout.write_all(report.as_bytes());
    Ok(())
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_values(text: &str) -> HarnessResult<Vec<f64>> {
    let bad = |s: &str| config_err(format!("values: cannot parse {s:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(s));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad(text));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect()
        }
        [_] => text.split(',').map(num).collect::<HarnessResult<Vec<_>>>()?,
        _ => return Err(bad(text)),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad(text));
    }
    Ok(values)
}

pub fn cmd_sweep(
    options: &RunOptions,
    path: &str,
    values: &[f64],
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> HarnessResult<()> {
    let config = options.resolve()?;
    let rows = sweep(&config, path, values, options.threads)?;
    let names: Vec<String> = rows
        .iter()
        .flat_map(|r| r.metrics.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut text = format!("value,{}\n", names.join(","));
    for row in &rows {
        let cells: Vec<String> =
            names.iter().map(|n| row.metrics.get(n).map(|v| format!("{v:e}")).unwrap_or_default()).collect();
        let _ = writeln!(text, "{:e},{}", row.value, cells.join(","));
    }
    if let Some(out) = out {
        create_dir(out)?;
        write_file(&out.join("sweep.csv"), text.as_bytes())?;
    }
    let _ = stdout.write_all(text.as_bytes());
    Ok(())
}
