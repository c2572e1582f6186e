//! Command-line front end: configuration, experiment orchestration and
//! report/CSV emission.
//!
//! Every command is a plain function over a config value so the binary and
//! the tests drive the same code. `run` maps parsed arguments onto them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_params, generate_model, ModelParams, PrecisionModel, StrengthRange};
use crate::recovery::{
    candidate_risk_curve, evaluate, learn_graph, learn_graph_fresh, prefix_minima, threshold_graph,
    LearnConfig, RecoveryMetrics, RecoveryReport,
};
use crate::rng::derive_seed;
use crate::sampler::{draw_samples, SampleBlock};
use crate::sparsitron::RiskScoring;

/// Everything an experiment or `generate` run needs. Missing fields in a
/// JSON config take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub p: usize,
    pub degree: usize,
    pub strength_range: StrengthRange,
    #[serde(rename = "T")]
    pub train_len: usize,
    #[serde(rename = "M")]
    pub risk_len: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub candidate_stride: usize,
    pub fresh_samples_per_node: bool,
    pub output_path: PathBuf,
    /// Threshold the true weight vectors instead of learned ones.
    pub perfect_input: bool,
    pub scoring: RiskScoring,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 15,
            degree: 3,
            strength_range: StrengthRange { min: 0.4, max: 0.6 },
            train_len: 20_000,
            risk_len: 2_000,
            delta: 0.1,
            trials: 20,
            seed: 0,
            candidate_stride: 1,
            fresh_samples_per_node: false,
            output_path: PathBuf::from("out"),
            perfect_input: false,
            scoring: RiskScoring::Direct,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.p < 2 || self.degree >= self.p {
            return Err(Error::InfeasibleDegree {
                p: self.p,
                degree: self.degree,
            });
        }
        StrengthRange::new(self.strength_range.min, self.strength_range.max)?;
        self.learn_config().validate()
    }

    pub fn learn_config(&self) -> LearnConfig {
        LearnConfig {
            stride: self.candidate_stride,
            fresh_samples_per_node: self.fresh_samples_per_node,
            scoring: self.scoring,
            ..LearnConfig::new(self.train_len, self.risk_len, self.delta)
        }
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub params: ModelParams,
    pub edges: usize,
    pub metrics: RecoveryMetrics,
}

/// Best oracle risk among the first `t` candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskDecayRow {
    pub t: usize,
    pub min_oracle_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub trial: usize,
    pub p: usize,
    pub hedge_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub success_rate: f64,
    /// Node 0 of trial 0; empty in perfect-input mode.
    pub risk_decay: Vec<RiskDecayRow>,
    pub timing: Vec<TimingRow>,
}

impl ExperimentReport {
    pub fn exact_matches(&self) -> usize {
        self.trials.iter().filter(|t| t.metrics.exact_match).count()
    }
}

/// Written by `generate`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedFiles {
    pub model: PathBuf,
    pub samples: PathBuf,
    pub params: ModelParams,
}

/// Model seed for trial `k`; node `0` of the derived space is reserved for it.
fn model_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, trial as u64, 0)
}

/// Sample seed for trial `k`.
fn sample_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, trial as u64, 1)
}

fn format_params(params: &ModelParams) -> String {
    let kappa = params
        .kappa
        .map_or_else(|| "none".to_string(), |k| format!("{k}"));
    format!(
        "kappa={kappa} lambda={} theta_max={} nu_max={} d={}",
        params.lambda, params.theta_max, params.nu_max, params.d
    )
}

/// Writes `model.json` and `samples.csv` (`T + M` rows) into
/// `config.output_path`, using the trial-0 seeds.
pub fn cmd_generate(config: &ExperimentConfig) -> Result<GeneratedFiles> {
    config.validate()?;
    let model = generate_model(
        config.p,
        config.degree,
        config.strength_range,
        model_seed(config.seed, 0),
    )?;
    let samples = draw_samples(
        &model,
        config.learn_config().samples_needed(),
        sample_seed(config.seed, 0),
    )?;
    fs::create_dir_all(&config.output_path)?;
    let model_path = config.output_path.join("model.json");
    let samples_path = config.output_path.join("samples.csv");
    model.save_json(&model_path)?;
    samples.write_csv(&samples_path)?;
    Ok(GeneratedFiles {
        model: model_path,
        samples: samples_path,
        params: model.params(),
    })
}

/// Parameters for `learn` when given explicitly rather than read from a model.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub theta_max: Option<f64>,
    pub nu_max: Option<f64>,
}

impl ParamOverrides {
    /// Applies the overrides on top of `base`, or builds parameters from the
    /// overrides alone. κ may stay unset only if the caller never thresholds.
    pub fn resolve(&self, base: Option<ModelParams>) -> Result<ModelParams> {
        let missing =
            |name: &str| Error::InvalidConfig(format!("--{name} is required without --model"));
        let params = match base {
            Some(mut b) => {
                b.kappa = self.kappa.or(b.kappa);
                b.lambda = self.lambda.unwrap_or(b.lambda);
                b.theta_max = self.theta_max.unwrap_or(b.theta_max);
                b.nu_max = self.nu_max.unwrap_or(b.nu_max);
                b
            }
            None => ModelParams {
                kappa: Some(self.kappa.ok_or_else(|| missing("kappa"))?),
                lambda: self.lambda.ok_or_else(|| missing("lambda"))?,
                theta_max: self.theta_max.ok_or_else(|| missing("theta-max"))?,
                nu_max: self.nu_max.ok_or_else(|| missing("nu-max"))?,
                d: 0,
            },
        };
        if !(params.lambda >= 0.0 && params.nu_max > 0.0 && params.theta_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need lambda >= 0, nu_max > 0, theta_max > 0; got {}",
                format_params(&params)
            )));
        }
        if let Some(k) = params.kappa {
            if k <= 0.0 || k.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "kappa must be positive, got {k}"
                )));
            }
        }
        Ok(params)
    }
}

/// Inputs to `learn`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnRequest {
    pub model: Option<PathBuf>,
    pub samples: PathBuf,
    pub overrides: ParamOverrides,
    pub config: LearnConfig,
    pub out: PathBuf,
}

/// Learns a graph from a sample file and writes the report. Metrics are
/// included when a model file is supplied.
pub fn cmd_learn(request: &LearnRequest) -> Result<RecoveryReport> {
    request.config.validate()?;
    let model = request
        .model
        .as_deref()
        .map(PrecisionModel::load_json)
        .transpose()?;
    let params = request
        .overrides
        .resolve(model.as_ref().map(derive_params))?;
    let samples = SampleBlock::read_csv(&request.samples)?;
    if let Some(m) = &model {
        if m.p() != samples.p() {
            return Err(Error::DimensionMismatch {
                expected: m.p(),
                actual: samples.p(),
            });
        }
    }
    let learning = learn_graph(&samples, &params, &request.config)?;
    let metrics = model
        .as_ref()
        .map(|m| evaluate(&learning.graph, &learning.weights(), m))
        .transpose()?;
    let report = RecoveryReport::new(&learning, metrics);
    if let Some(parent) = request.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    report.save_json(&request.out)?;
    Ok(report)
}

/// Checkpoints `1, 2, 4, …` and finally `T`.
fn decay_checkpoints(train_len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |t| t.checked_mul(2))
        .take_while(|&t| t < train_len)
        .collect();
    out.push(train_len);
    out
}

fn run_trial(
    config: &ExperimentConfig,
    trial: usize,
) -> Result<(TrialRecord, Option<TimingRow>, Vec<RiskDecayRow>)> {
    let model = generate_model(
        config.p,
        config.degree,
        config.strength_range,
        model_seed(config.seed, trial),
    )?;
    let params = derive_params(&model);
    let kappa = params.kappa()?;
    let learn = config.learn_config();

    if config.perfect_input {
        let weights: Vec<Vec<f64>> = (0..model.p()).map(|i| model.weight_vector(i)).collect();
        let graph = threshold_graph(&weights, kappa)?;
        let metrics = evaluate(&graph, &weights, &model)?;
        let record = TrialRecord {
            trial,
            params,
            edges: model.edges().len(),
            metrics,
        };
        return Ok((record, None, Vec::new()));
    }

    let seed = sample_seed(config.seed, trial);
    let start = Instant::now();
    let (learning, pool) = if config.fresh_samples_per_node {
        (learn_graph_fresh(&model, &params, &learn, seed)?, None)
    } else {
        let block = draw_samples(&model, learn.samples_needed(), seed)?;
        (learn_graph(&block, &params, &learn)?, Some(block))
    };
    let total = start.elapsed();
    let metrics = evaluate(&learning.graph, &learning.weights(), &model)?;

    let mut decay = Vec::new();
    if trial == 0 {
        let block = match pool {
            Some(b) => b,
            None => draw_samples(&model, learn.samples_needed(), derive_seed(seed, 0, 0))?,
        };
        let curve = candidate_risk_curve(
            &model,
            &params,
            &block,
            0,
            config.train_len,
            config.delta / config.p as f64,
            config.candidate_stride,
        )?;
        let best = prefix_minima(&curve);
        for t in decay_checkpoints(config.train_len) {
            // Candidates 0..k cover Hedge steps < t.
            let k = t.div_ceil(config.candidate_stride).min(best.len());
            decay.push(RiskDecayRow {
                t,
                min_oracle_risk: best[k - 1],
            });
        }
    }

    let record = TrialRecord {
        trial,
        params,
        edges: model.edges().len(),
        metrics,
    };
    let timing = TimingRow {
        trial,
        p: config.p,
        hedge_seconds: learning.hedge_time().as_secs_f64(),
        total_seconds: total.as_secs_f64(),
    };
    Ok((record, Some(timing), decay))
}

/// Runs `trials` independent generate/sample/learn/evaluate cycles. Files
/// are written only by [`write_experiment`].
pub fn cmd_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut trials = Vec::with_capacity(config.trials);
    let mut timing = Vec::new();
    let mut risk_decay = Vec::new();
    for k in 0..config.trials {
        let (record, time, decay) = run_trial(config, k).map_err(|e| Error::Trial {
            trial: k,
            source: Box::new(e),
        })?;
        trials.push(record);
        timing.extend(time);
        if k == 0 {
            risk_decay = decay;
        }
    }
    let exact = trials.iter().filter(|t| t.metrics.exact_match).count();
    Ok(ExperimentReport {
        config: config.clone(),
        trials,
        success_rate: exact as f64 / config.trials as f64,
        risk_decay,
        timing,
    })
}

/// Writes `report.json`, `metrics.csv`, `trials.csv`, `risk_decay.csv` and
/// `timing.csv` into `config.output_path`.
pub fn write_experiment(report: &ExperimentReport) -> Result<()> {
    let dir = &report.config.output_path;
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report)? + "\n",
    )?;

    let mut w = csv::Writer::from_path(dir.join("metrics.csv"))?;
    w.write_record(["key", "value"])?;
    let summary = [
        ("trials", report.trials.len().to_string()),
        ("exact_matches", report.exact_matches().to_string()),
        ("success_rate", report.success_rate.to_string()),
        ("p", report.config.p.to_string()),
        ("T", report.config.train_len.to_string()),
        ("M", report.config.risk_len.to_string()),
        ("delta", report.config.delta.to_string()),
        ("seed", report.config.seed.to_string()),
    ];
    for (k, v) in summary {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
    w.write_record([
        "trial",
        "edges",
        "exact_match",
        "missed_edges",
        "extra_edges",
        "max_linf_error",
    ])?;
    for t in &report.trials {
        let worst = t.metrics.linf_errors.iter().cloned().fold(0.0, f64::max);
        w.write_record([
            t.trial.to_string(),
            t.edges.to_string(),
            t.metrics.exact_match.to_string(),
            t.metrics.missed_edges.to_string(),
            t.metrics.extra_edges.to_string(),
            worst.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("risk_decay.csv"))?;
    w.write_record(["t", "min_oracle_risk"])?;
    for r in &report.risk_decay {
        w.write_record([r.t.to_string(), r.min_oracle_risk.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("timing.csv"))?;
    w.write_record(["trial", "p", "hedge_seconds", "total_seconds"])?;
    for r in &report.timing {
        w.write_record([
            r.trial.to_string(),
            r.p.to_string(),
            r.hedge_seconds.to_string(),
            r.total_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub p: usize,
    pub per_node_seconds: f64,
    pub hedge_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln total` against `ln p`; `None` with fewer
    /// than two distinct `p`.
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times full graph learning for each `p` at fixed `T + M`; `config.p` is
/// ignored. Writes `bench.csv` into `config.output_path` when `write` is set.
pub fn cmd_bench(p_list: &[usize], config: &ExperimentConfig, write: bool) -> Result<BenchReport> {
    let learn = config.learn_config();
    learn.validate()?;
    let mut rows = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let degree = config.degree.min(p.saturating_sub(1));
        let model = generate_model(
            p,
            degree,
            config.strength_range,
            derive_seed(config.seed, p as u64, 0),
        )?;
        let mut params = derive_params(&model);
        // Timing does not depend on κ; keep edgeless instances runnable.
        params.kappa.get_or_insert(config.strength_range.min);
        let block = draw_samples(
            &model,
            learn.samples_needed(),
            derive_seed(config.seed, p as u64, 1),
        )?;
        let start = Instant::now();
        let learning = learn_graph(&block, &params, &learn)?;
        let total = start.elapsed().as_secs_f64();
        rows.push(BenchRow {
            p,
            per_node_seconds: total / p as f64,
            hedge_seconds: learning.hedge_time().as_secs_f64(),
            total_seconds: total,
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.p as f64, r.total_seconds)).collect();
    let report = BenchReport {
        slope: loglog_slope(&points),
        rows,
    };
    if write {
        fs::create_dir_all(&config.output_path)?;
        let mut w = csv::Writer::from_path(config.output_path.join("bench.csv"))?;
        w.write_record(["p", "per_node_seconds", "hedge_seconds", "total_seconds"])?;
        for r in &report.rows {
            w.write_record([
                r.p.to_string(),
                r.per_node_seconds.to_string(),
                r.hedge_seconds.to_string(),
                r.total_seconds.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(
    name = "ggm-mw",
    version,
    about = "Learn sparse Gaussian graphical models with multiplicative weights"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random model and a sample file.
    Generate(ExperimentArgs),
    /// Learn a graph from a sample file.
    Learn(LearnArgs),
    /// Run repeated generate/learn/evaluate trials.
    Experiment(ExperimentArgs),
    /// Time graph learning across several p.
    Bench(BenchArgs),
}

/// Flags shared by `generate`, `experiment` and `bench`. Each overrides the
/// same field of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long = "kappa-min")]
    pub kappa_min: Option<f64>,
    #[arg(long = "kappa-max")]
    pub kappa_max: Option<f64>,
    #[arg(long = "T")]
    pub train_len: Option<usize>,
    #[arg(long = "M")]
    pub risk_len: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long = "fresh-per-node")]
    pub fresh_per_node: bool,
    /// Threshold the true weight vectors (experiment only).
    #[arg(long = "perfect-input")]
    pub perfect_input: bool,
    #[arg(long, value_parser = parse_scoring)]
    pub scoring: Option<RiskScoring>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_scoring(s: &str) -> std::result::Result<RiskScoring, String> {
    match s {
        "direct" => Ok(RiskScoring::Direct),
        "gram" => Ok(RiskScoring::Gram),
        other => Err(format!("unknown scoring `{other}` (direct|gram)")),
    }
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load_json(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.p {
            c.p = v;
        }
        if let Some(v) = self.degree {
            c.degree = v;
        }
        if let Some(v) = self.kappa_min {
            c.strength_range.min = v;
        }
        if let Some(v) = self.kappa_max {
            c.strength_range.max = v;
        }
        if let Some(v) = self.train_len {
            c.train_len = v;
        }
        if let Some(v) = self.risk_len {
            c.risk_len = v;
        }
        if let Some(v) = self.delta {
            c.delta = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.stride {
            c.candidate_stride = v;
        }
        if let Some(v) = self.scoring {
            c.scoring = v;
        }
        if let Some(v) = &self.out {
            c.output_path = v.clone();
        }
        c.fresh_samples_per_node |= self.fresh_per_node;
        c.perfect_input |= self.perfect_input;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    /// Model JSON; supplies parameters and enables metrics.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "theta-max")]
    pub theta_max: Option<f64>,
    #[arg(long = "nu-max")]
    pub nu_max: Option<f64>,
    #[arg(long = "T")]
    pub train_len: usize,
    #[arg(long = "M")]
    pub risk_len: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, value_parser = parse_scoring)]
    pub scoring: Option<RiskScoring>,
    /// Report JSON path.
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated node counts.
    #[arg(long = "p-list", value_delimiter = ',', default_values_t = [16usize, 32, 64])]
    pub p_list: Vec<usize>,
    #[command(flatten)]
    pub common: ExperimentArgs,
}

/// Executes one parsed command, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let config = args.resolve()?;
            let files = cmd_generate(&config)?;
            println!("model: {}", files.model.display());
            println!("samples: {}", files.samples.display());
            println!("{}", format_params(&files.params));
        }
        Command::Learn(args) => {
            let mut config = LearnConfig::new(args.train_len, args.risk_len, args.delta);
            config.stride = args.stride;
            if let Some(s) = args.scoring {
                config.scoring = s;
            }
            let request = LearnRequest {
                model: args.model,
                samples: args.samples,
                overrides: ParamOverrides {
                    kappa: args.kappa,
                    lambda: args.lambda,
                    theta_max: args.theta_max,
                    nu_max: args.nu_max,
                },
                config,
                out: args.out.clone(),
            };
            let report = cmd_learn(&request)?;
            let edges = report
                .adjacency
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    (i + 1..row.len())
                        .filter(move |&j| row[j])
                        .map(move |j| (i, j))
                })
                .count();
            println!("edges: {edges} (threshold {})", report.threshold);
            if let Some(m) = &report.metrics {
                println!(
                    "exact_match: {} missed: {} extra: {}",
                    m.exact_match, m.missed_edges, m.extra_edges
                );
            }
            println!("report: {}", args.out.display());
        }
        Command::Experiment(args) => {
            let config = args.resolve()?;
            let report = cmd_experiment(&config)?;
            write_experiment(&report)?;
            println!(
                "success_rate: {} ({}/{})",
                report.success_rate,
                report.exact_matches(),
                report.trials.len()
            );
            println!("output: {}", config.output_path.display());
        }
        Command::Bench(args) => {
            let config = args.common.resolve()?;
            if let Some(&p) = args.p_list.iter().find(|&&p| p < 2) {
                return Err(Error::InvalidConfig(format!("p = {p} must be at least 2")));
            }
            let report = cmd_bench(&args.p_list, &config, true)?;
            for r in &report.rows {
                println!(
                    "p={} total={:.4}s per_node={:.4}s",
                    r.p, r.total_seconds, r.per_node_seconds
                );
            }
            match report.slope {
                Some(s) => println!("log-log slope: {s:.3}"),
                None => println!("log-log slope: n/a"),
            }
        }
    }
    Ok(())
}
