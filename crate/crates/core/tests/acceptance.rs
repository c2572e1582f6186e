//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Runs without the libtest harness so every line is printed regardless of
//! outcome.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ggm_mw::cli::{cmd_experiment, loglog_slope, ExperimentConfig};
use ggm_mw::model::{derive_params, generate_model, PrecisionModel, StrengthRange};
use ggm_mw::oracle::RiskOracle;
use ggm_mw::recovery::{candidate_risk_curve, learn_graph, threshold_graph, LearnConfig};
use ggm_mw::rng::{derive_seed, seeded};
use ggm_mw::sampler::{draw_samples, normalize_for_node, Normalization};
use ggm_mw::sparsitron::{default_beta, hedge_phase, HedgeState, SparsitronConfig};
use ndarray::{array, Array2};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- 1

/// Regret of Hedge against the best single expert in hindsight.
fn hedge_regret(n: usize, steps: usize, adversarial: bool, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut state = HedgeState::new(n, default_beta(steps, n), steps.max(1));
    let mut cumulative = vec![0.0; n];
    let mut learner = 0.0;
    let mut loss = vec![0.0; n];
    for _ in 0..steps {
        let p = state.distribution();
        if adversarial {
            let top = p
                .iter()
                .enumerate()
                .fold(
                    (0, f64::MIN),
                    |best, (i, &v)| if v > best.1 { (i, v) } else { best },
                )
                .0;
            loss.iter_mut().for_each(|l| *l = 0.0);
            loss[top] = 1.0;
        } else {
            loss.iter_mut().for_each(|l| *l = rng.random::<f64>());
        }
        learner += p.iter().zip(&loss).map(|(a, b)| a * b).sum::<f64>();
        cumulative.iter_mut().zip(&loss).for_each(|(c, l)| *c += l);
        state.step(&loss);
    }
    learner - cumulative.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn criterion_1() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    let mut ok = true;
    for n in [10usize, 100] {
        for steps in [100usize, 10_000] {
            for adversarial in [false, true] {
                let regret = hedge_regret(n, steps, adversarial, (n * steps) as u64);
                let ln_n = (n as f64).ln();
                let bound = (steps as f64 * ln_n).sqrt() + ln_n;
                ok &= regret <= bound;
                worst_ratio = worst_ratio.max(regret / bound);
            }
        }
    }
    outcome(
        ok,
        format!("worst regret/bound = {worst_ratio:.3} over 8 runs"),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let model = PrecisionModel::from_theta(array![[2.0, -1.0], [-1.0, 2.0]]).unwrap();
    let block = draw_samples(&model, 100_000, 2).unwrap();
    let data = block.data();
    let m = data.nrows() as f64;
    let resid: Vec<f64> = data.rows().into_iter().map(|r| r[0] - 0.5 * r[1]).collect();
    let x2 = data.column(1);
    let mr = resid.iter().sum::<f64>() / m;
    let mx = x2.sum() / m;
    let var_r = resid.iter().map(|r| (r - mr).powi(2)).sum::<f64>() / m;
    let var_x = x2.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / m;
    let cov = resid
        .iter()
        .zip(x2.iter())
        .map(|(r, x)| (r - mr) * (x - mx))
        .sum::<f64>()
        / m;
    let corr = cov / (var_r * var_x).sqrt();
    let ok = (var_r - 0.5).abs() <= 0.02 && corr.abs() < 0.02;
    outcome(
        ok,
        format!("residual variance {var_r:.4}, corr(residual, X_2) {corr:.4}"),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let (p, steps, delta, reps) = (10usize, 100usize, 0.1, 1000u64);
    let model = generate_model(p, 3, StrengthRange::new(0.3, 0.6).unwrap(), 3).unwrap();
    let params = derive_params(&model);
    let bound = Normalization::entry_bound(&params);
    let norm = Normalization::new(p, &params, steps, delta).unwrap();
    let mut exceed = 0;
    for rep in 0..reps {
        let block = draw_samples(&model, steps, derive_seed(3, rep, 0)).unwrap();
        let max = block.data().iter().fold(0.0f64, |a, x| a.max(x.abs())) * norm.scale;
        if max > bound {
            exceed += 1;
        }
    }
    let frac = exceed as f64 / reps as f64;
    outcome(
        frac <= delta + 0.03,
        format!("{exceed}/{reps} repetitions exceeded 1/sqrt(λ+1)"),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut rng = seeded(4);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 0..10u64 {
        let p = rng.random_range(2..=10);
        let degree = rng.random_range(1..p);
        let model =
            generate_model(p, degree, StrengthRange::new(0.2, 0.6).unwrap(), 40 + k).unwrap();
        let params = derive_params(&model);
        let node = rng.random_range(0..p);
        let v: Vec<f64> = (0..p - 1).map(|_| rng.random_range(-0.5..0.5)).collect();
        let m = 100_000;
        let block = draw_samples(&model, m, derive_seed(4, k, 2)).unwrap();
        let view = normalize_for_node(&block, node, &params, m, 0.1).unwrap();
        let oracle = RiskOracle::new(&model, node, view.norm.scale);
        let (_, sd) = oracle.squared_residual_stats(&v, &view).unwrap();
        let gap = oracle.risk_identity_check(&v, &view).unwrap();
        let slack = 4.0 * sd / (m as f64).sqrt();
        ok &= gap <= slack;
        worst = worst.max(gap / slack);
    }
    outcome(
        ok,
        format!("worst gap / (4 sd/√M) = {worst:.3} over 10 cases"),
    )
}

// ---------------------------------------------------------------- 5, 6

const C6_P: usize = 15;
const C6_T: usize = 20_000;
const C6_M: usize = 2_000;
const C6_TRIALS: u64 = 20;

struct RecoveryRun {
    exact: usize,
    /// (‖v - w‖∞, sqrt(ε θ_max)) for every learned neighborhood.
    linf: Vec<(f64, f64)>,
    worst_linf: f64,
    elapsed: Duration,
}

fn recovery_run() -> RecoveryRun {
    let start = Instant::now();
    let config = LearnConfig::new(C6_T, C6_M, 0.1);
    let mut exact = 0;
    let mut linf = Vec::new();
    let mut worst_linf: f64 = 0.0;
    for trial in 0..C6_TRIALS {
        let model = generate_model(
            C6_P,
            3,
            StrengthRange::new(0.4, 0.6).unwrap(),
            derive_seed(6, trial, 0),
        )
        .unwrap();
        let params = derive_params(&model);
        let block =
            draw_samples(&model, config.samples_needed(), derive_seed(6, trial, 1)).unwrap();
        let learning = learn_graph(&block, &params, &config).unwrap();
        let truth: Vec<(usize, usize)> = model.edges().to_vec();
        if learning.graph.edges() == truth {
            exact += 1;
        }
        for est in &learning.estimates {
            let oracle = RiskOracle::raw(&model, est.node);
            let err = oracle.linf_error(&est.weights).unwrap();
            let bound = oracle.linf_bound(&est.weights, params.theta_max).unwrap();
            worst_linf = worst_linf.max(err);
            linf.push((err, bound));
        }
    }
    RecoveryRun {
        exact,
        linf,
        worst_linf,
        elapsed: start.elapsed(),
    }
}

fn criterion_5(run: &RecoveryRun) -> Outcome {
    let mut rng = seeded(5);
    let mut failures = 0;
    for k in 0..100u64 {
        let p = rng.random_range(2..=12);
        let degree = rng.random_range(0..p);
        let model =
            generate_model(p, degree, StrengthRange::new(0.1, 0.6).unwrap(), 500 + k).unwrap();
        let params = derive_params(&model);
        let node = rng.random_range(0..p);
        let oracle = RiskOracle::raw(&model, node);
        let v: Vec<f64> = (0..p - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        if oracle.linf_error(&v).unwrap() > oracle.linf_bound(&v, params.theta_max).unwrap() + 1e-12
        {
            failures += 1;
        }
    }
    let learned_failures = run.linf.iter().filter(|(e, b)| *e > b + 1e-12).count();
    outcome(
        failures == 0 && learned_failures == 0,
        format!(
            "{failures}/100 random and {learned_failures}/{} learned estimates violate the bound",
            run.linf.len()
        ),
    )
}

fn criterion_6(run: &RecoveryRun) -> Outcome {
    let rate = run.exact as f64 / C6_TRIALS as f64;
    outcome(
        rate >= 0.9 && run.elapsed < Duration::from_secs(600),
        format!(
            "exact recovery {}/{C6_TRIALS} = {rate:.2} at p={C6_P}, T={C6_T}, M={C6_M}; worst ‖v-w‖∞ {:.3}; {:.1}s",
            run.exact,
            run.worst_linf,
            run.elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let p = 10;
    let model = generate_model(p, 3, StrengthRange::new(0.4, 0.6).unwrap(), 7).unwrap();
    let params = derive_params(&model);
    let horizons = [500usize, 2000, 8000, 32_000];
    let block = draw_samples(&model, *horizons.last().unwrap(), derive_seed(7, 0, 1)).unwrap();
    let mut points = Vec::new();
    let mut cells = Vec::new();
    for &t in &horizons {
        // Mean over nodes of the best candidate's oracle risk.
        let mut total = 0.0;
        for node in 0..p {
            let curve =
                candidate_risk_curve(&model, &params, &block, node, t, 0.1 / p as f64, 1).unwrap();
            total += curve.iter().cloned().fold(f64::INFINITY, f64::min);
        }
        let risk = total / p as f64;
        points.push((t as f64, risk));
        cells.push(format!("T={t}:{risk:.4}"));
    }
    let slope = loglog_slope(&points).unwrap_or(f64::NAN);
    outcome(
        (-1.1..=-0.3).contains(&slope),
        format!("log-log slope {slope:.3} ({})", cells.join(" ")),
    )
}

// ---------------------------------------------------------------- 8

fn time_learning(p: usize, config: &LearnConfig) -> Duration {
    let degree = 3.min(p - 1);
    let model = generate_model(
        p,
        degree,
        StrengthRange::new(0.4, 0.6).unwrap(),
        derive_seed(8, p as u64, 0),
    )
    .unwrap();
    let params = derive_params(&model);
    let block = draw_samples(&model, config.samples_needed(), derive_seed(8, p as u64, 1)).unwrap();
    (0..3)
        .map(|_| {
            let start = Instant::now();
            learn_graph(&block, &params, config).unwrap();
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn time_hedge(n: usize, steps: usize) -> Duration {
    let mut rng = seeded(88);
    let x = Array2::from_shape_fn((steps, n), |_| rng.random_range(-0.1..0.1));
    let y = ndarray::Array1::from_shape_fn(steps, |_| rng.random_range(-0.1..0.1));
    let config = SparsitronConfig::new(1.0);
    (0..5)
        .map(|_| {
            let start = Instant::now();
            let out = hedge_phase(x.view(), y.view(), &config);
            let elapsed = start.elapsed();
            std::hint::black_box(out);
            elapsed
        })
        .min()
        .unwrap()
}

fn criterion_8() -> Outcome {
    let config = LearnConfig::new(4_500, 500, 0.1);
    let t32 = time_learning(32, &config);
    let t64 = time_learning(64, &config);
    let ratio = t64.as_secs_f64() / t32.as_secs_f64();
    let h1 = time_hedge(63, 8_000);
    let h2 = time_hedge(63, 16_000);
    let hedge_ratio = h2.as_secs_f64() / h1.as_secs_f64();
    let ok = (3.0..=6.0).contains(&ratio) && (1.6..=2.4).contains(&hedge_ratio);
    outcome(
        ok,
        format!(
            "p=64/p=32 total-time ratio {ratio:.2} ({:.2}s/{:.2}s); hedge T doubling ratio {hedge_ratio:.2}",
            t64.as_secs_f64(),
            t32.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        p: 20,
        degree: 4,
        strength_range: StrengthRange::new(0.2, 0.6).unwrap(),
        trials: 100,
        seed: 9,
        perfect_input: true,
        ..ExperimentConfig::default()
    };
    let report = cmd_experiment(&config).unwrap();
    // Also check the library path directly on the same instances.
    let direct = (0..100u64)
        .filter(|&k| {
            let model = generate_model(20, 4, config.strength_range, derive_seed(9, k, 0)).unwrap();
            let weights: Vec<Vec<f64>> = (0..20).map(|i| model.weight_vector(i)).collect();
            let kappa = derive_params(&model).kappa().unwrap();
            threshold_graph(&weights, kappa).unwrap().edges() == model.edges()
        })
        .count();
    let elapsed = start.elapsed();
    outcome(
        report.exact_matches() == 100 && direct == 100 && elapsed < Duration::from_secs(5),
        format!(
            "{}/100 via experiment, {direct}/100 direct, {:.2}s",
            report.exact_matches(),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {id} [{name}]: {} — {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };
    report(1, "hedge regret", &criterion_1);
    report(2, "conditional regression", &criterion_2);
    report(3, "normalization bound", &criterion_3);
    report(4, "risk identity", &criterion_4);
    let run = recovery_run();
    report(5, "linf bound", &|| criterion_5(&run));
    report(6, "end-to-end recovery", &|| criterion_6(&run));
    report(7, "risk decay", &criterion_7);
    report(8, "runtime scaling", &criterion_8);
    report(9, "perfect input", &criterion_9);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
