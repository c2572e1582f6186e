//! Graph recovery: one Sparsitron run per node, then thresholding the
//! learned neighborhood weights at `2κ/3`.

use std::borrow::Cow;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, PrecisionModel};
use crate::oracle::RiskOracle;
use crate::rng::derive_seed;
use crate::sampler::{draw_samples, Normalization, NormalizedView, SampleBlock};
use crate::sparsitron::{
    fold_back, hedge_phase, run_sparsitron, LossStats, PhaseTimes, RiskScoring, SparsitronConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    /// Hedge-phase length T.
    pub train_len: usize,
    /// Held-out risk-scoring length M.
    pub risk_len: usize,
    /// Overall failure probability; each node gets `delta / p`.
    pub delta: f64,
    pub stride: usize,
    /// Draw a separate sample pool for every node instead of sharing one.
    pub fresh_samples_per_node: bool,
    #[serde(default)]
    pub scoring: RiskScoring,
}

impl LearnConfig {
    pub fn new(train_len: usize, risk_len: usize, delta: f64) -> Self {
        Self {
            train_len,
            risk_len,
            delta,
            stride: 1,
            fresh_samples_per_node: false,
            scoring: RiskScoring::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_len == 0 || self.risk_len == 0 {
            return Err(Error::InvalidConfig("T and M must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta {} not in (0, 1)",
                self.delta
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn samples_needed(&self) -> usize {
        self.train_len + self.risk_len
    }
}

/// Per-node learner knobs that do not change the algorithm's output
/// (`scoring`) or thin it explicitly (`stride`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeOptions {
    pub stride: usize,
    pub scoring: RiskScoring,
}

impl Default for NodeOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            scoring: RiskScoring::Direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodEstimate {
    pub node: usize,
    /// Signed estimate of `w^i`, ascending node order with `node` skipped.
    pub weights: Vec<f64>,
    pub empirical_risk: f64,
    pub selected_step: usize,
    pub loss_stats: LossStats,
    pub times: PhaseTimes,
}

/// Learns node `i`'s neighborhood from the first `T` and last `M` rows.
/// `delta` enters the normalization unchanged.
pub fn learn_node(
    samples: &SampleBlock,
    node: usize,
    params: &ModelParams,
    train_len: usize,
    risk_len: usize,
    delta: f64,
    options: NodeOptions,
) -> Result<NeighborhoodEstimate> {
    let m = samples.m();
    let needed = train_len + risk_len;
    if m < needed {
        return Err(Error::InsufficientSamples {
            needed,
            available: m,
        });
    }
    if node >= samples.p() {
        return Err(Error::DimensionMismatch {
            expected: samples.p(),
            actual: node,
        });
    }
    let norm = Normalization::new(samples.p(), params, train_len, delta)?;
    let view = NormalizedView::from_block(samples, node, norm);
    let train = view.rows(0, train_len);
    let risk = view.rows(m - risk_len, m);
    let config = SparsitronConfig {
        lambda: params.lambda,
        beta: None,
        stride: options.stride,
        scoring: options.scoring,
    };
    let run = run_sparsitron(
        train.x.view(),
        train.y.view(),
        risk.x.view(),
        risk.y.view(),
        &config,
    );
    Ok(NeighborhoodEstimate {
        node,
        weights: run.weights,
        empirical_risk: run.selected_risk,
        selected_step: run.selected_step,
        loss_stats: run.loss_stats,
        times: run.times,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEstimate {
    pub p: usize,
    pub adjacency: Vec<Vec<bool>>,
    /// `max(|v^i_j|, |v^j_i|)`; zero on the diagonal.
    pub evidence: Vec<Vec<f64>>,
    pub threshold: f64,
}

impl GraphEstimate {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Position of node `j` inside node `i`'s weight vector.
fn slot(i: usize, j: usize) -> usize {
    if j < i {
        j
    } else {
        j - 1
    }
}

/// Declares edge `(i, j)` when `max(|v^i_j|, |v^j_i|) ≥ 2κ/3`.
pub fn threshold_graph(weights: &[Vec<f64>], kappa: f64) -> Result<GraphEstimate> {
    let p = weights.len();
    for w in weights {
        if w.len() + 1 != p {
            return Err(Error::DimensionMismatch {
                expected: p.saturating_sub(1),
                actual: w.len(),
            });
        }
    }
    let threshold = 2.0 * kappa / 3.0;
    let mut evidence = vec![vec![0.0; p]; p];
    let mut adjacency = vec![vec![false; p]; p];
    for i in 0..p {
        for j in (i + 1)..p {
            let e = weights[i][slot(i, j)]
                .abs()
                .max(weights[j][slot(j, i)].abs());
            evidence[i][j] = e;
            evidence[j][i] = e;
            let edge = e >= threshold;
            adjacency[i][j] = edge;
            adjacency[j][i] = edge;
        }
    }
    Ok(GraphEstimate {
        p,
        adjacency,
        evidence,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    pub exact_match: bool,
    pub missed_edges: usize,
    pub extra_edges: usize,
    /// `‖v^i - w^i‖∞` per node.
    pub linf_errors: Vec<f64>,
}

pub fn evaluate(
    graph: &GraphEstimate,
    weights: &[Vec<f64>],
    truth: &PrecisionModel,
) -> Result<RecoveryMetrics> {
    let p = truth.p();
    if graph.p != p || weights.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: if graph.p != p { graph.p } else { weights.len() },
        });
    }
    let mut missed = 0;
    let mut extra = 0;
    for i in 0..p {
        for j in (i + 1)..p {
            match (truth.has_edge(i, j), graph.adjacency[i][j]) {
                (true, false) => missed += 1,
                (false, true) => extra += 1,
                _ => {}
            }
        }
    }
    let linf_errors = weights
        .iter()
        .enumerate()
        .map(|(i, v)| RiskOracle::raw(truth, i).linf_error(v))
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryMetrics {
        exact_match: missed == 0 && extra == 0,
        missed_edges: missed,
        extra_edges: extra,
        linf_errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphLearning {
    pub estimates: Vec<NeighborhoodEstimate>,
    pub graph: GraphEstimate,
}

impl GraphLearning {
    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.estimates.iter().map(|e| e.weights.clone()).collect()
    }

    pub fn total_time(&self) -> Duration {
        self.estimates
            .iter()
            .map(|e| e.times.hedge + e.times.scoring)
            .sum()
    }

    pub fn hedge_time(&self) -> Duration {
        self.estimates.iter().map(|e| e.times.hedge).sum()
    }
}

fn learn_nodes<'a, F>(
    p: usize,
    params: &ModelParams,
    config: &LearnConfig,
    mut samples_for: F,
) -> Result<GraphLearning>
where
    F: FnMut(usize) -> Result<Cow<'a, SampleBlock>>,
{
    config.validate()?;
    let kappa = params.kappa()?;
    let node_delta = config.delta / p as f64;
    let mut estimates = Vec::with_capacity(p);
    for i in 0..p {
        let block = samples_for(i)?;
        estimates.push(learn_node(
            &block,
            i,
            params,
            config.train_len,
            config.risk_len,
            node_delta,
            NodeOptions {
                stride: config.stride,
                scoring: config.scoring,
            },
        )?);
    }
    let weights: Vec<Vec<f64>> = estimates.iter().map(|e| e.weights.clone()).collect();
    let graph = threshold_graph(&weights, kappa)?;
    Ok(GraphLearning { estimates, graph })
}

/// Learns every node from one shared sample pool.
pub fn learn_graph(
    samples: &SampleBlock,
    params: &ModelParams,
    config: &LearnConfig,
) -> Result<GraphLearning> {
    let needed = config.samples_needed();
    if samples.m() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            available: samples.m(),
        });
    }
    learn_nodes(samples.p(), params, config, |_| Ok(Cow::Borrowed(samples)))
}

/// Learns every node from its own pool, seeded by `derive_seed(seed, 0, i)`.
pub fn learn_graph_fresh(
    model: &PrecisionModel,
    params: &ModelParams,
    config: &LearnConfig,
    seed: u64,
) -> Result<GraphLearning> {
    let m = config.samples_needed();
    learn_nodes(model.p(), params, config, |i| {
        draw_samples(model, m, derive_seed(seed, 0, i as u64)).map(Cow::Owned)
    })
}

/// Oracle risk `ε(λ p^t)` of every Hedge candidate for `node`, trained on
/// the first `train_len` rows of `samples`. Entry `k` is step `k · stride`.
pub fn candidate_risk_curve(
    model: &PrecisionModel,
    params: &ModelParams,
    samples: &SampleBlock,
    node: usize,
    train_len: usize,
    delta: f64,
    stride: usize,
) -> Result<Vec<f64>> {
    if samples.m() < train_len {
        return Err(Error::InsufficientSamples {
            needed: train_len,
            available: samples.m(),
        });
    }
    if node >= samples.p() || samples.p() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            actual: samples.p().max(node),
        });
    }
    let norm = Normalization::new(samples.p(), params, train_len, delta)?;
    let train = NormalizedView::from_block(samples, node, norm).rows(0, train_len);
    let config = SparsitronConfig {
        stride,
        ..SparsitronConfig::new(params.lambda)
    };
    let (state, _) = hedge_phase(train.x.view(), train.y.view(), &config);
    let oracle = RiskOracle::raw(model, node);
    state
        .candidates()
        .iter()
        .map(|c| oracle.expected_risk(&fold_back(c, params.lambda)))
        .collect()
}

/// Running minimum of `values`.
pub fn prefix_minima(values: &[f64]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    values
        .iter()
        .map(|&v| {
            best = best.min(v);
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub i: usize,
    pub risk: f64,
    /// Present when the true model is known.
    pub linf: Option<f64>,
}

/// The `learn` output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub adjacency: Vec<Vec<bool>>,
    pub evidence: Vec<Vec<f64>>,
    pub threshold: f64,
    pub metrics: Option<RecoveryMetrics>,
    pub per_node: Vec<NodeReport>,
}

impl RecoveryReport {
    pub fn new(learning: &GraphLearning, metrics: Option<RecoveryMetrics>) -> Self {
        let per_node = learning
            .estimates
            .iter()
            .map(|e| NodeReport {
                i: e.node,
                risk: e.empirical_risk,
                linf: metrics.as_ref().map(|m| m.linf_errors[e.node]),
            })
            .collect();
        Self {
            adjacency: learning.graph.adjacency.clone(),
            evidence: learning.graph.evidence.clone(),
            threshold: learning.graph.threshold,
            metrics,
            per_node,
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
