//! Sparsitron: Hedge over signed, ℓ₁-bounded weight vectors.
//!
//! A signed vector `w ∈ ℝⁿ` with `‖w‖₁ ≤ λ` is represented on the simplex of
//! `2n + 1` experts: coordinates `0..n` hold the positive parts, `n..2n` the
//! negative parts, and the last coordinate absorbs the unused budget. Samples
//! are embedded as `[x, -x, 0]`, so `λ p · [x, -x, 0] = fold(λ p) · x`.
//!
//! The learner runs `T` multiplicative-weight steps against the loss
//! `l = (1 + (λ p·x̃ - ỹ) x̃) / 2`, stores every distribution it played, and
//! returns the stored candidate with the smallest empirical squared error on
//! `M` held-out pairs.

use std::time::{Duration, Instant};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of experts in the doubled space for an `n`-dimensional problem.
pub fn doubled_len(n: usize) -> usize {
    2 * n + 1
}

/// `[x, -x, 0]`.
pub fn double_sample(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; doubled_len(x.len())];
    double_sample_into(x, &mut out);
    out
}

pub fn double_sample_into(x: &[f64], out: &mut [f64]) {
    let n = x.len();
    debug_assert_eq!(out.len(), doubled_len(n));
    for (j, &v) in x.iter().enumerate() {
        out[j] = v;
        out[n + j] = -v;
    }
    out[2 * n] = 0.0;
}

/// Nonnegative weights over the doubled coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledVector {
    entries: Vec<f64>,
}

impl DoubledVector {
    /// Wraps raw entries; the length must be odd.
    pub fn from_entries(entries: Vec<f64>) -> Self {
        assert!(entries.len() % 2 == 1, "doubled vectors have odd length");
        Self { entries }
    }

    /// Original dimension `n`.
    pub fn n(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn l1(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    /// `signed_j = entries[j] - entries[n + j]`; the slack entry is dropped.
    pub fn fold_back(&self) -> Vec<f64> {
        fold_back(&self.entries, 1.0)
    }

    pub fn dot(&self, doubled_x: &[f64]) -> f64 {
        dot(&self.entries, doubled_x)
    }
}

/// `scale · (e[j] - e[n + j])` for `j < n`.
pub fn fold_back(entries: &[f64], scale: f64) -> Vec<f64> {
    let n = entries.len() / 2;
    (0..n)
        .map(|j| scale * (entries[j] - entries[n + j]))
        .collect()
}

/// Embeds a signed vector with `‖w‖₁ ≤ λ` as a doubled vector of ℓ₁ norm `λ`.
pub fn double_weights(w: &[f64], lambda: f64) -> Result<DoubledVector> {
    let norm: f64 = w.iter().map(|v| v.abs()).sum();
    if norm > lambda {
        return Err(Error::BudgetExceeded {
            norm,
            budget: lambda,
        });
    }
    let n = w.len();
    let mut entries = vec![0.0; doubled_len(n)];
    for (j, &v) in w.iter().enumerate() {
        entries[j] = v.max(0.0);
        entries[n + j] = (-v).max(0.0);
    }
    entries[2 * n] = lambda - norm;
    Ok(DoubledVector { entries })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `l = (1 + (λ p·x̃ - ỹ) x̃) / 2`, unclamped.
pub fn make_loss(p: &[f64], x: &[f64], y: f64, lambda: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    make_loss_into(p, x, y, lambda, &mut out);
    out
}

/// Writes the loss into `out` and returns the residual `λ p·x̃ - ỹ`.
pub fn make_loss_into(p: &[f64], x: &[f64], y: f64, lambda: f64, out: &mut [f64]) -> f64 {
    let residual = lambda * dot(p, x) - y;
    for (o, &xk) in out.iter_mut().zip(x) {
        *o = 0.5 * (1.0 + residual * xk);
    }
    residual
}

/// `1 / (1 + sqrt(ln(n) / T))`.
pub fn default_beta(train_len: usize, n_experts: usize) -> f64 {
    assert!(train_len >= 1 && n_experts >= 2);
    1.0 / (1.0 + ((n_experts as f64).ln() / train_len as f64).sqrt())
}

/// Played distributions, optionally thinned to every `stride`-th step.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    n_experts: usize,
    steps: Vec<usize>,
    data: Vec<f64>,
}

impl Candidates {
    fn new(n_experts: usize) -> Self {
        Self {
            n_experts,
            steps: Vec::new(),
            data: Vec::new(),
        }
    }

    fn push(&mut self, step: usize, p: &[f64]) {
        self.steps.push(step);
        self.data.extend_from_slice(p);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// 0-based Hedge step at which candidate `k` was played.
    pub fn step(&self, k: usize) -> usize {
        self.steps[k]
    }

    pub fn get(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_experts..(k + 1) * self.n_experts]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_experts)
    }

    /// Number of stored doubles; `(2n + 1)` per candidate.
    pub fn stored_doubles(&self) -> usize {
        self.data.len()
    }

    /// Signed vectors `fold(λ p)` for all candidates, one per row.
    pub fn signed_matrix(&self, lambda: f64) -> Array2<f64> {
        let n = self.n_experts / 2;
        let mut out = Array2::<f64>::zeros((self.len(), n));
        for (k, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let p = self.get(k);
            for j in 0..n {
                row[j] = lambda * (p[j] - p[n + j]);
            }
        }
        out
    }
}

/// Multiplicative-weights state over `n_experts` experts.
///
/// `v` is rescaled to sum 1 after every update, so it doubles as the
/// distribution `p = v / ‖v‖₁`; the rescaling cancels in `p` and keeps `v`
/// away from underflow over long runs.
#[derive(Debug, Clone)]
pub struct HedgeState {
    v: Vec<f64>,
    t: usize,
    beta: f64,
    ln_beta: f64,
    stride: usize,
    candidates: Candidates,
}

impl HedgeState {
    /// Uniform start `v⁰ = 1/n`.
    pub fn new(n_experts: usize, beta: f64, stride: usize) -> Self {
        Self::with_weights(vec![1.0 / n_experts as f64; n_experts], beta, stride)
    }

    /// Starts from arbitrary strictly positive weights.
    pub fn with_weights(mut v: Vec<f64>, beta: f64, stride: usize) -> Self {
        assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
        assert!(stride >= 1);
        assert!(v.iter().all(|&x| x > 0.0), "weights must be positive");
        let total: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= total);
        let n = v.len();
        Self {
            v,
            t: 0,
            beta,
            ln_beta: beta.ln(),
            stride,
            candidates: Candidates::new(n),
        }
    }

    /// Distribution to be played at the next step.
    pub fn distribution(&self) -> &[f64] {
        &self.v
    }

    pub fn steps_taken(&self) -> usize {
        self.t
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    pub fn into_candidates(self) -> Candidates {
        self.candidates
    }

    /// Records the current distribution as a candidate (subject to the
    /// stride), applies `v_k ← v_k β^{l_k}` and rescales `v` to sum 1.
    pub fn step(&mut self, loss: &[f64]) {
        assert_eq!(loss.len(), self.v.len());
        if self.t.is_multiple_of(self.stride) {
            self.candidates.push(self.t, &self.v);
        }
        let mut total = 0.0;
        for (v, &l) in self.v.iter_mut().zip(loss) {
            *v *= (l * self.ln_beta).exp();
            total += *v;
        }
        let inv = 1.0 / total;
        for v in &mut self.v {
            *v *= inv;
        }
        self.t += 1;
    }
}

/// Mean of `(λ p·a - b)²` over doubled risk samples `a` (one per row).
pub fn empirical_risk(
    candidate: &[f64],
    lambda: f64,
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
) -> f64 {
    let m = b.len();
    assert!(m >= 1);
    let mut sum = 0.0;
    for (row, &bj) in a.rows().into_iter().zip(b.iter()) {
        let r = lambda * row.iter().zip(candidate).map(|(x, p)| x * p).sum::<f64>() - bj;
        sum += r * r;
    }
    sum / m as f64
}

/// How held-out risks are evaluated. Both give the same values up to rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskScoring {
    /// Residuals over all `M` pairs for every candidate, `O(T M n)`.
    #[default]
    Direct,
    /// Expands the square through `AᵀA / M`, `O((T + M) n²)`. Cheaper when
    /// `n` is small against `M`.
    Gram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsitronConfig {
    /// ℓ₁ budget λ.
    pub lambda: f64,
    /// Update parameter; `None` selects [`default_beta`] over `2n + 1` experts.
    pub beta: Option<f64>,
    /// Keep and score every `stride`-th candidate. 1 reproduces the full algorithm.
    pub stride: usize,
    pub scoring: RiskScoring,
}

impl SparsitronConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            beta: None,
            stride: 1,
            scoring: RiskScoring::Direct,
        }
    }
}

/// Loss-range diagnostics from the Hedge phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LossStats {
    pub entries: usize,
    /// Entries outside `[0, 1]`; these are used unclamped.
    pub out_of_range: usize,
}

impl LossStats {
    pub fn fraction_out_of_range(&self) -> f64 {
        if self.entries == 0 {
            0.0
        } else {
            self.out_of_range as f64 / self.entries as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub hedge: Duration,
    pub scoring: Duration,
}

/// Runs the Hedge phase over `T` training pairs (undoubled rows of `x`).
pub fn hedge_phase(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    config: &SparsitronConfig,
) -> (HedgeState, LossStats) {
    let (train_len, n) = x.dim();
    assert_eq!(y.len(), train_len);
    assert!(train_len >= 1);
    let n_experts = doubled_len(n);
    let beta = config
        .beta
        .unwrap_or_else(|| default_beta(train_len, n_experts));
    let mut state = HedgeState::new(n_experts, beta, config.stride);
    let mut doubled = vec![0.0; n_experts];
    let mut loss = vec![0.0; n_experts];
    let mut row_buf = vec![0.0; n];
    let mut stats = LossStats::default();
    for (row, &yt) in x.rows().into_iter().zip(y.iter()) {
        for (dst, &src) in row_buf.iter_mut().zip(row.iter()) {
            *dst = src;
        }
        double_sample_into(&row_buf, &mut doubled);
        make_loss_into(state.distribution(), &doubled, yt, config.lambda, &mut loss);
        stats.entries += n_experts;
        stats.out_of_range += loss.iter().filter(|&&l| !(0.0..=1.0).contains(&l)).count();
        state.step(&loss);
    }
    (state, stats)
}

const SCORING_CHUNK: usize = 256;

/// Empirical risk of every candidate on the held-out pairs `(a, b)`
/// (undoubled rows), computed through the folded signed vectors.
pub fn score_candidates(
    candidates: &Candidates,
    lambda: f64,
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
) -> Vec<f64> {
    let m = b.len();
    assert!(m >= 1);
    assert_eq!(a.nrows(), m);
    let signed = candidates.signed_matrix(lambda);
    let mut risks = Vec::with_capacity(candidates.len());
    let at = a.t();
    for chunk in signed.axis_chunks_iter(Axis(0), SCORING_CHUNK) {
        let preds = chunk.dot(&at);
        for row in preds.rows() {
            let sum: f64 = row
                .iter()
                .zip(b.iter())
                .map(|(pr, bj)| {
                    let r = pr - bj;
                    r * r
                })
                .sum();
            risks.push(sum / m as f64);
        }
    }
    risks
}

/// Same values as [`score_candidates`] via `uᵀGu - 2u·c + b·b/M` with
/// `G = AᵀA/M` and `c = Aᵀb/M`.
pub fn score_candidates_gram(
    candidates: &Candidates,
    lambda: f64,
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
) -> Vec<f64> {
    let m = b.len();
    assert!(m >= 1);
    assert_eq!(a.nrows(), m);
    let inv_m = 1.0 / m as f64;
    let gram = a.t().dot(&a) * inv_m;
    let cross = a.t().dot(&b) * inv_m;
    let bb = b.dot(&b) * inv_m;
    let signed = candidates.signed_matrix(lambda);
    let mut risks = Vec::with_capacity(candidates.len());
    for chunk in signed.axis_chunks_iter(Axis(0), SCORING_CHUNK) {
        let ug = chunk.dot(&gram);
        let uc = chunk.dot(&cross);
        for ((u, g), c) in chunk.rows().into_iter().zip(ug.rows()).zip(uc.iter()) {
            risks.push((u.dot(&g) - 2.0 * c + bb).max(0.0));
        }
    }
    risks
}

/// Index of the smallest value; ties resolve to the earliest index.
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v >= b || v.is_nan() => {}
            _ => best = Some((k, v)),
        }
    }
    best.map(|(k, _)| k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsitronRun {
    /// Signed estimate `fold(λ p^{t*})`.
    pub weights: Vec<f64>,
    /// 0-based Hedge step of the selected candidate.
    pub selected_step: usize,
    pub selected_risk: f64,
    pub candidates_scored: usize,
    pub loss_stats: LossStats,
    pub times: PhaseTimes,
}

/// Full learner: Hedge phase on `(train_x, train_y)`, selection on
/// `(risk_x, risk_y)`. All inputs are normalized and undoubled.
pub fn run_sparsitron(
    train_x: ArrayView2<f64>,
    train_y: ArrayView1<f64>,
    risk_x: ArrayView2<f64>,
    risk_y: ArrayView1<f64>,
    config: &SparsitronConfig,
) -> SparsitronRun {
    let start = Instant::now();
    let (state, loss_stats) = hedge_phase(train_x, train_y, config);
    let hedge = start.elapsed();

    let start = Instant::now();
    let candidates = state.into_candidates();
    let risks = match config.scoring {
        RiskScoring::Direct => score_candidates(&candidates, config.lambda, risk_x, risk_y),
        RiskScoring::Gram => score_candidates_gram(&candidates, config.lambda, risk_x, risk_y),
    };
    let best = argmin_first(&risks).expect("at least one candidate");
    let scoring = start.elapsed();

    SparsitronRun {
        weights: fold_back(candidates.get(best), config.lambda),
        selected_step: candidates.step(best),
        selected_risk: risks[best],
        candidates_scored: candidates.len(),
        loss_stats,
        times: PhaseTimes { hedge, scoring },
    }
}
