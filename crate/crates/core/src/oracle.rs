//! Closed-form risk quantities for checking the learner against ground truth.
//!
//! `expected_risk` is in the raw scale of `X`, where `w^i` lives. The
//! normalized pairs `(a, b) = scale · (X_{-i}, X_i)` satisfy
//! `E[(v·a - b)²] = scale² ε(v) + Ξ` with `Ξ = scale² / θ_ii`.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::drop_index;
use crate::model::PrecisionModel;
use crate::sampler::NormalizedView;

#[derive(Debug, Clone, PartialEq)]
pub struct RiskOracle {
    pub node: usize,
    /// Covariance of `X_{-i}`.
    pub sub_cov: Array2<f64>,
    pub w: Array1<f64>,
    pub theta_ii: f64,
    pub scale: f64,
    /// Irreducible noise of `b` given `a`, in the normalized scale.
    pub xi: f64,
}

impl RiskOracle {
    pub fn new(model: &PrecisionModel, node: usize, scale: f64) -> Self {
        let theta_ii = model.theta()[[node, node]];
        Self {
            node,
            sub_cov: drop_index(model.sigma(), node),
            w: Array1::from(model.weight_vector(node)),
            theta_ii,
            scale,
            xi: scale * scale / theta_ii,
        }
    }

    /// Oracle in the raw scale (`scale = 1`).
    pub fn raw(model: &PrecisionModel, node: usize) -> Self {
        Self::new(model, node, 1.0)
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// `ε(v) = (v - w)ᵀ Σ_{-i,-i} (v - w)`.
    pub fn expected_risk(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        let diff = ArrayView1::from(v).to_owned() - &self.w;
        Ok(diff.dot(&self.sub_cov.dot(&diff)).max(0.0))
    }

    /// `‖v - w‖∞`.
    pub fn linf_error(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        Ok(v.iter()
            .zip(self.w.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `sqrt(ε(v) θ_max)`, an upper bound on `‖v - w‖∞`.
    pub fn linf_bound(&self, v: &[f64], theta_max: f64) -> Result<f64> {
        Ok((self.expected_risk(v)? * theta_max).sqrt())
    }

    /// Empirical mean and standard deviation of `(v·a - b)²` over `risk`.
    pub fn squared_residual_stats(&self, v: &[f64], risk: &NormalizedView) -> Result<(f64, f64)> {
        self.check_dim(v)?;
        let m = risk.m();
        if m == 0 {
            return Err(Error::InsufficientSamples {
                needed: 1,
                available: 0,
            });
        }
        let preds = risk.x.dot(&ArrayView1::from(v));
        let sq: Vec<f64> = preds
            .iter()
            .zip(risk.y.iter())
            .map(|(p, b)| (p - b) * (p - b))
            .collect();
        let mean = sq.iter().sum::<f64>() / m as f64;
        let var = if m > 1 {
            sq.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        Ok((mean, var.sqrt()))
    }

    /// `|ε̂(v) - scale² ε(v) - Ξ|`.
    pub fn risk_identity_check(&self, v: &[f64], risk: &NormalizedView) -> Result<f64> {
        let (empirical, _) = self.squared_residual_stats(v, risk)?;
        let predicted = self.scale * self.scale * self.expected_risk(v)? + self.xi;
        Ok((empirical - predicted).abs())
    }
}
