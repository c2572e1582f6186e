//! Gaussian graphical models: the precision matrix, its covariance, the edge
//! set, and the scalar parameters the learner consumes.

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, spd_inverse};
use crate::rng;

/// Smallest eigenvalue accepted for a generated precision matrix.
pub const SPECTRAL_MARGIN: f64 = 0.1;
const SIGN_RETRIES: usize = 20;

/// Zero-mean Gaussian model given by its precision matrix `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionModel {
    theta: Array2<f64>,
    sigma: Array2<f64>,
    edges: Vec<(usize, usize)>,
}

impl PrecisionModel {
    /// Validates symmetry and positive-definiteness, then inverts.
    pub fn from_theta(theta: Array2<f64>) -> Result<Self> {
        let p = theta.nrows();
        if theta.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: theta.ncols(),
            });
        }
        if p == 0 {
            return Err(Error::InvalidConfig("model needs at least one node".into()));
        }
        let scale = theta.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..p {
            for j in (i + 1)..p {
                if (theta[[i, j]] - theta[[j, i]]).abs() > 1e-12 * scale {
                    return Err(Error::MalformedModel(format!(
                        "theta is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let sigma = spd_inverse(theta.view())?;
        let mut edges = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                if theta[[i, j]] != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        Ok(Self {
            theta,
            sigma,
            edges,
        })
    }

    pub fn p(&self) -> usize {
        self.theta.nrows()
    }

    pub fn theta(&self) -> ArrayView2<'_, f64> {
        self.theta.view()
    }

    pub fn sigma(&self) -> ArrayView2<'_, f64> {
        self.sigma.view()
    }

    /// Unordered pairs `(i, j)`, `i < j`, with nonzero precision entry.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.theta[[i, j]] != 0.0
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.p()).filter(|&j| self.has_edge(i, j)).count()
    }

    /// Normalized strength `|θ_ij| / sqrt(θ_ii θ_jj)`.
    pub fn normalized_strength(&self, i: usize, j: usize) -> f64 {
        let t = &self.theta;
        (t[[i, j]] / (t[[i, i]] * t[[j, j]]).sqrt()).abs()
    }

    /// Neighborhood regression weights `w^i = (-θ_ij / θ_ii)_{j≠i}` in
    /// ascending node order with `i` skipped.
    pub fn weight_vector(&self, i: usize) -> Vec<f64> {
        let p = self.p();
        assert!(i < p, "node {i} out of range for p = {p}");
        let tii = self.theta[[i, i]];
        (0..p)
            .filter(|&j| j != i)
            .map(|j| -self.theta[[i, j]] / tii)
            .collect()
    }

    /// Conditional variance `Var[X_i | X_rest] = 1/θ_ii`.
    pub fn conditional_variance(&self, i: usize) -> f64 {
        1.0 / self.theta[[i, i]]
    }

    pub fn params(&self) -> ModelParams {
        derive_params(self)
    }

    pub fn to_file(&self) -> ModelFile {
        let p = self.p();
        ModelFile {
            p,
            theta: self.theta.iter().copied().collect(),
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
            params: self.params(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        file.into_model()
    }
}

/// Scalars derived from a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Minimum normalized edge strength; `None` for an edgeless graph.
    pub kappa: Option<f64>,
    /// Maximum over nodes of `Σ_{j≠i} |θ_ij / θ_ii|`.
    pub lambda: f64,
    pub theta_max: f64,
    pub nu_max: f64,
    /// Maximum degree. Informational.
    pub d: usize,
}

impl ModelParams {
    pub fn kappa(&self) -> Result<f64> {
        self.kappa.ok_or(Error::EmptyGraph)
    }
}

pub fn derive_params(model: &PrecisionModel) -> ModelParams {
    let p = model.p();
    let theta = model.theta();
    let kappa = model
        .edges()
        .iter()
        .map(|&(i, j)| model.normalized_strength(i, j))
        .reduce(f64::min);
    let lambda = (0..p)
        .map(|i| {
            (0..p)
                .filter(|&j| j != i)
                .map(|j| (theta[[i, j]] / theta[[i, i]]).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let theta_max = (0..p).map(|i| theta[[i, i]]).fold(f64::MIN, f64::max);
    let nu_max = (0..p)
        .map(|i| model.sigma()[[i, i]])
        .fold(f64::MIN, f64::max);
    let d = (0..p).map(|i| model.degree(i)).max().unwrap_or(0);
    ModelParams {
        kappa,
        lambda,
        theta_max,
        nu_max,
        d,
    }
}

/// Closed interval of normalized edge strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthRange {
    pub min: f64,
    pub max: f64,
}

impl StrengthRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min > 0.0 && max < 1.0 && min <= max) {
            return Err(Error::InvalidConfig(format!(
                "strength range [{min}, {max}] must satisfy 0 < min <= max < 1"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.min - tol && x <= self.max + tol
    }
}

/// Draws a random sparse model with maximum degree `degree`.
///
/// The graph is built by visiting node pairs in random order and keeping a
/// pair when both endpoints still have spare degree. Each edge gets a signed
/// normalized strength `s_ij` with `|s_ij|` uniform in `strengths`. The unit
/// diagonal matrix `I + S` must clear [`SPECTRAL_MARGIN`]; failing that,
/// signs are redrawn and, if that is not enough, an edge at a maximum-degree
/// node is dropped. The result is `Θ = I + S`, so normalized strengths are
/// the drawn magnitudes and `λ_i = Σ_j |s_ij| ≥ κ · deg(i)`.
pub fn generate_model(
    p: usize,
    degree: usize,
    strengths: StrengthRange,
    seed: u64,
) -> Result<PrecisionModel> {
    if p < 2 || degree >= p {
        return Err(Error::InfeasibleDegree { p, degree });
    }
    StrengthRange::new(strengths.min, strengths.max)?;
    let mut rng = rng::seeded(seed);

    let mut pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .collect();
    pairs.shuffle(&mut rng);
    let mut deg = vec![0usize; p];
    let mut edges = Vec::new();
    for (i, j) in pairs {
        if deg[i] < degree && deg[j] < degree {
            deg[i] += 1;
            deg[j] += 1;
            edges.push((i, j));
        }
    }
    edges.sort_unstable();

    let mut magnitudes: Vec<f64> = edges
        .iter()
        .map(|_| {
            if strengths.max > strengths.min {
                rng.random_range(strengths.min..=strengths.max)
            } else {
                strengths.min
            }
        })
        .collect();

    let normalized = loop {
        let mut accepted = None;
        for _ in 0..SIGN_RETRIES {
            let mut s = Array2::<f64>::eye(p);
            for (&(i, j), &mag) in edges.iter().zip(&magnitudes) {
                let v = if rng.random::<bool>() { mag } else { -mag };
                s[[i, j]] = v;
                s[[j, i]] = v;
            }
            let shifted = &s - &(Array2::<f64>::eye(p) * SPECTRAL_MARGIN);
            if cholesky_lower(shifted.view()).is_ok() {
                accepted = Some(s);
                break;
            }
        }
        if let Some(s) = accepted {
            break s;
        }
        // Drop one edge touching a node of maximum current degree.
        let mut deg = vec![0usize; p];
        for &(i, j) in &edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        let top = *deg.iter().max().expect("p >= 2");
        let incident: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| deg[i] == top || deg[j] == top)
            .map(|(k, _)| k)
            .collect();
        let k = incident[rng.random_range(0..incident.len())];
        edges.remove(k);
        magnitudes.remove(k);
    };

    PrecisionModel::from_theta(normalized)
}

/// On-disk model representation. Node indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub p: usize,
    /// Row-major `p × p` precision matrix.
    pub theta: Vec<f64>,
    pub edges: Vec<[usize; 2]>,
    pub params: ModelParams,
}

impl ModelFile {
    pub fn into_model(self) -> Result<PrecisionModel> {
        if self.theta.len() != self.p * self.p {
            return Err(Error::MalformedModel(format!(
                "theta has {} entries, expected {}",
                self.theta.len(),
                self.p * self.p
            )));
        }
        let theta = Array2::from_shape_vec((self.p, self.p), self.theta)
            .map_err(|e| Error::MalformedModel(e.to_string()))?;
        let model = PrecisionModel::from_theta(theta)?;
        let listed: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&[a, b]| (a.min(b), a.max(b)))
            .collect();
        let mut listed_sorted = listed.clone();
        listed_sorted.sort_unstable();
        if listed_sorted != model.edges() {
            return Err(Error::MalformedModel(
                "edge list disagrees with the support of theta".into(),
            ));
        }
        Ok(model)
    }
}
