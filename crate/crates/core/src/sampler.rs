//! Sampling from `N(0, Σ)` and the per-node normalization applied before
//! learning.

use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
pub use crate::linalg::cholesky_lower;
use crate::model::{ModelParams, PrecisionModel};
use crate::rng;

/// `m × p` block of i.i.d. draws, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    data: Array2<f64>,
    seed: Option<u64>,
}

impl SampleBlock {
    pub fn from_data(data: Array2<f64>) -> Self {
        Self { data, seed: None }
    }

    pub fn m(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    /// Seed the block was drawn with, if it was generated here.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.data.row(t)
    }

    /// Rows `start..end` as a new block.
    pub fn slice_rows(&self, start: usize, end: usize) -> SampleBlock {
        SampleBlock {
            data: self.data.slice(s![start..end, ..]).to_owned(),
            seed: self.seed,
        }
    }

    /// Writes the block as CSV with header `x0,…,x{p-1}` and 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record((0..self.p()).map(|j| format!("x{j}")))?;
        for row in self.data.rows() {
            w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)?;
        let header = r.headers()?.clone();
        let p = header.len();
        for (j, name) in header.iter().enumerate() {
            if name.trim() != format!("x{j}") {
                return Err(Error::MalformedCsv {
                    row: 0,
                    message: format!("expected header column x{j}, found {name:?}"),
                });
            }
        }
        let mut values = Vec::new();
        let mut m = 0;
        for (k, record) in r.records().enumerate() {
            let row = k + 1;
            let record = record.map_err(|e| Error::MalformedCsv {
                row,
                message: e.to_string(),
            })?;
            if record.len() != p {
                return Err(Error::MalformedCsv {
                    row,
                    message: format!("expected {p} fields, found {}", record.len()),
                });
            }
            for field in record.iter() {
                let x: f64 = field.trim().parse().map_err(|_| Error::MalformedCsv {
                    row,
                    message: format!("not a number: {field:?}"),
                })?;
                if !x.is_finite() {
                    return Err(Error::MalformedCsv {
                        row,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                values.push(x);
            }
            m += 1;
        }
        let data = Array2::from_shape_vec((m, p), values).expect("row lengths checked");
        Ok(Self::from_data(data))
    }
}

fn draw_row(factor: ArrayView2<f64>, seed: u64, row: u64) -> Array1<f64> {
    let p = factor.nrows();
    let mut rng = rng::row_rng(seed, row);
    let z: Array1<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
    factor.dot(&z)
}

/// Draws `m` rows `L z` with `L Lᵀ = Σ` and `z` standard normal; row `t`
/// depends only on `(seed, t)`.
pub fn draw_samples(model: &PrecisionModel, m: usize, seed: u64) -> Result<SampleBlock> {
    let factor = cholesky_lower(model.sigma())?;
    let p = model.p();
    let mut data = Array2::<f64>::zeros((m, p));
    for (t, mut row) in data.axis_iter_mut(Axis(0)).enumerate() {
        row.assign(&draw_row(factor.view(), seed, t as u64));
    }
    Ok(SampleBlock {
        data,
        seed: Some(seed),
    })
}

/// Unbounded iterator over samples, matching [`draw_samples`] row for row.
#[derive(Debug, Clone)]
pub struct SampleStream {
    factor: Array2<f64>,
    seed: u64,
    next_row: u64,
}

impl Iterator for SampleStream {
    type Item = Array1<f64>;

    fn next(&mut self) -> Option<Array1<f64>> {
        let row = draw_row(self.factor.view(), self.seed, self.next_row);
        self.next_row += 1;
        Some(row)
    }
}

pub fn stream_source(model: &PrecisionModel, seed: u64) -> Result<SampleStream> {
    Ok(SampleStream {
        factor: cholesky_lower(model.sigma())?,
        seed,
        next_row: 0,
    })
}

/// The common factor `1 / (B sqrt(ν_max (λ + 1)))` with
/// `B = sqrt(2 ln(2 p T / δ))`.
///
/// It does not depend on the target node, so one value serves every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub b: f64,
    pub scale: f64,
}

impl Normalization {
    pub fn new(p: usize, params: &ModelParams, train_len: usize, delta: f64) -> Result<Self> {
        if train_len == 0 {
            return Err(Error::InvalidConfig("T must be at least 1".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta {delta} not in (0, 1)")));
        }
        let b = (2.0 * (2.0 * p as f64 * train_len as f64 / delta).ln()).sqrt();
        let scale = 1.0 / (b * (params.nu_max * (params.lambda + 1.0)).sqrt());
        Ok(Self { b, scale })
    }

    /// Bound on every normalized entry that holds with probability `1 - δ`.
    pub fn entry_bound(params: &ModelParams) -> f64 {
        1.0 / (params.lambda + 1.0).sqrt()
    }
}

/// Supervised pairs `(x̃^t, ỹ^t) = scale · (X^t_{-i}, X^t_i)` for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedView {
    pub node: usize,
    pub norm: Normalization,
    /// `m × (p-1)`; columns in ascending node order with `node` skipped.
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl NormalizedView {
    pub fn from_block(block: &SampleBlock, node: usize, norm: Normalization) -> Self {
        let p = block.p();
        assert!(node < p, "node {node} out of range for p = {p}");
        let data = block.data();
        let m = block.m();
        let mut x = Array2::<f64>::zeros((m, p - 1));
        for (k, j) in (0..p).filter(|&j| j != node).enumerate() {
            x.column_mut(k)
                .assign(&data.column(j).mapv(|v| v * norm.scale));
        }
        let y = data.column(node).mapv(|v| v * norm.scale);
        Self { node, norm, x, y }
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    /// Rows `start..end`.
    pub fn rows(&self, start: usize, end: usize) -> NormalizedView {
        NormalizedView {
            node: self.node,
            norm: self.norm,
            x: self.x.slice(s![start..end, ..]).to_owned(),
            y: self.y.slice(s![start..end]).to_owned(),
        }
    }

    /// Largest absolute entry over `x̃` and `ỹ`.
    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(self.y.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn normalize_for_node(
    block: &SampleBlock,
    node: usize,
    params: &ModelParams,
    train_len: usize,
    delta: f64,
) -> Result<NormalizedView> {
    let norm = Normalization::new(block.p(), params, train_len, delta)?;
    Ok(NormalizedView::from_block(block, node, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::model::derive_params;
    use ndarray::array;

    fn two_node() -> PrecisionModel {
        PrecisionModel::from_theta(array![[2.0, -1.0], [-1.0, 2.0]]).unwrap()
    }

    fn sample_cov(data: ArrayView2<f64>) -> Array2<f64> {
        data.t().dot(&data) / data.nrows() as f64
    }

    #[test]
    fn identity_covariance_recovered() {
        let model = PrecisionModel::from_theta(Array2::eye(3)).unwrap();
        let block = draw_samples(&model, 100_000, 1).unwrap();
        let cov = sample_cov(block.data());
        assert!(max_abs_diff(cov.view(), Array2::eye(3).view()) < 0.05);
        let mean = block.data().mean_axis(Axis(0)).unwrap();
        assert!(mean.iter().all(|v| v.abs() < 0.02));
    }

    #[test]
    fn single_row_is_finite() {
        let block = draw_samples(&two_node(), 1, 5).unwrap();
        assert_eq!(block.m(), 1);
        assert!(block.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn regression_slope_and_residual() {
        let block = draw_samples(&two_node(), 100_000, 2).unwrap();
        let x0 = block.data().column(0).to_owned();
        let x1 = block.data().column(1).to_owned();
        let slope = x0.dot(&x1) / x1.dot(&x1);
        assert!((slope - 0.5).abs() < 0.02, "slope {slope}");
        let resid = &x0 - &(&x1 * 0.5);
        let var = resid.dot(&resid) / resid.len() as f64;
        assert!((var - 0.5).abs() < 0.02, "residual variance {var}");
    }

    #[test]
    fn normalization_constants() {
        let params = ModelParams {
            kappa: None,
            lambda: 0.0,
            theta_max: 1.0,
            nu_max: 1.0,
            d: 0,
        };
        let norm = Normalization::new(10, &params, 1000, 0.1).unwrap();
        // sqrt(2 ln 200000), evaluated independently.
        assert!((norm.b - 4.940864832300146).abs() < 1e-12);
        assert_eq!(norm.scale, 1.0 / norm.b);
        assert!(Normalization::new(10, &params, 0, 0.1).is_err());
        assert!(Normalization::new(10, &params, 10, 1.0).is_err());
    }

    #[test]
    fn lambda_zero_view_is_raw_over_b() {
        let model = PrecisionModel::from_theta(Array2::eye(3)).unwrap();
        let params = derive_params(&model);
        let block = draw_samples(&model, 20, 9).unwrap();
        let view = normalize_for_node(&block, 1, &params, 20, 0.5).unwrap();
        for t in 0..20 {
            assert_eq!(view.y[t], block.data()[[t, 1]] * (1.0 / view.norm.b));
            assert_eq!(view.x[[t, 0]], block.data()[[t, 0]] * view.norm.scale);
            assert_eq!(view.x[[t, 1]], block.data()[[t, 2]] * view.norm.scale);
        }
    }

    #[test]
    fn zero_block_normalizes_to_zero() {
        let block = SampleBlock::from_data(Array2::zeros((5, 4)));
        let params = derive_params(&PrecisionModel::from_theta(Array2::eye(4)).unwrap());
        let view = normalize_for_node(&block, 2, &params, 5, 0.1).unwrap();
        assert_eq!(view.max_abs(), 0.0);
        assert_eq!(view.x.dim(), (5, 3));
    }

    #[test]
    fn stream_matches_block() {
        let model = two_node();
        let block = draw_samples(&model, 100, 17).unwrap();
        let stream: Vec<Array1<f64>> = stream_source(&model, 17).unwrap().take(100).collect();
        for (t, row) in stream.iter().enumerate() {
            assert_eq!(row.view(), block.row(t));
        }
        let again: Vec<Array1<f64>> = stream_source(&model, 17).unwrap().take(100).collect();
        assert_eq!(stream, again);
    }

    #[test]
    fn interleaved_streams_match_their_blocks() {
        let model = two_node();
        let block_a = draw_samples(&model, 50, 1).unwrap();
        let block_b = draw_samples(&model, 50, 2).unwrap();
        let mut a = stream_source(&model, 1).unwrap();
        let mut b = stream_source(&model, 2).unwrap();
        for t in 0..50 {
            assert_eq!(a.next().unwrap().view(), block_a.row(t));
            assert_eq!(b.next().unwrap().view(), block_b.row(t));
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let block = draw_samples(&two_node(), 30, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.csv");
        block.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x0,x1\n"));
        let back = SampleBlock::read_csv(&path).unwrap();
        assert_eq!(back.data(), block.data());
    }

    #[test]
    fn malformed_csv_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x0,x1\n1.0,2.0\n3.0,oops\n").unwrap();
        match SampleBlock::read_csv(&path) {
            Err(Error::MalformedCsv { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
