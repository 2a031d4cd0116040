use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dcopf::solve_dcopf_with;
use super::{compute_ptdf, sample_box_lhs, DemandBox, DispatchStatus, GridError, GridModel};
use crate::mlp::Batch;
use crate::optcore::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// Per-dimension affine map, `scaled = (raw - offset) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn identity(dims: usize) -> Self {
        Self {
            offset: vec![0.0; dims],
            scale: vec![1.0; dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.offset.len()
    }

    pub fn scale(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(x, (o, s))| (x - o) / s)
            .collect()
    }

    pub fn unscale(&self, scaled: &[f64]) -> Vec<f64> {
        scaled
            .iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(x, (o, s))| x * s + o)
            .collect()
    }

    /// Input scaler mapping the demand box onto the unit hypercube.
    pub fn for_demand_box(grid: &GridModel, bx: DemandBox) -> Self {
        let (lo, hi) = bx.mw_bounds(grid);
        let scale = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h > l { h - l } else { 1.0 })
            .collect();
        Self { offset: lo, scale }
    }

    /// Output scaler dividing each generator by its `p_max`.
    pub fn for_generators(grid: &GridModel) -> Self {
        Self {
            offset: vec![0.0; grid.n_generators()],
            scale: grid
                .generators
                .iter()
                .map(|g| if g.p_max > 0.0 { g.p_max } else { 1.0 })
                .collect(),
        }
    }

    fn fit_minmax(rows: &[&[f64]], dims: usize) -> Self {
        let mut lo = vec![f64::INFINITY; dims];
        let mut hi = vec![f64::NEG_INFINITY; dims];
        for r in rows {
            for d in 0..dims {
                lo[d] = lo[d].min(r[d]);
                hi[d] = hi[d].max(r[d]);
            }
        }
        let scale = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h > l { h - l } else { 1.0 })
            .collect();
        let offset = lo.into_iter().map(|l| if l.is_finite() { l } else { 0.0 }).collect();
        Self { offset, scale }
    }

    fn fit_maxabs(rows: &[&[f64]], dims: usize) -> Self {
        let mut m = vec![0.0_f64; dims];
        for r in rows {
            for d in 0..dims {
                m[d] = m[d].max(r[d].abs());
            }
        }
        Self {
            offset: vec![0.0; dims],
            scale: m.into_iter().map(|v| if v > 0.0 { v } else { 1.0 }).collect(),
        }
    }
}

/// Demand -> dispatch samples in MW with a train/val/test tag per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: DenseMatrix,
    pub targets: DenseMatrix,
    pub split: Vec<Split>,
    pub input_scaler: Scaler,
    pub output_scaler: Scaler,
}

impl Dataset {
    /// Validates the samples and fits scalers on the train split: inputs
    /// min-max, targets by maximum magnitude.
    pub fn new(inputs: DenseMatrix, targets: DenseMatrix, split: Vec<Split>) -> Result<Self, GridError> {
        if inputs.rows() != targets.rows() || inputs.rows() != split.len() {
            return Err(GridError::Invalid(format!(
                "{} input rows, {} target rows, {} split tags",
                inputs.rows(),
                targets.rows(),
                split.len()
            )));
        }
        if !inputs.is_finite() || !targets.is_finite() {
            return Err(GridError::Invalid("dataset contains non-finite values".into()));
        }
        let train: Vec<usize> = (0..split.len()).filter(|&i| split[i] == Split::Train).collect();
        let in_rows: Vec<&[f64]> = train.iter().map(|&i| inputs.row(i)).collect();
        let out_rows: Vec<&[f64]> = train.iter().map(|&i| targets.row(i)).collect();
        Ok(Self {
            input_scaler: Scaler::fit_minmax(&in_rows, inputs.cols()),
            output_scaler: Scaler::fit_maxabs(&out_rows, targets.cols()),
            inputs,
            targets,
            split,
        })
    }

    /// Replaces the scalers with the grid-derived ones (demand box onto the
    /// unit cube, dispatch divided by `p_max`).
    pub fn with_grid_scalers(mut self, grid: &GridModel, bx: DemandBox) -> Result<Self, GridError> {
        if grid.n_loads() != self.n_inputs() || grid.n_generators() != self.n_outputs() {
            return Err(GridError::Invalid(format!(
                "dataset has {} inputs / {} outputs, grid has {} loads / {} generators",
                self.n_inputs(),
                self.n_outputs(),
                grid.n_loads(),
                grid.n_generators()
            )));
        }
        self.input_scaler = Scaler::for_demand_box(grid, bx);
        self.output_scaler = Scaler::for_generators(grid);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.split.len()
    }

    pub fn is_empty(&self) -> bool {
        self.split.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.targets.cols()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn count(&self, which: Split) -> usize {
        self.split.iter().filter(|&&s| s == which).count()
    }

    /// Scaled samples of one split.
    pub fn batch(&self, which: Split) -> Batch {
        let idx = self.indices(which);
        Batch {
            inputs: idx.iter().map(|&i| self.input_scaler.scale(self.inputs.row(i))).collect(),
            targets: idx.iter().map(|&i| self.output_scaler.scale(self.targets.row(i))).collect(),
        }
    }
}

/// Samples demands by LHS, solves the DC-OPF per sample and tags a seeded
/// 70/10/20 split. Infeasible samples are replaced by fresh LHS draws.
pub fn generate_dataset(grid: &GridModel, n: usize, seed: u64) -> Result<Dataset, GridError> {
    generate_dataset_in_box(grid, DemandBox::default(), n, seed)
}

pub fn generate_dataset_in_box(
    grid: &GridModel,
    bx: DemandBox,
    n: usize,
    seed: u64,
) -> Result<Dataset, GridError> {
    if n < 10 {
        return Err(GridError::Invalid(format!("need at least 10 samples, got {n}")));
    }
    let ptdf = compute_ptdf(grid)?;
    let (lo, hi) = bx.mw_bounds(grid);
    let cap = 10 * n;

    let mut demands: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut dispatch: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0;
    let mut round = 0u64;
    while demands.len() < n {
        let want = (n - demands.len()).min(cap - attempts);
        if want == 0 {
            return Err(GridError::TooManyInfeasible {
                wanted: n,
                feasible: demands.len(),
                attempts,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(round.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let batch = sample_box_lhs(&lo, &hi, want, &mut rng);
        let solved: Vec<_> = (0..want)
            .into_par_iter()
            .map(|i| solve_dcopf_with(grid, &ptdf, batch.row(i)))
            .collect();
        for (i, sol) in solved.into_iter().enumerate() {
            let sol = sol?;
            if sol.status == DispatchStatus::Optimal {
                demands.push(batch.row(i).to_vec());
                dispatch.push(sol.p_g);
            }
        }
        attempts += want;
        round += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5B11));
    let n_train = n * 7 / 10;
    let n_val = n / 10;
    let mut split = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        split[i] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }

    let inputs = DenseMatrix::from_rows(&demands)?;
    let targets = DenseMatrix::from_rows(&dispatch)?;
    Dataset::new(inputs, targets, split)?.with_grid_scalers(grid, bx)
}

/// Writes the dataset as CSV (`d_*`, `g_*`, `split` columns, MW values).
pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), GridError> {
    std::fs::write(path, dataset_to_csv(ds))?;
    Ok(())
}

pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..ds.n_inputs())
        .map(|i| format!("d_{i}"))
        .chain((0..ds.n_outputs()).map(|g| format!("g_{g}")))
        .chain(std::iter::once("split".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..ds.len() {
        for v in ds.inputs.row(i).iter().chain(ds.targets.row(i)) {
            // shortest representation that parses back to the same f64
            let _ = write!(out, "{v},");
        }
        out.push_str(ds.split[i].as_str());
        out.push('\n');
    }
    out
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, GridError> {
    dataset_from_csv(&std::fs::read_to_string(path)?)
}

pub fn dataset_from_csv(text: &str) -> Result<Dataset, GridError> {
    let schema = |row: usize, column: usize, message: String| GridError::DatasetSchema { row, column, message };
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines.next().ok_or_else(|| schema(1, 1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let nd = cols.iter().take_while(|c| c.starts_with("d_")).count();
    let ng = cols[nd..].iter().take_while(|c| c.starts_with("g_")).count();
    for (k, c) in cols.iter().enumerate() {
        let expected = if k < nd {
            format!("d_{k}")
        } else if k < nd + ng {
            format!("g_{}", k - nd)
        } else {
            "split".to_string()
        };
        if *c != expected {
            return Err(schema(1, k + 1, format!("expected header `{expected}`, found `{c}`")));
        }
    }
    if cols.len() != nd + ng + 1 || nd == 0 || ng == 0 {
        return Err(schema(1, cols.len(), "header must be d_0.., g_0.., split".into()));
    }

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    let mut split = Vec::new();
    for (lineno, line) in lines {
        let row = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != nd + ng + 1 {
            return Err(schema(row, fields.len().min(nd + ng + 1), format!(
                "expected {} fields, found {}",
                nd + ng + 1,
                fields.len()
            )));
        }
        let mut values = Vec::with_capacity(nd + ng);
        for (k, f) in fields[..nd + ng].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| schema(row, k + 1, format!("`{f}` is not a number")))?;
            if !v.is_finite() {
                return Err(schema(row, k + 1, "non-finite value".into()));
            }
            values.push(v);
        }
        let tag = Split::parse(fields[nd + ng])
            .ok_or_else(|| schema(row, nd + ng + 1, format!("unknown split `{}`", fields[nd + ng])))?;
        targets.push(values.split_off(nd));
        inputs.push(values);
        split.push(tag);
    }
    if split.is_empty() {
        return Err(schema(2, 1, "no samples".into()));
    }
    let inputs = DenseMatrix::from_rows(&inputs)?;
    let targets = DenseMatrix::from_rows(&targets)?;
    Dataset::new(inputs, targets, split)
}
