#![allow(dead_code)]
//! Independent oracles shared by the integration tests.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wcnn::grid::GridModel;
use wcnn::mlp::{fisher_diag, forward, gradient, init_params, Batch, FisherDiag, GenBounds, LossSpec, MlpParams};
use wcnn::optcore::{solve_linear_system, DenseMatrix, OptError};
use wcnn::verifier::{solve_worst_case, wc_gradient, InputBox};

pub fn fixture_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect()
}

pub fn fixture(name: &str) -> GridModel {
    GridModel::from_json_file(fixture_path(name)).unwrap()
}

/// Random small ReLU net on the unit box with limits cutting through its
/// observed output range.
pub fn random_net(seed: u64) -> (MlpParams, InputBox, GenBounds) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_in = rng.gen_range(1..=3);
    let n_out = rng.gen_range(1..=3);
    let depth = rng.gen_range(1..=2);
    let mut dims = vec![n_in];
    for _ in 0..depth {
        dims.push(rng.gen_range(2..=6));
    }
    dims.push(n_out);
    let mut p = init_params(&dims, seed).unwrap();
    for b in p.biases.iter_mut().flatten() {
        *b = rng.gen_range(-0.5..0.5);
    }
    let bx = InputBox::unit(n_in);
    let probe: Vec<Vec<f64>> = (0..50)
        .map(|_| forward(&p, &(0..n_in).map(|_| rng.gen::<f64>()).collect::<Vec<_>>()).output)
        .collect();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for g in 0..n_out {
        let lo = probe.iter().map(|o| o[g]).fold(f64::INFINITY, f64::min);
        let hi = probe.iter().map(|o| o[g]).fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-3);
        lower.push(lo + rng.gen_range(0.0..0.4) * span);
        upper.push(hi - rng.gen_range(0.0..0.4) * span);
    }
    (p, bx, GenBounds { lower, upper })
}

pub struct Case {
    pub dims: Vec<usize>,
    pub seed: u64,
}

pub fn cases() -> Vec<Case> {
    let archs = [vec![2, 4, 2], vec![3, 6, 5, 2], vec![4, 8, 6, 4, 3]];
    archs
        .iter()
        .flat_map(|d| (0..3).map(move |s| Case { dims: d.clone(), seed: 17 * s + d.len() as u64 }))
        .collect()
}

pub fn setup(c: &Case) -> (MlpParams, Batch, GenBounds, FisherDiag) {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut p = init_params(&c.dims, c.seed).unwrap();
    for b in p.biases.iter_mut().flatten() {
        *b = rng.gen_range(-0.3..0.3);
    }
    let n_in = c.dims[0];
    let n_out = *c.dims.last().unwrap();
    let batch = Batch {
        inputs: (0..12).map(|_| (0..n_in).map(|_| rng.gen::<f64>()).collect()).collect(),
        targets: (0..12).map(|_| (0..n_out).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
    };
    let gb = GenBounds {
        lower: (0..n_out).map(|_| rng.gen_range(-0.3..0.0)).collect(),
        upper: (0..n_out).map(|_| rng.gen_range(0.0..0.3)).collect(),
    };
    let mut anchor_src = p.clone();
    anchor_src.iter_mut().for_each(|v| *v += rng.gen_range(-0.2..0.2));
    let fisher = fisher_diag(&anchor_src, &batch);
    (p, batch, gb, fisher)
}

/// Relative L2 error of the analytic gradient against central differences.
pub fn fd_relative_error(p: &MlpParams, batch: &Batch, spec: &LossSpec<'_>) -> f64 {
    let an = gradient(p, batch, spec).unwrap().to_flat();
    let base = p.to_flat();
    let h = 1e-7;
    let mut q = p.clone();
    let mut fd = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut x = base.clone();
        x[i] = base[i] + h;
        q.set_flat(&x);
        let up = spec.value(&q, batch).unwrap();
        x[i] = base[i] - h;
        q.set_flat(&x);
        let down = spec.value(&q, batch).unwrap();
        fd.push((up - down) / (2.0 * h));
    }
    let diff: f64 = an.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = an.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / norm.max(1e-12)
}

pub fn solve_vec(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, OptError> {
    let rhs = DenseMatrix::from_vec(b.len(), 1, b.to_vec())?;
    Ok(solve_linear_system(a, &rhs)?.as_slice().to_vec())
}

/// Line flows from nodal injections by solving the reduced angle equations.
pub fn angle_flows(grid: &GridModel, injection: &[f64]) -> Vec<f64> {
    let nb = grid.n_buses();
    let s = grid.slack_index();
    let mut b = DenseMatrix::zeros(nb, nb);
    let mut data = b.as_slice().to_vec();
    for l in &grid.lines {
        let (i, j) = (grid.bus_index(l.from), grid.bus_index(l.to));
        data[i * nb + i] += l.susceptance;
        data[j * nb + j] += l.susceptance;
        data[i * nb + j] -= l.susceptance;
        data[j * nb + i] -= l.susceptance;
    }
    b = DenseMatrix::from_vec(nb, nb, data).unwrap();
    let keep: Vec<usize> = (0..nb).filter(|&k| k != s).collect();
    let rows: Vec<Vec<f64>> = keep.iter().map(|&i| keep.iter().map(|&j| b[(i, j)]).collect()).collect();
    let rhs: Vec<f64> = keep.iter().map(|&i| injection[i]).collect();
    let theta_r = solve_vec(&DenseMatrix::from_rows(&rows).unwrap(), &rhs).unwrap();
    let mut theta = vec![0.0; nb];
    for (k, &i) in keep.iter().enumerate() {
        theta[i] = theta_r[k];
    }
    grid.lines
        .iter()
        .map(|l| l.susceptance * (theta[grid.bus_index(l.from)] - theta[grid.bus_index(l.to)]))
        .collect()
}

/// Cheapest dispatch by enumerating vertices of the feasible polytope.
pub fn vertex_oracle(grid: &GridModel, demand: &[f64]) -> Option<(Vec<f64>, f64)> {
    let ng = grid.n_generators();
    let nb = grid.n_buses();
    let total: f64 = demand.iter().sum();
    let mut load_inj = vec![0.0; nb];
    for (l, d) in grid.loads.iter().zip(demand) {
        load_inj[grid.bus_index(l.bus)] -= d;
    }
    let base = angle_flows(grid, &load_inj);
    let per_gen: Vec<Vec<f64>> = grid
        .generators
        .iter()
        .map(|g| {
            let mut inj = vec![0.0; nb];
            inj[grid.bus_index(g.bus)] = 1.0;
            angle_flows(grid, &inj)
        })
        .collect();
    // rows a.p <= b
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (k, g) in grid.generators.iter().enumerate() {
        let mut e = vec![0.0; ng];
        e[k] = 1.0;
        rows.push((e.clone(), g.p_max));
        rows.push((e.iter().map(|v| -v).collect(), -g.p_min));
    }
    for (l, line) in grid.lines.iter().enumerate() {
        let a: Vec<f64> = (0..ng).map(|k| per_gen[k][l]).collect();
        rows.push((a.clone(), line.flow_limit - base[l]));
        rows.push((a.iter().map(|v| -v).collect(), line.flow_limit + base[l]));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let pick = ng - 1;
    let mut idx: Vec<usize> = (0..pick).collect();
    loop {
        let mut m = vec![vec![1.0; ng]];
        let mut rhs = vec![total];
        for &i in &idx {
            m.push(rows[i].0.clone());
            rhs.push(rows[i].1);
        }
        if let Ok(p) = solve_vec(&DenseMatrix::from_rows(&m).unwrap(), &rhs) {
            let ok = rows.iter().all(|(a, b)| a.iter().zip(&p).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-7);
            if ok {
                let cost: f64 = grid.generators.iter().zip(&p).map(|(g, x)| g.cost * x).sum();
                if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                    best = Some((p, cost));
                }
            }
        }
        // next combination
        let mut i = pick;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < rows.len() - pick + i {
                idx[i] += 1;
                for j in i + 1..pick {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if pick == 0 {
            return best;
        }
    }
}

pub fn injections(g: &GridModel, p: &[f64], d: &[f64]) -> Vec<f64> {
    let mut inj = vec![0.0; g.n_buses()];
    for (gen, x) in g.generators.iter().zip(p) {
        inj[g.bus_index(gen.bus)] += x;
    }
    for (l, x) in g.loads.iter().zip(d) {
        inj[g.bus_index(l.bus)] -= x;
    }
    inj
}

/// Central difference of v_g along a random direction next to the envelope
/// gradient, for nets whose maximizer has every preactivation at least 1e-3
/// from zero and stays on the same constraint and box vertex under the
/// perturbation. `None` when the net does not qualify.
pub fn envelope_check(seed: u64) -> Option<(f64, f64)> {
    let h = 1e-6;
    let (p, bx, gb) = random_net(1000 + seed);
    let c = solve_worst_case(&p, &bx, &gb).unwrap();
    if c.v_g <= 1e-3 {
        return None;
    }
    let t = forward(&p, &c.witness_input);
    if t.preactivations.iter().flatten().any(|z| z.abs() < 1e-3) {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = p.zeros_like();
    dir.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let eval = |s: f64| {
        let mut q = p.clone();
        q.axpy(s, &dir);
        solve_worst_case(&q, &bx, &gb).unwrap()
    };
    let (plus, minus) = (eval(h), eval(-h));
    let stable = [&plus, &minus]
        .iter()
        .all(|x| x.constraint_id == c.constraint_id && x.witness_input == c.witness_input);
    if !stable {
        return None;
    }
    let fd = (plus.v_g - minus.v_g) / (2.0 * h);
    Some((fd, wc_gradient(&p, &c, false).unwrap().dot(&dir)))
}
