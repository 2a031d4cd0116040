use super::{GridError, GridModel};
use crate::optcore::{solve_linear_system, DenseMatrix, OptError};

/// Line flow sensitivities (lines x buses), MW per MW injected at a bus and
/// withdrawn at the slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Ptdf {
    pub matrix: DenseMatrix,
}

impl Ptdf {
    /// DC line flows for a per-bus injection vector.
    pub fn flows(&self, injections: &[f64]) -> Vec<f64> {
        self.matrix.matvec(injections)
    }
}

pub fn compute_ptdf(grid: &GridModel) -> Result<Ptdf, GridError> {
    let nb = grid.n_buses();
    let nl = grid.lines.len();
    let slack = grid.slack_index();

    // reduced bus index: skip the slack
    let reduced = |b: usize| -> Option<usize> {
        match b.cmp(&slack) {
            std::cmp::Ordering::Less => Some(b),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(b - 1),
        }
    };

    let mut b_red = DenseMatrix::zeros(nb - 1, nb - 1);
    for line in &grid.lines {
        let (f, t) = (grid.bus_index(line.from), grid.bus_index(line.to));
        let b = line.susceptance;
        if let Some(i) = reduced(f) {
            b_red[(i, i)] += b;
        }
        if let Some(j) = reduced(t) {
            b_red[(j, j)] += b;
        }
        if let (Some(i), Some(j)) = (reduced(f), reduced(t)) {
            b_red[(i, j)] -= b;
            b_red[(j, i)] -= b;
        }
    }

    // angle sensitivities: theta_red = B_red^{-1} p_red
    let x = if nb > 1 {
        solve_linear_system(&b_red, &DenseMatrix::identity(nb - 1)).map_err(|e| match e {
            OptError::SingularMatrix { .. } => GridError::SingularNetwork,
            other => GridError::Opt(other),
        })?
    } else {
        DenseMatrix::zeros(0, 0)
    };
    let theta = |bus: usize, inj: usize| -> f64 {
        match (reduced(bus), reduced(inj)) {
            (Some(i), Some(k)) => x[(i, k)],
            _ => 0.0,
        }
    };

    let mut m = DenseMatrix::zeros(nl, nb);
    for (l, line) in grid.lines.iter().enumerate() {
        let (f, t) = (grid.bus_index(line.from), grid.bus_index(line.to));
        for k in 0..nb {
            m[(l, k)] = line.susceptance * (theta(f, k) - theta(t, k));
        }
    }
    Ok(Ptdf { matrix: m })
}
