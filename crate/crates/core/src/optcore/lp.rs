//! Dense bounded-variable primal simplex.
//!
//! The problem is brought into the internal form `A' x' (+ s) = b'`,
//! `0 <= x' <= u'` by shifting/reflecting/splitting variables; upper-bound
//! rows get a slack. Phase one starts from a slack/artificial basis and
//! maximizes the negated artificial sum, phase two the real objective with the
//! artificials frozen at zero. Nonbasic variables sit at either bound, so no
//! big-M penalty appears anywhere.

use super::{DenseMatrix, OptError, TOL};

const BLAND_AFTER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `maximize c.x` subject to `a_eq x = b_eq`, `a_ub x <= b_ub` and per-variable
/// bounds (either side may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub a_eq: DenseMatrix,
    pub b_eq: Vec<f64>,
    pub a_ub: DenseMatrix,
    pub b_ub: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iteration_count: usize,
}

impl LpProblem {
    /// New problem with no rows and every variable in `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            a_eq: DenseMatrix::zeros(0, n),
            b_eq: Vec::new(),
            a_ub: DenseMatrix::zeros(0, n),
            b_ub: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn add_ub(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        self.a_ub.push_row(row);
        self.b_ub.push(rhs);
        self
    }

    /// `row . x >= rhs`, stored as a negated upper-bound row.
    pub fn add_ge(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        self.add_ub(&neg, -rhs)
    }

    fn validate(&self) -> Result<(), OptError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(OptError::Dimension(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        for (name, a, b) in [("equality", &self.a_eq, &self.b_eq), ("inequality", &self.a_ub, &self.b_ub)] {
            if a.rows() > 0 && a.cols() != n {
                return Err(OptError::Dimension(format!("{name} matrix has {} columns, expected {n}", a.cols())));
            }
            if a.rows() != b.len() {
                return Err(OptError::Dimension(format!("{name} rhs length {} vs {} rows", b.len(), a.rows())));
            }
            if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
                return Err(OptError::NonFinite("constraints"));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(OptError::NonFinite("objective"));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(OptError::InvalidBounds(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// One internal column: `x[orig] += sign * x'` for structural columns.
#[derive(Debug, Clone, Copy)]
enum ColumnKind {
    Structural { orig: usize, sign: f64 },
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    ncols: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    upper: Vec<f64>,
    kinds: Vec<ColumnKind>,
    d: Vec<f64>,
    iterations: usize,
    cap: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.ncols + j]
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic(r) => self.beta[r],
            VarState::AtLower => 0.0,
            VarState::AtUpper => self.upper[j],
        }
    }

    fn price(&mut self, costs: &[f64]) {
        self.d.copy_from_slice(costs);
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
            for (dj, a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v /= piv;
        }
        self.t[r * nc + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for (a, p) in row.iter_mut().zip(prow.iter()) {
                *a -= f * p;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for (a, p) in self.d.iter_mut().zip(prow.iter()) {
                *a -= f * p;
            }
            self.d[q] = 0.0;
        }
    }

    fn run_phase(&mut self, can_enter: &[bool]) -> Result<PhaseOutcome, OptError> {
        let mut bland = false;
        let mut stalled = 0usize;
        loop {
            // entering variable
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.ncols {
                if !can_enter[j] || self.upper[j] <= 0.0 {
                    continue;
                }
                let score = match self.state[j] {
                    VarState::Basic(_) => continue,
                    VarState::AtLower => self.d[j],
                    VarState::AtUpper => -self.d[j],
                };
                if score <= TOL.objective {
                    continue;
                }
                match enter {
                    None => enter = Some((j, score)),
                    Some((_, best)) if !bland && score > best => enter = Some((j, score)),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some((q, score)) = enter else {
                return Ok(PhaseOutcome::Optimal);
            };

            self.iterations += 1;
            if self.iterations > self.cap {
                return Err(OptError::NumericalBreakdown(self.cap));
            }

            let dir = if self.state[q] == VarState::AtLower { 1.0 } else { -1.0 };

            // ratio test
            let mut best_t = self.upper[q];
            let mut leave: Option<(usize, f64, bool)> = None; // (row, |alpha|, to_upper)
            for i in 0..self.m {
                let alpha = self.entry(i, q) * dir;
                let b = self.basis[i];
                let (limit, to_upper) = if alpha > TOL.ratio {
                    (self.beta[i].max(0.0) / alpha, false)
                } else if alpha < -TOL.ratio && self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let tie_eps = 1e-12 * limit.max(1.0);
                let accept = match leave {
                    None => limit < best_t - tie_eps,
                    Some((lr, la, _)) => {
                        if limit < best_t - tie_eps {
                            true
                        } else if limit > best_t + tie_eps {
                            false
                        } else if bland {
                            b < self.basis[lr]
                        } else {
                            alpha.abs() > la || (alpha.abs() == la && b < self.basis[lr])
                        }
                    }
                };
                if accept {
                    best_t = best_t.min(limit);
                    leave = Some((i, alpha.abs(), to_upper));
                }
            }

            if !best_t.is_finite() {
                return Ok(PhaseOutcome::Unbounded);
            }
            let t = best_t;

            if score * t <= TOL.objective {
                stalled += 1;
                if stalled >= BLAND_AFTER {
                    bland = true;
                }
            } else {
                stalled = 0;
            }

            if t != 0.0 {
                for i in 0..self.m {
                    let a = self.entry(i, q);
                    if a != 0.0 {
                        self.beta[i] -= a * dir * t;
                    }
                }
            }
            let entering_value = self.value(q) + dir * t;

            match leave {
                Some((r, _, to_upper)) => {
                    let out = self.basis[r];
                    self.state[out] = if to_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.basis[r] = q;
                    self.state[q] = VarState::Basic(r);
                    self.beta[r] = entering_value;
                    self.pivot(r, q);
                }
                None => {
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                }
            }
        }
    }
}

/// Solves a linear program with the bounded-variable primal simplex.
///
/// Deterministic: entering candidates are scanned in index order (Dantzig
/// pricing, lowest index on ties), and after a long run of non-improving
/// pivots the solver switches to Bland's rule for the rest of the phase.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, OptError> {
    p.validate()?;
    let n = p.num_vars();

    let infeasible = |iterations| LpSolution {
        status: LpStatus::Infeasible,
        x: vec![0.0; n],
        objective_value: f64::NEG_INFINITY,
        iteration_count: iterations,
    };
    if p.bounds.iter().any(|&(lo, hi)| lo > hi) {
        return Ok(infeasible(0));
    }

    // Variable transformation.
    let mut offset = vec![0.0; n];
    let mut kinds = Vec::new();
    let mut upper = Vec::new();
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        if lo.is_finite() {
            offset[j] = lo;
            kinds.push(ColumnKind::Structural { orig: j, sign: 1.0 });
            upper.push(hi - lo);
        } else if hi.is_finite() {
            offset[j] = hi;
            kinds.push(ColumnKind::Structural { orig: j, sign: -1.0 });
            upper.push(f64::INFINITY);
        } else {
            kinds.push(ColumnKind::Structural { orig: j, sign: 1.0 });
            upper.push(f64::INFINITY);
            kinds.push(ColumnKind::Structural { orig: j, sign: -1.0 });
            upper.push(f64::INFINITY);
        }
    }
    let n_struct = kinds.len();
    let m_eq = p.a_eq.rows();
    let m_ub = p.a_ub.rows();
    let m = m_eq + m_ub;

    // Rows in internal form, sign-normalized so the rhs is nonnegative.
    struct Row {
        coefs: Vec<f64>,
        rhs: f64,
        slack: Option<f64>,
    }
    let mut rows = Vec::with_capacity(m);
    let build = |a: &[f64], b: f64, has_slack: bool| {
        let mut coefs = Vec::with_capacity(n_struct);
        for kind in &kinds {
            if let ColumnKind::Structural { orig, sign } = *kind {
                coefs.push(a[orig] * sign);
            }
        }
        let shift: f64 = a.iter().zip(&offset).map(|(x, o)| x * o).sum();
        let mut row = Row {
            coefs,
            rhs: b - shift,
            slack: has_slack.then_some(1.0),
        };
        if row.rhs < 0.0 {
            row.rhs = -row.rhs;
            row.coefs.iter_mut().for_each(|c| *c = -*c);
            row.slack = row.slack.map(|s| -s);
        }
        row
    };
    for i in 0..m_eq {
        rows.push(build(p.a_eq.row(i), p.b_eq[i], false));
    }
    for i in 0..m_ub {
        rows.push(build(p.a_ub.row(i), p.b_ub[i], true));
    }

    // Column layout: structural | slacks | artificials.
    for _ in 0..m_ub {
        kinds.push(ColumnKind::Slack);
        upper.push(f64::INFINITY);
    }
    let mut basis = vec![usize::MAX; m];
    let mut n_art = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.slack != Some(1.0) {
            basis[i] = n_struct + m_ub + n_art;
            n_art += 1;
        }
    }
    for _ in 0..n_art {
        kinds.push(ColumnKind::Artificial);
        upper.push(f64::INFINITY);
    }
    let ncols = kinds.len();

    let mut t = vec![0.0; m * ncols];
    let mut beta = vec![0.0; m];
    let mut art_seen = 0;
    for (i, row) in rows.iter().enumerate() {
        let base = i * ncols;
        t[base..base + n_struct].copy_from_slice(&row.coefs);
        if let Some(s) = row.slack {
            t[base + n_struct + (i - m_eq)] = s;
        }
        if row.slack == Some(1.0) {
            basis[i] = n_struct + (i - m_eq);
        } else {
            t[base + n_struct + m_ub + art_seen] = 1.0;
            art_seen += 1;
        }
        beta[i] = row.rhs;
    }
    let mut state = vec![VarState::AtLower; ncols];
    for (i, &b) in basis.iter().enumerate() {
        state[b] = VarState::Basic(i);
    }

    let mut tab = Tableau {
        m,
        ncols,
        t,
        beta,
        basis,
        state,
        upper,
        kinds,
        d: vec![0.0; ncols],
        iterations: 0,
        cap: 50 * (ncols + m).max(1),
    };

    let can_enter: Vec<bool> = tab
        .kinds
        .iter()
        .map(|k| !matches!(k, ColumnKind::Artificial))
        .collect();

    if n_art > 0 {
        let costs: Vec<f64> = tab
            .kinds
            .iter()
            .map(|k| if matches!(k, ColumnKind::Artificial) { -1.0 } else { 0.0 })
            .collect();
        tab.price(&costs);
        tab.run_phase(&can_enter)?;
        let residual: f64 = (0..ncols)
            .filter(|&j| matches!(tab.kinds[j], ColumnKind::Artificial))
            .map(|j| tab.value(j))
            .sum();
        let scale = rows.iter().fold(1.0_f64, |s, r| s.max(r.rhs.abs()));
        if residual > TOL.feas * scale {
            return Ok(infeasible(tab.iterations));
        }
        for j in 0..ncols {
            if matches!(tab.kinds[j], ColumnKind::Artificial) {
                tab.upper[j] = 0.0;
                if let VarState::Basic(r) = tab.state[j] {
                    tab.beta[r] = 0.0;
                } else {
                    tab.state[j] = VarState::AtLower;
                }
            }
        }
    }

    let costs: Vec<f64> = tab
        .kinds
        .iter()
        .map(|k| match *k {
            ColumnKind::Structural { orig, sign } => p.objective[orig] * sign,
            _ => 0.0,
        })
        .collect();
    tab.price(&costs);
    if let PhaseOutcome::Unbounded = tab.run_phase(&can_enter)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective_value: f64::INFINITY,
            iteration_count: tab.iterations,
        });
    }

    let mut x = offset;
    for j in 0..n_struct {
        if let ColumnKind::Structural { orig, sign } = tab.kinds[j] {
            x[orig] += sign * tab.value(j);
        }
    }
    for (xj, &(lo, hi)) in x.iter_mut().zip(&p.bounds) {
        *xj = xj.clamp(lo, hi);
    }
    let objective_value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        iteration_count: tab.iterations,
    })
}
