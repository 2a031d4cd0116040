use serde::{Deserialize, Serialize};

use super::{compute_ptdf, GridError, GridModel, Ptdf};
use crate::optcore::{solve_lp, LpProblem, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution {
    pub status: DispatchStatus,
    /// MW per generator
    pub p_g: Vec<f64>,
    /// $/h
    pub objective_cost: f64,
    /// MW per line
    pub line_flows: Vec<f64>,
}

/// Cost-minimal dispatch under power balance, generator limits and PTDF line
/// limits.
pub fn solve_dcopf(grid: &GridModel, demand: &[f64]) -> Result<DispatchSolution, GridError> {
    let ptdf = compute_ptdf(grid)?;
    solve_dcopf_with(grid, &ptdf, demand)
}

/// Same as [`solve_dcopf`] with a precomputed PTDF.
pub(crate) fn solve_dcopf_with(
    grid: &GridModel,
    ptdf: &Ptdf,
    demand: &[f64],
) -> Result<DispatchSolution, GridError> {
    let ng = grid.n_generators();
    let nb = grid.n_buses();
    if demand.len() != grid.n_loads() {
        return Err(GridError::DemandLength {
            expected: grid.n_loads(),
            got: demand.len(),
        });
    }

    let mut load_inj = vec![0.0; nb];
    for (load, d) in grid.loads.iter().zip(demand) {
        load_inj[grid.bus_index(load.bus)] -= d;
    }
    let base_flow = ptdf.flows(&load_inj);

    let mut lp = LpProblem::new(grid.generators.iter().map(|g| -g.cost).collect());
    for (k, g) in grid.generators.iter().enumerate() {
        lp.set_bounds(k, g.p_min, g.p_max);
    }
    lp.add_eq(&vec![1.0; ng], demand.iter().sum());
    for (l, line) in grid.lines.iter().enumerate() {
        let row: Vec<f64> = grid
            .generators
            .iter()
            .map(|g| ptdf.matrix[(l, grid.bus_index(g.bus))])
            .collect();
        if row.iter().all(|v| *v == 0.0) && base_flow[l].abs() <= line.flow_limit {
            continue;
        }
        lp.add_ub(&row, line.flow_limit - base_flow[l]);
        lp.add_ge(&row, -line.flow_limit - base_flow[l]);
    }

    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut inj = load_inj;
            for (g, p) in grid.generators.iter().zip(&sol.x) {
                inj[grid.bus_index(g.bus)] += p;
            }
            Ok(DispatchSolution {
                status: DispatchStatus::Optimal,
                objective_cost: -sol.objective_value,
                line_flows: ptdf.flows(&inj),
                p_g: sol.x,
            })
        }
        // costs are bounded below because generator limits are finite
        LpStatus::Infeasible | LpStatus::Unbounded => Ok(DispatchSolution {
            status: DispatchStatus::Infeasible,
            p_g: vec![f64::NAN; ng],
            objective_cost: f64::NAN,
            line_flows: vec![f64::NAN; grid.lines.len()],
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Generator, Line, Load};

    fn two_gen_grid(limit: f64) -> GridModel {
        GridModel::new(
            vec![1, 2],
            1,
            vec![
                Generator { bus: 1, p_min: 0.0, p_max: 100.0, cost: 10.0 },
                Generator { bus: 2, p_min: 0.0, p_max: 100.0, cost: 20.0 },
            ],
            vec![Load { bus: 2, demand: 150.0 }],
            vec![Line { from: 1, to: 2, susceptance: 10.0, flow_limit: limit }],
        )
        .unwrap()
    }

    #[test]
    fn zero_demand_dispatch() {
        let g = two_gen_grid(1000.0);
        let s = solve_dcopf(&g, &[0.0]).unwrap();
        assert_eq!(s.status, DispatchStatus::Optimal);
        assert_eq!(s.p_g, vec![0.0, 0.0]);
        assert_eq!(s.objective_cost, 0.0);
    }

    #[test]
    fn merit_order() {
        let g = two_gen_grid(1000.0);
        let s = solve_dcopf(&g, &[150.0]).unwrap();
        assert!((s.p_g[0] - 100.0).abs() < 1e-9 && (s.p_g[1] - 50.0).abs() < 1e-9);
        assert!((s.objective_cost - 2000.0).abs() < 1e-6);
    }

    #[test]
    fn congested_transfer() {
        let g = two_gen_grid(40.0);
        // at 150 MW the 40 MW transfer cap leaves the 100 MW local unit short
        assert_eq!(solve_dcopf(&g, &[150.0]).unwrap().status, DispatchStatus::Infeasible);
        let s = solve_dcopf(&g, &[130.0]).unwrap();
        assert!((s.p_g[0] - 40.0).abs() < 1e-9 && (s.p_g[1] - 90.0).abs() < 1e-9);
        assert!((s.objective_cost - 2200.0).abs() < 1e-6);
        assert!(s.line_flows[0].abs() <= 40.0 + 1e-9);
    }

    #[test]
    fn over_capacity_is_infeasible() {
        let g = two_gen_grid(1000.0);
        let s = solve_dcopf(&g, &[250.0]).unwrap();
        assert_eq!(s.status, DispatchStatus::Infeasible);
        assert!(solve_dcopf(&g, &[1.0, 2.0]).is_err());
    }
}
