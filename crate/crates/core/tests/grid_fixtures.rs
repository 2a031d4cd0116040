use proptest::prelude::*;

mod support;

use support::{angle_flows, fixture, injections, vertex_oracle};
use wcnn::grid::{compute_ptdf, generate_dataset, sample_demands_lhs, solve_dcopf, DispatchStatus, Split};

#[test]
fn ring_merit_order() {
    let g = fixture("case3.json");
    let s = solve_dcopf(&g, &[48.0, 72.0]).unwrap();
    assert_eq!(s.status, DispatchStatus::Optimal);
    assert!((s.p_g[0] - 110.0).abs() < 1e-6 && (s.p_g[1] - 10.0).abs() < 1e-6);
    assert!((s.objective_cost - 1400.0).abs() < 1e-6);
}

#[test]
fn ring_congestion() {
    let g = fixture("case3.json");
    let s = solve_dcopf(&g, &[48.0, 120.0]).unwrap();
    assert!((s.p_g[0] - 135.0).abs() < 1e-6 && (s.p_g[1] - 33.0).abs() < 1e-6);
    assert!((s.objective_cost - 2340.0).abs() < 1e-6);
    assert!((s.line_flows[1] - 85.0).abs() < 1e-6);
}

#[test]
fn dispatch_matches_vertex_enumeration() {
    for name in ["case3.json", "case5.json", "case9.json"] {
        let g = fixture(name);
        let demands = sample_demands_lhs(&g, 40, 3);
        for d in demands.to_rows() {
            let s = solve_dcopf(&g, &d).unwrap();
            match vertex_oracle(&g, &d) {
                Some((_, cost)) => {
                    assert_eq!(s.status, DispatchStatus::Optimal, "{name} {d:?}");
                    assert!((s.objective_cost - cost).abs() <= 1e-6, "{name}: {} vs {cost}", s.objective_cost);
                    let flows = angle_flows(&g, &injections(&g, &s.p_g, &d));
                    for (a, b) in flows.iter().zip(&s.line_flows) {
                        assert!((a - b).abs() < 1e-6);
                    }
                }
                None => assert_eq!(s.status, DispatchStatus::Infeasible, "{name} {d:?}"),
            }
        }
    }
}

#[test]
fn power_balance_on_lhs_samples() {
    for name in ["case3.json", "case5.json", "case9.json"] {
        let g = fixture(name);
        let mut optimal = 0;
        for d in sample_demands_lhs(&g, 1000, 11).to_rows() {
            let s = solve_dcopf(&g, &d).unwrap();
            if s.status == DispatchStatus::Optimal {
                optimal += 1;
                let gap = s.p_g.iter().sum::<f64>() - d.iter().sum::<f64>();
                assert!(gap.abs() <= 1e-5, "{name}: imbalance {gap}");
            }
        }
        assert_eq!(optimal, 1000, "{name}");
    }
}

#[test]
fn generated_split_counts() {
    let g = fixture("case3.json");
    let ds = generate_dataset(&g, 100, 1).unwrap();
    assert_eq!((ds.count(Split::Train), ds.count(Split::Val), ds.count(Split::Test)), (70, 10, 20));
}

proptest! {
    #[test]
    fn ptdf_is_linear(a in prop::collection::vec(-100.0f64..100.0, 9), b in prop::collection::vec(-100.0f64..100.0, 9)) {
        let g = fixture("case9.json");
        let ptdf = compute_ptdf(&g).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (fa, fb, fs) = (ptdf.flows(&a), ptdf.flows(&b), ptdf.flows(&sum));
        for i in 0..fs.len() {
            prop_assert!((fs[i] - fa[i] - fb[i]).abs() <= 1e-8);
        }
    }

    #[test]
    fn ptdf_matches_angle_solution(inj in prop::collection::vec(-50.0f64..50.0, 5)) {
        let g = fixture("case5.json");
        let ptdf = compute_ptdf(&g).unwrap();
        let mut balanced = inj.clone();
        let s = g.slack_index();
        balanced[s] -= inj.iter().sum::<f64>();
        let direct = angle_flows(&g, &balanced);
        for (x, y) in ptdf.flows(&balanced).iter().zip(&direct) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }
}
