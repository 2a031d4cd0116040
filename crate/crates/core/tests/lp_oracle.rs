//! Simplex vs. brute-force vertex enumeration on small random programs.

use proptest::prelude::*;
use wcnn::optcore::{solve_linear_system, solve_lp, DenseMatrix, LpProblem, LpStatus};

/// Every constraint as `a.x <= b`, including bounds.
fn halfspaces(p: &LpProblem) -> Vec<(Vec<f64>, f64)> {
    let n = p.num_vars();
    let mut out = Vec::new();
    for i in 0..p.a_ub.rows() {
        out.push((p.a_ub.row(i).to_vec(), p.b_ub[i]));
    }
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        out.push((e.clone(), hi));
        e[j] = -1.0;
        out.push((e, -lo));
    }
    out
}

fn combinations(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, k, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, n, &mut Vec::new(), &mut out);
    out
}

/// Best objective over all basic feasible points, `None` when there are none.
fn vertex_enumeration(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let hs = halfspaces(p);
    let mut best: Option<f64> = None;
    for combo in combinations(n, hs.len()) {
        let rows: Vec<Vec<f64>> = combo.iter().map(|&i| hs[i].0.clone()).collect();
        let a = DenseMatrix::from_rows(&rows).unwrap();
        let b = DenseMatrix::from_vec(n, 1, combo.iter().map(|&i| hs[i].1).collect()).unwrap();
        let Ok(x) = solve_linear_system(&a, &b) else { continue };
        let x = x.column(0);
        let feasible = hs
            .iter()
            .all(|(row, rhs)| row.iter().zip(&x).map(|(r, v)| r * v).sum::<f64>() <= rhs + 1e-9);
        if feasible {
            let obj: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
    }
    best
}

fn arb_lp() -> impl Strategy<Value = LpProblem> {
    (1usize..=6, 0usize..=6).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, n), m),
            prop::collection::vec(-2.0..8.0f64, m),
            prop::collection::vec((-3.0..1.0f64, 0.5..4.0f64), n),
        )
            .prop_map(move |(c, rows, rhs, bnds)| {
                let mut p = LpProblem::new(c);
                for (r, b) in rows.iter().zip(&rhs) {
                    p.add_ub(r, *b);
                }
                for (j, (lo, w)) in bnds.into_iter().enumerate() {
                    p.set_bounds(j, lo, lo + w);
                }
                p
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(p in arb_lp()) {
        let sol = solve_lp(&p).unwrap();
        match vertex_enumeration(&p) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective_value - best).abs() <= 1e-7 * (1.0 + best.abs()),
                    "simplex {} vs enumeration {}", sol.objective_value, best);
                for i in 0..p.a_ub.rows() {
                    let lhs: f64 = p.a_ub.row(i).iter().zip(&sol.x).map(|(a, x)| a * x).sum();
                    prop_assert!(lhs <= p.b_ub[i] + 1e-7);
                }
                for (x, &(lo, hi)) in sol.x.iter().zip(&p.bounds) {
                    prop_assert!(*x >= lo - 1e-9 && *x <= hi + 1e-9);
                }
            }
        }
    }

    #[test]
    fn simplex_is_deterministic(p in arb_lp()) {
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.iteration_count, b.iteration_count);
        prop_assert!(a.x.iter().zip(&b.x).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn equality_rows_are_satisfied(p in arb_lp(), w in prop::collection::vec(-2.0..2.0f64, 6)) {
        // add one equality through an interior-ish point so it stays feasible
        let n = p.num_vars();
        let mut q = p.clone();
        let mid: Vec<f64> = q.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
        let row: Vec<f64> = w[..n].to_vec();
        let rhs: f64 = row.iter().zip(&mid).map(|(a, b)| a * b).sum();
        q.a_ub = DenseMatrix::zeros(0, n);
        q.b_ub.clear();
        q.add_eq(&row, rhs);
        let sol = solve_lp(&q).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-7);
        if let Some(best) = vertex_enumeration_with_eq(&q) {
            prop_assert!((sol.objective_value - best).abs() <= 1e-7 * (1.0 + best.abs()));
        }
    }
}

/// Equality rows folded in as two opposite halfspaces.
fn vertex_enumeration_with_eq(p: &LpProblem) -> Option<f64> {
    let mut q = p.clone();
    for i in 0..p.a_eq.rows() {
        let row = p.a_eq.row(i).to_vec();
        q.add_ub(&row, p.b_eq[i]);
        q.add_ge(&row, p.b_eq[i]);
    }
    q.a_eq = DenseMatrix::zeros(0, p.num_vars());
    q.b_eq.clear();
    vertex_enumeration(&q)
}

#[test]
fn textbook_vertex_oracle() {
    let mut p = LpProblem::new(vec![3.0, 5.0]);
    p.add_ub(&[1.0, 0.0], 4.0).add_ub(&[0.0, 2.0], 12.0).add_ub(&[3.0, 2.0], 18.0);
    p.set_bounds(0, 0.0, 100.0).set_bounds(1, 0.0, 100.0);
    assert_eq!(vertex_enumeration(&p), Some(36.0));
    let s = solve_lp(&p).unwrap();
    assert!((s.objective_value - 36.0).abs() < 1e-9);
}
