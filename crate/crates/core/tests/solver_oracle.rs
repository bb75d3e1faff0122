//! The interior-point solver against an independent dual barrier method
//! written directly on nalgebra, plus analytic instances.

mod common;

use common::oracle::{term, Instance};
use common::*;
use mdirand::linalg::RealMatrix;
use mdirand::sdp::{preprocess, BlockTerm, Constraint, SdpProblem, SparseSym};
use mdirand::solver::{certify_upper_bound, solve, SolveStatus, SolverOptions};

fn solve_raw(p: &SdpProblem) -> mdirand::solver::SdpSolution {
    let (q, _) = preprocess(p).unwrap();
    solve(&q, &SolverOptions::default()).unwrap()
}

#[test]
fn random_instances_match_barrier_oracle() {
    let mut r = rng(7);
    for case in 0..24 {
        let inst = Instance::random(&mut r, 3, 1 + case % 5);
        let oracle = inst.barrier_oracle();
        let sol = solve_raw(&inst.problem());
        assert_eq!(sol.status, SolveStatus::Optimal, "case {case}");
        let bound = sol.certified_upper_bound.unwrap();
        assert!((bound - oracle).abs() < 1e-6, "case {case}: {bound} vs {oracle}");
        assert!((sol.primal_objective - oracle).abs() < 1e-6, "case {case}");
        assert!(bound >= sol.primal_objective - 1e-9);
    }
}

#[test]
fn max_eigenvalue_instances() {
    let mut r = rng(8);
    for n in 2..7 {
        let c = random_symmetric(&mut r, n);
        let p = SdpProblem::new(
            vec![n],
            vec![term(&c)],
            vec![Constraint::new(vec![term(&RealMatrix::identity(n))], 1.0, "trace")],
        )
        .unwrap();
        let want = to_nalgebra(&c).symmetric_eigen().eigenvalues.max();
        let sol = solve_raw(&p);
        assert!((sol.certified_upper_bound.unwrap() - want).abs() < 1e-8, "n = {n}");
        assert!((sol.primal_objective - want).abs() < 1e-8);
    }
}

#[test]
fn fully_determined_instances() {
    let mut r = rng(9);
    for n in 2..5 {
        let c = random_symmetric(&mut r, n);
        let mut rows = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let e = SparseSym::from_entries(n, [(i, j, 1.0)]).unwrap();
                let rhs = if i == j { 0.5 } else { 0.0 };
                rows.push(Constraint::new(vec![BlockTerm { block: 0, matrix: e }], rhs, format!("x{i}{j}")));
            }
        }
        let p = SdpProblem::new(vec![n], vec![term(&c)], rows).unwrap();
        let sol = solve_raw(&p);
        assert!((sol.certified_upper_bound.unwrap() - c.trace() / 2.0).abs() < 1e-8);
        assert!((sol.primal_objective - c.trace() / 2.0).abs() < 1e-8);
    }
}

#[test]
fn weak_duality_on_feasible_iterates() {
    let mut r = rng(10);
    let mut checked = 0;
    for _ in 0..20 {
        let sol = solve_raw(&Instance::random(&mut r, 3, 4).problem());
        let feasible: Vec<_> = sol
            .iterations
            .iter()
            .filter(|it| it.primal_infeasibility < 1e-12 && it.dual_infeasibility < 1e-12)
            .collect();
        checked += feasible.len();
        for it in feasible {
            assert!(it.dual_objective >= it.primal_objective - 1e-12, "{it:?}");
        }
        assert!(sol.dual_objective >= sol.primal_objective - 1e-9);
    }
    assert!(checked >= 20, "only {checked} feasible iterates");
}

#[test]
fn certificate_dominates_dual_and_primal() {
    let mut r = rng(12);
    for _ in 0..20 {
        let (q, _) = preprocess(&Instance::random(&mut r, 3, 3).problem()).unwrap();
        let sol = solve(&q, &SolverOptions::default()).unwrap();
        let cert = certify_upper_bound(&q, &sol).unwrap();
        assert!(cert.bound >= sol.dual_objective - 1e-15);
        assert!(cert.bound >= sol.primal_objective - 1e-9);
        for xb in &sol.x {
            assert!(mdirand::linalg::min_eigenvalue_sym(xb).unwrap() > -1e-9);
        }
    }
}

#[test]
fn identical_inputs_give_identical_logs() {
    let inst = Instance::random(&mut rng(13), 3, 4);
    let (a, b) = (solve_raw(&inst.problem()), solve_raw(&inst.problem()));
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.y, b.y);
}
