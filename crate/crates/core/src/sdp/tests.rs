use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::qlinalg::{c, ComplexMatrix, HermitianOperator, SubsystemShape};

type H = HermitianOperator<f64>;

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> H {
    let m = ComplexMatrix::<f64>::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    H::from_matrix((&m + m.adjoint()).map(|z| z * 0.5)).unwrap()
}

/// Hermitian positive definiteness via an explicit Cholesky sweep with real
/// pivots.
fn is_pd(m: &ComplexMatrix<f64>) -> bool {
    let n = m.nrows();
    let mut l = ComplexMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// Smallest eigenvalue by bisection on positive definiteness of `W − tI`.
fn min_eig_bisection(w: &H) -> f64 {
    let n = w.dim();
    let pd = |t: f64| is_pd(&(w.matrix() - ComplexMatrix::<f64>::identity(n, n) * c(t, 0.0)));
    let bound = w.matrix().iter().map(|z| z.norm_sqr().sqrt()).sum::<f64>() + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `min tr[Wρ]` over density matrices.
fn min_expectation(w: &H) -> Solution<f64> {
    let mut p = ConicProgram::new();
    let (_, rho) = p.add_hermitian_block("rho", w.shape().clone());
    p.add_constraint(rho.trace(), 1.0);
    p.set_objective(rho.trace_with(w).unwrap(), Sense::Minimize);
    solve(&p)
}

#[test]
fn largest_eigenvalue_of_diag() {
    let mut p = ConicProgram::<f64>::new();
    let x = p.add_psd_block("X", 2);
    let mut tr = LinExpr::var(p.entry(x, 0, 0));
    tr.add_term(p.entry(x, 1, 1), 1.0);
    p.add_constraint(tr, 1.0);
    let mut obj = LinExpr::var(p.entry(x, 0, 0));
    obj.add_term(p.entry(x, 1, 1), 3.0);
    p.set_objective(obj, Sense::Maximize);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective() - 3.0).abs() < 1e-7, "{}", s.objective());
    assert!((s.dual_objective - 3.0).abs() < 1e-7);
}

#[test]
fn trace_with_fixed_corner() {
    let mut p = ConicProgram::<f64>::new();
    let x = p.add_psd_block("X", 2);
    p.add_constraint(LinExpr::var(p.entry(x, 0, 0)), 2.0);
    let mut tr = LinExpr::var(p.entry(x, 0, 0));
    tr.add_term(p.entry(x, 1, 1), 1.0);
    p.set_objective(tr, Sense::Minimize);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective() - 2.0).abs() < 1e-7);
    assert!(s.primal_residual < 1e-8);
    assert!(s.min_block_eigenvalue() > -1e-8);
}

#[test]
fn random_hermitian_minimum_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let w = random_hermitian(6, &mut rng);
        let s = min_expectation(&w);
        assert_eq!(s.status, SolveStatus::Optimal);
        let oracle = min_eig_bisection(&w);
        assert!((s.objective() - oracle).abs() < 1e-7, "{} vs {oracle}", s.objective());
        assert!((s.dual_objective - s.objective()).abs() <= 1e-7 * (1.0 + s.objective().abs()));
    }
}

#[test]
fn embedding_doubles_spectrum() {
    let y = H::new(
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        SubsystemShape::single(2),
    )
    .unwrap();
    let mut ev: Vec<f64> = embed_hermitian(&y).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn embedding_preserves_psd(seed in any::<u64>(), n in 1usize..5, shift in -0.5f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_hermitian(n, &mut rng);
        let gg = H::from_matrix(g.matrix() * g.matrix()).unwrap();
        let h = &gg - &H::identity(SubsystemShape::single(n)).scaled(shift);
        let lmin = h.min_eigenvalue();
        prop_assume!(lmin.abs() > 1e-9);
        let emin = embed_hermitian(&h).symmetric_eigenvalues().min();
        prop_assert_eq!(lmin >= 0.0, emin >= 0.0);
        prop_assert!((lmin - emin).abs() < 1e-9);
    }

    #[test]
    fn weak_duality_and_reproducibility(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_hermitian(3, &mut rng);
        let s = min_expectation(&w);
        prop_assert_eq!(s.status, SolveStatus::Optimal);
        for rec in &s.history {
            if rec.primal_infeasibility < 1e-10 && rec.dual_infeasibility < 1e-10 {
                prop_assert!(rec.primal_objective >= rec.dual_objective - 1e-9);
            }
        }
        let again = min_expectation(&w);
        prop_assert_eq!(again.objective().to_bits(), s.objective().to_bits());
    }
}

#[test]
fn inconsistent_equalities_are_infeasible() {
    let mut p = ConicProgram::<f64>::new();
    let t = p.add_scalar("t", ScalarSign::Free);
    p.add_constraint(LinExpr::var(t), 1.0);
    p.add_constraint(LinExpr::term(t, 2.0), 3.0);
    p.set_objective(LinExpr::var(t), Sense::Minimize);
    assert_eq!(solve(&p).status, SolveStatus::PrimalInfeasible);
}

#[test]
fn negative_diagonal_is_infeasible() {
    let mut p = ConicProgram::<f64>::new();
    let x = p.add_psd_block("X", 2);
    p.add_constraint(LinExpr::var(p.entry(x, 0, 0)), -1.0);
    p.set_objective(LinExpr::var(p.entry(x, 1, 1)), Sense::Minimize);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::PrimalInfeasible);
    assert!(s.certificate.is_some());
}

#[test]
fn unbounded_is_dual_infeasible() {
    let mut p = ConicProgram::<f64>::new();
    let x = p.add_psd_block("X", 2);
    let t = p.add_scalar("t", ScalarSign::Free);
    let mut e = LinExpr::var(p.entry(x, 0, 0));
    e.add_term(t, -1.0);
    p.add_constraint(e, 0.0);
    p.set_objective(LinExpr::var(t), Sense::Maximize);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::DualInfeasible);
}

#[test]
fn row_rescaling_does_not_move_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_hermitian(4, &mut rng);
    let build = |scale: f64| {
        let mut p = ConicProgram::new();
        let (_, rho) = p.add_hermitian_block("rho", w.shape().clone());
        p.add_constraint(rho.trace() * scale, scale);
        p.set_objective(rho.trace_with(&w).unwrap(), Sense::Minimize);
        solve(&p)
    };
    let a = build(1.0);
    let b = build(1e3);
    let c3 = build(1e-3);
    assert!((a.objective() - b.objective()).abs() < 1e-7);
    assert!((a.objective() - c3.objective()).abs() < 1e-7);
}

#[test]
fn redundant_rows_are_tolerated_and_get_zero_multiplier() {
    let mut p = ConicProgram::<f64>::new();
    let x = p.add_psd_block("X", 2);
    let mut tr = LinExpr::var(p.entry(x, 0, 0));
    tr.add_term(p.entry(x, 1, 1), 1.0);
    p.add_constraint(tr.clone(), 1.0);
    p.add_constraint(tr * 2.0, 2.0);
    let mut obj = LinExpr::var(p.entry(x, 0, 0));
    obj.add_term(p.entry(x, 0, 1), 1.0);
    p.set_objective(obj, Sense::Minimize);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    // min over states of ⟨[[1, 1/2],[1/2, 0]], ρ⟩ = (1 − √2)/2.
    assert!((s.objective() - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-7);
    assert_eq!(s.duals[1], 0.0);
    assert!((s.dual_objective - s.objective()).abs() < 1e-7);
}

#[test]
fn lp_only_program() {
    // max x + y s.t. x + 2y + s = 4, 3x + y + u = 6, all nonneg.
    let mut p = ConicProgram::<f64>::new();
    let v: Vec<VarId> = (0..4).map(|i| p.add_scalar(format!("v{i}"), ScalarSign::Nonneg)).collect();
    let mut r1 = LinExpr::var(v[0]);
    r1.add_term(v[1], 2.0);
    r1.add_term(v[2], 1.0);
    p.add_constraint(r1, 4.0);
    let mut r2 = LinExpr::term(v[0], 3.0);
    r2.add_term(v[1], 1.0);
    r2.add_term(v[3], 1.0);
    p.add_constraint(r2, 6.0);
    p.set_objective(LinExpr::var(v[0]) + LinExpr::var(v[1]), Sense::Maximize);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective() - 2.8).abs() < 1e-7);
    let x = DVector::from_vec(vec![s.value(v[0]), s.value(v[1])]);
    assert!((x[0] - 1.6).abs() < 1e-6 && (x[1] - 1.2).abs() < 1e-6);
}

#[test]
fn json_dump_roundtrips() {
    let mut p = ConicProgram::<f64>::new();
    let x = p.add_psd_block("X", 2);
    p.add_constraint(LinExpr::var(p.entry(x, 0, 0)), 2.0);
    let j = p.to_json();
    let back: ConicProgram<f64> = serde_json::from_value(j).unwrap();
    assert_eq!(back.num_constraints(), 1);
    assert_eq!(back.blocks()[0].dim, 2);
    let _unused: DMatrix<f64> = DMatrix::zeros(1, 1);
}

#[test]
fn single_precision_solves_small_program() {
    let mut p = ConicProgram::<f32>::new();
    let x = p.add_psd_block("X", 2);
    p.add_constraint(LinExpr::var(p.entry(x, 0, 0)), 2.0);
    let mut tr = LinExpr::var(p.entry(x, 0, 0));
    tr.add_term(p.entry(x, 1, 1), 1.0);
    p.set_objective(tr, Sense::Minimize);
    let s = solve_with(&p, &SolveOptions { tol: 1e-5, ..SolveOptions::default() });
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective() - 2.0).abs() < 1e-4);
}
