use trusspp_core::conic::{ConicProblem, PsdBlock};
use trusspp_core::linalg::{sym_eigenvalues, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trusspp_core::reference::{DenseBarrier, MAX_VARS};
use trusspp_core::solver::{solve, ConicBackend, SolveStatus, SolverOptions};

fn sym_param(n: usize, p: &mut ConicProblem, name: &str) -> (usize, PsdBlock) {
    let start = p.add_block(name, n * (n + 1) / 2);
    let mut g = Vec::new();
    let mut v = start;
    for i in 0..n {
        for j in i..n {
            g.push((v, i, j, -1.0));
            v += 1;
        }
    }
    (start, PsdBlock { name: name.into(), size: n, h: vec![], g })
}

#[test]
fn lp_two_vars() {
    // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  -> (1.6, 1.2), -2.8
    let mut p = ConicProblem::new("lp");
    let x = p.add_block("x", 2);
    p.c = vec![-1.0, -1.0];
    p.add_nonneg(&[(x, 1.0), (x + 1, 2.0)], 4.0);
    p.add_nonneg(&[(x, 3.0), (x + 1, 1.0)], 6.0);
    p.add_nonneg(&[(x, -1.0)], 0.0);
    p.add_nonneg(&[(x + 1, -1.0)], 0.0);
    let r = solve(&p, &SolverOptions::default());
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective + 2.8).abs() < 1e-7, "{}", r.objective);
    assert!((r.x[0] - 1.6).abs() < 1e-6 && (r.x[1] - 1.2).abs() < 1e-6);
}

#[test]
fn sdp_min_eigenvalue() {
    // min <C, X> s.t. tr X = 1, X ⪰ 0  equals λ_min(C)
    let c = Mat::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 1.5]);
    let mut p = ConicProblem::new("eig");
    let (start, blk) = sym_param(3, &mut p, "X");
    let mut v = start;
    let mut tr = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            p.c[v] = if i == j { c[(i, j)] } else { 2.0 * c[(i, j)] };
            if i == j {
                tr.push((v, 1.0));
            }
            v += 1;
        }
    }
    p.psd.push(blk);
    let row = p.add_eq(&tr, 1.0);
    let r = solve(&p, &SolverOptions::default());
    let lmin = sym_eigenvalues(&c)[0];
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - lmin).abs() < 1e-7, "{} vs {}", r.objective, lmin);
    // d p*/d b for tr X = b is λ_min
    assert!((r.equality_duals[row] - lmin).abs() < 1e-6, "{}", r.equality_duals[row]);
}

#[test]
fn infeasible_lp() {
    let mut p = ConicProblem::new("inf");
    let x = p.add_block("x", 1);
    p.c = vec![1.0];
    p.add_nonneg(&[(x, 1.0)], -1.0); // x <= -1
    p.add_nonneg(&[(x, -1.0)], 0.0); // x >= 0
    let r = solve(&p, &SolverOptions::default());
    assert_eq!(r.status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_lp() {
    let mut p = ConicProblem::new("unb");
    let x = p.add_block("x", 1);
    p.c = vec![-1.0];
    p.add_nonneg(&[(x, -1.0)], 0.0);
    let r = solve(&p, &SolverOptions::default());
    assert_eq!(r.status, SolveStatus::Unbounded);
}

#[test]
fn scalar_lmi_bound() {
    // min θ s.t. [θ − 1] ⪰ 0
    let mut p = ConicProblem::new("scalar");
    let t = p.add_block("theta", 1);
    p.c[t] = 1.0;
    p.psd.push(PsdBlock { name: "S".into(), size: 1, h: vec![(0, 0, -1.0)], g: vec![(t, 0, 0, -1.0)] });
    let r = solve(&p, &SolverOptions::default());
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.x[t] - 1.0).abs() < 1e-7);
}

#[test]
fn negative_trace_psd_is_infeasible() {
    let mut p = ConicProblem::new("neg_trace");
    let (start, blk) = sym_param(2, &mut p, "Q");
    p.psd.push(blk);
    p.add_eq(&[(start, 1.0), (start + 2, 1.0)], -1.0);
    let r = solve(&p, &SolverOptions::default());
    assert_eq!(r.status, SolveStatus::Infeasible);
    let r = DenseBarrier::default().solve(&p);
    assert_eq!(r.status, SolveStatus::Infeasible);
}

/// Random LP in standard form min cᵀx, Ax = b, x ≥ 0 with a known interior point.
fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ConicProblem {
    let mut p = ConicProblem::new("rand_lp");
    let x = p.add_block("x", n);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    for _ in 0..m {
        let row: Vec<(usize, f64)> = (0..n).map(|j| (x + j, rng.gen_range(-1.0..1.0))).collect();
        let b = row.iter().map(|&(j, v)| v * x0[j]).sum();
        p.add_eq(&row, b);
    }
    for j in 0..n {
        p.c[j] = rng.gen_range(0.1..2.0);
        p.add_nonneg(&[(x + j, -1.0)], 0.0);
    }
    p
}

#[test]
fn equality_duals_are_value_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolverOptions::default();
    for _ in 0..5 {
        let p = random_lp(&mut rng, 6, 3);
        let r = solve(&p, &opts);
        assert_eq!(r.status, SolveStatus::Optimal);
        let delta = 1e-5;
        for row in 0..p.n_eq() {
            let mut q = p.clone();
            q.b[row] += delta;
            let rq = solve(&q, &opts);
            let predicted = r.objective + r.equality_duals[row] * delta;
            assert!((rq.objective - predicted).abs() < 1e-8, "row {row}: {} vs {}", rq.objective, predicted);
        }
    }
}

#[test]
fn reference_backend_agrees_on_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let p = random_lp(&mut rng, 5, 2);
        let a = solve(&p, &SolverOptions::default());
        let b = DenseBarrier::default().solve(&p);
        assert_eq!(b.status, SolveStatus::Optimal);
        assert!((a.objective - b.objective).abs() < 1e-7 * (1.0 + a.objective.abs()));
        for (ya, yb) in a.equality_duals.iter().zip(&b.equality_duals) {
            assert!((ya - yb).abs() < 1e-6 * (1.0 + ya.abs()), "{ya} vs {yb}");
        }
    }
}

#[test]
fn reference_backend_agrees_on_sdp() {
    let c = Mat::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 1.5]);
    let mut p = ConicProblem::new("eig");
    let (start, blk) = sym_param(3, &mut p, "X");
    let mut v = start;
    let mut tr = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            p.c[v] = if i == j { c[(i, j)] } else { 2.0 * c[(i, j)] };
            if i == j {
                tr.push((v, 1.0));
            }
            v += 1;
        }
    }
    p.psd.push(blk);
    p.add_eq(&tr, 1.0);
    let a = solve(&p, &SolverOptions::default());
    let b = DenseBarrier::default().solve(&p);
    assert_eq!(b.status, SolveStatus::Optimal);
    assert!((a.objective - b.objective).abs() < 1e-7);
    assert!((a.equality_duals[0] - b.equality_duals[0]).abs() < 1e-6);
}

#[test]
fn reference_backend_rejects_large_problems() {
    let mut p = ConicProblem::new("big");
    p.add_block("x", MAX_VARS + 1);
    let r = DenseBarrier::default().solve(&p);
    assert_eq!(r.status, SolveStatus::NumericalFailure);
}
