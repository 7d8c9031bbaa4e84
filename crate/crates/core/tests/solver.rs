mod common;

use common::*;
use dpse_core::dense::{dense_eig, DenseMatrix};
use dpse_core::oracle::{reference_f, reference_sequence, reference_step, residues};
use dpse_core::solver::{
    self, assemble_projection, check_convergence, deflate, dpse_step, estimate_residue, gram_matrix, run,
    Matching, Method, ShiftPattern, ShiftState, SolverConfig,
};
use dpse_core::{Complex64, DescriptorSystem, StateSpaceSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(method: Method) -> SolverConfig {
    SolverConfig {
        method,
        ..SolverConfig::default()
    }
}

fn step(sys: &DescriptorSystem, shifts: &[Complex64], method: Method) -> Vec<Complex64> {
    solver::step(sys, shifts, &config(method)).unwrap().next
}

fn sequence(sys: &DescriptorSystem, start: &[Complex64], iters: usize, method: Method) -> Vec<Vec<Complex64>> {
    solver::iterate(sys, start, iters, &config(method))
        .unwrap()
        .into_iter()
        .map(|s| s.next)
        .collect()
}

fn max_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn nearest(z: Complex64, set: &[Complex64]) -> f64 {
    set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
}

fn explicit(method: Method, shifts: Vec<Complex64>) -> SolverConfig {
    SolverConfig {
        method,
        p: shifts.len(),
        start: ShiftPattern::Explicit { shifts },
        ..SolverConfig::default()
    }
}

#[test]
fn eigenvalue_tuples_are_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    for _ in 0..10 {
        let n = rng.gen_range(6..=12);
        let (ss, spectrum) = random_state_space(n, 0.3, &mut rng);
        let sys = ss.to_descriptor();
        let p = rng.gen_range(2..=4);
        let mut picks: Vec<Complex64> = Vec::new();
        while picks.len() < p {
            let z = spectrum[rng.gen_range(0..n)];
            if !picks.contains(&z) {
                picks.push(z);
            }
        }
        for method in [Method::Dpse, Method::Ddpse] {
            let next = step(&sys, &picks, method);
            assert!(max_dist(&next, &picks) <= 1e-9, "{method}: moved by {}", max_dist(&next, &picks));
        }
    }
}

#[test]
fn projection_matches_literal_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..5 {
        let (ss, _) = random_state_space(8, 0.3, &mut rng);
        let shifts = [cx(-0.3, 0.8), cx(-1.1, 2.0), cx(0.2, 3.1)];
        let st = ShiftState::compute(&ss.to_descriptor(), &shifts).unwrap();
        let f = assemble_projection(&ss.to_descriptor(), &st).unwrap();
        let want = reference_f(&ss, &shifts).unwrap();
        assert!(f.sub(&want).max_abs() <= 1e-9 * want.max_abs().max(1.0));
    }
}

#[test]
fn three_state_step_contracts() {
    let ss = StateSpaceSystem::from_real(
        &[&[-1.0, 0.0, 0.0], &[0.0, -3.0, 0.0], &[0.0, 0.0, -10.0]],
        &[1.0; 3],
        &[1.0; 3],
        0.0,
    )
    .unwrap();
    let sys = ss.to_descriptor();
    let s0 = [c(-0.5), c(-2.5)];
    let target = [c(-1.0), c(-3.0)];
    let s1 = step(&sys, &s0, Method::Dpse);
    let s2 = step(&sys, &s1, Method::Dpse);
    let (e0, e1, e2) = (max_dist(&s0, &target), max_dist(&s1, &target), max_dist(&s2, &target));
    assert!(e1 < e0 && e2 < e1);
    // quadratic: e2 / e1² stays bounded by the same constant as e1 / e0²
    assert!(e2 / (e1 * e1) < 10.0 * e1 / (e0 * e0));
}

#[test]
fn p_equals_n_gives_exact_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    for _ in 0..5 {
        let (ss, spectrum) = random_state_space(4, 0.3, &mut rng);
        let start = [cx(-0.2, 0.5), cx(-0.7, 1.5), cx(0.1, -1.0), cx(-2.0, 0.3)];
        let next = step(&ss.to_descriptor(), &start, Method::Dpse);
        for z in &next {
            assert!(nearest(*z, &spectrum) <= 1e-8, "{z} not in spectrum");
        }
        let f = reference_f(&ss, &start).unwrap();
        for z in dense_eig(&f).unwrap().values {
            assert!(nearest(z, &spectrum) <= 1e-8);
        }
    }
}

/// Upper bound on the second singular value from the 2×2 minors:
/// `σ1²σ2² ≤ Σ|minor|²` and `σ1 ≥ ‖M‖_F/√p`.
fn sigma2_bound(m: &DenseMatrix) -> f64 {
    let p = m.nrows();
    let mut sum = 0.0;
    for i in 0..p {
        for k in i + 1..p {
            for j in 0..p {
                for l in j + 1..p {
                    sum += (m[(i, j)] * m[(k, l)] - m[(i, l)] * m[(k, j)]).norm_sqr();
                }
            }
        }
    }
    let sigma1 = m.frobenius_norm() / (p as f64).sqrt();
    if sigma1 == 0.0 {
        0.0
    } else {
        sum.sqrt() / sigma1
    }
}

#[test]
fn projection_minus_shifts_is_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(204);
    for _ in 0..10 {
        let sys = random_descriptor(10, 5, &mut rng);
        let shifts: Vec<Complex64> = (1..=4).map(|k| cx(-0.1 * k as f64, 0.7 * k as f64)).collect();
        let st = ShiftState::compute(&sys, &shifts).unwrap();
        let f = assemble_projection(&sys, &st).unwrap();
        let m = f.sub(&DenseMatrix::from_diagonal(&shifts));
        assert!(sigma2_bound(&m) <= 1e-10 * f.frobenius_norm());
    }
}

#[test]
fn sequences_invariant_under_io_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(205);
    for _ in 0..5 {
        let sys = random_descriptor(8, 4, &mut rng);
        let beta = cx(rng.gen_range(0.1..10.0), rng.gen_range(-3.0..3.0));
        let gamma = cx(rng.gen_range(-10.0..-0.1), rng.gen_range(-3.0..3.0));
        let scaled = sys.rescaled(beta, gamma);
        let start = [cx(-0.4, 0.6), cx(-1.5, 1.8), cx(-0.8, 3.0)];
        for method in [Method::Dpse, Method::Ddpse] {
            let a = sequence(&sys, &start, 4, method);
            let b = sequence(&scaled, &start, 4, method);
            for (x, y) in a.iter().zip(&b) {
                assert!(max_dist(x, y) <= 1e-10, "{method}: {}", max_dist(x, y));
            }
        }
    }
}

#[test]
fn descriptor_path_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(206);
    for _ in 0..3 {
        let (ss0, spectrum) = random_state_space(20, 0.3, &mut rng);
        let sys = descriptor_with_state_matrix(&ss0.a, 30, 0.1, &mut rng);
        let ss = sys.reduce_to_state_space().unwrap();
        // inside the basin of attraction, where rounding differences are not amplified
        let start: Vec<Complex64> = spectrum[..4].iter().map(|z| z + cx(0.15, 0.1)).collect();

        let st = ShiftState::compute(&sys, &start).unwrap();
        let (x, y) = dpse_core::oracle::reference_blocks(&ss, &start).unwrap();
        let ytx = y.transpose().matmul(&x);
        assert!(gram_matrix(&sys, &st).sub(&ytx).max_abs() <= 1e-10 * ytx.max_abs().max(1.0));

        for method in [Method::Dpse, Method::Ddpse] {
            let steps = solver::iterate(&sys, &start, 5, &config(method)).unwrap();
            let mut exact = true;
            let dense = reference_sequence(&ss, &start, 5, method).unwrap();
            for (k, st) in steps.iter().enumerate() {
                // each step agrees with the dense formulas at the shifts it used
                let want = reference_step(&ss, &st.used, method).unwrap();
                assert!(max_dist(&st.next, &want) <= 1e-8, "{method}: {}", max_dist(&st.next, &want));
                let requested = if k == 0 { &start } else { &steps[k - 1].next };
                exact &= st.used == *requested;
                if exact {
                    assert!(max_dist(&st.next, &dense[k]) <= 1e-8, "{method} step {k}: {:e} {:?} {:?}", max_dist(&st.next, &dense[k]), st.next, dense[k]);
                }
            }
        }
    }
}

#[test]
fn single_shift_methods_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(207);
    for _ in 0..5 {
        let sys = random_descriptor(7, 3, &mut rng);
        let start = [cx(-0.3, 1.2)];
        let a = sequence(&sys, &start, 5, Method::Dpse);
        let b = sequence(&sys, &start, 5, Method::Ddpse);
        for (x, y) in a.iter().zip(&b) {
            assert!(max_dist(x, y) <= 1e-12 * x[0].norm().max(1.0));
        }
    }
}

#[test]
fn worked_single_shift_newton_value() {
    let sys = diag13().to_descriptor();
    let s = step(&sys, &[c(-0.5)], Method::Ddpse);
    assert!((s[0] - c(-0.5 - 2.4 / 4.16)).norm() < 1e-12);
    assert!((s[0] - c(-1.0769231)).norm() < 1e-7);
}

#[test]
fn locked_value_survives_further_iterations() {
    let sys = diag13().to_descriptor();
    let mut st = ShiftState::compute(&sys, &[c(-1.0 + 1e-7), c(-2.5)]).unwrap();
    deflate(&mut st, 0, c(-1.0)).unwrap();
    for _ in 0..3 {
        let f = assemble_projection(&sys, &st).unwrap();
        let ev = dense_eig(&f).unwrap().values;
        assert!(nearest(c(-1.0), &ev) <= 1e-12);
        let next = dpse_step(&st, &f, Matching::GreedyNearest).unwrap();
        assert_eq!(next[0], c(-1.0));
        let col = sys.normalized_vectors(next[1] + cx(1e-9, 1e-9)).unwrap();
        st.set_column(1, col);
    }
    assert!((st.shifts[1] - c(-3.0)).norm() < 1e-6);
}

#[test]
fn run_finds_worked_poles() {
    for method in [Method::Dpse, Method::Ddpse] {
        let out = run(&diag13().to_descriptor(), &explicit(method, vec![c(-0.5), c(-2.5)])).unwrap();
        assert!(out.report.converged_all, "{method}");
        let found: Vec<Complex64> = out.poles.iter().map(|p| p.eigenvalue).collect();
        assert!(nearest(c(-1.0), &found) <= 1e-8 && nearest(c(-3.0), &found) <= 1e-8);
    }
    let out = run(&diag13().to_descriptor(), &explicit(Method::Dpse, vec![c(-0.5), c(-2.5)])).unwrap();
    assert!(out.report.iterations <= 3);
}

#[test]
fn sixty_state_system_converges_to_true_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(208);
    let mut spectrum = Vec::new();
    for k in 0..10 {
        let omega = 0.4 + 0.5 * k as f64;
        let zeta = 0.01 + 0.03 * k as f64;
        let z = cx(-zeta * omega / (1.0 - zeta * zeta).sqrt(), omega);
        spectrum.push(z);
        spectrum.push(z.conj());
    }
    while spectrum.len() < 60 {
        spectrum.push(c(-0.5 - 0.25 * spectrum.len() as f64));
    }
    let a = similar(&real_block_diagonal(&spectrum), &mut rng);
    let sys = descriptor_with_state_matrix(&a, 20, 0.05, &mut rng);
    let cfg = SolverConfig {
        method: Method::Ddpse,
        p: 5,
        ..SolverConfig::default()
    };
    let out = run(&sys, &cfg).unwrap();
    assert!(!out.poles.is_empty());
    for p in &out.poles {
        assert!(nearest(p.eigenvalue, &spectrum) <= 1e-6, "{} is not an eigenvalue", p.eigenvalue);
        assert!(p.final_residuals.0 <= cfg.tol && p.final_residuals.1 <= cfg.tol);
        assert!(p.iterations <= cfg.max_iter);
    }
}

#[test]
fn converged_residues_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(209);
    for _ in 0..5 {
        let (ss, _) = random_state_space(8, 0.5, &mut rng);
        let table = residues(&ss).unwrap();
        let start: Vec<Complex64> = table.entries[..3].iter().map(|e| e.eigenvalue + cx(0.05, -0.04)).collect();
        let cfg = SolverConfig {
            tol: 1e-8,
            ..explicit(Method::Dpse, start)
        };
        let out = run(&ss.to_descriptor(), &cfg).unwrap();
        assert!(!out.poles.is_empty());
        for p in &out.poles {
            let e = table
                .entries
                .iter()
                .min_by(|a, b| (a.eigenvalue - p.eigenvalue).norm().total_cmp(&(b.eigenvalue - p.eigenvalue).norm()))
                .unwrap();
            assert!(rel(p.residue, e.residue) <= 1e-6, "{} vs {}", p.residue, e.residue);
        }
    }
}

#[test]
fn residue_estimate_is_bilinear_in_input() {
    let sys = diag13().to_descriptor();
    let st = ShiftState::compute(&sys, &[c(-1.0 + 1e-9)]).unwrap();
    let r1 = estimate_residue(&sys, &st, 0).unwrap();
    let doubled = sys.rescaled(c(2.0), c(1.0));
    let st2 = ShiftState::compute(&doubled, &[c(-1.0 + 1e-9)]).unwrap();
    let r2 = estimate_residue(&doubled, &st2, 0).unwrap();
    assert!((r1 - c(1.0)).norm() < 1e-8);
    assert!((r2 - 2.0 * r1).norm() < 1e-8);
}

#[test]
fn exact_vectors_have_zero_residual() {
    let sys = diag13().to_descriptor();
    // x = e1 is an exact eigenvector; b/ν vanishes only in the limit, so
    // build the state by hand
    let mut st = ShiftState::compute(&sys, &[c(-0.5)]).unwrap();
    st.xs[0] = vec![c(1.0), c(0.0)];
    st.ys[0] = vec![c(1.0), c(0.0)];
    st.normalizers[0] = c(1e300);
    st.vector_shifts[0] = c(-1.0);
    let r = check_convergence(&sys, &st, &[c(-1.0)], 1e-12)[0].unwrap();
    assert!(r.right < 1e-290 && r.left < 1e-290);
    assert!(r.converged);
}

#[test]
fn report_serializes_infinite_dominance() {
    let row = dpse_core::solver::PoleRow {
        column: 0,
        re: 0.0,
        im: 1.0,
        residue_re: 1.0,
        residue_im: 0.0,
        dominance: f64::INFINITY,
        damping_ratio: 0.0,
        iterations: 3,
        residual_right: 0.0,
        residual_left: 0.0,
        wall_time_s: 0.0,
    };
    let json = serde_json::to_string(&row).unwrap();
    assert!(json.contains("\"dominance\":\"inf\""));
    let back: dpse_core::solver::PoleRow = serde_json::from_str(&json).unwrap();
    assert_eq!(back, row);
}

#[test]
fn transmission_zero_shift_is_moved_but_distant_shift_is_not() {
    // h(s) = 1/(s+1) + 1/(s+3) vanishes at s = -2
    let sys = diag13().to_descriptor();
    let cfg = config(Method::Dpse);
    let st = solver::step(&sys, &[c(-2.0), c(-0.5)], &cfg).unwrap();
    assert!((st.used[0] - c(-2.0)).norm() > 0.0);
    assert_eq!(st.used[1], c(-0.5));

    // |ν| ≈ 2e-9 here, tiny in absolute terms but free of cancellation
    let far = cx(0.0, 1e9);
    let st = solver::step(&sys, &[far, c(-0.5)], &cfg).unwrap();
    assert_eq!(st.used[0], far);
}
