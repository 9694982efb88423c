use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cg::CgConfig;
use crate::linalg::norm;
use crate::operators::Engine;
use crate::trajectories::RadialScheme;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Every DFT bin of an `n x n` grid: `F^H F = n^2 I`.
fn cartesian_op(n: usize) -> ForwardOperator {
    let mut coords = Vec::new();
    for jy in 0..n {
        for jx in 0..n {
            let k = |j: usize| 2.0 * PI * (j as f64 - (n / 2) as f64) / n as f64;
            coords.push([k(jx), k(jy)]);
        }
    }
    ForwardOperator::from_coords(n, n, (1..=n).collect(), coords, Engine::Direct).unwrap()
}

fn radial_op(n: usize, spokes: usize, engine: Engine) -> ForwardOperator {
    let trajs = RadialScheme::for_image(n, spokes).trajectories().unwrap();
    ForwardOperator::with_engine(n, &trajs, engine).unwrap()
}

fn sparse_image(rng: &mut ChaCha8Rng, n: usize, s: usize) -> (Vec<Complex64>, Vec<usize>) {
    let mut x = vec![c(0.0, 0.0); n * n];
    let mut support = Vec::new();
    while support.len() < s {
        let i = rng.random_range(0..n * n);
        if !support.contains(&i) {
            support.push(i);
            let mag = 0.5 + rng.random::<f64>();
            x[i] = Complex64::from_polar(mag, rng.random::<f64>() * 2.0 * PI);
        }
    }
    support.sort_unstable();
    (x, support)
}

fn data_for(op: &ForwardOperator, x: &[Complex64]) -> KSpaceData {
    KSpaceData::new(op.k(), op.trajectory_indices().to_vec(), op.apply(x)).unwrap()
}

/// Dense complex least squares via normal equations and Gaussian elimination.
fn dense_lstsq(cols: &[Vec<Complex64>], rhs: &[Complex64]) -> Vec<Complex64> {
    let s = cols.len();
    let mut a = vec![vec![c(0.0, 0.0); s + 1]; s];
    for i in 0..s {
        for j in 0..s {
            a[i][j] = crate::linalg::dot(&cols[i], &cols[j]);
        }
        a[i][s] = crate::linalg::dot(&cols[i], rhs);
    }
    for p in 0..s {
        let piv = (p..s).max_by(|&i, &j| a[i][p].norm().total_cmp(&a[j][p].norm())).unwrap();
        a.swap(p, piv);
        for i in p + 1..s {
            let f = a[i][p] / a[p][p];
            for j in p..=s {
                let v = a[p][j];
                a[i][j] -= f * v;
            }
        }
    }
    let mut x = vec![c(0.0, 0.0); s];
    for i in (0..s).rev() {
        let mut acc = a[i][s];
        for j in i + 1..s {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    x
}

/// Column `pixel` of `F`, evaluated directly.
fn column(op: &ForwardOperator, pixel: usize) -> Vec<Complex64> {
    let n = op.n() as i64;
    let (x, y) = ((pixel as i64 % n - n / 2) as f64, (pixel as i64 / n - n / 2) as f64);
    op.coords().iter().map(|k| Complex64::from_polar(1.0, -(k[0] * x + k[1] * y))).collect()
}

#[test]
fn soft_threshold_examples() {
    assert_eq!(soft_threshold(c(3.0, 0.0), 1.0), c(2.0, 0.0));
    assert_eq!(soft_threshold(c(-0.5, 0.0), 1.0), c(0.0, 0.0));
    let v = soft_threshold(c(3.0, 4.0), 2.5);
    assert!((v - c(1.5, 2.0)).norm() < 1e-15);
    assert_eq!(soft_threshold(c(0.0, 0.0), 0.0), c(0.0, 0.0));
}

#[test]
fn residual_data_identities() {
    let op = radial_op(16, 5, Engine::Gridding);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let truth: Vec<Complex64> = (0..256).map(|_| c(rng.random(), 0.0)).collect();
    let truth_img = Image::from_vec(16, truth.clone()).unwrap();
    let y = data_for(&op, &truth);
    let r = residual_data(&y, &op, &truth_img).unwrap();
    assert!(norm(r.samples()) < 1e-12 * norm(y.samples()));
    let r0 = residual_data(&y, &op, &Image::zeros(16)).unwrap();
    assert_eq!(r0.samples(), y.samples());
    let half = Image::from_vec(16, truth.iter().map(|v| v * 0.5).collect()).unwrap();
    let r = residual_data(&y, &op, &half).unwrap();
    let back: Vec<Complex64> = r.samples().iter().zip(op.forward(&half).unwrap().samples()).map(|(a, b)| a + b).collect();
    assert!(norm(&crate::linalg::sub(&back, y.samples())) < 1e-12 * norm(y.samples()));
    assert!(residual_data(&KSpaceData::zeros(32, vec![1]), &op, &half).is_err());
}

#[test]
fn komp_zero_data() {
    let op = radial_op(8, 3, Engine::Direct);
    let p = ResidualProblem::new(&op, &KSpaceData::zeros(op.k(), op.trajectory_indices().to_vec()), 0.0).unwrap();
    let res = komp_solve(&p, &KompConfig { k: 4, ..Default::default() }).unwrap();
    assert_eq!(res.iterations, 0);
    assert!(res.image.data().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn komp_exact_on_orthogonal_columns() {
    let n = 8;
    let op = cartesian_op(n);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, support) = sparse_image(&mut rng, n, 5);
    let y = data_for(&op, &x);
    let p = ResidualProblem::new(&op, &y, 1e-20 * norm(y.samples()).powi(2)).unwrap();
    let cfg = KompConfig { k: 5, max_iterations: 3, inner: CgConfig::new(50, 1e-14) };
    let res = komp_solve(&p, &cfg).unwrap();
    assert_eq!(res.iterations, 1);
    let mut got = res.support.clone();
    got.sort_unstable();
    assert_eq!(got, support);
    assert!(norm(&crate::linalg::sub(res.image.data(), &x)) < 1e-8);
}

#[test]
fn komp_recovers_sparse_residual_from_radial_spokes() {
    let n = 64;
    let op = radial_op(n, 73, Engine::Gridding);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..3 {
        let (x, support) = sparse_image(&mut rng, n, 5);
        let y = data_for(&op, &x);
        let p = ResidualProblem::new(&op, &y, 1e-8 * norm(y.samples()).powi(2)).unwrap();
        let cfg = KompConfig { k: 5, max_iterations: 10, inner: CgConfig::new(100, 1e-12) };
        let res = komp_solve(&p, &cfg).unwrap();
        assert!(res.converged);
        let peak = res.image.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut found: Vec<usize> =
            res.image.data().iter().enumerate().filter(|(_, v)| v.norm() > 1e-6 * peak).map(|(i, _)| i).collect();
        found.sort_unstable();
        assert_eq!(found, support);
        let cols: Vec<Vec<Complex64>> = support.iter().map(|&i| column(&op, i)).collect();
        let oracle = dense_lstsq(&cols, y.samples());
        for (&i, o) in support.iter().zip(&oracle) {
            assert!((res.image.data()[i] - o).norm() < 1e-6, "{} vs {}", res.image.data()[i], o);
        }
    }
}

#[test]
fn komp_with_k1_matches_classical_omp() {
    let n = 8;
    let op = radial_op(n, 4, Engine::Direct);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, _) = sparse_image(&mut rng, n, 4);
    let y = data_for(&op, &x);
    let steps = 4;
    // Reference OMP on the dense matrix.
    let all_cols: Vec<Vec<Complex64>> = (0..n * n).map(|i| column(&op, i)).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut resid = y.samples().to_vec();
    for _ in 0..steps {
        let best = (0..n * n)
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| {
                crate::linalg::dot(&all_cols[a], &resid).norm().total_cmp(&crate::linalg::dot(&all_cols[b], &resid).norm())
            })
            .unwrap();
        chosen.push(best);
        let cols: Vec<Vec<Complex64>> = chosen.iter().map(|&i| all_cols[i].clone()).collect();
        let coef = dense_lstsq(&cols, y.samples());
        resid = y.samples().to_vec();
        for (col, a) in cols.iter().zip(&coef) {
            crate::linalg::axpy(-*a, col, &mut resid);
        }
    }
    let p = ResidualProblem::new(&op, &y, 0.0).unwrap();
    let res = komp_solve(&p, &KompConfig { k: 1, max_iterations: steps, inner: CgConfig::new(200, 1e-13) }).unwrap();
    assert_eq!(res.support, chosen);
}

#[test]
fn komp_support_growth_and_monotone_residual() {
    let n = 32;
    let op = radial_op(n, 20, Engine::Gridding);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x: Vec<Complex64> = (0..n * n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let y = data_for(&op, &x);
    let p = ResidualProblem::new(&op, &y, 0.0).unwrap();
    let k = 40;
    let res = komp_solve(&p, &KompConfig { k, max_iterations: 8, inner: CgConfig::new(20, 1e-6) }).unwrap();
    for (i, &s) in res.support_sizes.iter().enumerate() {
        assert!(s <= i * k);
    }
    for w in res.residual_norms.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "{w:?}");
    }
}

#[test]
fn bregman_zero_data_stays_zero() {
    let op = radial_op(8, 3, Engine::Direct);
    let p = ResidualProblem::new(&op, &KSpaceData::zeros(op.k(), op.trajectory_indices().to_vec()), 0.0).unwrap();
    let res = split_bregman_solve(&p, &SplitBregmanConfig::default()).unwrap();
    assert!(res.image.data().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn bregman_without_penalty_approaches_least_squares() {
    let n = 8;
    let op = radial_op(n, 12, Engine::Direct);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Complex64> = (0..n * n).map(|_| c(rng.random(), rng.random())).collect();
    let mut y = data_for(&op, &x);
    // Inconsistent data so the least-squares solution is not just x.
    y.samples_mut().iter_mut().enumerate().for_each(|(i, v)| *v += c((i as f64).sin(), 0.0));
    let p = ResidualProblem::new(&op, &y, 0.0).unwrap();
    let tight = CgConfig::new(500, 1e-13);
    let (ls, _) = crate::cg::solve(|v| p.gram(v), &op.apply_adjoint(y.samples()), None, &tight);
    let cfg = SplitBregmanConfig { lambda1: 0.05, lambda2: 0.0, outer_iterations: 1, sweeps: 400, inner: tight };
    let res = split_bregman_solve(&p, &cfg).unwrap();
    let err = norm(&crate::linalg::sub(res.image.data(), &ls)) / norm(&ls);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn bregman_matches_closed_form_for_orthonormal_operator() {
    // With F^H F = s I (s = n^2) the joint minimizer of the split objective is
    //   u* = soft(F^H r / s, lambda2 (s + lambda1) / (2 s lambda1)),
    //   dx* = (F^H r + lambda1 u*) / (s + lambda1).
    let n = 8;
    let op = cartesian_op(n);
    let s = (n * n) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<Complex64> = (0..n * n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let y = data_for(&op, &x);
    let p = ResidualProblem::new(&op, &y, 0.0).unwrap();
    let (lambda1, lambda2) = (10.0 * s, 0.4 * s);
    let cfg = SplitBregmanConfig { lambda1, lambda2, outer_iterations: 1, sweeps: 400, inner: CgConfig::new(50, 1e-14) };
    let res = split_bregman_solve(&p, &cfg).unwrap();
    let fhr = op.apply_adjoint(y.samples());
    let tau = lambda2 * (s + lambda1) / (2.0 * s * lambda1);
    let u: Vec<Complex64> = fhr.iter().map(|v| soft_threshold(v / s, tau)).collect();
    let expected: Vec<Complex64> = fhr.iter().zip(&u).map(|(a, b)| (a + b * lambda1) / (s + lambda1)).collect();
    let err = norm(&crate::linalg::sub(res.image.data(), &expected));
    assert!(err < 1e-6, "{err}");
    // lambda1 large: dx approaches the plain prox of the data.
    let prox: Vec<Complex64> = fhr.iter().map(|v| soft_threshold(v / s, lambda2 / (2.0 * s))).collect();
    assert!(norm(&crate::linalg::sub(res.image.data(), &prox)) < 0.1 * norm(&prox));
}

#[test]
fn bregman_objective_non_increasing_within_outer_iteration() {
    let n = 16;
    let op = radial_op(n, 10, Engine::Gridding);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (x, _) = sparse_image(&mut rng, n, 6);
    let y = data_for(&op, &x);
    let p = ResidualProblem::new(&op, &y, 0.0).unwrap();
    let sweeps = 15;
    let cfg = SplitBregmanConfig { lambda1: 50.0, lambda2: 20.0, outer_iterations: 3, sweeps, inner: CgConfig::new(40, 1e-8) };
    let res = split_bregman_solve(&p, &cfg).unwrap();
    for chunk in res.objective.chunks(sweeps) {
        for w in chunk.windows(2) {
            assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0), "{w:?}");
        }
    }
}

#[test]
fn both_solvers_meet_fidelity_bound_on_sparse_problem() {
    let n = 32;
    let op = radial_op(n, 40, Engine::Gridding);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (x, _) = sparse_image(&mut rng, n, 5);
    let y = data_for(&op, &x);
    let eps = 1e-8 * norm(y.samples()).powi(2);
    let p = ResidualProblem::new(&op, &y, eps).unwrap();
    let k = komp_solve(&p, &KompConfig { k: 5, max_iterations: 10, inner: CgConfig::new(100, 1e-12) }).unwrap();
    assert!(k.converged);
    assert!(norm(&p.misfit(k.image.data())).powi(2) <= eps);
    let cfg = SplitBregmanConfig { lambda1: 100.0, lambda2: 10.0, outer_iterations: 200, sweeps: 1, inner: CgConfig::new(100, 1e-10) };
    let b = split_bregman_solve(&p, &cfg).unwrap();
    assert!(b.converged, "{:?}", b.residual_norms.last());
    assert!(norm(&p.misfit(b.image.data())).powi(2) <= eps);
}
