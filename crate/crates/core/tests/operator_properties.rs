mod common;

use common::{max_abs_diff, multiset_distance, norm_inf, random_game, random_scsc, random_vec};
use gda_core::linalg::{eigenvalues, symmetric_eigenvalues};
use gda_core::operators::{
    alt_operator, alt_operator_factors, alt_operator_reversed, half_step_alt,
    operator_matrix_unchecked,
};
use gda_core::{Algorithm, AlgorithmConfig, Matrix, QuadraticGame, UpdateOperator};
use num_complex::Complex64;
use proptest::prelude::*;

const ETAS: [f64; 5] = [1e-3, 1e-2, 0.1, 0.5, 1.0];

#[test]
fn alt_factorization_identity() {
    for seed in 0..200 {
        let g = random_game(seed);
        for eta in ETAS {
            let (y_step, x_step) = alt_operator_factors(&g, eta);
            let product = y_step.matmul(&x_step);
            let closed = alt_operator(&g, eta).unwrap().matrix;
            let err = product.max_abs_diff(&closed);
            assert!(err <= 1e-12, "seed {seed} eta {eta}: {err}");
        }
    }
}

#[test]
fn alt_order_similarity() {
    for seed in 0..200 {
        let g = random_scsc(seed);
        let eta = 0.5 / g.class_bounds().l;
        let a = eigenvalues(&alt_operator(&g, eta).unwrap().matrix).unwrap();
        let b = eigenvalues(&alt_operator_reversed(&g, eta).unwrap().matrix).unwrap();
        let dist = multiset_distance(a.values(), b.values());
        assert!(dist <= 1e-8, "seed {seed}: {dist}");
    }
}

#[test]
fn half_steps_equal_operator_powers() {
    for seed in 0..200 {
        let g = if seed % 2 == 0 {
            random_scsc(seed)
        } else {
            random_game(seed)
        };
        let eta = 0.5 / g.class_bounds().l;
        let op = alt_operator(&g, eta).unwrap();
        let mut r = common::rng(seed ^ 0xa5a5);
        let z0 = random_vec(&mut r, g.dim());
        let (mut x, mut y) = (z0[..g.d()].to_vec(), z0[g.d()..].to_vec());
        let mut z = z0.clone();
        for t in 1..=1000 {
            (x, y) = half_step_alt(&g, eta, &x, &y).unwrap();
            z = op.apply(&z).unwrap();
            let stacked: Vec<f64> = x.iter().chain(&y).copied().collect();
            let err = max_abs_diff(&stacked, &z);
            assert!(
                err <= 1e-9 * norm_inf(&z),
                "seed {seed} step {t}: {err} vs {}",
                norm_inf(&z)
            );
        }
    }
}

fn ogda_companion_roots(lambda: Complex64, eta: f64) -> [Complex64; 2] {
    // x² − (1 − 2ηλ)x − ηλ
    let b = 1.0 - 2.0 * eta * lambda;
    let c = -eta * lambda;
    let disc = (b * b - 4.0 * c).sqrt();
    [(b + disc) * 0.5, (b - disc) * 0.5]
}

#[test]
fn decoupled_games_reduce_to_diagonal_blocks() {
    for seed in 0..100 {
        let g0 = random_scsc(seed);
        let g = QuadraticGame::new(
            g0.a().clone(),
            Matrix::zeros(g0.d(), g0.p()),
            g0.c().clone(),
        )
        .unwrap();
        let mut lambdas = symmetric_eigenvalues(g.a()).unwrap();
        lambdas.extend(symmetric_eigenvalues(g.c()).unwrap());
        let eta = 0.37;
        for algo in Algorithm::ALL {
            let expected: Vec<Complex64> = lambdas
                .iter()
                .flat_map(|&l| {
                    let l = Complex64::new(l, 0.0);
                    let one = Complex64::new(1.0, 0.0);
                    match algo {
                        Algorithm::SimGda | Algorithm::AltGda => vec![one - eta * l],
                        Algorithm::Eg => vec![one - eta * l + eta * eta * l * l],
                        Algorithm::OgdaSim | Algorithm::OgdaAlt => {
                            ogda_companion_roots(l, eta).to_vec()
                        }
                        Algorithm::Nm => vec![one - eta * l, Complex64::new(0.0, 0.0)],
                    }
                })
                .collect();
            let m = operator_matrix_unchecked(&g, algo, eta, 0.0);
            let sp = eigenvalues(&m).unwrap();
            let dist = multiset_distance(sp.values(), &expected);
            assert!(dist <= 1e-9, "seed {seed} {algo}: {dist}");
        }
    }
}

fn grad_x(g: &QuadraticGame, x: &[f64], y: &[f64]) -> Vec<f64> {
    g.vector_field(x, y).0
}

fn grad_y(g: &QuadraticGame, x: &[f64], y: &[f64]) -> Vec<f64> {
    g.vector_field(x, y).1.iter().map(|v| -v).collect()
}

fn axpy(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    (0..n)
        .map(|i| terms.iter().map(|(w, v)| w * v[i]).sum())
        .collect()
}

/// `(z_{t+1}, z_t)` from `(z_t, z_{t−1})` by the optimistic recursions,
/// evaluated with gradients only.
fn ogda_direct(g: &QuadraticGame, eta: f64, state: &[f64], alternating: bool) -> Vec<f64> {
    let (d, n) = (g.d(), g.dim());
    let (x, y) = (&state[..d], &state[d..n]);
    let (xp, yp) = (&state[n..n + d], &state[n + d..]);
    let x_new = axpy(&[
        (1.0, x),
        (-2.0 * eta, &grad_x(g, x, y)),
        (eta, &grad_x(g, xp, yp)),
    ]);
    let y_new = if alternating {
        axpy(&[
            (1.0, y),
            (2.0 * eta, &grad_y(g, &x_new, y)),
            (-eta, &grad_y(g, x, yp)),
        ])
    } else {
        axpy(&[
            (1.0, y),
            (2.0 * eta, &grad_y(g, x, y)),
            (-eta, &grad_y(g, xp, yp)),
        ])
    };
    x_new
        .into_iter()
        .chain(y_new)
        .chain(x.iter().copied())
        .chain(y.iter().copied())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ogda_companions_match_recursions(seed in 0u64..1_000_000, eta in 1e-3f64..0.5, alternating: bool) {
        let g = random_game(seed);
        let mut r = common::rng(seed.wrapping_add(17));
        let state = random_vec(&mut r, 2 * g.dim());
        let algo = if alternating { Algorithm::OgdaAlt } else { Algorithm::OgdaSim };
        let op = UpdateOperator::build(&g, AlgorithmConfig::new(algo, eta, None).unwrap()).unwrap();
        let via_matrix = op.apply(&state).unwrap();
        let direct = ogda_direct(&g, eta, &state, alternating);
        prop_assert!(max_abs_diff(&via_matrix, &direct) <= 1e-12);
    }

    #[test]
    fn nm_and_eg_match_recursions(seed in 0u64..1_000_000, eta in 1e-3f64..0.5, beta in -0.98f64..0.0) {
        let g = random_game(seed);
        let (d, n) = (g.d(), g.dim());
        let mut r = common::rng(seed.wrapping_add(29));
        let state = random_vec(&mut r, 2 * n);
        let field = |z: &[f64]| {
            let (vx, vy) = g.vector_field(&z[..d], &z[d..]);
            vx.into_iter().chain(vy).collect::<Vec<f64>>()
        };

        let nm = UpdateOperator::build(&g, AlgorithmConfig::nm(eta, beta).unwrap()).unwrap();
        let (z, zp) = (&state[..n], &state[n..]);
        let expect: Vec<f64> = axpy(&[(1.0 + beta, z), (-eta, &field(z)), (-beta, zp)])
            .into_iter()
            .chain(z.iter().copied())
            .collect();
        prop_assert!(max_abs_diff(&nm.apply(&state).unwrap(), &expect) <= 1e-12);

        let eg = UpdateOperator::build(&g, AlgorithmConfig::new(Algorithm::Eg, eta, None).unwrap()).unwrap();
        let half = axpy(&[(1.0, z), (-eta, &field(z))]);
        let expect = axpy(&[(1.0, z), (-eta, &field(&half))]);
        prop_assert!(max_abs_diff(&eg.apply(z).unwrap(), &expect) <= 1e-12);
    }

    #[test]
    fn augmented_start_duplicates_initial_point(seed in 0u64..1000) {
        let g = random_game(seed);
        let mut r = common::rng(seed);
        let z0 = random_vec(&mut r, g.dim());
        for algo in [Algorithm::OgdaSim, Algorithm::OgdaAlt, Algorithm::Nm] {
            let beta = algo.uses_momentum().then_some(-0.5);
            let op = UpdateOperator::build(&g, AlgorithmConfig::new(algo, 0.1, beta).unwrap()).unwrap();
            let s = op.initial_state(&z0).unwrap();
            prop_assert_eq!(&s[..g.dim()], &z0[..]);
            prop_assert_eq!(&s[g.dim()..], &z0[..]);
        }
    }
}
