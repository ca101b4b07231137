#![allow(dead_code)]

use gda_core::{Matrix, QuadraticGame};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// `H2·H1·diag(eigs)·H1·H2` for two random Householder reflections.
pub fn rotated_diag(rng: &mut ChaCha8Rng, eigs: &[f64]) -> Matrix {
    let n = eigs.len();
    let mut m = Matrix::diag(eigs);
    for _ in 0..2 {
        let v = gaussian(rng, n, 1, 1.0);
        let vv: f64 = v.as_slice().iter().map(|a| a * a).sum();
        let h = Matrix::identity(n).sub(&v.matmul(&v.transpose()).scale(2.0 / vv));
        m = h.matmul(&m).matmul(&h);
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

fn split_dims(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let total = rng.random_range(2..=10usize);
    let d = rng.random_range(1..total);
    (d, total - d)
}

fn spectrum(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|_| lo * (hi / lo).powf(rng.random::<f64>()))
        .collect()
}

/// Strongly-convex strongly-concave game with `d + p` in `2..=10`, random
/// curvature spectra and coupling strength, diagonal or rotated blocks.
pub fn random_scsc(seed: u64) -> QuadraticGame {
    let mut r = rng(seed);
    let (d, p) = split_dims(&mut r);
    let mu_x = 10f64.powf(r.random_range(-2.0..0.0));
    let mu_y = 10f64.powf(r.random_range(-2.0..0.0));
    let ex = spectrum(&mut r, d, mu_x, 1.0);
    let ey = spectrum(&mut r, p, mu_y, 1.0);
    let coupling = 10f64.powf(r.random_range(-2.0..1.0));
    let b = gaussian(&mut r, d, p, coupling);
    let (a, c) = if r.random::<bool>() {
        (rotated_diag(&mut r, &ex), rotated_diag(&mut r, &ey))
    } else {
        (Matrix::diag(&ex), Matrix::diag(&ey))
    };
    QuadraticGame::new(a, b, c).unwrap()
}

/// Game with singular PSD `A`, positive-definite `C` and full-row-rank `B`
/// (`d ≤ p`, `d + p` in `2..=10`).
pub fn random_nosc(seed: u64) -> QuadraticGame {
    let mut r = rng(seed);
    loop {
        let total = r.random_range(2..=10usize);
        let d = r.random_range(1..=total / 2);
        let p = total - d;
        let mut ex = spectrum(&mut r, d, 1e-2, 1.0);
        ex[0] = 0.0;
        let mu_y = 10f64.powf(r.random_range(-2.0..0.0));
        let ey = spectrum(&mut r, p, mu_y, 1.0);
        let coupling = 10f64.powf(r.random_range(-1.5..0.5));
        let b = gaussian(&mut r, d, p, coupling);
        let a = if r.random::<bool>() {
            rotated_diag(&mut r, &ex)
        } else {
            Matrix::diag(&ex)
        };
        let g = QuadraticGame::new(a, b, Matrix::diag(&ey)).unwrap();
        if g.regime() == gda_core::GameRegime::StrongConcaveOnly && g.class_bounds().mu_xy > 1e-3 {
            return g;
        }
    }
}

/// Arbitrary convex-concave game, `d + p` in `2..=10`.
pub fn random_game(seed: u64) -> QuadraticGame {
    let mut r = rng(seed);
    let (d, p) = split_dims(&mut r);
    let ex = spectrum(&mut r, d, 1e-3, 2.0);
    let ey = spectrum(&mut r, p, 1e-3, 2.0);
    let a = rotated_diag(&mut r, &ex);
    let c = rotated_diag(&mut r, &ey);
    let b = gaussian(&mut r, d, p, 1.0);
    QuadraticGame::new(a, b, c).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Worst distance under greedy nearest-neighbour matching.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().map(|a| a.abs()).fold(0.0, f64::max)
}
