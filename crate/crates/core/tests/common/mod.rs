#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risbal::channel::{complex_gaussian, ArrayGeometry};
use risbal::manifold::ReflectionVector;
use risbal::sim::ScenarioConfig;
use risbal::{CMatrix, CVector, Complex64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `(X + Xᴴ)/2` with Gaussian `X`: indefinite in general.
pub fn random_hermitian(rng: &mut ChaCha8Rng, m: usize) -> CMatrix {
    let x = gaussian_matrix(rng, m, m);
    (&x + x.adjoint()).scale(0.5)
}

/// `Σ_k a_k a_kᴴ` over `rank` Gaussian vectors.
pub fn random_psd(rng: &mut ChaCha8Rng, m: usize, rank: usize) -> CMatrix {
    let a = gaussian_matrix(rng, m, rank);
    let p = &a * a.adjoint();
    (&p + p.adjoint()).scale(0.5)
}

pub fn random_phases(rng: &mut ChaCha8Rng, m: usize) -> ReflectionVector {
    let phases: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    ReflectionVector::from_phases(&phases)
}

/// Operating point with smaller arrays so per-test runtime stays low.
pub fn small_scenario() -> ScenarioConfig {
    ScenarioConfig {
        bs1_array: ArrayGeometry::new(2, 2).unwrap(),
        bs2_array: ArrayGeometry::new(2, 2).unwrap(),
        ris_array: ArrayGeometry::new(4, 4).unwrap(),
        users_per_cell: 2,
        rcg: risbal::manifold::RcgConfig::for_dimension(16),
        ..ScenarioConfig::default()
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
