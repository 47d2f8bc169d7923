#![allow(dead_code)]

use std::sync::Arc;

use novikov_core::spectral::{Field, Grid};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Real field with random Hermitian spectrum on `|k| <= band`.
pub fn random_field(grid: &Arc<Grid>, band: f64, amp: f64, seed: u64) -> Field {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = grid.n_points();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(rng.gen_range(-amp..amp), 0.0);
    for m in 1..n / 2 {
        if grid.wavenumbers()[m] <= band {
            spec[m] = Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
            spec[n - m] = spec[m].conj();
        }
    }
    Field::from_spectrum(grid, spec).unwrap()
}

/// Even real field: real symmetric spectrum.
pub fn random_even_field(grid: &Arc<Grid>, band: f64, amp: f64, seed: u64) -> Field {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = grid.n_points();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(rng.gen_range(-amp..amp), 0.0);
    for m in 1..n / 2 {
        if grid.wavenumbers()[m] <= band {
            spec[m] = Complex64::new(rng.gen_range(-amp..amp), 0.0);
            spec[n - m] = spec[m];
        }
    }
    Field::from_spectrum(grid, spec).unwrap()
}

pub fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
