//! Random states and independent reference computations shared by the
//! integration tests.

#![allow(dead_code)]

use adaptive_fv::{CellField, Mesh1D};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mesh of `n` cells on `[a, b]` with widths drawn from `[1, 4]` before scaling.
pub fn random_mesh(rng: &mut ChaCha8Rng, a: f64, b: f64, n: usize) -> Mesh1D {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..4.0)).collect();
    let total: f64 = w.iter().sum();
    let mut x = Vec::with_capacity(n + 1);
    x.push(a);
    let mut acc = 0.0;
    for wi in &w[..n - 1] {
        acc += wi;
        x.push(a + (b - a) * acc / total);
    }
    x.push(b);
    Mesh1D::from_interfaces(x).unwrap()
}

/// Moves interior interfaces by up to `beta` times the smaller adjacent width.
/// With `moving` given, only those interfaces move.
pub fn perturb(rng: &mut ChaCha8Rng, mesh: &Mesh1D, beta: f64, moving: Option<&[usize]>) -> Mesh1D {
    let mut x = mesh.interfaces().to_vec();
    let n = mesh.n_cells();
    for j in 1..n {
        if moving.is_some_and(|m| !m.contains(&j)) {
            continue;
        }
        let cap = mesh.width(j - 1).min(mesh.width(j));
        x[j] += beta * cap * rng.gen_range(-1.0..1.0);
    }
    Mesh1D::from_interfaces(x).unwrap()
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Cell averages on `dst` of the piecewise constant function `values` on
/// `src`, by summing interval overlaps directly.
pub fn overlap_average(src: &Mesh1D, values: &[f64], dst: &Mesh1D) -> Vec<f64> {
    let xs = src.interfaces();
    let xd = dst.interfaces();
    (0..dst.n_cells())
        .map(|i| {
            let (lo, hi) = (xd[i], xd[i + 1]);
            let mut mass = 0.0;
            for j in 0..src.n_cells() {
                let overlap = hi.min(xs[j + 1]) - lo.max(xs[j]);
                if overlap > 0.0 {
                    mass += overlap * values[j];
                }
            }
            mass / (hi - lo)
        })
        .collect()
}

pub fn physical(values: Vec<f64>) -> CellField {
    CellField::physical(values).unwrap()
}

pub fn reference(values: Vec<f64>) -> CellField {
    CellField::reference(values).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
