//! Shared helpers for the integration tests: a brute-force fixed-step
//! integrator that knows nothing about closed-form cell exponentials, and
//! seeded random field samplers.

#![allow(dead_code)]

use cansys::hamiltonian::{Cell, HamiltonianField, Sym2};
use cansys::linalg::{Mat2c, C_ONE, C_ZERO};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// u' = A(x) u with A = z J^{-1} H; returns the derivative map applied to
/// the transfer matrix column by column.
fn generator_times(matrix: Sym2, z: Complex64, t: Mat2c) -> Mat2c {
    // J^{-1} = [[0, 1], [-1, 0]], so A = z * [[h12, h22], [-h11, -h12]].
    let a = Mat2c::new(
        z * matrix.h12,
        z * matrix.h22,
        -z * matrix.h11,
        -z * matrix.h12,
    );
    a * t
}

/// Fixed-step fourth-order transfer matrix, steps aligned to breakpoints.
///
/// Each cell is integrated with uniform steps no longer than `max_step`,
/// so the integrator never straddles a coefficient jump. This is the
/// independent oracle for the closed-form propagation.
pub fn rk4_transfer(field: &HamiltonianField, z: Complex64, upto: f64, max_step: f64) -> Mat2c {
    assert!(upto >= 0.0 && upto <= field.total_length() + 1e-12);
    let mut t = Mat2c::identity();
    let mut covered = 0.0;
    for cell in field.cells() {
        if covered >= upto {
            break;
        }
        let span = cell.length.min(upto - covered);
        if span > 0.0 {
            let steps = (span / max_step).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let half = Complex64::new(0.5 * h, 0.0);
            let sixth = Complex64::new(h / 6.0, 0.0);
            let two = Complex64::new(2.0, 0.0);
            for _ in 0..steps {
                let k1 = generator_times(cell.matrix, z, t);
                let k2 = generator_times(cell.matrix, z, t + half * k1);
                let k3 = generator_times(cell.matrix, z, t + half * k2);
                let k4 = generator_times(cell.matrix, z, t + Complex64::new(h, 0.0) * k3);
                t = t + sixth * (k1 + two * k2 + two * k3 + k4);
            }
        }
        covered += cell.length;
    }
    t
}

/// Random PSD matrix as a rotated nonnegative diagonal.
pub fn random_psd(rng: &mut ChaCha8Rng) -> Sym2 {
    let a: f64 = rng.random_range(0.0..2.0);
    let b: f64 = rng.random_range(0.0..2.0);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = theta.sin_cos();
    Sym2::new(a * c * c + b * s * s, (a - b) * s * c, a * s * s + b * c * c)
}

/// Random field with up to `max_cells` cells of bounded width.
pub fn random_field(rng: &mut ChaCha8Rng, max_cells: usize, max_width: f64) -> HamiltonianField {
    let count = rng.random_range(1..=max_cells);
    let cells: Vec<Cell> = (0..count)
        .map(|_| Cell {
            length: rng.random_range(0.05..max_width),
            matrix: random_psd(rng),
        })
        .collect();
    HamiltonianField::new(cells).expect("random cells are PSD by construction")
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const ONE: Complex64 = C_ONE;
pub const ZERO: Complex64 = C_ZERO;
