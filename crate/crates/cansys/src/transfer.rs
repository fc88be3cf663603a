//! Transfer matrices of the canonical system `J u' = z H u`.
//!
//! On a cell where H is constant the solution operator is the exponential
//! of the trace-free generator A = z J^-1 H, which for 2x2 matrices has
//! the closed form
//!
//! ```text
//! exp(A dx) = cosh(s) I + (sinh(s)/s) A dx,   s^2 = -det(A dx).
//! ```
//!
//! The full transfer matrix is the ordered product of cell exponentials.
//! Because each generator is trace free, det T = 1 along the whole line,
//! and for real symmetric H the matrix satisfies
//! T(x, z) J T(x, conj z)^* = J.

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianField, Sym2};
use crate::linalg::{Mat2c, Vec2c, C_ONE};
use crate::quadrature::GaussLegendre;
use crate::{defaults, linalg};
use num_complex::Complex64;

/// Trace-free generator A = z J^-1 H of the flow on one cell.
pub fn cell_generator(matrix: Sym2, z: Complex64) -> Mat2c {
    // J^-1 H = [[h12, h22], [-h11, -h12]]
    Mat2c::new(
        z * matrix.h12,
        z * matrix.h22,
        -z * matrix.h11,
        -z * matrix.h12,
    )
}

/// Closed-form exponential of `cell_generator(matrix, z) * dx`.
pub fn cell_exponential(matrix: Sym2, z: Complex64, dx: f64) -> Mat2c {
    let m = Complex64::new(dx, 0.0) * cell_generator(matrix, z);
    // s^2 = -det(M); cosh and sinh(s)/s are even, so the branch of the
    // square root does not matter.
    let s2 = -m.det();
    let s = s2.sqrt();
    let cosh = s.cosh();
    let sinhc = if s.norm() < defaults::SMALL_ARG {
        // sinh(s)/s = 1 + s^2/6 + s^4/120 + s^6/5040 + O(s^8)
        C_ONE + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0
    } else {
        s.sinh() / s
    };
    Mat2c::new(
        cosh + sinhc * m.0[0][0],
        sinhc * m.0[0][1],
        sinhc * m.0[1][0],
        cosh + sinhc * m.0[1][1],
    )
}

/// Transfer matrices T(x, z) for one field and one spectral parameter,
/// with the products at cell breakpoints precomputed so any x costs one
/// cell exponential.
#[derive(Clone, Debug)]
pub struct Propagator<'f> {
    field: &'f HamiltonianField,
    z: Complex64,
    // prefix[k] = T(breakpoint_k, z); prefix[0] = I
    prefix: Vec<Mat2c>,
}

impl<'f> Propagator<'f> {
    pub fn new(field: &'f HamiltonianField, z: Complex64) -> Self {
        let mut prefix = Vec::with_capacity(field.cells().len() + 1);
        let mut t = Mat2c::identity();
        prefix.push(t);
        for cell in field.cells() {
            t = cell_exponential(cell.matrix, z, cell.length) * t;
            prefix.push(t);
        }
        Propagator { field, z, prefix }
    }

    pub fn field(&self) -> &'f HamiltonianField {
        self.field
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// T(x, z) with T(0, z) = I.
    pub fn transfer_at(&self, x: f64) -> Result<Mat2c> {
        let (k, offset) = self.field.cell_at(x)?;
        if offset == 0.0 {
            return Ok(self.prefix[k]);
        }
        let cell = self.field.cells()[k];
        Ok(cell_exponential(cell.matrix, self.z, offset) * self.prefix[k])
    }
}

/// Convenience wrapper: T(x, z) for a single evaluation.
pub fn transfer(field: &HamiltonianField, z: Complex64, x: f64) -> Result<Mat2c> {
    Propagator::new(field, z).transfer_at(x)
}

/// A solution x -> T(x, z) c of the canonical system.
#[derive(Clone, Debug)]
pub struct Trajectory<'f> {
    propagator: Propagator<'f>,
    initial: Vec2c,
}

impl<'f> Trajectory<'f> {
    pub fn new(field: &'f HamiltonianField, z: Complex64, initial: Vec2c) -> Self {
        Trajectory {
            propagator: Propagator::new(field, z),
            initial,
        }
    }

    /// Reuses an existing propagator, sharing the prefix products.
    pub fn from_propagator(propagator: Propagator<'f>, initial: Vec2c) -> Self {
        Trajectory {
            propagator,
            initial,
        }
    }

    pub fn field(&self) -> &'f HamiltonianField {
        self.propagator.field()
    }

    pub fn z(&self) -> Complex64 {
        self.propagator.z()
    }

    pub fn initial(&self) -> Vec2c {
        self.initial
    }

    pub fn eval(&self, x: f64) -> Result<Vec2c> {
        Ok(self.propagator.transfer_at(x)? * self.initial)
    }
}

/// The canonical basis solutions u (initial (1, 0)) and v (initial (0, 1)).
pub fn basis_pair<'f>(
    field: &'f HamiltonianField,
    z: Complex64,
) -> (Trajectory<'f>, Trajectory<'f>) {
    let propagator = Propagator::new(field, z);
    let u = Trajectory::from_propagator(propagator.clone(), Vec2c::from_real(1.0, 0.0));
    let v = Trajectory::from_propagator(propagator, Vec2c::from_real(0.0, 1.0));
    (u, v)
}

/// Splits [a, b] into quadrature panels no wider than
/// `PANEL_WIDTH / (1 + |z|)`, since solution entries oscillate or grow
/// at rate |z| and the rule has fixed order.
pub(crate) fn panel_bounds(a: f64, b: f64, z: Complex64) -> impl Iterator<Item = (f64, f64)> {
    let len = b - a;
    let m = ((len * (1.0 + z.norm()) / defaults::PANEL_WIDTH).ceil() as usize).max(1);
    (0..m).map(move |k| {
        let lo = a + len * k as f64 / m as f64;
        let hi = if k + 1 == m {
            b
        } else {
            a + len * (k + 1) as f64 / m as f64
        };
        (lo, hi)
    })
}

/// The weighted inner product of two solutions over [0, upto]:
/// integral of f(x)^* H(x) g(x), conjugate linear in f. Both trajectories
/// must be built over `field` itself, not a copy.
pub fn h_inner_product(
    field: &HamiltonianField,
    f: &Trajectory,
    g: &Trajectory,
    rule: &GaussLegendre,
    upto: f64,
) -> Result<Complex64> {
    if !std::ptr::eq(field, f.field()) || !std::ptr::eq(field, g.field()) {
        return Err(Error::FieldMismatch);
    }
    let total = field.total_length();
    if !upto.is_finite() || upto < 0.0 || upto > total {
        return Err(Error::OutOfDomain { x: upto, total });
    }
    let mut acc = linalg::C_ZERO;
    for (k, cell) in field.cells().iter().enumerate() {
        let left = field.breakpoints()[k];
        if left >= upto {
            break;
        }
        let right = (left + cell.length).min(upto);
        for (lo, hi) in panel_bounds(left, right, f.z()) {
            for (x, w) in rule.map_to(lo, hi) {
                let fx = f.eval(x)?;
                let gx = g.eval(x)?;
                acc += Complex64::new(w, 0.0) * fx.dot(cell.matrix.apply(gx));
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{builtin, BuiltinParams, Cell};
    use crate::linalg::J;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_field(length: f64) -> HamiltonianField {
        builtin(
            "identity",
            BuiltinParams {
                length: Some(length),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn generator_matches_hand_computation() {
        // H = I, z = 1: A = [[0, 1], [-1, 0]]
        let a = cell_generator(Sym2::identity(), C_ONE);
        let expect = Mat2c::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0));
        assert!((a - expect).inf_norm() < 1e-15);
        assert_eq!(a.trace(), linalg::C_ZERO);
    }

    #[test]
    fn identity_field_gives_rotation_matrices() {
        let field = identity_field(3.0);
        for &x in &[0.0, 0.5, 1.7, 3.0] {
            for &z in &[c(1.0, 0.0), c(0.3, 0.0), c(0.5, 1.2)] {
                let t = transfer(&field, z, x).unwrap();
                let zx = z * x;
                let expect = Mat2c::new(zx.cos(), zx.sin(), -zx.sin(), zx.cos());
                assert!(
                    (t - expect).inf_norm() < 1e-12,
                    "x={x} z={z}: {t:?} vs {expect:?}"
                );
            }
        }
    }

    #[test]
    fn rank_one_field_gives_shear_matrices() {
        let field = HamiltonianField::new(vec![Cell {
            length: 2.0,
            matrix: Sym2::new(1.0, 0.0, 0.0),
        }])
        .unwrap();
        let z = c(0.7, -0.4);
        let x = 1.3;
        let t = transfer(&field, z, x).unwrap();
        let expect = Mat2c::new(C_ONE, linalg::C_ZERO, -z * x, C_ONE);
        assert!((t - expect).inf_norm() < 1e-13);
    }

    #[test]
    fn small_argument_branch_agrees_with_direct_formula() {
        // Pick |s| just above and below the switch and compare against a
        // higher-precision series evaluation.
        let h = Sym2::new(1.0, 0.2, 0.8);
        for &dx in &[1e-5, 9e-5, 1.2e-4, 1e-3] {
            let z = c(0.9, 0.4);
            let e = cell_exponential(h, z, dx);
            // Reference: scaling and squaring from a tiny step.
            let mut reference = Mat2c::identity();
            let steps = 64;
            let tiny = cell_exponential(h, z, dx / steps as f64);
            for _ in 0..steps {
                reference = tiny * reference;
            }
            assert!(
                (e - reference).inf_norm() < 1e-13,
                "dx={dx}: {:?}",
                (e - reference).inf_norm()
            );
        }
    }

    #[test]
    fn zero_z_freezes_the_flow() {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(4.0),
                seed: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        let t = transfer(&field, linalg::C_ZERO, 4.0).unwrap();
        assert!((t - Mat2c::identity()).inf_norm() < 1e-15);
    }

    #[test]
    fn determinant_one_and_symplectic_identity() {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(5.0),
                seed: Some(17),
                ..Default::default()
            },
        )
        .unwrap();
        let end = field.total_length();
        for &z in &[c(0.5, 0.0), c(0.0, 1.0), c(-1.2, 0.8)] {
            let t = transfer(&field, z, end).unwrap();
            // Rounding in det grows with the square of the matrix scale.
            let scale = 1.0 + t.inf_norm() * t.inf_norm();
            assert!((t.det() - C_ONE).norm() < 1e-12 * scale);
            let t_bar = transfer(&field, z.conj(), end).unwrap();
            let lhs = t * J * t_bar.adjoint();
            assert!((lhs - J).inf_norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn cocycle_property_at_interior_points() {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(3.0),
                seed: Some(5),
                ..Default::default()
            },
        )
        .unwrap();
        let z = c(0.4, 0.9);
        let prop = Propagator::new(&field, z);
        // T(x2) = T_{[x1, x2]} T(x1) with both points on breakpoints.
        let x1 = field.breakpoints()[4];
        let x2 = field.breakpoints()[9];
        let tail = field.truncate(x2).unwrap();
        let shifted: Vec<_> = tail.cells()[4..].to_vec();
        let segment = HamiltonianField::new(shifted).unwrap();
        let t_seg = transfer(&segment, z, segment.total_length()).unwrap();
        let lhs = prop.transfer_at(x2).unwrap();
        let rhs = t_seg * prop.transfer_at(x1).unwrap();
        assert!((lhs - rhs).inf_norm() < 1e-12);
    }

    #[test]
    fn conjugating_z_conjugates_the_matrix() {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(2.0),
                seed: Some(23),
                ..Default::default()
            },
        )
        .unwrap();
        let z = c(1.1, -0.7);
        let t = transfer(&field, z, field.total_length()).unwrap();
        let tc = transfer(&field, z.conj(), field.total_length()).unwrap();
        assert!((t.conj() - tc).inf_norm() < 1e-13);
    }

    #[test]
    fn out_of_domain_evaluation_is_rejected() {
        let field = identity_field(1.0);
        let traj = Trajectory::new(&field, C_ONE, Vec2c::from_real(1.0, 0.0));
        assert!(traj.eval(1.5).is_err());
        assert!(transfer(&field, C_ONE, -0.2).is_err());
    }

    #[test]
    fn inner_product_of_rotation_solution_is_arc_length() {
        let length = 2.0 * std::f64::consts::PI;
        let field = identity_field(length);
        let (u, _) = basis_pair(&field, C_ONE);
        let rule = GaussLegendre::new(8);
        let value = h_inner_product(&field, &u, &u, &rule, length).unwrap();
        assert!((value.re - length).abs() < 1e-12);
        assert!(value.im.abs() < 1e-14);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric_and_psd() {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(2.0),
                seed: Some(31),
                ..Default::default()
            },
        )
        .unwrap();
        let z = c(0.3, 0.8);
        let (u, v) = basis_pair(&field, z);
        let rule = GaussLegendre::new(8);
        let uv = h_inner_product(&field, &u, &v, &rule, field.total_length()).unwrap();
        let vu = h_inner_product(&field, &v, &u, &rule, field.total_length()).unwrap();
        assert!((uv - vu.conj()).norm() < 1e-12);
        let uu = h_inner_product(&field, &u, &u, &rule, field.total_length()).unwrap();
        assert!(uu.im.abs() < 1e-12);
        assert!(uu.re >= 0.0);
    }

    #[test]
    fn inner_product_rejects_mismatched_fields() {
        let field = identity_field(1.0);
        let copy = identity_field(1.0);
        let (u, _) = basis_pair(&field, C_ONE);
        let (w, _) = basis_pair(&copy, C_ONE);
        let rule = GaussLegendre::new(8);
        assert!(matches!(
            h_inner_product(&field, &u, &w, &rule, 1.0),
            Err(Error::FieldMismatch)
        ));
    }
}
