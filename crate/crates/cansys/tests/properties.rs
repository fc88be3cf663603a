//! Randomized structural invariants, driven by proptest.

mod common;

use cansys::hamiltonian::{Cell, HamiltonianField, Sym2};
use cansys::linalg::{C_ONE, J};
use cansys::relations::LinearRelation;
use cansys::transfer::transfer;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_psd() -> impl Strategy<Value = Sym2> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..std::f64::consts::PI).prop_map(|(a, b, theta)| {
        let (s, c) = theta.sin_cos();
        Sym2::new(a * c * c + b * s * s, (a - b) * s * c, a * s * s + b * c * c)
    })
}

fn arb_field() -> impl Strategy<Value = HamiltonianField> {
    prop::collection::vec((0.05..0.5f64, arb_psd()), 1..=4).prop_map(|raw| {
        let cells: Vec<Cell> = raw
            .into_iter()
            .map(|(length, matrix)| Cell { length, matrix })
            .collect();
        HamiltonianField::new(cells).expect("sampled cells are PSD")
    })
}

fn arb_relation() -> impl Strategy<Value = LinearRelation> {
    (1..=4usize).prop_flat_map(|n| {
        prop::collection::vec(
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * n),
            1..=2 * n,
        )
        .prop_map(move |rows| {
            let pairs: Vec<(DVector<Complex64>, DVector<Complex64>)> = rows
                .iter()
                .map(|row| {
                    let f = DVector::from_iterator(
                        n,
                        row[..n].iter().map(|&(re, im)| Complex64::new(re, im)),
                    );
                    let g = DVector::from_iterator(
                        n,
                        row[n..].iter().map(|&(re, im)| Complex64::new(re, im)),
                    );
                    (f, g)
                })
                .collect();
            LinearRelation::new(n, &pairs).expect("dimensions match by construction")
        })
    })
}

proptest! {
    /// Serialization keeps every bit of every cell.
    #[test]
    fn json_round_trip_is_bit_exact(field in arb_field()) {
        let text = field.to_json();
        let back = HamiltonianField::from_json(&text).unwrap();
        prop_assert_eq!(field.cells().len(), back.cells().len());
        for (a, b) in field.cells().iter().zip(back.cells()) {
            prop_assert_eq!(a.length.to_bits(), b.length.to_bits());
            prop_assert_eq!(a.matrix.h11.to_bits(), b.matrix.h11.to_bits());
            prop_assert_eq!(a.matrix.h12.to_bits(), b.matrix.h12.to_bits());
            prop_assert_eq!(a.matrix.h22.to_bits(), b.matrix.h22.to_bits());
        }
    }

    /// T(x,z) J T(x, conj z)* = J and det T = 1 across the sample space.
    /// The envelope keeps |Im z| times the trace mass small, where the
    /// absolute tolerances below are honest; growth beyond that is covered
    /// by the scale-relative checks in the unit tests.
    #[test]
    fn transfer_is_symplectic(
        field in arb_field(),
        re in -3.0..3.0f64,
        im in -0.4..0.4f64,
        frac in 0.01..1.0f64,
    ) {
        let z = Complex64::new(re, im);
        let x = frac * field.total_length();
        let t = transfer(&field, z, x).unwrap();
        let t_bar = transfer(&field, z.conj(), x).unwrap();
        let identity_gap = (t * J * t_bar.adjoint() - J).inf_norm();
        prop_assert!(identity_gap <= 1e-10, "Lagrange identity off by {identity_gap:e}");
        let det_gap = (t.det() - C_ONE).norm();
        prop_assert!(det_gap <= 1e-12, "determinant off by {det_gap:e}");
    }

    /// The adjoint is an involution and pairs dimensions to 2n.
    #[test]
    fn relation_adjoint_involution_and_dimension_sum(r in arb_relation()) {
        let adj = r.adjoint();
        prop_assert_eq!(r.dim() + adj.dim(), 2 * r.ambient_dim());
        prop_assert!(adj.adjoint().coincides_with(&r), "double adjoint moved the subspace");
    }
}
