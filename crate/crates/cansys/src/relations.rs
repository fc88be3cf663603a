//! Finite-dimensional linear relations and their self-adjoint extensions.
//!
//! A linear relation on C^n is a subspace R of C^n x C^n whose elements are
//! written as pairs (f, g); an operator A corresponds to its graph
//! {(f, Af)}. The adjoint is
//!
//! ```text
//! R* = { (h, k) : <g, h> = <f, k> for every (f, g) in R },
//! ```
//!
//! the orthogonal complement of the flipped subspace {(g, -f)}. R is
//! symmetric when R is contained in R* and self-adjoint when they coincide.
//! The defect index at z is the codimension of {z f - g : (f, g) in R},
//! and the regularity domain collects the z where z f = g forces f = 0.
//!
//! For a self-adjoint relation the eigenvalue set can be computed two ways
//! that must agree: from the Hermitian operator part acting on the
//! orthogonal complement of the multivalued part mul(R) = {g : (0, g) in R},
//! and from scratch by testing at which z the resolvent exists as an
//! everywhere-defined single-valued graph. `extension_dimension_check`
//! searches for self-adjoint extensions of a symmetric relation by mixing
//! the two defect subspaces of the adjoint through random unitaries; every
//! extension it finds must exceed the base dimension by exactly the common
//! defect index.
//!
//! All subspaces are stored as orthonormal bases of stacked 2n-vectors
//! (f over g). Equality and inclusion are decided on orthogonal projectors,
//! rank and nullspace decisions on singular values with a relative cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::defaults;
use crate::error::{Error, Result};

/// Acceptance cutoff for a Gram-Schmidt residual, relative to the input norm.
const SPAN_TOL: f64 = 1e-12;

/// Eigenvalues closer than this are merged when spectra are reported as sets.
const SPECTRUM_MERGE_TOL: f64 = 1e-7;

/// Orthonormalize `vectors` by modified Gram-Schmidt in the given order.
///
/// The pivot order is the input order, so the same spanning list always
/// produces the same basis. A second projection pass keeps the result
/// orthonormal to machine precision even for nearly dependent inputs.
fn orthonormalize(len: usize, vectors: &[DVector<Complex64>]) -> DMatrix<Complex64> {
    let mut cols: Vec<DVector<Complex64>> = Vec::new();
    for v in vectors {
        assert_eq!(v.len(), len, "span vector has wrong length");
        let original = v.norm();
        if original <= SPAN_TOL {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for c in &cols {
                let coeff = c.dotc(&w);
                w -= c * coeff;
            }
        }
        let norm = w.norm();
        if norm > SPAN_TOL * (1.0 + original) {
            cols.push(w * Complex64::new(1.0 / norm, 0.0));
        }
    }
    let mut basis = DMatrix::zeros(len, cols.len());
    for (j, c) in cols.iter().enumerate() {
        basis.set_column(j, c);
    }
    basis
}

/// Number of singular values of `m` above the relative rank cutoff.
fn rank_of(m: &DMatrix<Complex64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    if !(max > 0.0) {
        return 0;
    }
    sv.iter().filter(|s| **s > defaults::SVD_RELATIVE_TOL * max).count()
}

/// Orthonormal basis of the nullspace of `m`, one column per direction.
///
/// The matrix is padded with zero rows to square shape so the thin SVD
/// returns a full set of right singular vectors even when `m` is wide.
fn nullspace(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let mut work = DMatrix::zeros(rows.max(cols), cols);
    work.rows_mut(0, rows).copy_from(m);
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("nullspace: SVD did not produce V");
    let sv = &svd.singular_values;
    let max = sv.max().max(0.0);
    let cutoff = defaults::SVD_RELATIVE_TOL * max;
    let mut kept = Vec::new();
    for j in 0..cols {
        let s = if j < sv.len() { sv[j] } else { 0.0 };
        if s <= cutoff {
            kept.push(v_t.row(j).adjoint());
        }
    }
    let mut basis = DMatrix::zeros(cols, kept.len());
    for (j, c) in kept.iter().enumerate() {
        basis.set_column(j, c);
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `span` in C^dim.
fn complement(span: &DMatrix<Complex64>, dim: usize) -> DMatrix<Complex64> {
    if span.ncols() == 0 {
        return DMatrix::identity(dim, dim);
    }
    nullspace(&span.adjoint())
}

/// A subspace of C^n x C^n stored as an orthonormal basis of pair vectors.
///
/// Each basis column stacks f on top of g. The basis is produced by
/// Gram-Schmidt in construction order, so identical spanning lists yield
/// identical representations; different bases of the same subspace compare
/// equal through [`LinearRelation::coincides_with`].
#[derive(Debug, Clone)]
pub struct LinearRelation {
    ambient: usize,
    basis: DMatrix<Complex64>,
}

impl LinearRelation {
    /// Relation spanned by the given (f, g) pairs on C^ambient.
    pub fn new(ambient: usize, pairs: &[(DVector<Complex64>, DVector<Complex64>)]) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::InvalidParams("ambient dimension must be positive".into()));
        }
        let mut stacked = Vec::with_capacity(pairs.len());
        for (f, g) in pairs {
            if f.len() != ambient || g.len() != ambient {
                return Err(Error::InvalidParams(format!(
                    "pair has lengths {} and {}, expected {ambient}",
                    f.len(),
                    g.len()
                )));
            }
            let mut v = DVector::zeros(2 * ambient);
            v.rows_mut(0, ambient).copy_from(f);
            v.rows_mut(ambient, ambient).copy_from(g);
            stacked.push(v);
        }
        Ok(Self::from_stacked(ambient, &stacked))
    }

    /// Graph {(f, Af)} of a square matrix acting on C^n.
    pub fn from_graph(a: &DMatrix<Complex64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidParams(format!(
                "graph needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let pairs: Vec<_> = (0..n)
            .map(|j| {
                let f = DVector::from_fn(n, |i, _| if i == j { Complex64::ONE } else { Complex64::ZERO });
                let g = DVector::from(a.column(j).into_owned());
                (f, g)
            })
            .collect();
        Self::new(n, &pairs)
    }

    fn from_stacked(ambient: usize, vectors: &[DVector<Complex64>]) -> Self {
        Self { ambient, basis: orthonormalize(2 * ambient, vectors) }
    }

    /// Dimension of the underlying space C^n.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Dimension of the relation as a subspace of C^n x C^n.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of pair vectors, one column per basis element.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    /// First components of the basis columns, as an n x dim matrix.
    fn f_part(&self) -> DMatrix<Complex64> {
        self.basis.rows(0, self.ambient).into_owned()
    }

    /// Second components of the basis columns, as an n x dim matrix.
    fn g_part(&self) -> DMatrix<Complex64> {
        self.basis.rows(self.ambient, self.ambient).into_owned()
    }

    /// The matrix whose columns are z f_j - g_j over the basis pairs.
    fn z_f_minus_g(&self, z: Complex64) -> DMatrix<Complex64> {
        self.f_part() * z - self.g_part()
    }

    /// Orthogonal projector of C^{2n} onto the relation.
    pub fn projector(&self) -> DMatrix<Complex64> {
        &self.basis * self.basis.adjoint()
    }

    /// Whether both relations are the same subspace, compared on projectors.
    pub fn coincides_with(&self, other: &LinearRelation) -> bool {
        self.ambient == other.ambient
            && (self.projector() - other.projector()).norm() <= defaults::PROJECTOR_TOL
    }

    /// Whether this relation is a subspace of `other`.
    pub fn contained_in(&self, other: &LinearRelation) -> bool {
        if self.ambient != other.ambient {
            return false;
        }
        let p = self.projector();
        (&p - other.projector() * &p).norm() <= defaults::PROJECTOR_TOL
    }

    /// Adjoint relation: all (h, k) with <g, h> = <f, k> against every pair.
    ///
    /// Equivalently the orthogonal complement of the flip (f, g) -> (g, -f)
    /// of this relation, so dim R + dim R* = 2n always holds.
    pub fn adjoint(&self) -> LinearRelation {
        let n = self.ambient;
        let mut flipped = DMatrix::zeros(2 * n, self.dim());
        flipped.rows_mut(0, n).copy_from(&self.g_part());
        flipped.rows_mut(n, n).copy_from(&(-self.f_part()));
        LinearRelation { ambient: n, basis: complement(&flipped, 2 * n) }
    }

    /// Whether the relation is contained in its adjoint.
    pub fn is_symmetric(&self) -> bool {
        self.contained_in(&self.adjoint())
    }

    /// Whether the relation equals its adjoint.
    pub fn is_selfadjoint(&self) -> bool {
        self.coincides_with(&self.adjoint())
    }

    /// Codimension of {z f - g : (f, g) in R} in C^n.
    pub fn defect_index(&self, z: Complex64) -> usize {
        self.ambient - rank_of(&self.z_f_minus_g(z))
    }

    /// Whether z f = g forces f = 0 within the relation.
    ///
    /// Nonzero solutions live in the nullspace of the pair map
    /// c -> z f(c) - g(c); z belongs to the regularity domain exactly when
    /// that nullspace carries no first component.
    pub fn in_regularity_domain(&self, z: Complex64) -> bool {
        let null = nullspace(&self.z_f_minus_g(z));
        if null.ncols() == 0 {
            return true;
        }
        let f_on_null = self.f_part() * &null;
        f_on_null.norm() <= defaults::SVD_RELATIVE_TOL * (null.ncols() as f64).sqrt()
    }

    /// Whether (z - R)^{-1} exists as the graph of an everywhere-defined
    /// single-valued operator: {z f - g} must fill C^n, z f = g must force
    /// f = 0, and the relation must have the dimension of such a graph.
    fn resolvent_graph_exists(&self, z: Complex64) -> bool {
        self.dim() == self.ambient
            && rank_of(&self.z_f_minus_g(z)) == self.ambient
            && self.in_regularity_domain(z)
    }
}

/// Eigenvalues of a self-adjoint relation through its operator part.
///
/// mul(T) = {g : (0, g) in T} is split off, and the compression of the pair
/// map to the orthogonal complement of mul(T) is a Hermitian matrix whose
/// eigenvalues are exactly the z admitting nonzero f with (f, z f) in T.
/// Values closer than the merge tolerance are reported once.
pub fn spectral_kernel(t: &LinearRelation) -> Result<Vec<f64>> {
    if !t.is_selfadjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    let f = t.f_part();
    let g = t.g_part();
    let mul_coeff = nullspace(&f);
    let mul_vectors: Vec<DVector<Complex64>> = (0..mul_coeff.ncols())
        .map(|j| DVector::from(&g * mul_coeff.column(j)))
        .collect();
    let mul = orthonormalize(t.ambient_dim(), &mul_vectors);
    let q = complement(&mul, t.ambient_dim());
    if q.ncols() == 0 {
        return Ok(Vec::new());
    }
    let f_pinv = f
        .clone()
        .svd(true, true)
        .pseudo_inverse(defaults::SVD_RELATIVE_TOL)
        .map_err(|e| Error::InvalidParams(format!("pseudo-inverse failed: {e}")))?;
    let compressed = q.adjoint() * &g * f_pinv * &q;
    let hermitian = (&compressed + compressed.adjoint()) * Complex64::new(0.5, 0.0);
    let deviation = (&compressed - &hermitian).norm();
    if deviation > 1e-8 * hermitian.norm().max(1.0) {
        return Err(Error::NotSelfAdjoint);
    }
    let mut values: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalue is NaN"));
    values.dedup_by(|a, b| (*a - *b).abs() <= SPECTRUM_MERGE_TOL);
    Ok(values)
}

/// Spectrum of a self-adjoint relation from the resolvent-set definition.
///
/// A point z is regular when (z - T)^{-1} exists as an everywhere-defined
/// single-valued bounded graph. The spectrum is located by testing that
/// criterion directly on a candidate grid: the operator-part eigenvalues,
/// the midpoints between them, probes beyond both ends, and fixed off-grid
/// points. Candidates where the resolvent fails to exist are the spectrum,
/// so this must reproduce [`spectral_kernel`] without sharing its algebra.
pub fn spectrum_selfadjoint(t: &LinearRelation) -> Result<Vec<f64>> {
    let kernel = spectral_kernel(t)?;
    let mut candidates = kernel.clone();
    for pair in kernel.windows(2) {
        candidates.push(0.5 * (pair[0] + pair[1]));
    }
    if let (Some(first), Some(last)) = (kernel.first(), kernel.last()) {
        candidates.push(first - 1.0);
        candidates.push(last + 1.0);
    }
    candidates.push(0.0);
    candidates.push(0.37);
    let mut spectrum: Vec<f64> = candidates
        .into_iter()
        .filter(|&x| !t.resolvent_graph_exists(Complex64::new(x, 0.0)))
        .collect();
    spectrum.sort_by(|a, b| a.partial_cmp(b).expect("candidate is NaN"));
    spectrum.dedup_by(|a, b| (*a - *b).abs() <= SPECTRUM_MERGE_TOL);
    Ok(spectrum)
}

/// Summary of the structural tests for one relation.
#[derive(Debug, Clone)]
pub struct RelationReport {
    pub ambient_dim: usize,
    pub dim: usize,
    pub adjoint_dim: usize,
    pub symmetric: bool,
    pub selfadjoint: bool,
    /// Defect index at +i.
    pub defect_upper: usize,
    /// Defect index at -i.
    pub defect_lower: usize,
    /// Eigenvalues from the resolvent-set test; empty unless self-adjoint.
    pub spectrum: Vec<f64>,
    /// Eigenvalues from the operator part; empty unless self-adjoint.
    pub spectral_kernel: Vec<f64>,
}

/// Run every structural test on a relation and collect the results.
pub fn analyze(r: &LinearRelation) -> RelationReport {
    let selfadjoint = r.is_selfadjoint();
    let (spectrum, kernel) = if selfadjoint {
        (
            spectrum_selfadjoint(r).unwrap_or_default(),
            spectral_kernel(r).unwrap_or_default(),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    RelationReport {
        ambient_dim: r.ambient_dim(),
        dim: r.dim(),
        adjoint_dim: r.adjoint().dim(),
        symmetric: r.is_symmetric(),
        selfadjoint,
        defect_upper: r.defect_index(Complex64::new(0.0, 1.0)),
        defect_lower: r.defect_index(Complex64::new(0.0, -1.0)),
        spectrum,
        spectral_kernel: kernel,
    }
}

/// Outcome of the randomized self-adjoint extension search.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    /// Common defect index of the symmetric base relation at +i and -i.
    pub defect: usize,
    pub base_dim: usize,
    /// Distinct self-adjoint extensions found, the base itself if defect 0.
    pub extensions: Vec<LinearRelation>,
    /// Whether every extension exceeds the base dimension by the defect.
    pub dimension_law_holds: bool,
    pub trials_used: usize,
}

/// Defect subspace of the adjoint at z: pairs (h, z h) in S*.
fn defect_pairs(adjoint: &LinearRelation, z: Complex64) -> DMatrix<Complex64> {
    let n = adjoint.ambient_dim();
    let constraint = adjoint.g_part() - adjoint.f_part() * z;
    let coeff = nullspace(&constraint);
    let vectors: Vec<DVector<Complex64>> = (0..coeff.ncols())
        .map(|j| DVector::from(adjoint.basis() * coeff.column(j)))
        .collect();
    orthonormalize(2 * n, &vectors)
}

/// Random d x d unitary from a QR factorization of a uniform complex matrix.
fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    m.qr().q()
}

/// Search for self-adjoint extensions of a symmetric relation.
///
/// The defect indices at +i and -i must agree, which in these finite
/// dimensions is automatic for a symmetric relation; a genuine mismatch is
/// reported as an error because no self-adjoint extension can exist then.
/// Each trial mixes the two defect subspaces of the adjoint through a fresh
/// random unitary and adjoins the mixed pairs to the base. Candidates are
/// accepted only after passing the self-adjointness test, distinct ones are
/// kept, and each must satisfy dim R' = dim S + defect.
pub fn extension_dimension_check(
    s: &LinearRelation,
    trials: usize,
    seed: u64,
) -> Result<ExtensionReport> {
    if !s.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let plus = s.defect_index(Complex64::new(0.0, 1.0));
    let minus = s.defect_index(Complex64::new(0.0, -1.0));
    if plus != minus {
        return Err(Error::UnequalDefects { plus, minus });
    }
    let defect = plus;
    if defect == 0 {
        if !s.is_selfadjoint() {
            return Err(Error::NotSelfAdjoint);
        }
        return Ok(ExtensionReport {
            defect,
            base_dim: s.dim(),
            extensions: vec![s.clone()],
            dimension_law_holds: true,
            trials_used: 0,
        });
    }

    let adjoint = s.adjoint();
    let upper = defect_pairs(&adjoint, Complex64::new(0.0, 1.0));
    let lower = defect_pairs(&adjoint, Complex64::new(0.0, -1.0));
    if upper.ncols() != defect || lower.ncols() != defect {
        return Err(Error::InvalidParams(format!(
            "defect subspaces have dimensions {} and {}, expected {defect}",
            upper.ncols(),
            lower.ncols()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extensions: Vec<LinearRelation> = Vec::new();
    let mut dimension_law_holds = true;
    let mut trials_used = 0;
    for _ in 0..trials {
        trials_used += 1;
        let unitary = random_unitary(defect, &mut rng);
        let mixed = &upper + &lower * &unitary;
        let mut span: Vec<DVector<Complex64>> =
            (0..s.dim()).map(|j| s.basis().column(j).into_owned()).collect();
        for j in 0..defect {
            span.push(mixed.column(j).into_owned());
        }
        let candidate = LinearRelation::from_stacked(s.ambient_dim(), &span);
        if !candidate.is_selfadjoint() {
            continue;
        }
        if candidate.dim() != s.dim() + defect {
            dimension_law_holds = false;
        }
        if !extensions.iter().any(|e| e.coincides_with(&candidate)) {
            extensions.push(candidate);
        }
    }
    if extensions.is_empty() {
        return Err(Error::SearchExhausted { trials });
    }
    Ok(ExtensionReport {
        defect,
        base_dim: s.dim(),
        extensions,
        dimension_law_holds,
        trials_used,
    })
}

/// Seeded random self-adjoint relation on C^n.
///
/// A random unitary splits C^n into an operator part carrying a random
/// Hermitian matrix and a purely multivalued rest, so the samples cover
/// graphs, genuinely multivalued relations, and everything between.
pub fn random_selfadjoint(n: usize, seed: u64) -> LinearRelation {
    assert!(n > 0, "ambient dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mul_dim = rng.random_range(0..=n / 2);
    let op_dim = n - mul_dim;
    let u = random_unitary(n, &mut rng);
    let raw = DMatrix::from_fn(op_dim, op_dim, |_, _| {
        Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
    });
    let hermitian = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let mut span = Vec::with_capacity(n);
    for j in 0..op_dim {
        let f = u.column(j).into_owned();
        let g = DVector::from(u.columns(0, op_dim) * hermitian.column(j));
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&f);
        v.rows_mut(n, n).copy_from(&g);
        span.push(v);
    }
    for j in 0..mul_dim {
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(n, n).copy_from(&u.column(op_dim + j).into_owned());
        span.push(v);
    }
    LinearRelation::from_stacked(n, &span)
}

/// Seeded random symmetric relation on C^n with a nonzero defect for n > 1.
///
/// A random subspace of a self-adjoint relation is symmetric, and dropping
/// to dimension r leaves defect n - r on both half-planes.
pub fn random_symmetric(n: usize, seed: u64) -> LinearRelation {
    let parent = random_selfadjoint(n, seed ^ 0x9e3779b97f4a7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = if n == 1 { 1 } else { rng.random_range(1..n) };
    let mix = random_unitary(parent.dim(), &mut rng);
    let mixed = parent.basis() * mix;
    let span: Vec<DVector<Complex64>> = (0..dim).map(|j| mixed.column(j).into_owned()).collect();
    LinearRelation::from_stacked(n, &span)
}
