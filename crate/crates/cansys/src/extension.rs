//! The self-adjoint two-point boundary value problem on [0, N]:
//! characteristic function, eigenvalue location, and eigenfunctions.
//!
//! With separated angle conditions at both ends the spectrum is the real
//! zero set of an entire characteristic function, so eigenvalues come
//! from a sign-change scan refined by bisection. Double roots without a
//! sign change are invisible to the scan by design; the discretized
//! kernel cross-check in the resolvent module reports them.

use num_complex::Complex64;

use crate::defaults;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianField;
use crate::par::{map_range, ExecMode};
use crate::transfer::{transfer, Trajectory};
use crate::weyl::BoundaryAngle;

/// The canonical system on [0, N] with the conditions
/// f1(0) sin(alpha) + f2(0) cos(alpha) = 0 and
/// f1(N) sin(beta) + f2(N) cos(beta) = 0.
#[derive(Clone, Debug)]
pub struct SelfAdjointBvp {
    field: HamiltonianField,
    n: f64,
    alpha: BoundaryAngle,
    beta: BoundaryAngle,
}

impl SelfAdjointBvp {
    pub fn new(
        field: HamiltonianField,
        n: f64,
        alpha: BoundaryAngle,
        beta: BoundaryAngle,
    ) -> Result<Self> {
        let total = field.total_length();
        if !n.is_finite() || n <= 0.0 || n > total {
            return Err(Error::OutOfDomain { x: n, total });
        }
        Ok(SelfAdjointBvp {
            field,
            n,
            alpha,
            beta,
        })
    }

    /// The problem on the field's whole interval.
    pub fn over_full_field(
        field: HamiltonianField,
        alpha: BoundaryAngle,
        beta: BoundaryAngle,
    ) -> Result<Self> {
        let n = field.total_length();
        SelfAdjointBvp::new(field, n, alpha, beta)
    }

    pub fn field(&self) -> &HamiltonianField {
        &self.field
    }

    pub fn interval_end(&self) -> f64 {
        self.n
    }

    pub fn alpha(&self) -> BoundaryAngle {
        self.alpha
    }

    pub fn beta(&self) -> BoundaryAngle {
        self.beta
    }
}

/// Eigenvalues found in a window, sorted, with the boundary residual
/// |chi| recomputed at each accepted root.
#[derive(Clone, Debug)]
pub struct EigenList {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl EigenList {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The characteristic value at complex z; real z land on the real axis
/// up to rounding.
fn boundary_value(bvp: &SelfAdjointBvp, z: Complex64) -> Result<Complex64> {
    let t = transfer(&bvp.field, z, bvp.n)?;
    Ok(bvp.beta.pairing(t * bvp.alpha.vector()))
}

/// chi(lambda): the beta-pairing at N of the solution launched from the
/// alpha vector. Eigenvalues of the problem are exactly its real zeros.
pub fn char_function(bvp: &SelfAdjointBvp, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParams(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let value = boundary_value(bvp, Complex64::new(lambda, 0.0))?;
    debug_assert!(value.im.abs() <= 1e-14 * value.norm().max(1.0));
    Ok(value.re)
}

/// Locates eigenvalues in [lo, hi] by a uniform characteristic-function
/// scan (parallel over grid points per `mode`) with sign changes refined
/// by bisection to an interval no wider than `tol`.
pub fn eigenvalues_in(
    bvp: &SelfAdjointBvp,
    window: (f64, f64),
    grid_points: usize,
    tol: f64,
    mode: ExecMode,
) -> Result<EigenList> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParams(format!(
            "window [{lo}, {hi}] must be a finite nonempty interval"
        )));
    }
    if grid_points < 2 {
        return Err(Error::InvalidParams(
            "grid needs at least 2 points".to_string(),
        ));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "tol must be positive, got {tol}"
        )));
    }
    // exp(|lambda| * integral of tr H) bounds the transfer matrix; past
    // the exponent cap the scan would overflow rather than inform.
    let reach = lo.abs().max(hi.abs()) * bvp.field.integral_trace(bvp.n)?;
    if reach > defaults::SAFE_EXPONENT {
        return Err(Error::WindowOverflow { lo, hi });
    }

    let grid: Vec<f64> = (0..grid_points)
        .map(|j| lo + (hi - lo) * j as f64 / (grid_points - 1) as f64)
        .collect();
    let samples = map_range(mode, grid.len(), |j| char_function(bvp, grid[j]));
    let mut chi = Vec::with_capacity(samples.len());
    for s in samples {
        chi.push(s?);
    }

    let mut values = Vec::new();
    for j in 0..grid.len() {
        if chi[j] == 0.0 {
            values.push(grid[j]);
        } else if j + 1 < grid.len() && chi[j] * chi[j + 1] < 0.0 {
            values.push(bisect(bvp, grid[j], grid[j + 1], chi[j], tol)?);
        }
    }
    values.dedup_by(|b, a| (*b - *a).abs() <= tol);

    let mut residuals = Vec::with_capacity(values.len());
    for &v in &values {
        residuals.push(char_function(bvp, v)?.abs());
    }
    Ok(EigenList { values, residuals })
}

/// Bisection on a bracketing interval; `chi_lo` avoids one re-evaluation.
fn bisect(bvp: &SelfAdjointBvp, mut lo: f64, mut hi: f64, chi_lo: f64, tol: f64) -> Result<f64> {
    let mut sign_lo = chi_lo.is_sign_positive();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = char_function(bvp, mid)?;
        if value == 0.0 {
            return Ok(mid);
        }
        if value.is_sign_positive() == sign_lo {
            lo = mid;
            sign_lo = value.is_sign_positive();
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The solution launched from the alpha vector at an eigenvalue. Errors
/// unless the boundary residual at N is at eigenvalue tolerance. The
/// H-norm is positive except for degenerate fields whose zero cells
/// swallow the trajectory.
pub fn eigenfunction(bvp: &SelfAdjointBvp, lambda: f64) -> Result<Trajectory<'_>> {
    let z = Complex64::new(lambda, 0.0);
    let t = transfer(&bvp.field, z, bvp.n)?;
    let chi = bvp.beta.pairing(t * bvp.alpha.vector());
    let residual = chi.norm();
    if residual > defaults::EIGENFUNCTION_TOL * t.inf_norm().max(1.0) {
        return Err(Error::NotEigenvalue { lambda, residual });
    }
    Ok(Trajectory::new(&bvp.field, z, bvp.alpha.vector()))
}
