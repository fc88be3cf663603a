//! Central table of default tolerances and sizes.
//!
//! Every knob that an operation exposes defaults to a value from this
//! table, and the CLI prints the table verbatim via `--show-defaults`.

/// PSD slack in validation, relative to the cell trace.
pub const PSD_TOL: f64 = 1e-12;

/// Gauss-Legendre points per cell.
pub const QUAD_ORDER: usize = 8;

/// Switch to the series for sinh(s)/s below this |s|.
pub const SMALL_ARG: f64 = 1e-4;

/// Relative increment tolerance for the Cauchy convergence criterion.
pub const REL_TOL: f64 = 1e-6;

/// Truncation schedule 5 * 2^k, k = 0..3.
pub const SCHEDULE: [f64; 4] = [5.0, 10.0, 20.0, 40.0];

/// Grid points for the eigenvalue window scan.
pub const GRID_POINTS: usize = 2048;

/// Bisection stops when the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-10;

/// Residual bound for accepting a value as an eigenvalue.
pub const EIGENFUNCTION_TOL: f64 = 1e-8;

/// Rank decisions drop singular values below this times the largest.
pub const SVD_RELATIVE_TOL: f64 = 1e-9;

/// Subspace comparisons are done on projectors to this accuracy.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Jacobi sweeps stop at this off-diagonal Frobenius norm, relative.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;

/// Maximum Jacobi sweeps before reporting failure.
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Propagation refuses windows where |z| times the total trace mass
/// exceeds this exponent.
pub const SAFE_EXPONENT: f64 = 700.0;

/// Centered-difference step for residual checks.
pub const DIFF_STEP: f64 = 1e-6;

/// Residual samples per cell.
pub const RESIDUAL_MESH: usize = 32;

/// Trials for the randomized self-adjoint extension search.
pub const EXTENSION_TRIALS: usize = 32;

/// Gram sequences with condition number beyond this are not trusted to
/// resolve the smallest eigen-direction.
pub const GRAM_COND_LIMIT: f64 = 5e8;

/// A Gram eigenvalue below this (relative to the largest) is a zero-norm
/// class.
pub const ZERO_NORM_TOL: f64 = 1e-12;

/// Quadrature panel width cap at |z| = 1; actual panels shrink with
/// 1 + |z| so the fixed-order rule keeps tracking the oscillation.
pub const PANEL_WIDTH: f64 = 0.25;

/// Norm growth by at least this factor across the last doubling of the
/// schedule reads as divergence.
pub const GROWTH_FACTOR: f64 = 2.0;

/// Boundary pairings smaller than this (relative to the solution scale)
/// count as a vanishing m-function denominator.
pub const DENOMINATOR_TOL: f64 = 1e-12;

/// Per-cell unit-trace tolerance for normalized fields.
pub const TRACE_TOL: f64 = 1e-12;

/// Real spectral parameters closer than this to a located eigenvalue
/// are rejected; the kernel would be numerically poisoned.
pub const EIGEN_GAP_TOL: f64 = 1e-6;

/// The full table, in a fixed order, for `--show-defaults`.
pub fn table() -> Vec<(&'static str, String)> {
    let schedule = SCHEDULE
        .iter()
        .map(|n| format!("{n}"))
        .collect::<Vec<_>>()
        .join(",");
    vec![
        ("psd_tol", format!("{PSD_TOL:e}")),
        ("quad_order", format!("{QUAD_ORDER}")),
        ("small_arg", format!("{SMALL_ARG:e}")),
        ("rel_tol", format!("{REL_TOL:e}")),
        ("schedule", schedule),
        ("grid_points", format!("{GRID_POINTS}")),
        ("root_tol", format!("{ROOT_TOL:e}")),
        ("eigenfunction_tol", format!("{EIGENFUNCTION_TOL:e}")),
        ("svd_relative_tol", format!("{SVD_RELATIVE_TOL:e}")),
        ("projector_tol", format!("{PROJECTOR_TOL:e}")),
        ("jacobi_offdiag_tol", format!("{JACOBI_OFFDIAG_TOL:e}")),
        ("jacobi_max_sweeps", format!("{JACOBI_MAX_SWEEPS}")),
        ("safe_exponent", format!("{SAFE_EXPONENT}")),
        ("diff_step", format!("{DIFF_STEP:e}")),
        ("residual_mesh", format!("{RESIDUAL_MESH}")),
        ("extension_trials", format!("{EXTENSION_TRIALS}")),
        ("gram_cond_limit", format!("{GRAM_COND_LIMIT:e}")),
        ("zero_norm_tol", format!("{ZERO_NORM_TOL:e}")),
        ("panel_width", format!("{PANEL_WIDTH}")),
        ("growth_factor", format!("{GROWTH_FACTOR}")),
        ("denominator_tol", format!("{DENOMINATOR_TOL:e}")),
        ("trace_tol", format!("{TRACE_TOL:e}")),
        ("eigen_gap_tol", format!("{EIGEN_GAP_TOL:e}")),
    ]
}
