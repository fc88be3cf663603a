use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the toolkit.
///
/// Domain failures carry enough context to tell a bad input apart from a
/// numerical breakdown; callers that want diagnostics rather than errors
/// should use the `validate` entry points instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hamiltonian field: {0}")]
    InvalidField(String),

    #[error("evaluation point {x} outside the field domain [0, {total}]")]
    OutOfDomain { x: f64, total: f64 },

    #[error("trajectories must be built over the same field")]
    FieldMismatch,

    #[error("field has zero total trace; nothing to normalize")]
    ZeroTrace,

    #[error("field is not trace normalized (cell {cell} has trace {trace})")]
    NotTraceNormalized { cell: usize, trace: f64 },

    #[error("boundary angle {0} outside (0, pi]")]
    InvalidAngle(f64),

    #[error("boundary denominator vanished at z = {z}; z is an eigenvalue of the reference problem")]
    DenominatorZero { z: Complex64 },

    #[error("normalization sin(alpha) + m(z) cos(alpha) vanished at z = {z}")]
    NormalizationZero { z: Complex64 },

    #[error("classification schedule needs at least 4 increasing truncation points")]
    BadSchedule,

    #[error("window [{lo}, {hi}] exceeds the safe propagation range for this field")]
    WindowOverflow { lo: f64, hi: f64 },

    #[error("z = {z} is within {dist:.3e} of located eigenvalue {eig}; resolvent undefined")]
    EigenvalueAtZ { z: Complex64, eig: f64, dist: f64 },

    #[error("{lambda} is not an eigenvalue: boundary residual {residual:.3e} above tolerance")]
    NotEigenvalue { lambda: f64, residual: f64 },

    #[error("quadrature order must be at least 1")]
    BadQuadratureOrder,

    #[error("Jacobi eigensolver failed to reach off-diagonal norm {target:.1e} in {sweeps} sweeps")]
    JacobiNoConvergence { target: f64, sweeps: usize },

    #[error("eigenvalue count mismatch: discretized kernel found {hs} in the window, shooting found {shooting}; a root was likely missed")]
    CountMismatch { hs: usize, shooting: usize },

    #[error("unknown builtin field '{0}'")]
    UnknownBuiltin(String),

    #[error("invalid builtin parameters: {0}")]
    InvalidParams(String),

    #[error("relation is not symmetric")]
    NotSymmetric,

    #[error("relation is not self-adjoint")]
    NotSelfAdjoint,

    #[error("defect indices differ: {plus} at +i vs {minus} at -i; no self-adjoint extension exists")]
    UnequalDefects { plus: usize, minus: usize },

    #[error("extension search exhausted {trials} trials without finding a self-adjoint extension")]
    SearchExhausted { trials: usize },

    #[error("json: {0}")]
    Json(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
