//! Piecewise-constant Hamiltonian fields on [0, L].
//!
//! A field is a nonempty list of cells, each a positive length paired with
//! a real symmetric positive semi-definite 2x2 matrix. Fields are the
//! coefficient data for the canonical system `J u' = z H u`; everything
//! else in the crate consumes them through this module.
//!
//! The on-disk format is JSON:
//!
//! ```json
//! {"cells": [{"length": 1.0, "h": [1.0, 0.0, 1.0]}]}
//! ```
//!
//! where `h` lists the three independent entries `[h11, h12, h22]`. The
//! writer emits every number with 17 significant digits so a round trip
//! reproduces the field bit for bit.

use crate::defaults;
use crate::error::{Error, Result};
use crate::linalg::{Mat2c, Vec2c};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::path::Path;

/// Real symmetric 2x2 matrix stored by its independent entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl Sym2 {
    pub fn new(h11: f64, h12: f64, h22: f64) -> Self {
        Sym2 { h11, h12, h22 }
    }

    pub fn identity() -> Self {
        Sym2::new(1.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Sym2::new(0.0, 0.0, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12 * self.h12
    }

    /// Smallest eigenvalue through the half-difference discriminant form,
    /// which stays accurate when the two eigenvalues are far apart.
    pub fn min_eigenvalue(&self) -> f64 {
        let mid = 0.5 * (self.h11 + self.h22);
        let half_diff = 0.5 * (self.h11 - self.h22);
        mid - (half_diff * half_diff + self.h12 * self.h12).sqrt()
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2::new(s * self.h11, s * self.h12, s * self.h22)
    }

    pub fn is_finite(&self) -> bool {
        self.h11.is_finite() && self.h12.is_finite() && self.h22.is_finite()
    }

    pub fn to_complex(&self) -> Mat2c {
        Mat2c::new(
            Complex64::new(self.h11, 0.0),
            Complex64::new(self.h12, 0.0),
            Complex64::new(self.h12, 0.0),
            Complex64::new(self.h22, 0.0),
        )
    }

    pub fn apply(&self, v: Vec2c) -> Vec2c {
        Vec2c::new(
            self.h11 * v.0[0] + self.h12 * v.0[1],
            self.h12 * v.0[0] + self.h22 * v.0[1],
        )
    }
}

/// One constant piece of the field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub length: f64,
    pub matrix: Sym2,
}

/// Validated piecewise-constant field on [0, total_length].
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianField {
    cells: Vec<Cell>,
    // breakpoints[k] is the left edge of cell k; the last entry is the
    // total length.
    breakpoints: Vec<f64>,
}

/// What `validate` saw, whether or not construction would succeed.
#[derive(Clone, Debug)]
pub struct FieldDiagnostics {
    pub cell_count: usize,
    pub total_length: f64,
    /// Smallest eigenvalue margin over cells, scaled by the cell trace.
    pub min_psd_margin: f64,
    pub zero_trace_cells: Vec<usize>,
    /// Empty when the field is valid.
    pub issues: Vec<String>,
}

impl FieldDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks lengths, finiteness, and positive semi-definiteness of every
/// cell. PSD holds when the smallest eigenvalue is at least
/// `-psd_tol * trace`.
pub fn validate(cells: &[Cell], psd_tol: f64) -> FieldDiagnostics {
    let mut issues = Vec::new();
    let mut zero_trace_cells = Vec::new();
    let mut min_margin = f64::INFINITY;
    if cells.is_empty() {
        issues.push("field has no cells".to_string());
    }
    for (k, cell) in cells.iter().enumerate() {
        if !cell.length.is_finite() || cell.length <= 0.0 {
            issues.push(format!("cell {k}: length {} is not positive", cell.length));
        }
        if !cell.matrix.is_finite() {
            issues.push(format!("cell {k}: matrix has a non-finite entry"));
            continue;
        }
        let trace = cell.matrix.trace();
        let min_eig = cell.matrix.min_eigenvalue();
        if trace == 0.0 && min_eig == 0.0 {
            zero_trace_cells.push(k);
        }
        let scale = trace.abs().max(f64::MIN_POSITIVE);
        min_margin = min_margin.min(min_eig / scale);
        if min_eig < -psd_tol * trace.abs() || trace < 0.0 {
            issues.push(format!(
                "cell {k}: matrix is not positive semi-definite \
                 (smallest eigenvalue {min_eig:e}, trace {trace:e})"
            ));
        }
    }
    FieldDiagnostics {
        cell_count: cells.len(),
        total_length: cells.iter().map(|c| c.length).sum(),
        min_psd_margin: if min_margin.is_finite() {
            min_margin
        } else {
            0.0
        },
        zero_trace_cells,
        issues,
    }
}

impl HamiltonianField {
    /// Builds a field, rejecting invalid cells at construction.
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        let diag = validate(&cells, defaults::PSD_TOL);
        if !diag.is_valid() {
            return Err(Error::InvalidField(diag.issues.join("; ")));
        }
        let mut breakpoints = Vec::with_capacity(cells.len() + 1);
        let mut acc = 0.0;
        breakpoints.push(0.0);
        for cell in &cells {
            acc += cell.length;
            breakpoints.push(acc);
        }
        Ok(HamiltonianField { cells, breakpoints })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn total_length(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn diagnostics(&self) -> FieldDiagnostics {
        validate(&self.cells, defaults::PSD_TOL)
    }

    /// Index of the cell containing x and the offset into it. Breakpoints
    /// resolve to the cell on their right, except the right endpoint.
    pub fn cell_at(&self, x: f64) -> Result<(usize, f64)> {
        let total = self.total_length();
        if !x.is_finite() || x < 0.0 || x > total {
            return Err(Error::OutOfDomain { x, total });
        }
        if x == total {
            let k = self.cells.len() - 1;
            return Ok((k, x - self.breakpoints[k]));
        }
        let k = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(idx) => idx.min(self.cells.len() - 1),
            Err(idx) => idx - 1,
        };
        Ok((k, x - self.breakpoints[k]))
    }

    /// Matrix value at x.
    pub fn at(&self, x: f64) -> Result<Sym2> {
        let (k, _) = self.cell_at(x)?;
        Ok(self.cells[k].matrix)
    }

    /// Integral of the trace over [0, upto] as an exact piecewise sum.
    pub fn integral_trace(&self, upto: f64) -> Result<f64> {
        let total = self.total_length();
        if !upto.is_finite() || upto < 0.0 || upto > total {
            return Err(Error::OutOfDomain { x: upto, total });
        }
        let mut acc = 0.0;
        for (k, cell) in self.cells.iter().enumerate() {
            let left = self.breakpoints[k];
            if left >= upto {
                break;
            }
            let len = cell.length.min(upto - left);
            acc += len * cell.matrix.trace();
        }
        Ok(acc)
    }

    /// The field restricted to [0, upto]. The final cell is shortened so
    /// the result has total length exactly `upto`.
    pub fn truncate(&self, upto: f64) -> Result<HamiltonianField> {
        let total = self.total_length();
        if !upto.is_finite() || upto <= 0.0 || upto > total {
            return Err(Error::OutOfDomain { x: upto, total });
        }
        let mut cells = Vec::new();
        for (k, cell) in self.cells.iter().enumerate() {
            let left = self.breakpoints[k];
            if left >= upto {
                break;
            }
            let len = cell.length.min(upto - left);
            if len > 0.0 {
                cells.push(Cell {
                    length: len,
                    matrix: cell.matrix,
                });
            }
        }
        HamiltonianField::new(cells)
    }

    /// Errors unless every cell has unit trace to within `tol`.
    pub fn require_trace_normalized(&self, tol: f64) -> Result<()> {
        for (k, cell) in self.cells.iter().enumerate() {
            let trace = cell.matrix.trace();
            if (trace - 1.0).abs() > tol {
                return Err(Error::NotTraceNormalized { cell: k, trace });
            }
        }
        Ok(())
    }
}

/// Result of [`trace_normalize`].
#[derive(Clone, Debug)]
pub struct NormalizedField {
    pub field: HamiltonianField,
    /// Indices of dropped zero-trace cells in the input.
    pub dropped_cells: Vec<usize>,
}

/// Gauge change to unit trace: cell (length, H) becomes
/// (length * tr H, H / tr H). Zero-trace cells carry no mass and are
/// dropped. The new total length equals the trace integral of the input
/// exactly, because both are the same left-to-right piecewise sum.
pub fn trace_normalize(field: &HamiltonianField) -> Result<NormalizedField> {
    let mut cells = Vec::new();
    let mut dropped = Vec::new();
    for (k, cell) in field.cells().iter().enumerate() {
        let trace = cell.matrix.trace();
        if trace == 0.0 {
            dropped.push(k);
            continue;
        }
        cells.push(Cell {
            length: cell.length * trace,
            matrix: cell.matrix.scale(1.0 / trace),
        });
    }
    if cells.is_empty() {
        return Err(Error::ZeroTrace);
    }
    Ok(NormalizedField {
        field: HamiltonianField::new(cells)?,
        dropped_cells: dropped,
    })
}

// ---------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------

/// Formats with 17 significant digits, enough to reproduce any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl HamiltonianField {
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"cells\": [");
        for (k, cell) in self.cells.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!(
                "{{\"length\": {}, \"h\": [{}, {}, {}]}}",
                fmt_f64(cell.length),
                fmt_f64(cell.matrix.h11),
                fmt_f64(cell.matrix.h12),
                fmt_f64(cell.matrix.h22)
            ));
        }
        out.push_str("]}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<HamiltonianField> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let cells_value = value
            .get("cells")
            .ok_or_else(|| Error::Json("missing top-level \"cells\" array".into()))?;
        let items = cells_value
            .as_array()
            .ok_or_else(|| Error::Json("\"cells\" must be an array".into()))?;
        let mut cells = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            let obj = item
                .as_object()
                .ok_or_else(|| Error::Json(format!("cell {k} must be an object")))?;
            let length = number_field(obj.get("length"), k, "length")?;
            let h = obj
                .get("h")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Json(format!("cell {k}: missing \"h\" array")))?;
            if h.len() != 3 {
                return Err(Error::Json(format!(
                    "cell {k}: \"h\" has {} entries; expected exactly 3 \
                     symmetric entries [h11, h12, h22], not a full matrix",
                    h.len()
                )));
            }
            let mut e = [0.0; 3];
            for (i, v) in h.iter().enumerate() {
                e[i] = finite_number(v, k, &format!("h[{i}]"))?;
            }
            cells.push(Cell {
                length,
                matrix: Sym2::new(e[0], e[1], e[2]),
            });
        }
        HamiltonianField::new(cells)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<HamiltonianField> {
        let text = std::fs::read_to_string(path)?;
        HamiltonianField::from_json(&text)
    }
}

fn number_field(value: Option<&Value>, cell: usize, name: &str) -> Result<f64> {
    let v = value.ok_or_else(|| Error::Json(format!("cell {cell}: missing \"{name}\"")))?;
    finite_number(v, cell, name)
}

fn finite_number(value: &Value, cell: usize, name: &str) -> Result<f64> {
    let x = value
        .as_f64()
        .ok_or_else(|| Error::Json(format!("cell {cell}: \"{name}\" must be a number")))?;
    if !x.is_finite() {
        return Err(Error::Json(format!(
            "cell {cell}: \"{name}\" is not finite"
        )));
    }
    Ok(x)
}

// ---------------------------------------------------------------------
// Builtin fields
// ---------------------------------------------------------------------

/// Optional parameters for [`builtin`]. Unset fields take per-name
/// defaults; parameters irrelevant to a name are ignored.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BuiltinParams {
    pub length: Option<f64>,
    pub cells: Option<usize>,
    pub rate: Option<f64>,
    pub seed: Option<u64>,
}

/// Reference fields by name:
///
/// * `identity`: H = I.
/// * `half-identity`: H = I/2, already trace normalized.
/// * `rank-one`: H = [[1, 0], [0, 0]].
/// * `exp-decay`: H = exp(-rate * x_mid) I sampled at cell midpoints,
///   so the cell traces decrease geometrically.
/// * `random-psd`: reproducible random PSD cells from the seed; each
///   matrix is a rotated nonnegative diagonal.
pub fn builtin(name: &str, params: BuiltinParams) -> Result<HamiltonianField> {
    let length = params.length.unwrap_or(1.0);
    if !length.is_finite() || length <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "length must be positive, got {length}"
        )));
    }
    if params.cells == Some(0) {
        return Err(Error::InvalidParams("cells must be at least 1".into()));
    }
    let uniform = |matrix: Sym2, cells: usize| -> Result<HamiltonianField> {
        let w = length / cells as f64;
        HamiltonianField::new(vec![
            Cell { length: w, matrix };
            cells
        ])
    };
    match name {
        "identity" => uniform(Sym2::identity(), params.cells.unwrap_or(1)),
        "half-identity" => uniform(Sym2::identity().scale(0.5), params.cells.unwrap_or(1)),
        "rank-one" => uniform(Sym2::new(1.0, 0.0, 0.0), params.cells.unwrap_or(1)),
        "exp-decay" => {
            let rate = params.rate.unwrap_or(1.0);
            if !rate.is_finite() || rate <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "rate must be positive, got {rate}"
                )));
            }
            let cells = params.cells.unwrap_or_else(|| default_cells(length));
            let w = length / cells as f64;
            let cells = (0..cells)
                .map(|j| {
                    let x_mid = (j as f64 + 0.5) * w;
                    Cell {
                        length: w,
                        matrix: Sym2::identity().scale((-rate * x_mid).exp()),
                    }
                })
                .collect();
            HamiltonianField::new(cells)
        }
        "random-psd" => {
            let seed = params.seed.unwrap_or(0);
            let cells = params.cells.unwrap_or_else(|| default_cells(length));
            let w = length / cells as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cells = (0..cells)
                .map(|_| Cell {
                    length: w,
                    matrix: random_psd_matrix(&mut rng),
                })
                .collect();
            HamiltonianField::new(cells)
        }
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Ten cells per unit length, at least one.
fn default_cells(length: f64) -> usize {
    ((10.0 * length).ceil() as usize).max(1)
}

/// Rotated nonnegative diagonal: R(theta) diag(a, b) R(theta)^T.
fn random_psd_matrix(rng: &mut ChaCha8Rng) -> Sym2 {
    let a: f64 = rng.random_range(0.0..2.0);
    let b: f64 = rng.random_range(0.0..2.0);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = theta.sin_cos();
    Sym2::new(
        a * c * c + b * s * s,
        (a - b) * s * c,
        a * s * s + b * c * c,
    )
}
