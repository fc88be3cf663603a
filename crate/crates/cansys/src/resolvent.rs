//! Green's kernel for the two-point problem, resolvent application with
//! residual verification, and the Hilbert-Schmidt discretization whose
//! spectrum cross-checks the shooting eigenvalues.
//!
//! The kernel is rank one on each side of the diagonal,
//!
//! ```text
//! G(x, t, z) = -f(x, z) w_a(t, zbar)*   for t <= x,
//!              -w_a(x, z) f(t, zbar)*   for t >  x,
//! ```
//!
//! with f = u + m v matching the right boundary condition and w_a the
//! normalized solution matching the left one. The overall sign is the
//! one that makes integration against H h produce the resolvent
//! (T - z)^{-1} h: eigenfunctions scale by 1/(E - z), and the kernel of
//! the inverse direction (raw products without the minus) would satisfy
//! J y' = z H y - H h instead of J y' = z H y + H h. With this sign the
//! two lateral limits on the diagonal differ by exactly -J; `evaluate`
//! returns their mean (which is what makes the discretized kernel
//! symmetric) and the jump itself is exposed through
//! [`GreenKernel::jump_at`].

use num_complex::Complex64;

use crate::defaults;
use crate::error::{Error, Result};
use crate::extension::{eigenvalues_in, SelfAdjointBvp};
use crate::hamiltonian::{HamiltonianField, Sym2};
use crate::linalg::{outer_adj, Mat2c, Vec2c, C_ZERO, J};
use crate::par::{map_range, ExecMode};
use crate::quadrature::GaussLegendre;
use crate::transfer::{panel_bounds, Trajectory};
use crate::weyl::{m_function, BoundaryAngle};

/// The unique positive semi-definite square root, in closed form:
/// S = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
pub fn psd_sqrt(m: Sym2) -> Result<Sym2> {
    if m.min_eigenvalue() < -defaults::PSD_TOL * m.trace().abs().max(1.0) {
        return Err(Error::InvalidField(format!(
            "indefinite matrix: min eigenvalue {:.3e}",
            m.min_eigenvalue()
        )));
    }
    let tr = m.trace();
    if tr <= 0.0 {
        // PSD with nonpositive trace is the zero matrix (up to rounding)
        return Ok(Sym2::zero());
    }
    let root_det = m.det().max(0.0).sqrt();
    let denom = (tr + 2.0 * root_det).sqrt();
    Ok(Sym2::new(
        (m.h11 + root_det) / denom,
        m.h12 / denom,
        (m.h22 + root_det) / denom,
    ))
}

/// The solution u + m v, launched from (1, m).
pub fn weyl_solution(field: &HamiltonianField, z: Complex64, m: Complex64) -> Trajectory<'_> {
    Trajectory::new(field, z, Vec2c([Complex64::ONE, m]))
}

/// The normalized solution matching the alpha condition at 0:
/// w_a(x) = T(x, z) (cos a, -sin a) / (sin a + m cos a).
///
/// The normalization vanishes exactly when z is an eigenvalue of the
/// two-point problem with these angles.
pub fn w_alpha(
    field: &HamiltonianField,
    z: Complex64,
    alpha: BoundaryAngle,
    m: Complex64,
) -> Result<Trajectory<'_>> {
    let sigma = alpha.angle().sin() + m * alpha.angle().cos();
    if sigma.norm() <= defaults::DENOMINATOR_TOL * m.norm().max(1.0) {
        return Err(Error::NormalizationZero { z });
    }
    let init = sigma.inv() * alpha.vector();
    Ok(Trajectory::new(field, z, init))
}

/// Green's kernel of the two-point problem at a resolvent point.
pub struct GreenKernel<'a> {
    bvp: &'a SelfAdjointBvp,
    z: Complex64,
    m: Complex64,
    f_z: Trajectory<'a>,
    w_z: Trajectory<'a>,
    f_zbar: Trajectory<'a>,
    w_zbar: Trajectory<'a>,
    swapped: bool,
}

impl<'a> GreenKernel<'a> {
    /// Builds the kernel at z. Real z on an eigenvalue fails with
    /// [`Error::NormalizationZero`]; a real z where the m-function
    /// denominator vanishes fails even though z may be in the resolvent
    /// set (the Weyl solution degenerates there; shift z slightly).
    pub fn new(bvp: &'a SelfAdjointBvp, z: Complex64) -> Result<Self> {
        Self::build(bvp, z, false)
    }

    /// Same kernel with the two branches deliberately exchanged. The
    /// diagonal jump comes out as +J, so residual checks must notice.
    pub fn swapped_for_negative_control(bvp: &'a SelfAdjointBvp, z: Complex64) -> Result<Self> {
        Self::build(bvp, z, true)
    }

    fn build(bvp: &'a SelfAdjointBvp, z: Complex64, swapped: bool) -> Result<Self> {
        let field = bvp.field();
        let n = bvp.interval_end();
        let m = m_function(field, z, bvp.beta(), n)?;
        let m_bar = m_function(field, z.conj(), bvp.beta(), n)?;
        let f_z = weyl_solution(field, z, m);
        let f_zbar = weyl_solution(field, z.conj(), m_bar);
        // Every kernel expression is of degree one in the w factor, so
        // negating the stored w trajectories puts the resolvent sign
        // into evaluate, apply_resolvent, and the HS assembly at once.
        let w_plus = w_alpha(field, z, bvp.alpha(), m)?;
        let w_z = Trajectory::new(field, z, -w_plus.initial());
        let w_plus_bar = w_alpha(field, z.conj(), bvp.alpha(), m_bar)?;
        let w_zbar = Trajectory::new(field, z.conj(), -w_plus_bar.initial());
        Ok(GreenKernel {
            bvp,
            z,
            m,
            f_z,
            w_z,
            f_zbar,
            w_zbar,
            swapped,
        })
    }

    pub fn bvp(&self) -> &'a SelfAdjointBvp {
        self.bvp
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// The m-function value the kernel was built with.
    pub fn m(&self) -> Complex64 {
        self.m
    }

    pub fn interval_end(&self) -> f64 {
        self.bvp.interval_end()
    }

    fn check_domain(&self, p: f64) -> Result<()> {
        let n = self.interval_end();
        if !p.is_finite() || p < 0.0 || p > n {
            return Err(Error::OutOfDomain { x: p, total: n });
        }
        Ok(())
    }

    /// The branch used below the diagonal (honoring the swap flag).
    fn lower(&self, x: f64, t: f64) -> Result<Mat2c> {
        if self.swapped {
            Ok(outer_adj(self.w_z.eval(x)?, self.f_zbar.eval(t)?))
        } else {
            Ok(outer_adj(self.f_z.eval(x)?, self.w_zbar.eval(t)?))
        }
    }

    /// The branch used above the diagonal.
    fn upper(&self, x: f64, t: f64) -> Result<Mat2c> {
        if self.swapped {
            Ok(outer_adj(self.f_z.eval(x)?, self.w_zbar.eval(t)?))
        } else {
            Ok(outer_adj(self.w_z.eval(x)?, self.f_zbar.eval(t)?))
        }
    }

    /// G(x, t). On the diagonal this is the mean of the two lateral
    /// limits, never one of them; use [`Self::jump_at`] for their
    /// difference.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<Mat2c> {
        self.check_domain(x)?;
        self.check_domain(t)?;
        if t < x {
            self.lower(x, t)
        } else if t > x {
            self.upper(x, t)
        } else {
            let half = Complex64::new(0.5, 0.0);
            Ok(half * (self.lower(x, x)? + self.upper(x, x)?))
        }
    }

    /// G(x, x-) - G(x, x+); equals -J for a correctly ordered kernel
    /// (the raw solution products satisfy f w* - w f* = J, and the
    /// kernel carries the resolvent's minus sign).
    pub fn jump_at(&self, x: f64) -> Result<Mat2c> {
        self.check_domain(x)?;
        Ok(self.lower(x, x)? - self.upper(x, x)?)
    }
}

/// Anything the resolvent can be applied to: a map x -> C^2.
pub trait InputFunction {
    fn eval_at(&self, x: f64) -> Result<Vec2c>;
}

impl InputFunction for Trajectory<'_> {
    fn eval_at(&self, x: f64) -> Result<Vec2c> {
        self.eval(x)
    }
}

impl<F: Fn(f64) -> Vec2c> InputFunction for F {
    fn eval_at(&self, x: f64) -> Result<Vec2c> {
        Ok(self(x))
    }
}

/// y = (T - z)^{-1} h, evaluable anywhere on [0, N].
///
/// y(x) = -f(x) * integral over [0, x] of w_a(t, zbar)* H(t) h(t) dt
///      - w_a(x) * integral over [x, N] of f(t, zbar)* H(t) h(t) dt,
///
/// which solves J y' = z H y + H h and satisfies both boundary
/// conditions (y(0) is proportional to w_a(0), y(N) to f(N)). The
/// scalar integrals are cached at cell breakpoints so a point
/// evaluation only integrates the partial cell containing x.
pub struct ResolventSolution<'a> {
    kernel: &'a GreenKernel<'a>,
    h: &'a dyn InputFunction,
    rule: GaussLegendre,
    /// Accumulated left integrand up to each clipped breakpoint.
    prefix_left: Vec<Complex64>,
    /// Same for the right integrand.
    prefix_right: Vec<Complex64>,
    /// Left edges of the clipped cells, plus the interval end.
    edges: Vec<f64>,
    total_right: Complex64,
}

impl<'a> ResolventSolution<'a> {
    /// The integrands of the two scalar factors at t: the partner of
    /// the left factor is w(zbar), of the right factor f(zbar); a
    /// swapped kernel exchanges them.
    fn integrands(&self, t: f64, matrix: Sym2) -> Result<(Complex64, Complex64)> {
        let hh = matrix.apply(self.h.eval_at(t)?);
        let wbar = self.kernel.w_zbar.eval(t)?.dot(hh);
        let fbar = self.kernel.f_zbar.eval(t)?.dot(hh);
        if self.kernel.swapped {
            Ok((fbar, wbar))
        } else {
            Ok((wbar, fbar))
        }
    }

    pub fn eval(&self, x: f64) -> Result<Vec2c> {
        self.kernel.check_domain(x)?;
        // edges[k] <= x: index of the cell whose left edge is nearest
        let k = match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&x).unwrap())
        {
            Ok(idx) => idx.min(self.edges.len() - 2),
            Err(idx) => idx - 1,
        };
        let field = self.kernel.bvp.field();
        let matrix = field.cells()[k].matrix;
        let mut left = self.prefix_left[k];
        let mut right_used = self.prefix_right[k];
        for (lo, hi) in panel_bounds(self.edges[k], x, self.kernel.z) {
            for (t, w) in self.rule.map_to(lo, hi) {
                let (dl, dr) = self.integrands(t, matrix)?;
                left += w * dl;
                right_used += w * dr;
            }
        }
        let right = self.total_right - right_used;
        let (a, b) = if self.kernel.swapped {
            (self.kernel.w_z.eval(x)?, self.kernel.f_z.eval(x)?)
        } else {
            (self.kernel.f_z.eval(x)?, self.kernel.w_z.eval(x)?)
        };
        Ok(left * a + right * b)
    }
}

/// Applies the resolvent to h by per-cell quadrature split at the
/// diagonal. The returned solution caches breakpoint integrals and can
/// be evaluated at any point of [0, N].
pub fn apply_resolvent<'a>(
    kernel: &'a GreenKernel<'a>,
    h: &'a dyn InputFunction,
    rule: &GaussLegendre,
) -> Result<ResolventSolution<'a>> {
    let field = kernel.bvp.field();
    let n = kernel.interval_end();
    let mut solution = ResolventSolution {
        kernel,
        h,
        rule: rule.clone(),
        prefix_left: vec![C_ZERO],
        prefix_right: vec![C_ZERO],
        edges: vec![0.0],
        total_right: C_ZERO,
    };
    let mut left_acc = C_ZERO;
    let mut right_acc = C_ZERO;
    for (k, cell) in field.cells().iter().enumerate() {
        let a = field.breakpoints()[k];
        if a >= n {
            break;
        }
        let b = (a + cell.length).min(n);
        for (lo, hi) in panel_bounds(a, b, kernel.z) {
            for (t, w) in rule.map_to(lo, hi) {
                let (dl, dr) = solution.integrands(t, cell.matrix)?;
                left_acc += w * dl;
                right_acc += w * dr;
            }
        }
        if b < n {
            solution.edges.push(b);
            solution.prefix_left.push(left_acc);
            solution.prefix_right.push(right_acc);
        }
    }
    solution.edges.push(n);
    solution.total_right = right_acc;
    Ok(solution)
}

/// Max residual of the inhomogeneous equation J y' = z H y + H h over
/// interior mesh midpoints (derivative by centered differences), plus
/// both boundary pairings. Midpoints landing within 10 steps of a cell
/// edge are nudged away so the difference never straddles a kink.
pub fn resolvent_residual(
    kernel: &GreenKernel,
    h: &dyn InputFunction,
    y: &ResolventSolution,
    mesh: usize,
) -> Result<f64> {
    if mesh == 0 {
        return Err(Error::InvalidParams("mesh needs at least 1 cell".into()));
    }
    let n = kernel.interval_end();
    let field = kernel.bvp.field();
    let delta = defaults::DIFF_STEP;
    let clearance = 10.0 * delta;
    let mut worst: f64 = 0.0;
    for j in 0..mesh {
        let mut x = (j as f64 + 0.5) * n / mesh as f64;
        for &edge in field.breakpoints() {
            if (x - edge).abs() < clearance {
                x = if edge + clearance < n {
                    edge + clearance
                } else {
                    edge - clearance
                };
            }
        }
        if x - delta <= 0.0 || x + delta >= n {
            continue;
        }
        let y_plus = y.eval(x + delta)?;
        let y_minus = y.eval(x - delta)?;
        let half = Complex64::new(0.5 / delta, 0.0);
        let dy = half * (y_plus - y_minus);
        let matrix = field.at(x)?;
        let residual = J * dy - kernel.z * matrix.apply(y.eval(x)?) - matrix.apply(h.eval_at(x)?);
        worst = worst.max(residual.inf_norm());
    }
    let alpha_res = kernel.bvp.alpha().pairing(y.eval(0.0)?).norm();
    let beta_res = kernel.bvp.beta().pairing(y.eval(n)?).norm();
    Ok(worst.max(alpha_res).max(beta_res))
}

/// Symmetrized Nystrom discretization of the Hilbert-Schmidt kernel
/// L(x, t) = H^{1/2}(x) G(x, t) H^{1/2}(t) on per-cell Gauss-Legendre
/// nodes. The stored matrix is the similarity by root weights, so it is
/// real symmetric and shares the spectrum of the weighted kernel matrix.
pub struct HsMatrix {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major symmetric matrix of dimension `dim` = 2 * nodes.len().
    pub matrix: Vec<f64>,
    pub dim: usize,
    /// Max entry deviation from Hermitian symmetry before the final
    /// symmetrization, relative to the largest entry.
    pub hermitian_deviation: f64,
}

impl HsMatrix {
    /// Eigenvalues in ascending order, by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values = jacobi_eigenvalues(self.matrix.clone(), self.dim)?;
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(values)
    }
}

/// Assembles the Hilbert-Schmidt matrix at a real spectral point in the
/// resolvent set. Row blocks are assembled in parallel per `mode`.
pub fn hs_matrix(
    bvp: &SelfAdjointBvp,
    z: f64,
    rule: &GaussLegendre,
    mode: ExecMode,
) -> Result<HsMatrix> {
    if !z.is_finite() {
        return Err(Error::InvalidParams(format!("z must be finite, got {z}")));
    }
    let kernel = GreenKernel::new(bvp, Complex64::new(z, 0.0))?;
    let field = bvp.field();
    let n = bvp.interval_end();

    // Per-node data: position, weight, and the four H^{1/2}-scaled
    // solution vectors entering the kernel blocks.
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut scaled = Vec::new(); // (a, bbar, b, abar) per node
    for (k, cell) in field.cells().iter().enumerate() {
        let left = field.breakpoints()[k];
        if left >= n {
            break;
        }
        let right = (left + cell.length).min(n);
        let root = psd_sqrt(cell.matrix)?;
        for (x, w) in rule.map_to(left, right) {
            nodes.push(x);
            weights.push(w);
            scaled.push((
                root.apply(kernel.f_z.eval(x)?),
                root.apply(kernel.w_zbar.eval(x)?),
                root.apply(kernel.w_z.eval(x)?),
                root.apply(kernel.f_zbar.eval(x)?),
            ));
        }
    }

    let count = nodes.len();
    let dim = 2 * count;
    let rows = map_range(mode, count, |i| {
        let mut pair = vec![C_ZERO; 2 * dim];
        let (ref a_i, _, ref b_i, _) = scaled[i];
        let sw_i = weights[i].sqrt();
        for j in 0..count {
            let (_, ref bbar_j, _, ref abar_j) = scaled[j];
            let block = if j < i {
                outer_adj(*a_i, *bbar_j)
            } else if j > i {
                outer_adj(*b_i, *abar_j)
            } else {
                let half = Complex64::new(0.5, 0.0);
                half * (outer_adj(*a_i, *bbar_j) + outer_adj(*b_i, *abar_j))
            };
            let scale = Complex64::new(sw_i * weights[j].sqrt(), 0.0);
            for r in 0..2 {
                for c in 0..2 {
                    pair[r * dim + 2 * j + c] = scale * block.0[r][c];
                }
            }
        }
        pair
    });

    let mut complex = vec![C_ZERO; dim * dim];
    for (i, pair) in rows.into_iter().enumerate() {
        complex[2 * i * dim..(2 * i + 2) * dim].copy_from_slice(&pair);
    }

    let magnitude = complex
        .iter()
        .map(|e| e.norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut deviation: f64 = 0.0;
    for r in 0..dim {
        for c in 0..r {
            let d = (complex[r * dim + c] - complex[c * dim + r].conj()).norm();
            deviation = deviation.max(d);
        }
    }
    for e in &complex {
        debug_assert!(e.im.abs() <= 1e-12 * magnitude);
    }
    let deviation = deviation / magnitude;

    let mut matrix = vec![0.0; dim * dim];
    for r in 0..dim {
        for c in 0..=r {
            let sym = 0.5 * (complex[r * dim + c].re + complex[c * dim + r].re);
            matrix[r * dim + c] = sym;
            matrix[c * dim + r] = sym;
        }
    }

    Ok(HsMatrix {
        nodes,
        weights,
        matrix,
        dim,
        hermitian_deviation: deviation,
    })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, run to
/// an off-diagonal Frobenius norm below the configured tolerance.
fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = defaults::JACOBI_OFFDIAG_TOL * frob.max(f64::MIN_POSITIVE);
    for _ in 0..defaults::JACOBI_MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= target / n as f64 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[p * n + r] = a[r * n + p];
                    a[r * n + q] = s * arp + c * arq;
                    a[q * n + r] = a[r * n + q];
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                a[p * n + p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q * n + q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    Err(Error::JacobiNoConvergence {
        target,
        sweeps: defaults::JACOBI_MAX_SWEEPS,
    })
}

/// One matched pair from [`hs_eigen_compare`]: a kernel eigenvalue mu,
/// the shooting eigenvalue E it corresponds to, and |mu - 1/(E - z)|.
#[derive(Clone, Copy, Debug)]
pub struct HsPair {
    pub mu: f64,
    pub eigenvalue: f64,
    pub gap: f64,
}

/// Cross-checks the k largest kernel eigenvalues against the k shooting
/// eigenvalues nearest z through the correspondence mu = 1/(E - z).
///
/// The count of kernel eigenvalues above the magnitude floor (the
/// midpoint between 1/distance to the k-th and (k+1)-th shooting
/// eigenvalues) must equal k; a mismatch signals a missed root, for
/// example a double root without sign change.
pub fn hs_eigen_compare(
    bvp: &SelfAdjointBvp,
    z: f64,
    k: usize,
    rule: &GaussLegendre,
    mode: ExecMode,
) -> Result<Vec<HsPair>> {
    if !z.is_finite() {
        return Err(Error::InvalidParams(format!("z must be finite, got {z}")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let trace_reach = bvp.field().integral_trace(bvp.interval_end())?;
    let lambda_cap = defaults::SAFE_EXPONENT / trace_reach.max(f64::MIN_POSITIVE);
    let radius_cap = lambda_cap - z.abs();
    if radius_cap <= 0.0 {
        return Err(Error::WindowOverflow { lo: z, hi: z });
    }
    let mut radius = 2.0_f64.min(radius_cap);
    let eigens = loop {
        let found = eigenvalues_in(
            bvp,
            (z - radius, z + radius),
            defaults::GRID_POINTS,
            defaults::ROOT_TOL,
            mode,
        )?;
        if found.values.len() > k || radius >= radius_cap {
            break found;
        }
        radius = (2.0 * radius).min(radius_cap);
    };
    if eigens.values.len() < k {
        return Err(Error::InvalidParams(format!(
            "only {} eigenvalues reachable within the safe window, need {k}",
            eigens.values.len()
        )));
    }

    let mut by_distance: Vec<f64> = eigens.values.clone();
    by_distance.sort_by(|a, b| {
        (a - z)
            .abs()
            .partial_cmp(&(b - z).abs())
            .unwrap()
    });
    let nearest_gap = (by_distance[0] - z).abs();
    if nearest_gap <= defaults::EIGEN_GAP_TOL {
        return Err(Error::EigenvalueAtZ {
            z: Complex64::new(z, 0.0),
            eig: by_distance[0],
            dist: nearest_gap,
        });
    }

    let d_k = (by_distance[k - 1] - z).abs();
    let d_next = if by_distance.len() > k {
        (by_distance[k] - z).abs()
    } else {
        1.5 * d_k
    };
    let floor = 0.5 * (1.0 / d_k + 1.0 / d_next);

    let hs = hs_matrix(bvp, z, rule, mode)?;
    let mut mus = hs.eigenvalues()?;
    mus.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    let significant: Vec<f64> = mus.iter().copied().take_while(|m| m.abs() >= floor).collect();
    if significant.len() != k {
        return Err(Error::CountMismatch {
            hs: significant.len(),
            shooting: k,
        });
    }

    // Greedy pairing from the largest target down; targets are separated
    // by construction of the floor.
    let mut targets: Vec<(f64, f64)> = by_distance[..k]
        .iter()
        .map(|&e| (1.0 / (e - z), e))
        .collect();
    targets.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap());
    let mut used = vec![false; significant.len()];
    let mut pairs = Vec::with_capacity(k);
    for (target, e) in targets {
        let mut best = usize::MAX;
        let mut best_gap = f64::INFINITY;
        for (idx, &mu) in significant.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let gap = (mu - target).abs();
            if gap < best_gap {
                best_gap = gap;
                best = idx;
            }
        }
        used[best] = true;
        pairs.push(HsPair {
            mu: significant[best],
            eigenvalue: e,
            gap: best_gap,
        });
    }
    pairs.sort_by(|a, b| b.mu.abs().partial_cmp(&a.mu.abs()).unwrap());
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{builtin, BuiltinParams, Cell};
    use crate::quadrature::QuadratureRule;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_bvp(length: f64) -> SelfAdjointBvp {
        let field = builtin(
            "identity",
            BuiltinParams {
                length: Some(length),
                ..Default::default()
            },
        )
        .unwrap();
        SelfAdjointBvp::over_full_field(field, BoundaryAngle::pi(), BoundaryAngle::pi()).unwrap()
    }

    fn random_bvp(seed: u64) -> SelfAdjointBvp {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(2.0),
                seed: Some(seed),
                ..Default::default()
            },
        )
        .unwrap();
        SelfAdjointBvp::over_full_field(
            field,
            BoundaryAngle::new(3.0 * PI / 4.0).unwrap(),
            BoundaryAngle::pi(),
        )
        .unwrap()
    }

    #[test]
    fn psd_sqrt_closed_forms() {
        let id = psd_sqrt(Sym2::identity()).unwrap();
        assert_eq!((id.h11, id.h12, id.h22), (1.0, 0.0, 1.0));
        let rank_one = psd_sqrt(Sym2::new(4.0, 0.0, 0.0)).unwrap();
        assert_eq!((rank_one.h11, rank_one.h12, rank_one.h22), (2.0, 0.0, 0.0));
        let zero = psd_sqrt(Sym2::zero()).unwrap();
        assert_eq!(zero.trace(), 0.0);
        assert!(psd_sqrt(Sym2::new(1.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let a: f64 = rng.random_range(0.0..3.0);
            let b: f64 = rng.random_range(0.0..3.0);
            let theta: f64 = rng.random_range(0.0..PI);
            let (s, co) = theta.sin_cos();
            let m = Sym2::new(
                a * co * co + b * s * s,
                (a - b) * s * co,
                a * s * s + b * co * co,
            );
            let root = psd_sqrt(m).unwrap();
            assert!(root.min_eigenvalue() >= -1e-14);
            let h11 = root.h11 * root.h11 + root.h12 * root.h12;
            let h12 = root.h12 * (root.h11 + root.h22);
            let h22 = root.h12 * root.h12 + root.h22 * root.h22;
            assert!((h11 - m.h11).abs() <= 1e-13);
            assert!((h12 - m.h12).abs() <= 1e-13);
            assert!((h22 - m.h22).abs() <= 1e-13);
        }
    }

    #[test]
    fn w_alpha_reduces_to_minus_v_at_half_pi() {
        let field = builtin(
            "random-psd",
            BuiltinParams {
                length: Some(2.0),
                seed: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let z = c(0.4, 0.9);
        let m = m_function(&field, z, BoundaryAngle::pi(), field.total_length()).unwrap();
        let alpha = BoundaryAngle::new(PI / 2.0).unwrap();
        let w = w_alpha(&field, z, alpha, m).unwrap();
        for x in [0.0, 0.6, 1.7] {
            let got = w.eval(x).unwrap();
            let v = crate::transfer::transfer(&field, z, x).unwrap().col(1);
            assert!((got + v).inf_norm() < 1e-13 * v.inf_norm().max(1.0));
        }
    }

    #[test]
    fn w_alpha_initial_values() {
        let field = identity_bvp(20.0).field().clone();
        let m = m_function(&field, Complex64::I, BoundaryAngle::pi(), 20.0).unwrap();
        let w = w_alpha(&field, Complex64::I, BoundaryAngle::pi(), m).unwrap();
        let w0 = w.eval(0.0).unwrap();
        // (cos pi, -sin pi)/(sin pi + m cos pi) = (1/m, 0) which is -i here
        assert!((w0.0[0] - c(0.0, -1.0)).norm() < 1e-10);
        assert!(w0.0[1].norm() < 1e-15);
    }

    #[test]
    fn w_alpha_normalization_zero() {
        let field = identity_bvp(1.0).field().clone();
        let alpha = BoundaryAngle::new(PI / 4.0).unwrap();
        let err = w_alpha(&field, c(0.3, 0.0), alpha, c(-1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NormalizationZero { .. }));
    }

    #[test]
    fn raw_solution_pair_identity_is_j() {
        // f w* - w f* = J for the un-negated normalized solutions
        let bvp = random_bvp(17);
        let field = bvp.field();
        let z = c(0.4, 0.7);
        let m = m_function(field, z, bvp.beta(), bvp.interval_end()).unwrap();
        let m_bar = m_function(field, z.conj(), bvp.beta(), bvp.interval_end()).unwrap();
        let f = weyl_solution(field, z, m);
        let f_bar = weyl_solution(field, z.conj(), m_bar);
        let w = w_alpha(field, z, bvp.alpha(), m).unwrap();
        let w_bar = w_alpha(field, z.conj(), bvp.alpha(), m_bar).unwrap();
        for x in [0.21, 0.5, 1.03, 1.9] {
            let lhs = outer_adj(f.eval(x).unwrap(), w_bar.eval(x).unwrap())
                - outer_adj(w.eval(x).unwrap(), f_bar.eval(x).unwrap());
            assert!((lhs - J).inf_norm() < 1e-9, "identity off at x={x}");
        }
    }

    #[test]
    fn kernel_jump_is_minus_j() {
        let bvp = random_bvp(17);
        for z in [c(0.37, 0.0), c(0.4, 0.7), c(-1.1, 0.2)] {
            let kernel = GreenKernel::new(&bvp, z).unwrap();
            for x in [0.21, 0.5, 1.03, 1.9] {
                let jump = kernel.jump_at(x).unwrap();
                assert!(
                    (jump + J).inf_norm() < 1e-9,
                    "jump off at x={x}, z={z}: {:?}",
                    jump
                );
            }
        }
    }

    #[test]
    fn swapped_kernel_reverses_the_jump() {
        let bvp = identity_bvp(1.0);
        let kernel = GreenKernel::swapped_for_negative_control(&bvp, c(0.3, 0.0)).unwrap();
        let jump = kernel.jump_at(0.5).unwrap();
        assert!((jump - J).inf_norm() < 1e-12);
    }

    #[test]
    fn kernel_diagonal_is_the_mean_of_lateral_limits() {
        let bvp = random_bvp(23);
        let kernel = GreenKernel::new(&bvp, c(0.15, 0.6)).unwrap();
        let x = 0.77;
        let eps = 1e-9;
        let below = kernel.evaluate(x, x - eps).unwrap();
        let above = kernel.evaluate(x, x + eps).unwrap();
        let half = c(0.5, 0.0);
        let mean = half * (below + above);
        let diag = kernel.evaluate(x, x).unwrap();
        assert!((diag - mean).inf_norm() < 1e-6);
        // and the diagonal is genuinely neither lateral limit
        assert!((diag - below).inf_norm() > 0.1);
    }

    /// Dumb midpoint quadrature straight off the kernel branches.
    fn brute_force_apply(
        kernel: &GreenKernel,
        h: &dyn InputFunction,
        x: f64,
        panels: usize,
    ) -> Vec2c {
        let n = kernel.interval_end();
        let field = kernel.bvp().field();
        let dt = n / panels as f64;
        let mut acc = Vec2c::zero();
        for j in 0..panels {
            let t = (j as f64 + 0.5) * dt;
            let g = kernel.evaluate(x, t).unwrap();
            let hh = field.at(t).unwrap().apply(h.eval_at(t).unwrap());
            acc = acc + c(dt, 0.0) * (g * hh);
        }
        acc
    }

    #[test]
    fn resolvent_of_zero_input_is_zero() {
        let bvp = identity_bvp(1.0);
        let kernel = GreenKernel::new(&bvp, c(0.3, 0.0)).unwrap();
        let zero = |_x: f64| Vec2c::zero();
        let rule = QuadratureRule::default().nodes();
        let y = apply_resolvent(&kernel, &zero, &rule).unwrap();
        for x in [0.0, 0.31, 1.0] {
            assert_eq!(y.eval(x).unwrap().inf_norm(), 0.0);
        }
        let res = resolvent_residual(&kernel, &zero, &y, 16).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn resolvent_matches_brute_force_quadrature() {
        let bvp = identity_bvp(1.0);
        let kernel = GreenKernel::new(&bvp, c(0.3, 0.0)).unwrap();
        let h = |_x: f64| Vec2c::from_real(1.0, 0.0);
        let rule = QuadratureRule::default().nodes();
        let y = apply_resolvent(&kernel, &h, &rule).unwrap();
        for x in [0.25, 0.7] {
            let fast = y.eval(x).unwrap();
            let slow = brute_force_apply(&kernel, &h, x, 10_000);
            assert!(
                (fast - slow).inf_norm() < 1e-6,
                "x={x}: {:?} vs {:?}",
                fast,
                slow
            );
        }
    }

    #[test]
    fn resolvent_residual_is_small() {
        let bvp = random_bvp(31);
        let kernel = GreenKernel::new(&bvp, c(0.3, 0.0)).unwrap();
        let h = |x: f64| Vec2c::from_real(1.0, x);
        let rule = QuadratureRule::default().nodes();
        let y = apply_resolvent(&kernel, &h, &rule).unwrap();
        let res = resolvent_residual(&kernel, &h, &y, defaults::RESIDUAL_MESH).unwrap();
        assert!(res < 1e-5, "residual {res:.3e}");
    }

    #[test]
    fn swapped_kernel_fails_the_residual_check() {
        let bvp = identity_bvp(1.0);
        let kernel = GreenKernel::swapped_for_negative_control(&bvp, c(0.3, 0.0)).unwrap();
        let h = |_x: f64| Vec2c::from_real(1.0, 0.0);
        let rule = QuadratureRule::default().nodes();
        let y = apply_resolvent(&kernel, &h, &rule).unwrap();
        let res = resolvent_residual(&kernel, &h, &y, defaults::RESIDUAL_MESH).unwrap();
        assert!(res >= 0.1, "swapped kernel looked valid: {res:.3e}");
    }

    #[test]
    fn resolvent_scales_eigenfunctions() {
        use crate::extension::eigenfunction;
        let bvp = identity_bvp(1.0);
        let kernel = GreenKernel::new(&bvp, c(0.3, 0.0)).unwrap();
        let rule = QuadratureRule::default().nodes();
        let eigen = eigenfunction(&bvp, PI).unwrap();
        let y = apply_resolvent(&kernel, &eigen, &rule).unwrap();
        let scale = c(1.0 / (PI - 0.3), 0.0);
        for x in [0.2, 0.55, 0.9] {
            let expect = scale * eigen.eval(x).unwrap();
            assert!((y.eval(x).unwrap() - expect).inf_norm() < 1e-5);
        }
    }

    #[test]
    fn hs_matrix_is_symmetric_at_real_z() {
        let bvp = identity_bvp(1.0);
        let rule = QuadratureRule::default().nodes();
        let hs = hs_matrix(&bvp, 0.3, &rule, ExecMode::Sequential).unwrap();
        assert!(hs.hermitian_deviation <= 1e-10);
        assert_eq!(hs.dim, 2 * hs.nodes.len());
        for r in 0..hs.dim {
            for c in 0..hs.dim {
                assert_eq!(hs.matrix[r * hs.dim + c], hs.matrix[c * hs.dim + r]);
            }
        }
    }

    #[test]
    fn hs_modes_agree() {
        let bvp = random_bvp(3);
        let rule = QuadratureRule::default().nodes();
        let seq = hs_matrix(&bvp, 0.1, &rule, ExecMode::Sequential).unwrap();
        let par = hs_matrix(&bvp, 0.1, &rule, ExecMode::Parallel).unwrap();
        assert_eq!(seq.matrix, par.matrix);
    }

    #[test]
    fn hs_zero_cell_gives_zero_rows() {
        let field = HamiltonianField::new(vec![
            Cell {
                length: 0.5,
                matrix: Sym2::identity(),
            },
            Cell {
                length: 0.5,
                matrix: Sym2::zero(),
            },
        ])
        .unwrap();
        let bvp =
            SelfAdjointBvp::over_full_field(field, BoundaryAngle::pi(), BoundaryAngle::pi())
                .unwrap();
        let rule = QuadratureRule::default().nodes();
        let hs = hs_matrix(&bvp, 0.4, &rule, ExecMode::Sequential).unwrap();
        // second half of the nodes sit in the zero cell
        let half = hs.nodes.len() / 2;
        for i in half..hs.nodes.len() {
            for col in 0..hs.dim {
                assert_eq!(hs.matrix[(2 * i) * hs.dim + col], 0.0);
                assert_eq!(hs.matrix[(2 * i + 1) * hs.dim + col], 0.0);
            }
        }
    }

    #[test]
    fn hs_top_eigenvalue_converges_under_refinement() {
        let bvp = identity_bvp(1.0);
        let coarse = hs_matrix(
            &bvp,
            0.3,
            &GaussLegendre::new(8),
            ExecMode::Sequential,
        )
        .unwrap();
        let fine = hs_matrix(
            &bvp,
            0.3,
            &GaussLegendre::new(64),
            ExecMode::Sequential,
        )
        .unwrap();
        let top = |m: &HsMatrix| {
            m.eigenvalues()
                .unwrap()
                .into_iter()
                .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc })
        };
        let t8 = top(&coarse);
        let t64 = top(&fine);
        // the top eigenvalue corresponds to E = 0: mu = 1/(0 - 0.3).
        // The kernel has a kink on the diagonal, so plain Nystrom
        // converges at roughly second order: measured errors are
        // 5.7e-4 at 8 nodes and 1.0e-5 at 64.
        let exact = -10.0 / 3.0;
        let err8 = (t8 - exact).abs();
        let err64 = (t64 - exact).abs();
        assert!(err8 < 1e-3, "8-node error {err8:.2e}");
        assert!(err64 < 5e-5, "64-node error {err64:.2e}");
        assert!(err64 < err8 / 10.0, "refinement barely helped: {err8:.2e} -> {err64:.2e}");
    }

    #[test]
    fn hs_compare_identity_pairs_all_gaps() {
        let bvp = identity_bvp(1.0);
        let rule = GaussLegendre::new(64);
        let pairs = hs_eigen_compare(&bvp, 0.3, 5, &rule, ExecMode::Parallel).unwrap();
        assert_eq!(pairs.len(), 5);
        // nearest eigenvalues of -sin: 0, pi, -pi, 2pi, -2pi
        let expect_e = [0.0, PI, -PI, 2.0 * PI, -2.0 * PI];
        for (pair, e) in pairs.iter().zip(expect_e) {
            assert!((pair.eigenvalue - e).abs() < 1e-8);
            assert!(pair.gap <= 1e-3, "gap {:.3e} at E={e}", pair.gap);
        }
        assert!((pairs[0].mu + 10.0 / 3.0).abs() < 1e-3);
        assert!((pairs[1].mu - 1.0 / (PI - 0.3)).abs() < 1e-3);
        assert!((pairs[2].mu + 1.0 / (PI + 0.3)).abs() < 1e-3);
    }

    #[test]
    fn hs_compare_half_identity_top_is_two() {
        let field = builtin(
            "half-identity",
            BuiltinParams {
                length: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        let bvp =
            SelfAdjointBvp::over_full_field(field, BoundaryAngle::pi(), BoundaryAngle::pi())
                .unwrap();
        let pairs =
            hs_eigen_compare(&bvp, 0.5, 3, &GaussLegendre::new(64), ExecMode::Parallel).unwrap();
        // largest |mu| = 1/|0 - 0.5| = 2, with mu = 1/(E - z) negative
        assert!((pairs[0].mu + 2.0).abs() < 1e-3);
        assert!(pairs[0].eigenvalue.abs() < 1e-8);
    }

    #[test]
    fn hs_compare_rejects_z_on_an_eigenvalue() {
        let bvp = identity_bvp(1.0);
        let err =
            hs_eigen_compare(&bvp, PI, 2, &GaussLegendre::new(16), ExecMode::Sequential)
                .unwrap_err();
        assert!(matches!(err, Error::EigenvalueAtZ { .. }));
    }

    #[test]
    fn hs_compare_empty_for_k_zero() {
        let bvp = identity_bvp(1.0);
        let pairs =
            hs_eigen_compare(&bvp, 0.3, 0, &GaussLegendre::new(8), ExecMode::Sequential).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let vals = jacobi_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2).unwrap();
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] - 1.0).abs() < 1e-12);
        assert!((sorted[1] - 3.0).abs() < 1e-12);
    }
}
