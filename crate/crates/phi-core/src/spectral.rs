//! Spectral filtering, Riesz projections and operator iteration diagnostics.
//!
//! The central objects are dense complex matrices. For a normal matrix the
//! averaging filter `g(lambda) = 1 + beta (lambda - 1)` leaves the
//! fixed eigenspace alone and strictly contracts the rest of the closed
//! unit disk, so powers of `g(T)` converge geometrically to the spectral
//! projection onto the eigenvalue-1 eigenspace. The same projection is
//! reachable analytically from the eigendecomposition, and for general
//! matrices through contour quadrature of the resolvent; the two routes
//! cross-check each other. Nonnormal growth (Jordan blocks) and
//! noncommuting alternating projections are provided as diagnostics rather
//! than convergence claims.

use serde::ser::SerializeSeq;
use serde::Serialize;
use thiserror::Error;

use crate::fixpoint::{IterationReport, StabilizationPolicy, Stage};
use crate::linalg::{
    frobenius, hermitian_eigen, hermitian_nullspace, identity, C64, CMatrix,
};

/// Idempotency and self-adjointness gate for projection operators.
pub const PROJECTION_TOL: f64 = 1e-8;
/// Relative tolerance for detecting the eigenvalue 1.
pub const EIGENVALUE_ONE_TOL: f64 = 1e-8;
/// Relative tolerance on the normality commutator test.
pub const NORMALITY_TOL: f64 = 1e-10;
/// Relative tolerance on eigendecomposition reconstruction and unitarity.
pub const DECOMPOSITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix entries must be finite")]
    NonFiniteEntries,
    #[error("matrix is not normal: commutator norm {commutator_norm:e} exceeds {tolerance:e}")]
    NotNormal { commutator_norm: f64, tolerance: f64 },
    #[error("eigenvalue {re}{im:+}j keeps unit filter modulus but is not 1: no stabilization at the limit stage")]
    PersistentUnimodularSpectrum { re: f64, im: f64 },
    #[error("an eigenvalue lies within {distance:e} of the contour (tolerance {tolerance:e}): quadrature unreliable")]
    ContourNearSpectrum { distance: f64, tolerance: f64 },
    #[error("resolvent is singular at quadrature node {node}")]
    SingularResolvent { node: usize },
    #[error("result is not idempotent: ||P^2 - P|| = {defect:e}")]
    NotIdempotent { defect: f64 },
    #[error("{what} {i} and {j} do not commute: commutator norm {commutator_norm:e}")]
    NonCommutingFamily { what: &'static str, i: usize, j: usize, commutator_norm: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{matrices} matrices but {contours} contours")]
    LengthMismatch { matrices: usize, contours: usize },
    #[error("iterative and analytic limits disagree by {distance:e}")]
    AnalyticIterativeMismatch { distance: f64 },
    #[error("projector rank {projector_rank} differs from joint fixed-space dimension {fixed_space_dim}")]
    FixedSpaceMismatch { projector_rank: usize, fixed_space_dim: usize },
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A dense complex square matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix) -> Result<Self, SpectralError> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(SpectralError::DimensionMismatch {
                left: entries.nrows(),
                right: entries.ncols(),
            });
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::NonFiniteEntries);
        }
        Ok(Self { entries })
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self {
            entries: CMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    values[r]
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// The k x k Jordan block at eigenvalue 1.
    pub fn jordan_block(k: usize) -> Self {
        Self {
            entries: CMatrix::from_fn(k, k, |r, c| {
                if r == c || c == r + 1 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenvalues via the complex Schur form (works for nonnormal input).
    pub fn eigenvalues(&self) -> Result<Vec<C64>, SpectralError> {
        let schur = self
            .entries
            .clone()
            .try_schur(1e-13, 100_000)
            .ok_or_else(|| SpectralError::DecompositionFailed("Schur iteration stalled".into()))?;
        let (_, t) = schur.unpack();
        Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
    }

    /// Parse the text format: `n` on the first data line, then n rows of n
    /// complex tokens like `1`, `-2.5j` or `0.3-0.4j`. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, SpectralError> {
        let mut data_lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, head) = data_lines
            .next()
            .ok_or(SpectralError::Parse { line: 0, message: "empty matrix file".into() })?;
        let n: usize = head.parse().map_err(|_| SpectralError::Parse {
            line,
            message: format!("expected matrix dimension, found `{head}`"),
        })?;
        if n == 0 {
            return Err(SpectralError::Parse { line, message: "dimension must be >= 1".into() });
        }
        let mut entries = CMatrix::zeros(n, n);
        for r in 0..n {
            let (line, row) = data_lines.next().ok_or(SpectralError::Parse {
                line: 0,
                message: format!("expected {n} rows, found {r}"),
            })?;
            let tokens: Vec<&str> = row.split_whitespace().collect();
            if tokens.len() != n {
                return Err(SpectralError::Parse {
                    line,
                    message: format!("expected {n} entries, found {}", tokens.len()),
                });
            }
            for (c, tok) in tokens.iter().enumerate() {
                entries[(r, c)] = parse_complex(tok).ok_or_else(|| SpectralError::Parse {
                    line,
                    message: format!("invalid complex number `{tok}`"),
                })?;
            }
        }
        if let Some((line, _)) = data_lines.next() {
            return Err(SpectralError::Parse { line, message: "trailing content".into() });
        }
        Self::new(entries)
    }

    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut out = format!("{n}\n");
        for r in 0..n {
            for c in 0..n {
                if c > 0 {
                    out.push(' ');
                }
                out.push_str(&format_complex(self.entries[(r, c)]));
            }
            out.push('\n');
        }
        out
    }
}

impl Serialize for OperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for r in 0..self.dim() {
            let row: Vec<String> =
                (0..self.dim()).map(|c| format_complex(self.entries[(r, c)])).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Parse one complex token: `a`, `bj`, or `a+bj` / `a-bj`.
pub fn parse_complex(token: &str) -> Option<C64> {
    let body = match token.strip_suffix('j') {
        None => return token.parse::<f64>().ok().map(|re| C64::new(re, 0.0)),
        Some(body) => body,
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for i in 1..bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-')
            && bytes[i - 1] != b'e'
            && bytes[i - 1] != b'E'
        {
            split = Some(i);
        }
    }
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().ok()?;
            let im = body[i..].parse::<f64>().ok()?;
            Some(C64::new(re, im))
        }
        None => body.parse::<f64>().ok().map(|im| C64::new(0.0, im)),
    }
}

pub fn format_complex(c: C64) -> String {
    format!("{}{:+}j", c.re, c.im)
}

/// Unitary eigendecomposition of a normal matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// Spectral projection onto the eigenvalues selected by the predicate.
    pub fn projection_onto<P: Fn(C64) -> bool>(&self, select: P) -> CMatrix {
        let n = self.eigenvectors.nrows();
        let mut p = CMatrix::zeros(n, n);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            if select(lambda) {
                let v = self.eigenvectors.column(i);
                p += v * v.adjoint();
            }
        }
        p
    }
}

/// Eigendecomposition of a normal matrix by simultaneous diagonalization of
/// its commuting Hermitian and skew-Hermitian parts: diagonalize
/// `H = (T + T*)/2`, then re-diagonalize `K = (T - T*)/2i` inside each
/// eigenvalue cluster of `H`. The result is validated: the eigenvector
/// matrix is unitary and reconstructs `T` within [`DECOMPOSITION_TOL`]
/// (relative to `max(1, ||T||)`).
pub fn decompose_normal(t: &OperatorMatrix) -> Result<SpectralDecomposition, SpectralError> {
    let m = t.entries();
    let n = t.dim();
    let scale = frobenius(m).max(1.0);
    let commutator = m * m.adjoint() - m.adjoint() * m;
    let commutator_norm = frobenius(&commutator);
    let tolerance = NORMALITY_TOL * scale * scale;
    if commutator_norm > tolerance {
        return Err(SpectralError::NotNormal { commutator_norm, tolerance });
    }

    let half = C64::new(0.5, 0.0);
    let half_over_i = C64::new(0.0, -0.5);
    let h = (m + m.adjoint()) * half;
    let k = (m - m.adjoint()) * half_over_i;

    let (h_values, mut vectors) = hermitian_eigen(&h);
    // Re-diagonalize K inside each cluster of (numerically) equal H
    // eigenvalues; the rotation keeps H diagonal because the cluster spans
    // an H eigenspace up to the cluster width.
    let cluster_tol = 1e-12 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && h_values[end] - h_values[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let k_sub = block.adjoint() * &k * &block;
            let (_, k_vectors) = hermitian_eigen(&k_sub);
            let rotated = block * k_vectors;
            vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    let diag = vectors.adjoint() * m * &vectors;
    let eigenvalues: Vec<C64> = (0..n).map(|i| diag[(i, i)]).collect();

    let recon = &vectors
        * CMatrix::from_fn(n, n, |r, c| if r == c { eigenvalues[r] } else { C64::new(0.0, 0.0) })
        * vectors.adjoint();
    let recon_err = frobenius(&(recon - m));
    let unitary_err = frobenius(&(vectors.adjoint() * &vectors - identity(n)));
    if recon_err > DECOMPOSITION_TOL * scale || unitary_err > DECOMPOSITION_TOL {
        return Err(SpectralError::DecompositionFailed(format!(
            "reconstruction error {recon_err:e}, unitarity error {unitary_err:e}"
        )));
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vectors })
}

/// The averaging filter `g(lambda) = 1 + beta (lambda - 1)`.
///
/// `g(1) = 1` exactly, and for `beta` in (0, 1) every unimodular
/// `lambda != 1` satisfies `|g(lambda)| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFilter {
    beta: f64,
}

impl SpectralFilter {
    pub fn new(beta: f64) -> Result<Self, SpectralError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(SpectralError::InvalidParameter(format!(
                "filter beta must lie in (0, 1], got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn apply_scalar(&self, lambda: C64) -> C64 {
        C64::new(1.0, 0.0) + C64::new(self.beta, 0.0) * (lambda - C64::new(1.0, 0.0))
    }

    pub fn apply_matrix(&self, t: &CMatrix) -> CMatrix {
        let n = t.nrows();
        identity(n) + (t - identity(n)) * C64::new(self.beta, 0.0)
    }
}

/// A circle in the complex plane for resolvent quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszContour {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
    pub nodes: usize,
}

impl RieszContour {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self, SpectralError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SpectralError::InvalidParameter(format!(
                "contour radius must be positive, got {radius}"
            )));
        }
        if nodes < 16 {
            return Err(SpectralError::InvalidParameter(format!(
                "contour needs at least 16 quadrature nodes, got {nodes}"
            )));
        }
        Ok(Self { center_re: center.re, center_im: center.im, radius, nodes })
    }

    /// Circle of the given radius around 1 with the default 64 nodes.
    pub fn around_one(radius: f64) -> Result<Self, SpectralError> {
        Self::new(C64::new(1.0, 0.0), radius, 64)
    }

    /// Default contour for the matrix: centered at 1 with radius one tenth
    /// of the spectral gap between 1 and the rest of the spectrum (0.5 when
    /// the whole spectrum sits at 1).
    pub fn auto_around_one(t: &OperatorMatrix) -> Result<Self, SpectralError> {
        let one = C64::new(1.0, 0.0);
        let scale = frobenius(t.entries()).max(1.0);
        let gap = t
            .eigenvalues()?
            .into_iter()
            .map(|l| (l - one).norm())
            .filter(|d| *d > EIGENVALUE_ONE_TOL * scale)
            .fold(f64::INFINITY, f64::min);
        let radius = if gap.is_finite() { 0.1 * gap } else { 0.5 };
        Self::around_one(radius)
    }

    pub fn center(&self) -> C64 {
        C64::new(self.center_re, self.center_im)
    }
}

/// A (possibly oblique) idempotent matrix; `orthogonal` is set when it is
/// also self-adjoint within [`PROJECTION_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator {
    entries: CMatrix,
    orthogonal: bool,
}

impl ProjectionOperator {
    pub fn new(entries: CMatrix) -> Result<Self, SpectralError> {
        let defect = frobenius(&(&entries * &entries - &entries));
        if defect > PROJECTION_TOL {
            return Err(SpectralError::NotIdempotent { defect });
        }
        let orthogonal = frobenius(&(&entries - entries.adjoint())) <= PROJECTION_TOL;
        Ok(Self { entries, orthogonal })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    /// Rank via the trace; exact for idempotents since their eigenvalues
    /// are 0 and 1.
    pub fn rank(&self) -> usize {
        let tr: C64 = (0..self.dim()).map(|i| self.entries[(i, i)]).sum();
        tr.re.round().max(0.0) as usize
    }

    pub fn idempotency_defect(&self) -> f64 {
        frobenius(&(&self.entries * &self.entries - &self.entries))
    }
}

impl Serialize for ProjectionOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for r in 0..self.dim() {
            let row: Vec<String> =
                (0..self.dim()).map(|c| format_complex(self.entries[(r, c)])).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Result of [`stabilize_normal`]: the iterative orbit of filter powers
/// with residual history against the analytic limit, the analytic spectral
/// projection itself, and the predicted geometric decay rate
/// `r = max_{lambda != 1} |g(lambda)|`.
#[derive(Debug, Clone)]
pub struct StabilizationOutcome {
    pub report: IterationReport<OperatorMatrix>,
    pub analytic_limit: ProjectionOperator,
    pub contraction_rate: f64,
}

impl StabilizationOutcome {
    /// Observed tail ratio of consecutive residuals (geometric mean over up
    /// to the last `window` pre-convergence steps).
    pub fn observed_decay_ratio(&self, window: usize) -> Option<f64> {
        let r: Vec<f64> =
            self.report.residuals.iter().copied().filter(|x| *x > 1e-300).collect();
        if r.len() < 2 {
            return None;
        }
        let lo = r.len().saturating_sub(window + 1);
        let ratios: Vec<f64> = r[lo..].windows(2).map(|w| w[1] / w[0]).collect();
        if ratios.is_empty() {
            return None;
        }
        let log_mean = ratios.iter().map(|x| x.ln()).sum::<f64>() / ratios.len() as f64;
        Some(log_mean.exp())
    }
}

/// Iterate powers of the filtered matrix `g(T)` to the spectral projection
/// `E({1})` and cross-check against the analytic limit built from the
/// eigendecomposition.
///
/// Preconditions: `T` normal within [`NORMALITY_TOL`], every eigenvalue
/// satisfies `|g(lambda)| < 1` except `lambda = 1` itself (otherwise
/// [`SpectralError::PersistentUnimodularSpectrum`] — the filter cannot
/// stabilize such spectrum at the limit stage).
///
/// The report carries stage `Omega` on convergence: the fixed point is the
/// limit object computed by the spectral formula, and `residuals[k]` is
/// `||g(T)^{k+1} - E({1})||_F`. The final residual must also agree with the
/// analytic limit within [`PROJECTION_TOL`].
pub fn stabilize_normal(
    t: &OperatorMatrix,
    filter: &SpectralFilter,
    policy: &StabilizationPolicy,
) -> Result<StabilizationOutcome, SpectralError> {
    let n = t.dim();
    let scale = frobenius(t.entries()).max(1.0);
    let decomposition = decompose_normal(t)?;

    let one = C64::new(1.0, 0.0);
    let is_one = |lambda: C64| (lambda - one).norm() <= EIGENVALUE_ONE_TOL * scale;
    let mut contraction_rate = 0.0f64;
    for &lambda in &decomposition.eigenvalues {
        if is_one(lambda) {
            continue;
        }
        let modulus = filter.apply_scalar(lambda).norm();
        if modulus >= 1.0 - 1e-12 {
            return Err(SpectralError::PersistentUnimodularSpectrum {
                re: lambda.re,
                im: lambda.im,
            });
        }
        contraction_rate = contraction_rate.max(modulus);
    }

    let analytic = decomposition.projection_onto(is_one);
    let analytic_limit = ProjectionOperator::new(analytic.clone())?;

    let filtered = filter.apply_matrix(t.entries());
    let mut power = identity(n);
    let mut residuals = Vec::new();
    let mut converged = false;
    let threshold = match policy.mode {
        crate::fixpoint::ConvergenceMode::Exact => 0.0,
        crate::fixpoint::ConvergenceMode::Numeric => policy.tol_abs + policy.tol_rel * scale,
    };
    for _ in 0..policy.max_iter {
        power = &filtered * power;
        let residual = frobenius(&(&power - &analytic));
        if !residual.is_finite() {
            return Err(SpectralError::NonFiniteEntries);
        }
        residuals.push(residual);
        if residual <= threshold {
            converged = true;
            break;
        }
    }

    if converged {
        let final_residual = *residuals.last().expect("converged implies a residual");
        if final_residual > PROJECTION_TOL {
            return Err(SpectralError::AnalyticIterativeMismatch { distance: final_residual });
        }
    }

    let report = IterationReport {
        fixed_point: OperatorMatrix::new(power)?,
        stage: if converged { Stage::Omega } else { Stage::Finite(policy.max_iter) },
        residuals,
        converged,
    };
    Ok(StabilizationOutcome { report, analytic_limit, contraction_rate })
}

/// Riesz projection by trapezoidal quadrature of the resolvent integral
/// around the contour circle. Spectrally accurate in the node count; the
/// doubled-node drift is the practical convergence certificate.
///
/// Fails with [`SpectralError::ContourNearSpectrum`] when an eigenvalue
/// lies within `10 eps ||T||` of the circle and with
/// [`SpectralError::SingularResolvent`] when a node hits the spectrum.
pub fn riesz_projection(
    t: &OperatorMatrix,
    contour: &RieszContour,
) -> Result<ProjectionOperator, SpectralError> {
    let n = t.dim();
    let scale = frobenius(t.entries()).max(1.0);
    let tolerance = 10.0 * f64::EPSILON * scale;
    let eigenvalues = t.eigenvalues()?;
    let center = contour.center();

    let mut min_circle_distance = f64::INFINITY;
    for &lambda in &eigenvalues {
        let d = ((lambda - center).norm() - contour.radius).abs();
        min_circle_distance = min_circle_distance.min(d);
    }
    if min_circle_distance < tolerance {
        return Err(SpectralError::ContourNearSpectrum {
            distance: min_circle_distance,
            tolerance,
        });
    }

    let mut acc = CMatrix::zeros(n, n);
    for j in 0..contour.nodes {
        let theta = std::f64::consts::TAU * j as f64 / contour.nodes as f64;
        let phase = C64::new(theta.cos(), theta.sin());
        let zeta = center + C64::new(contour.radius, 0.0) * phase;
        if eigenvalues.iter().any(|&l| (l - zeta).norm() < tolerance) {
            return Err(SpectralError::SingularResolvent { node: j });
        }
        let shifted = identity(n) * zeta - t.entries();
        let resolvent = shifted
            .lu()
            .try_inverse()
            .ok_or(SpectralError::SingularResolvent { node: j })?;
        acc += resolvent * phase;
    }
    acc *= C64::new(contour.radius / contour.nodes as f64, 0.0);
    ProjectionOperator::new(acc)
}

/// Ordered product of the Riesz projections of a commuting family; its
/// range is the joint fixed space of the family.
///
/// Enforces pairwise commutation of the matrices (refusing noncommuting
/// input) and of the computed projections, then verifies `T_i P = P` and
/// that `rank(P)` matches the dimension of the joint fixed space obtained
/// from an independent null-space computation on the stacked `T_i - I`.
pub fn product_of_riesz(
    ts: &[OperatorMatrix],
    contours: &[RieszContour],
) -> Result<ProjectionOperator, SpectralError> {
    if ts.is_empty() {
        return Err(SpectralError::InvalidParameter("empty operator family".into()));
    }
    if ts.len() != contours.len() {
        return Err(SpectralError::LengthMismatch {
            matrices: ts.len(),
            contours: contours.len(),
        });
    }
    let n = ts[0].dim();
    for t in ts {
        if t.dim() != n {
            return Err(SpectralError::DimensionMismatch { left: n, right: t.dim() });
        }
    }
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let (a, b) = (ts[i].entries(), ts[j].entries());
            let comm = a * b - b * a;
            let tol = 1e-10 * (frobenius(a) * frobenius(b)).max(1.0);
            let norm = frobenius(&comm);
            if norm > tol {
                return Err(SpectralError::NonCommutingFamily {
                    what: "operators",
                    i,
                    j,
                    commutator_norm: norm,
                });
            }
        }
    }

    let projections: Vec<ProjectionOperator> = ts
        .iter()
        .zip(contours)
        .map(|(t, c)| riesz_projection(t, c))
        .collect::<Result<_, _>>()?;
    for i in 0..projections.len() {
        for j in i + 1..projections.len() {
            let (a, b) = (projections[i].entries(), projections[j].entries());
            let norm = frobenius(&(a * b - b * a));
            if norm > PROJECTION_TOL {
                return Err(SpectralError::NonCommutingFamily {
                    what: "projections",
                    i,
                    j,
                    commutator_norm: norm,
                });
            }
        }
    }

    let mut product = identity(n);
    for p in &projections {
        product *= p.entries();
    }
    let product = ProjectionOperator::new(product)?;

    // T_i fixes the range of the product, checked on seeded probe vectors.
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    for t in ts {
        let matrix_defect = frobenius(&(t.entries() * product.entries() - product.entries()));
        if matrix_defect > PROJECTION_TOL {
            return Err(SpectralError::FixedSpaceMismatch {
                projector_rank: product.rank(),
                fixed_space_dim: usize::MAX,
            });
        }
        for _ in 0..100 {
            let x = crate::samples::random_complex_matrix(n, 1, &mut rng);
            let px = product.entries() * &x;
            let defect = frobenius(&(t.entries() * &px - &px));
            if defect > PROJECTION_TOL * frobenius(&x).max(1.0) {
                return Err(SpectralError::FixedSpaceMismatch {
                    projector_rank: product.rank(),
                    fixed_space_dim: usize::MAX,
                });
            }
        }
    }

    // Independent oracle for the joint fixed-space dimension: the null
    // space of sum_i (T_i - I)* (T_i - I).
    let mut gram = CMatrix::zeros(n, n);
    for t in ts {
        let shifted = t.entries() - identity(n);
        gram += shifted.adjoint() * shifted;
    }
    let null_tol = 1e-10 * frobenius(&gram).max(1.0);
    let fixed_space_dim = hermitian_nullspace(&gram, null_tol).ncols();
    if product.rank() != fixed_space_dim {
        return Err(SpectralError::FixedSpaceMismatch {
            projector_rank: product.rank(),
            fixed_space_dim,
        });
    }
    Ok(product)
}

/// Growth record of Jordan block powers.
#[derive(Debug, Clone, Serialize)]
pub struct JordanGrowthReport {
    pub block_size: usize,
    /// `(n, ||J_k^n||_F)` samples.
    pub norms: Vec<(u64, f64)>,
    /// Least-squares slope of `log ||J_k^n||` against `log n` over the last
    /// decade of n; polynomial growth of degree k-1 shows up as slope k-1.
    pub fitted_slope: f64,
}

/// Frobenius norms of Jordan-block powers via the binomial expansion
/// `J_k^n = sum_{j<k} C(n,j) N^j` (no matrix powers are formed), plus the
/// fitted log-log growth slope over the last decade of `n`.
pub fn jordan_growth(k: usize, n_max: u64) -> Result<JordanGrowthReport, SpectralError> {
    if k < 1 {
        return Err(SpectralError::InvalidParameter("block size must be >= 1".into()));
    }
    if n_max < 100 {
        return Err(SpectralError::InvalidParameter("n_max must be >= 100".into()));
    }
    let norms: Vec<(u64, f64)> = (1..=n_max).map(|n| (n, jordan_power_norm(k, n))).collect();
    let lo = (n_max / 10).max(1);
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .filter(|(n, _)| *n >= lo)
        .map(|(n, v)| ((*n as f64).ln(), v.ln()))
        .collect();
    let fitted_slope = least_squares_slope(&pts);
    Ok(JordanGrowthReport { block_size: k, norms, fitted_slope })
}

/// `||J_k^n||_F` in closed form: the j-th superdiagonal of `J_k^n` is
/// constant `C(n, j)` with `k - j` entries.
fn jordan_power_norm(k: usize, n: u64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for j in 0..k {
        if j > 0 {
            binom *= (n as f64 - (j as f64 - 1.0)) / j as f64;
        }
        let coeff = if (j as u64) <= n { binom } else { 0.0 };
        sum += (k - j) as f64 * coeff * coeff;
    }
    sum.sqrt()
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    sxy / sxx
}

/// Diagnostic trace of alternating projection powers `(QP)^n` in R^3, with
/// `P` onto span{e1, e2} and `Q` onto span{cos(theta) e1 + sin(theta) e3, e2}.
///
/// The trace reports distances to the orthogonal projector onto
/// `Ran P ∩ Ran Q` and to the empirical limit `(QP)^{n_max}`, along with
/// the idempotency defect of that limit. No convergence or divergence claim
/// is asserted; `settled_on_intersection` just states what the run showed.
#[derive(Debug, Clone, Serialize)]
pub struct AlternatingReport {
    pub theta: f64,
    /// `(n, ||(QP)^n - P_int||_F)` where `P_int` projects onto the
    /// intersection of the two ranges.
    pub distances_to_intersection: Vec<(u64, f64)>,
    /// `(n, ||(QP)^n - L||_F)` for the empirical limit `L = (QP)^{n_max}`.
    pub distances_to_limit: Vec<(u64, f64)>,
    pub limit_idempotency_defect: f64,
    pub limit_distance_to_intersection: f64,
    pub settled_on_intersection: bool,
}

pub fn alternating_projections(
    theta: f64,
    n_max: u64,
) -> Result<AlternatingReport, SpectralError> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(SpectralError::InvalidParameter(format!(
            "theta must lie in [0, pi/2), got {theta}"
        )));
    }
    if n_max == 0 {
        return Err(SpectralError::InvalidParameter("n_max must be >= 1".into()));
    }
    let re = |x: f64| C64::new(x, 0.0);
    let mut p = CMatrix::zeros(3, 3);
    p[(0, 0)] = re(1.0);
    p[(1, 1)] = re(1.0);
    let u = nalgebra::DVector::from_vec(vec![re(theta.cos()), re(0.0), re(theta.sin())]);
    let mut q = &u * u.adjoint();
    q[(1, 1)] += re(1.0);
    let qp = &q * &p;

    // Orthogonal projector onto Ran P ∩ Ran Q, computed numerically.
    let gram = (identity(3) - &p) + (identity(3) - &q);
    let basis = hermitian_nullspace(&gram, 1e-10);
    let p_int = &basis * basis.adjoint();

    let mut power = identity(3);
    let mut iterates = Vec::with_capacity(n_max as usize);
    for _ in 1..=n_max {
        power = &qp * power;
        iterates.push(power.clone());
    }
    let limit = iterates.last().expect("n_max >= 1").clone();
    let distances_to_intersection: Vec<(u64, f64)> = iterates
        .iter()
        .enumerate()
        .map(|(i, m)| (i as u64 + 1, frobenius(&(m - &p_int))))
        .collect();
    let distances_to_limit: Vec<(u64, f64)> = iterates
        .iter()
        .enumerate()
        .map(|(i, m)| (i as u64 + 1, frobenius(&(m - &limit))))
        .collect();
    let limit_idempotency_defect = frobenius(&(&limit * &limit - &limit));
    let limit_distance_to_intersection = frobenius(&(&limit - &p_int));
    Ok(AlternatingReport {
        theta,
        settled_on_intersection: limit_distance_to_intersection <= 1e-6,
        distances_to_intersection,
        distances_to_limit,
        limit_idempotency_defect,
        limit_distance_to_intersection,
    })
}
