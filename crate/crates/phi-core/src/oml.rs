//! Orthomodular lattice of orthogonal projections on C^n.
//!
//! Subspaces are stored as orthonormal bases rather than dense projector
//! matrices, so joins and meets are rank computations with a single
//! tolerance knob. The step map `P -> P v (V P V* ^ Q)` is monotone and
//! only ever grows its argument; iterating it from a seed climbs the
//! lattice to the least projection above the seed that absorbs its own
//! conjugated-and-cut image, in at most `n` stages (rank must strictly
//! increase until fixed).

use serde::ser::SerializeStruct;
use serde::Serialize;
use thiserror::Error;

use crate::fixpoint::{IterationReport, StabilizationPolicy, Stage};
use crate::linalg::{
    frobenius, hermitian_nullspace, identity, operator_norm, orthonormal_columns, C64, CMatrix,
};

/// Rank decisions (orthonormalization, meets) use this tolerance.
pub const RANK_TOL: f64 = 1e-10;
/// Subspace equality and the fixed-point inequalities are accepted at this
/// principal-angle tolerance.
pub const ANGLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OmlError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not unitary: ||V*V - I|| = {defect:e}")]
    NotUnitary { defect: f64 },
    #[error("columns are not orthonormal: defect {defect:e}")]
    NotOrthonormal { defect: f64 },
    #[error("subspace iteration did not stabilize: rank froze but principal angle {principal_angle:e} stayed above {ANGLE_TOL:e}")]
    NotConverged { principal_angle: f64 },
    #[error("fixed point violates `{which}`: defect {defect:e}")]
    FixedPointInequalityViolated { which: &'static str, defect: f64 },
}

/// An orthogonal projection, represented by an orthonormal basis of its
/// range (an `n x r` matrix, possibly with zero columns).
#[derive(Debug, Clone)]
pub struct SubspaceProjection {
    basis: CMatrix,
}

impl SubspaceProjection {
    /// Wrap an already orthonormal basis; validated within [`RANK_TOL`].
    pub fn from_basis(basis: CMatrix) -> Result<Self, OmlError> {
        let gram = basis.adjoint() * &basis;
        let defect = frobenius(&(gram - identity(basis.ncols())));
        if defect > RANK_TOL {
            return Err(OmlError::NotOrthonormal { defect });
        }
        Ok(Self { basis })
    }

    /// Projection onto the span of arbitrary vectors (dependent or not).
    pub fn span_of(vectors: &CMatrix) -> Self {
        Self { basis: orthonormal_columns(vectors, RANK_TOL) }
    }

    pub fn zero(n: usize) -> Self {
        Self { basis: CMatrix::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Self { basis: identity(n) }
    }

    /// Span of the selected coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let mut basis = CMatrix::zeros(n, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            assert!(i < n, "axis {i} out of range");
            basis[(i, j)] = C64::new(1.0, 0.0);
        }
        Self { basis }
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Dimension of the range.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Dense projector `B B*`.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Sine of the largest principal angle from this range into `other`
    /// (zero when this subspace is contained in the other).
    pub fn containment_defect(&self, other: &Self) -> f64 {
        if self.rank() == 0 {
            return 0.0;
        }
        let residual = &self.basis - other.projector() * &self.basis;
        operator_norm(&residual)
    }

    pub fn is_contained_in(&self, other: &Self, tol: f64) -> bool {
        self.containment_defect(other) <= tol
    }

    /// Sine of the largest principal angle between equal-rank subspaces,
    /// computed as the operator norm of the projector difference.
    pub fn distance(&self, other: &Self) -> f64 {
        operator_norm(&(self.projector() - other.projector()))
    }

    /// Subspace equality within [`ANGLE_TOL`]: equal ranks and projector
    /// difference below the angle gate.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.rank() == other.rank() && self.distance(other) <= ANGLE_TOL
    }
}

impl Serialize for SubspaceProjection {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SubspaceProjection", 3)?;
        s.serialize_field("ambient_dim", &self.ambient_dim())?;
        s.serialize_field("rank", &self.rank())?;
        let rows: Vec<Vec<String>> = (0..self.ambient_dim())
            .map(|r| {
                (0..self.rank())
                    .map(|c| crate::spectral::format_complex(self.basis[(r, c)]))
                    .collect()
            })
            .collect();
        s.serialize_field("basis_rows", &rows)?;
        s.end()
    }
}

/// Join: projection onto the sum of the two ranges.
pub fn join(a: &SubspaceProjection, b: &SubspaceProjection) -> Result<SubspaceProjection, OmlError> {
    check_ambient(a, b)?;
    let n = a.ambient_dim();
    let mut stacked = CMatrix::zeros(n, a.rank() + b.rank());
    stacked.columns_mut(0, a.rank()).copy_from(a.basis());
    stacked.columns_mut(a.rank(), b.rank()).copy_from(b.basis());
    Ok(SubspaceProjection::span_of(&stacked))
}

/// Meet: projection onto the intersection of the two ranges, via the null
/// space of `(I - P_a) + (I - P_b)` (a vector is in both ranges exactly
/// when that positive semidefinite sum annihilates it).
pub fn meet(a: &SubspaceProjection, b: &SubspaceProjection) -> Result<SubspaceProjection, OmlError> {
    check_ambient(a, b)?;
    let n = a.ambient_dim();
    let gram = (identity(n) - a.projector()) + (identity(n) - b.projector());
    let basis = hermitian_nullspace(&gram, RANK_TOL);
    Ok(SubspaceProjection { basis })
}

fn check_ambient(a: &SubspaceProjection, b: &SubspaceProjection) -> Result<(), OmlError> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(OmlError::DimensionMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    Ok(())
}

/// The projection with range `V . Ran(P)`.
pub fn conjugate(v: &CMatrix, p: &SubspaceProjection) -> SubspaceProjection {
    SubspaceProjection::span_of(&(v * p.basis()))
}

/// A unitary, a cutting projection and a seed projection on the same space.
#[derive(Debug, Clone)]
pub struct OmlSystem {
    v: CMatrix,
    q: SubspaceProjection,
    p0: SubspaceProjection,
}

impl OmlSystem {
    pub fn new(
        v: CMatrix,
        q: SubspaceProjection,
        p0: SubspaceProjection,
    ) -> Result<Self, OmlError> {
        let n = v.nrows();
        if v.ncols() != n {
            return Err(OmlError::DimensionMismatch { left: n, right: v.ncols() });
        }
        let defect = frobenius(&(v.adjoint() * &v - identity(n)));
        if defect > RANK_TOL {
            return Err(OmlError::NotUnitary { defect });
        }
        if q.ambient_dim() != n {
            return Err(OmlError::DimensionMismatch { left: n, right: q.ambient_dim() });
        }
        if p0.ambient_dim() != n {
            return Err(OmlError::DimensionMismatch { left: n, right: p0.ambient_dim() });
        }
        Ok(Self { v, q, p0 })
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn q(&self) -> &SubspaceProjection {
        &self.q
    }

    pub fn p0(&self) -> &SubspaceProjection {
        &self.p0
    }

    pub fn ambient_dim(&self) -> usize {
        self.v.nrows()
    }
}

/// One lattice step `P -> P v (V P V* ^ Q)`.
pub fn phi_oml_step(
    sys: &OmlSystem,
    p: &SubspaceProjection,
) -> Result<SubspaceProjection, OmlError> {
    if p.ambient_dim() != sys.ambient_dim() {
        return Err(OmlError::DimensionMismatch {
            left: sys.ambient_dim(),
            right: p.ambient_dim(),
        });
    }
    let cut = meet(&conjugate(&sys.v, p), &sys.q)?;
    join(p, &cut)
}

/// Iterate the lattice step from the seed until rank and range stabilize.
///
/// The returned fixed point satisfies both lattice inequalities
/// `P* >= P0` and `P* >= V P* V* ^ Q` within [`ANGLE_TOL`] (checked before
/// returning), and the stage is at most the ambient dimension because the
/// rank strictly increases until fixed. A frozen rank with a stubborn
/// principal angle — numerical rank flapping — reports
/// [`OmlError::NotConverged`] with the offending angle.
///
/// Residuals record the Frobenius distance between consecutive projectors.
/// The policy contributes its step budget; stabilization itself is the
/// exact subspace-equality gate.
pub fn oml_fixed_point(
    sys: &OmlSystem,
    policy: &StabilizationPolicy,
) -> Result<IterationReport<SubspaceProjection>, OmlError> {
    let n = sys.ambient_dim();
    let mut current = sys.p0.clone();
    let mut residuals = Vec::new();
    let budget = policy.max_iter.min(n + 2);
    for stage in 0..=budget {
        let next = phi_oml_step(sys, &current)?;
        residuals.push(frobenius(&(next.projector() - current.projector())));
        if next.rank() == current.rank() {
            let angle_sin = current.distance(&next);
            if angle_sin <= ANGLE_TOL {
                check_fixed_point(sys, &current)?;
                return Ok(IterationReport {
                    fixed_point: current,
                    stage: Stage::Finite(stage),
                    residuals,
                    converged: true,
                });
            }
            return Err(OmlError::NotConverged {
                principal_angle: angle_sin.min(1.0).asin(),
            });
        }
        current = next;
    }
    // Rank can only increase n times; exceeding the budget means the policy
    // cut the run short.
    Ok(IterationReport {
        fixed_point: current,
        stage: Stage::Finite(budget),
        residuals,
        converged: false,
    })
}

fn check_fixed_point(sys: &OmlSystem, p_star: &SubspaceProjection) -> Result<(), OmlError> {
    let seed_defect = sys.p0.containment_defect(p_star);
    if seed_defect > ANGLE_TOL {
        return Err(OmlError::FixedPointInequalityViolated {
            which: "P* >= P0",
            defect: seed_defect,
        });
    }
    let cut = meet(&conjugate(&sys.v, p_star), &sys.q)?;
    let cut_defect = cut.containment_defect(p_star);
    if cut_defect > ANGLE_TOL {
        return Err(OmlError::FixedPointInequalityViolated {
            which: "P* >= V P* V* ^ Q",
            defect: cut_defect,
        });
    }
    Ok(())
}
