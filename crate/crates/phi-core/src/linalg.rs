//! Shared dense complex linear algebra helpers.

use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// Operator 2-norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.max()
}

/// Orthonormal basis of the column span, by modified Gram-Schmidt with one
/// reorthogonalization pass. Columns whose residual drops below `rank_tol`
/// (relative to `max(1, original norm)`) are treated as dependent and
/// dropped, so the output has full column rank.
pub fn orthonormal_columns(cols: &CMatrix, rank_tol: f64) -> CMatrix {
    let n = cols.nrows();
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..cols.ncols() {
        let mut v = cols.column(j).into_owned();
        let original = v.norm();
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&v);
                v -= b * coeff;
            }
        }
        let norm = v.norm();
        if norm > rank_tol * original.max(1.0) {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut out = CMatrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Cyclic complex Jacobi iteration: each rotation is a phased Givens
/// transform annihilating one off-diagonal pair, and sweeps repeat until
/// the off-diagonal mass reaches the rounding floor. Slower than a QR
/// path but reconstructs to machine precision, which the projector and
/// rank tolerances downstream rely on.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut vectors = CMatrix::identity(n, n);
    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    let stop = f64::EPSILON * scale;

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let beta = a[(p, q)];
                let beta_abs = beta.norm();
                if beta_abs <= f64::EPSILON * stop {
                    continue;
                }
                let phase = beta / C64::new(beta_abs, 0.0);
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * beta_abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column transform J: col_p' = c col_p - s conj(phase) col_q,
                // col_q' = s col_p + c conj(phase) col_q.
                let (cc, sp, spc) = (
                    C64::new(c, 0.0),
                    C64::new(s, 0.0) * phase,
                    C64::new(s, 0.0) * phase.conj(),
                );
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * cc - akq * spc;
                    a[(k, q)] = akp * C64::new(s, 0.0) + akq * cc * phase.conj();
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * cc - aqk * sp;
                    a[(q, k)] = apk * C64::new(s, 0.0) + aqk * cc * phase;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (vectors[(k, p)], vectors[(k, q)]);
                    vectors[(k, p)] = vkp * cc - vkq * spc;
                    vectors[(k, q)] = vkp * C64::new(s, 0.0) + vkq * cc * phase.conj();
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut sorted = CMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        sorted.set_column(j, &vectors.column(i));
    }
    (values, sorted)
}

/// Orthonormal basis of the null space of a Hermitian positive semidefinite
/// matrix: eigenvectors whose eigenvalue is at most `tol`.
pub fn hermitian_nullspace(m: &CMatrix, tol: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let keep: Vec<usize> =
        (0..values.len()).filter(|&i| values[i].abs() <= tol).collect();
    let mut out = CMatrix::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vectors.column(i));
    }
    out
}
