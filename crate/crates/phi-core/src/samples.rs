//! Deterministic generators of random problem instances.
//!
//! Every generator takes an explicit RNG so property suites and the
//! acceptance harness are reproducible from a fixed seed.

use nalgebra::DMatrix;
use rand::Rng;

use crate::kernel::{Distribution, Kernel};
use crate::lattice::{PowersetElement, SetValuedMap};
use crate::linalg::{orthonormal_columns, C64, CMatrix};

/// Random probability vector: iid uniforms normalized to unit mass.
pub fn random_distribution<R: Rng>(n: usize, rng: &mut R) -> Distribution {
    let mut probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    Distribution::new(probs).expect("normalized vector is a distribution")
}

/// Random row-stochastic kernel.
pub fn random_kernel<R: Rng>(n: usize, rng: &mut R) -> Kernel {
    let mut rows = DMatrix::zeros(n, n);
    for r in 0..n {
        let row = random_distribution(n, rng);
        for c in 0..n {
            rows[(r, c)] = row.probs()[c];
        }
    }
    Kernel::new(rows).expect("rows are distributions")
}

/// Random set-valued map; each successor set is drawn uniformly over
/// subsets (so dead ends occur).
pub fn random_set_valued_map<R: Rng>(n: usize, rng: &mut R) -> SetValuedMap {
    let successors = (0..n)
        .map(|_| {
            let mut s = PowersetElement::empty(n);
            for i in 0..n {
                if rng.gen_bool(0.5) {
                    s.insert(i);
                }
            }
            s
        })
        .collect();
    SetValuedMap::new(successors).expect("dimensions agree")
}

/// Standard complex Gaussian entry (Box-Muller).
fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * u2.cos(), r * u2.sin())
}

/// Matrix of iid standard complex Gaussians.
pub fn random_complex_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Haar-ish random unitary: orthonormalized complex Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let q = orthonormal_columns(&random_complex_matrix(n, n, rng), 1e-10);
        if q.ncols() == n {
            return q;
        }
    }
}

/// Random orthonormal basis of an r-dimensional subspace of C^n.
pub fn random_subspace<R: Rng>(n: usize, r: usize, rng: &mut R) -> CMatrix {
    assert!(r <= n);
    loop {
        let q = orthonormal_columns(&random_complex_matrix(n, r, rng), 1e-10);
        if q.ncols() == r {
            return q;
        }
    }
}

/// Normal matrix with the prescribed eigenvalues: `V diag(lambda) V*` for a
/// random unitary `V`. Returns the matrix together with the unitary used.
pub fn random_normal_matrix<R: Rng>(eigenvalues: &[C64], rng: &mut R) -> (CMatrix, CMatrix) {
    let n = eigenvalues.len();
    let v = random_unitary(n, rng);
    let diag = CMatrix::from_fn(n, n, |r, c| {
        if r == c {
            eigenvalues[r]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let t = &v * diag * v.adjoint();
    (t, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in [1, 3, 6] {
            let u = random_unitary(n, &mut rng);
            let gram = u.adjoint() * &u;
            assert!((gram - CMatrix::identity(n, n)).norm() < 1e-10);
        }
    }

    #[test]
    fn normal_matrix_has_prescribed_spectrum_on_diagonal_frame() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let eigs = [C64::new(1.0, 0.0), C64::new(0.3, 0.4), C64::new(-0.5, 0.0)];
        let (t, v) = random_normal_matrix(&eigs, &mut rng);
        let back = v.adjoint() * &t * &v;
        for (i, &lambda) in eigs.iter().enumerate() {
            assert!((back[(i, i)] - lambda).norm() < 1e-10);
        }
        let comm = &t * t.adjoint() - t.adjoint() * &t;
        assert!(comm.norm() < 1e-10);
    }
}
