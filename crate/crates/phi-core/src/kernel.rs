//! Finite-state Markov kernels and the deterministic push-forward lift.
//!
//! A kernel is a row-stochastic matrix; its lift acts on probability
//! vectors by `mu -> mu K`, which is linear and deterministic. Kernel
//! composition is the matrix product in path order (first kernel applied
//! first), and stationary distributions are found by iterating the lift
//! from the uniform start.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::fixpoint::{iterate_to_fixpoint, IterationReport, StabilizationPolicy, Stage};

/// Tolerance on probability mass: vector sums and kernel row sums must be
/// within this of 1.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("row {row} is not a probability distribution: {detail}")]
    NonStochasticKernel { row: usize, detail: String },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("iteration did not stabilize within {stage} stages (last residual {last_residual:e})")]
    NotConverged { stage: usize, last_residual: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A probability vector: nonnegative entries summing to 1 within [`MASS_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, KernelError> {
        if probs.is_empty() {
            return Err(KernelError::InvalidDistribution("empty vector".into()));
        }
        if probs.iter().any(|p| p.is_nan() || *p < 0.0 || !p.is_finite()) {
            return Err(KernelError::InvalidDistribution(
                "entries must be nonnegative finite reals".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(KernelError::InvalidDistribution(format!(
                "mass {sum} differs from 1 by more than {MASS_TOL:e}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total-variation style l1 distance.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// A row-stochastic n x n matrix over a finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: DMatrix<f64>,
}

impl Kernel {
    pub fn new(rows: DMatrix<f64>) -> Result<Self, KernelError> {
        if rows.nrows() != rows.ncols() || rows.nrows() == 0 {
            return Err(KernelError::DimensionMismatch {
                left: rows.nrows(),
                right: rows.ncols(),
            });
        }
        for r in 0..rows.nrows() {
            let mut sum = 0.0;
            for c in 0..rows.ncols() {
                let v = rows[(r, c)];
                if v.is_nan() || v < 0.0 || !v.is_finite() {
                    return Err(KernelError::NonStochasticKernel {
                        row: r,
                        detail: format!("entry {v} is not a nonnegative finite real"),
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > MASS_TOL {
                return Err(KernelError::NonStochasticKernel {
                    row: r,
                    detail: format!("row sum {sum} differs from 1 by more than {MASS_TOL:e}"),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: DMatrix::identity(n, n) }
    }

    /// The two-state kernel with a -> b surely and b -> a with probability p.
    pub fn toy(p: f64) -> Result<Self, KernelError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(KernelError::NonStochasticKernel {
                row: 1,
                detail: format!("toy kernel requires p in (0, 1), got {p}"),
            });
        }
        Ok(Self { rows: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, p, 1.0 - p]) })
    }

    pub fn n_states(&self) -> usize {
        self.rows.nrows()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// Parse the text format: `n` on the first data line, then n rows of n
    /// reals. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, KernelError> {
        let mut data_lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, head) = data_lines
            .next()
            .ok_or(KernelError::Parse { line: 0, message: "empty kernel file".into() })?;
        let n: usize = head.parse().map_err(|_| KernelError::Parse {
            line,
            message: format!("expected state count, found `{head}`"),
        })?;
        if n == 0 {
            return Err(KernelError::Parse { line, message: "state count must be >= 1".into() });
        }
        let mut rows = DMatrix::zeros(n, n);
        for r in 0..n {
            let (line, row) = data_lines.next().ok_or(KernelError::Parse {
                line: 0,
                message: format!("expected {n} rows, found {r}"),
            })?;
            let values: Vec<&str> = row.split_whitespace().collect();
            if values.len() != n {
                return Err(KernelError::Parse {
                    line,
                    message: format!("expected {n} entries, found {}", values.len()),
                });
            }
            for (c, tok) in values.iter().enumerate() {
                rows[(r, c)] = tok.parse().map_err(|_| KernelError::Parse {
                    line,
                    message: format!("invalid real `{tok}`"),
                })?;
            }
        }
        if let Some((line, _)) = data_lines.next() {
            return Err(KernelError::Parse { line, message: "trailing content".into() });
        }
        Self::new(rows).map_err(|e| KernelError::Parse { line: 0, message: e.to_string() })
    }
}

/// Push a distribution forward through a kernel: `mu -> mu K`.
pub fn push_forward(kernel: &Kernel, mu: &Distribution) -> Result<Distribution, KernelError> {
    if kernel.n_states() != mu.len() {
        return Err(KernelError::DimensionMismatch {
            left: kernel.n_states(),
            right: mu.len(),
        });
    }
    Ok(Distribution { probs: push_forward_raw(&kernel.rows, mu.probs()) })
}

fn push_forward_raw(rows: &DMatrix<f64>, mu: &[f64]) -> Vec<f64> {
    let n = rows.nrows();
    let mut out = vec![0.0; n];
    for (y, out_y) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for x in 0..n {
            acc += mu[x] * rows[(x, y)];
        }
        *out_y = acc;
    }
    out
}

/// Kernel composition in path order: the result of `compose_kernels(kf, kg)`
/// pushes forward through `kf` first, then `kg` — the matrix product
/// `Kf * Kg` in row-stochastic convention.
pub fn compose_kernels(kf: &Kernel, kg: &Kernel) -> Result<Kernel, KernelError> {
    if kf.n_states() != kg.n_states() {
        return Err(KernelError::DimensionMismatch {
            left: kf.n_states(),
            right: kg.n_states(),
        });
    }
    Kernel::new(&kf.rows * &kg.rows)
}

/// Iterate the lift from `start` to a fixed point within policy; the fixed
/// point mu satisfies `||mu K - mu||_1 <= tol`. A budget exhaustion (e.g. a
/// periodic chain started off its stationary point) is reported as
/// [`KernelError::NotConverged`], not masked.
pub fn stationary_distribution_from(
    kernel: &Kernel,
    start: Distribution,
    policy: &StabilizationPolicy,
) -> Result<IterationReport<Distribution>, KernelError> {
    if kernel.n_states() != start.len() {
        return Err(KernelError::DimensionMismatch {
            left: kernel.n_states(),
            right: start.len(),
        });
    }
    let rows = &kernel.rows;
    let report = iterate_to_fixpoint(
        |mu: &Vec<f64>| push_forward_raw(rows, mu),
        start.probs,
        |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        policy,
    )
    .map_err(|e| KernelError::InvalidDistribution(e.to_string()))?;
    if !report.converged {
        let Stage::Finite(stage) = report.stage else { unreachable!() };
        return Err(KernelError::NotConverged {
            stage,
            last_residual: report.residuals.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(IterationReport {
        fixed_point: Distribution::new(report.fixed_point)?,
        stage: report.stage,
        residuals: report.residuals,
        converged: report.converged,
    })
}

/// [`stationary_distribution_from`] started at the uniform distribution,
/// the deterministic seed-free default.
pub fn stationary_distribution(
    kernel: &Kernel,
    policy: &StabilizationPolicy,
) -> Result<IterationReport<Distribution>, KernelError> {
    stationary_distribution_from(kernel, Distribution::uniform(kernel.n_states()), policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use rand::SeedableRng;

    #[test]
    fn toy_kernel_matches_lifted_formula() {
        // The lifted map on the simplex is (mu_a, mu_b) -> (p mu_b, 1 - p mu_b).
        let k = Kernel::toy(0.5).unwrap();
        let mu = Distribution::new(vec![0.0, 1.0]).unwrap();
        let out = push_forward(&k, &mu).unwrap();
        assert_eq!(out.probs(), &[0.5, 0.5]);

        let k = Kernel::toy(0.3).unwrap();
        let mu = Distribution::new(vec![0.4, 0.6]).unwrap();
        let out = push_forward(&k, &mu).unwrap();
        assert!((out.probs()[0] - 0.18).abs() < 1e-12);
        assert!((out.probs()[1] - 0.82).abs() < 1e-12);
    }

    #[test]
    fn identity_kernel_preserves_any_distribution() {
        let k = Kernel::identity(4);
        let mu = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(push_forward(&k, &mu).unwrap(), mu);
    }

    #[test]
    fn composition_path_order() {
        let k = Kernel::toy(0.5).unwrap();
        assert_eq!(compose_kernels(&Kernel::identity(2), &k).unwrap(), k);
        // Toy kernel squared: the row for state a becomes (0.5, 0.5).
        let kk = compose_kernels(&k, &k).unwrap();
        assert!((kk.rows()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((kk.rows()[(0, 1)] - 0.5).abs() < 1e-15);
        // Absorbing target: composing into all-mass-to-state-0 gives rows (1, 0).
        let absorb = Kernel::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0])).unwrap();
        let ka = compose_kernels(&k, &absorb).unwrap();
        for r in 0..2 {
            assert_eq!(ka.rows()[(r, 0)], 1.0);
            assert_eq!(ka.rows()[(r, 1)], 0.0);
        }
    }

    #[test]
    fn toy_stationary_distribution() {
        let p = 0.5;
        let k = Kernel::toy(p).unwrap();
        let policy = StabilizationPolicy::numeric(1e-13, 0.0, 100_000).unwrap();
        let report = stationary_distribution(&k, &policy).unwrap();
        // Closed form (p / (1 + p), 1 / (1 + p)) and a raw power-iteration
        // oracle, computed outside the driver.
        assert!((report.fixed_point.probs()[0] - p / (1.0 + p)).abs() < 1e-10);
        assert!((report.fixed_point.probs()[1] - 1.0 / (1.0 + p)).abs() < 1e-10);
        let mut mu = vec![0.5, 0.5];
        for _ in 0..10_000 {
            mu = push_forward_raw(k.rows(), &mu);
        }
        assert!((report.fixed_point.probs()[0] - mu[0]).abs() < 1e-10);
        assert!((report.fixed_point.probs()[1] - mu[1]).abs() < 1e-10);
    }

    #[test]
    fn identity_kernel_is_stationary_at_uniform() {
        let k = Kernel::identity(3);
        let report = stationary_distribution(&k, &StabilizationPolicy::default()).unwrap();
        assert_eq!(report.stage, Stage::Finite(0));
        assert_eq!(report.fixed_point, Distribution::uniform(3));
    }

    #[test]
    fn two_cycle_is_periodic_off_uniform_but_fixed_at_uniform() {
        let swap = Kernel::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        // The doubly stochastic permutation fixes uniform immediately.
        let report = stationary_distribution(&swap, &StabilizationPolicy::default()).unwrap();
        assert_eq!(report.fixed_point.probs(), &[0.5, 0.5]);
        // Off uniform it alternates forever: reported, not masked.
        let policy = StabilizationPolicy::exact(100).unwrap();
        let err =
            stationary_distribution_from(&swap, Distribution::point_mass(2, 0), &policy)
                .unwrap_err();
        assert!(matches!(err, KernelError::NotConverged { stage: 100, .. }));
    }

    #[test]
    fn lift_is_linear_and_conserves_mass() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = 2 + rand::Rng::gen_range(&mut rng, 0..7);
            let k = samples::random_kernel(n, &mut rng);
            let mu = samples::random_distribution(n, &mut rng);
            let nu = samples::random_distribution(n, &mut rng);
            let alpha: f64 = rand::Rng::gen_range(&mut rng, 0.0..1.0);
            let mix: Vec<f64> = mu
                .probs()
                .iter()
                .zip(nu.probs())
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect();
            let lhs = push_forward(&k, &Distribution::new(mix).unwrap()).unwrap();
            let pm = push_forward(&k, &mu).unwrap();
            let pn = push_forward(&k, &nu).unwrap();
            for i in 0..n {
                let rhs = alpha * pm.probs()[i] + (1.0 - alpha) * pn.probs()[i];
                assert!((lhs.probs()[i] - rhs).abs() < 1e-12);
            }
            assert!((lhs.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_identity_on_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = 2 + rand::Rng::gen_range(&mut rng, 0..7);
            let kf = samples::random_kernel(n, &mut rng);
            let kg = samples::random_kernel(n, &mut rng);
            let composed = compose_kernels(&kf, &kg).unwrap();
            for _ in 0..20 {
                let mu = samples::random_distribution(n, &mut rng);
                let direct = push_forward(&composed, &mu).unwrap();
                let chained = push_forward(&kg, &push_forward(&kf, &mu).unwrap()).unwrap();
                assert!(direct.l1_distance(&chained) < 1e-12);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Kernel::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 1.0, 0.0])).is_err());
        assert!(Kernel::new(DMatrix::from_row_slice(2, 3, &[0.0; 6])).is_err());
        assert!(Kernel::toy(0.0).is_err());
        assert!(Kernel::toy(1.0).is_err());
        let k = Kernel::identity(3);
        let mu = Distribution::uniform(2);
        assert!(matches!(
            push_forward(&k, &mu),
            Err(KernelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn parse_kernel_text() {
        let k = Kernel::parse("# toy\n2\n0 1\n0.5 0.5\n").unwrap();
        assert_eq!(&k, &Kernel::toy(0.5).unwrap());
        assert!(matches!(
            Kernel::parse("2\n0 1\n"),
            Err(KernelError::Parse { .. })
        ));
        assert!(matches!(
            Kernel::parse("2\n0 1 0\n0.5 0.5\n"),
            Err(KernelError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Kernel::parse("2\n0 x\n0.5 0.5\n"),
            Err(KernelError::Parse { line: 2, .. })
        ));
        assert!(matches!(Kernel::parse(""), Err(KernelError::Parse { .. })));
    }
}
