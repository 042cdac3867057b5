//! Input loading and error-to-exit-code mapping.

use std::path::Path;

use phi_core::depletion::DepletionError;
use phi_core::fixpoint::FixpointError;
use phi_core::kernel::KernelError;
use phi_core::lattice::LatticeError;
use phi_core::linalg::CMatrix;
use phi_core::oml::OmlError;
use phi_core::spectral::{parse_complex, SpectralError};

use crate::CliError;

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Precondition(format!("this track requires {what}")))
}

/// Basis file: `n r` (or a single `n` for square) then n rows of r complex
/// tokens.
pub fn parse_basis(text: &str) -> Result<CMatrix, CliError> {
    let mut data_lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, head) = data_lines
        .next()
        .ok_or_else(|| CliError::Parse("empty basis file".into()))?;
    let dims: Vec<&str> = head.split_whitespace().collect();
    let (n, r) = match dims.as_slice() {
        [n] => {
            let n: usize = n
                .parse()
                .map_err(|_| CliError::Parse(format!("line {line}: invalid dimension `{n}`")))?;
            (n, n)
        }
        [n, r] => {
            let n: usize = n
                .parse()
                .map_err(|_| CliError::Parse(format!("line {line}: invalid dimension `{n}`")))?;
            let r: usize = r
                .parse()
                .map_err(|_| CliError::Parse(format!("line {line}: invalid rank `{r}`")))?;
            (n, r)
        }
        _ => {
            return Err(CliError::Parse(format!(
                "line {line}: expected `n` or `n r` header"
            )))
        }
    };
    if n == 0 {
        return Err(CliError::Parse(format!("line {line}: dimension must be >= 1")));
    }
    let mut out = CMatrix::zeros(n, r);
    for row in 0..n {
        let (line, content) = data_lines
            .next()
            .ok_or_else(|| CliError::Parse(format!("expected {n} rows, found {row}")))?;
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != r {
            return Err(CliError::Parse(format!(
                "line {line}: expected {r} entries, found {}",
                tokens.len()
            )));
        }
        for (c, tok) in tokens.iter().enumerate() {
            out[(row, c)] = parse_complex(tok)
                .ok_or_else(|| CliError::Parse(format!("line {line}: invalid complex `{tok}`")))?;
        }
    }
    Ok(out)
}

pub fn parse_real_vector(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
    v.map_err(|_| CliError::Precondition(format!("invalid {what}: `{text}`")))
}

fn wrap(track: &str, kind: CliError) -> CliError {
    match kind {
        CliError::Parse(m) => CliError::Parse(format!("[{track}] {m}")),
        CliError::Precondition(m) => CliError::Precondition(format!("[{track}] {m}")),
        CliError::NotConverged(m) => CliError::NotConverged(format!("[{track}] {m}")),
        CliError::HypothesisViolated(m) => CliError::HypothesisViolated(format!("[{track}] {m}")),
    }
}

pub fn from_fixpoint(track: &str, e: FixpointError) -> CliError {
    let msg = e.to_string();
    let kind = match e {
        FixpointError::InvalidPolicy(_)
        | FixpointError::InvalidSchedule(_)
        | FixpointError::EmptyInput(_)
        | FixpointError::ZeroDistanceProbe { .. } => CliError::Precondition(msg),
        FixpointError::NonFiniteValue { .. } => CliError::NotConverged(msg),
        FixpointError::UniquenessCheckFailed { .. } => CliError::HypothesisViolated(msg),
    };
    wrap(track, kind)
}

pub fn from_lattice(track: &str, e: LatticeError) -> CliError {
    let msg = e.to_string();
    let kind = match e {
        LatticeError::Parse { .. } => CliError::Parse(msg),
        LatticeError::DimensionMismatch { .. } | LatticeError::EmptyPack => {
            CliError::Precondition(msg)
        }
        LatticeError::MonotonicityViolation { .. } => CliError::HypothesisViolated(msg),
    };
    wrap(track, kind)
}

pub fn from_kernel(track: &str, e: KernelError) -> CliError {
    let msg = e.to_string();
    let kind = match e {
        KernelError::Parse { .. } => CliError::Parse(msg),
        KernelError::DimensionMismatch { .. }
        | KernelError::NonStochasticKernel { .. }
        | KernelError::InvalidDistribution(_) => CliError::Precondition(msg),
        KernelError::NotConverged { .. } => CliError::NotConverged(msg),
    };
    wrap(track, kind)
}

pub fn from_spectral(track: &str, e: SpectralError) -> CliError {
    let msg = e.to_string();
    let kind = match e {
        SpectralError::Parse { .. } => CliError::Parse(msg),
        SpectralError::NonFiniteEntries
        | SpectralError::NotNormal { .. }
        | SpectralError::ContourNearSpectrum { .. }
        | SpectralError::SingularResolvent { .. }
        | SpectralError::DimensionMismatch { .. }
        | SpectralError::LengthMismatch { .. }
        | SpectralError::DecompositionFailed(_)
        | SpectralError::InvalidParameter(_) => CliError::Precondition(msg),
        SpectralError::NotIdempotent { .. } => CliError::NotConverged(msg),
        SpectralError::PersistentUnimodularSpectrum { .. }
        | SpectralError::NonCommutingFamily { .. }
        | SpectralError::AnalyticIterativeMismatch { .. }
        | SpectralError::FixedSpaceMismatch { .. } => CliError::HypothesisViolated(msg),
    };
    wrap(track, kind)
}

pub fn from_oml(track: &str, e: OmlError) -> CliError {
    let msg = e.to_string();
    let kind = match e {
        OmlError::DimensionMismatch { .. }
        | OmlError::NotUnitary { .. }
        | OmlError::NotOrthonormal { .. } => CliError::Precondition(msg),
        OmlError::NotConverged { .. } => CliError::NotConverged(msg),
        OmlError::FixedPointInequalityViolated { .. } => CliError::HypothesisViolated(msg),
    };
    wrap(track, kind)
}

pub fn from_depletion(track: &str, e: DepletionError) -> CliError {
    let msg = e.to_string();
    let kind = match e {
        DepletionError::Parse { .. } => CliError::Parse(msg),
        DepletionError::InvalidConfig(_)
        | DepletionError::IndexOutOfRange { .. }
        | DepletionError::NonPositiveStimulus(_)
        | DepletionError::InsufficientTail { .. }
        | DepletionError::WrongStimulusKind { .. }
        | DepletionError::WrongUpdateKind { .. } => CliError::Precondition(msg),
        DepletionError::DivergedIteration { .. } | DepletionError::ClosedFormMismatch { .. } => {
            CliError::NotConverged(msg)
        }
        DepletionError::BoundHypothesisViolated { .. }
        | DepletionError::KappaDeclarationViolated { .. }
        | DepletionError::MonotoneCouplingViolated { .. } => CliError::HypothesisViolated(msg),
    };
    wrap(track, kind)
}
