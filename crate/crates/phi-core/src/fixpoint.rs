//! Generic fixed-point iteration driver.
//!
//! One loop serves every track in this workspace: repeatedly apply a step
//! map, record the residual `metric(x_k, x_{k+1})` at each stage, and stop
//! at the first iterate that the [`StabilizationPolicy`] accepts as fixed.
//! Exact mode demands `metric(x, step(x)) == 0`; numeric mode accepts
//! `metric(x, step(x)) <= tol_abs + tol_rel * metric(x, start)`, where the
//! relative part is scaled by the displacement from the start point.
//!
//! The module also houses the event-indexed contraction machinery: a
//! falsification harness for declared contraction schedules and a
//! fixed-point runner that operationalizes uniqueness by iterating from two
//! distinct starts and comparing the limits.

use serde::Serialize;
use thiserror::Error;

/// Errors produced by the iteration driver and contraction harnesses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixpointError {
    #[error("invalid stabilization policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid event schedule: {0}")]
    InvalidSchedule(String),
    #[error("{0} must be nonempty")]
    EmptyInput(&'static str),
    #[error("non-finite value produced at stage {stage}")]
    NonFiniteValue { stage: usize },
    #[error("zero-distance probe pair at index {probe}: contraction ratio undefined")]
    ZeroDistanceProbe { probe: usize },
    #[error("uniqueness check failed: limits from two starts disagree by {distance:e} (tolerance {tolerance:e})")]
    UniquenessCheckFailed { distance: f64, tolerance: f64 },
}

/// How stabilization is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConvergenceMode {
    /// Stop only on exact equality (`metric == 0`). Tolerances are ignored.
    Exact,
    /// Stop when the residual drops below `tol_abs + tol_rel * scale`.
    Numeric,
}

/// Stopping rule for an iteration: mode, tolerances and step budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilizationPolicy {
    pub mode: ConvergenceMode,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
}

impl StabilizationPolicy {
    /// Exact-equality stabilization with the given step budget.
    pub fn exact(max_iter: usize) -> Result<Self, FixpointError> {
        if max_iter == 0 {
            return Err(FixpointError::InvalidPolicy("max_iter must be >= 1".into()));
        }
        Ok(Self { mode: ConvergenceMode::Exact, tol_abs: 0.0, tol_rel: 0.0, max_iter })
    }

    /// Numeric stabilization. Requires `tol_abs + tol_rel > 0` and `max_iter >= 1`.
    pub fn numeric(tol_abs: f64, tol_rel: f64, max_iter: usize) -> Result<Self, FixpointError> {
        if tol_abs.is_nan() || tol_abs < 0.0 || tol_rel.is_nan() || tol_rel < 0.0 {
            return Err(FixpointError::InvalidPolicy(
                "tolerances must be nonnegative finite reals".into(),
            ));
        }
        if tol_abs + tol_rel <= 0.0 {
            return Err(FixpointError::InvalidPolicy(
                "numeric mode requires tol_abs + tol_rel > 0".into(),
            ));
        }
        if max_iter == 0 {
            return Err(FixpointError::InvalidPolicy("max_iter must be >= 1".into()));
        }
        Ok(Self { mode: ConvergenceMode::Numeric, tol_abs, tol_rel, max_iter })
    }

    /// Residual threshold for the given relative scale.
    fn threshold(&self, scale: f64) -> f64 {
        match self.mode {
            ConvergenceMode::Exact => 0.0,
            ConvergenceMode::Numeric => self.tol_abs + self.tol_rel * scale,
        }
    }
}

impl Default for StabilizationPolicy {
    /// Numeric policy with `tol_abs = 1e-10`, `tol_rel = 1e-12`, `max_iter = 100_000`.
    fn default() -> Self {
        Self {
            mode: ConvergenceMode::Numeric,
            tol_abs: 1e-10,
            tol_rel: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Stage label of a stabilized iteration.
///
/// `Finite(n)` means the n-th iterate was accepted as fixed (or, with
/// `converged = false`, that the budget of n steps ran out). `Omega` is
/// reserved for limits computed analytically (spectral formula) rather than
/// reached by equality; only the spectral track produces it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Finite(usize),
    Omega,
}

/// Uniform result record emitted by every iteration track.
///
/// `residuals[k]` is `metric(x_k, x_{k+1})` for every computed step; on
/// convergence at stage `Finite(n)` the history therefore holds `n + 1`
/// entries and the last one satisfies the policy, while an exhausted budget
/// leaves exactly `max_iter` entries, none of which do.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport<S> {
    pub fixed_point: S,
    pub stage: Stage,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Event-indexed contraction schedule: strictly increasing event indices
/// `n_k` with factors `lambda_k` in the open interval (0, 1).
///
/// The running product of a prefix of factors is monotone nonincreasing by
/// construction. Whether the full infinite product vanishes cannot be
/// decided from a finite prefix; harnesses built on this type check only the
/// prefix they are given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSchedule {
    event_indices: Vec<u64>,
    factors: Vec<f64>,
}

impl EventSchedule {
    pub fn new(events: &[(u64, f64)]) -> Result<Self, FixpointError> {
        if events.is_empty() {
            return Err(FixpointError::InvalidSchedule("schedule must be nonempty".into()));
        }
        let mut prev: Option<u64> = None;
        for &(n, lambda) in events {
            if n == 0 || prev.is_some_and(|p| n <= p) {
                return Err(FixpointError::InvalidSchedule(
                    "event indices must be strictly increasing positive integers".into(),
                ));
            }
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(FixpointError::InvalidSchedule(
                    "factors must lie in the open interval (0, 1)".into(),
                ));
            }
            prev = Some(n);
        }
        Ok(Self {
            event_indices: events.iter().map(|e| e.0).collect(),
            factors: events.iter().map(|e| e.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.event_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_indices.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.event_indices.iter().copied().zip(self.factors.iter().copied())
    }

    /// Running products of the factor prefix, one per event.
    pub fn prefix_products(&self) -> Vec<f64> {
        self.factors
            .iter()
            .scan(1.0, |acc, &f| {
                *acc *= f;
                Some(*acc)
            })
            .collect()
    }
}

/// Iterate `step` from `start` until the policy accepts an iterate as fixed.
///
/// Returns the first iterate `x_n` with `metric(x_n, step(x_n))` within the
/// policy, tagged `Finite(n)`, or a `converged = false` report at stage
/// `Finite(max_iter)` when the budget runs out. A non-finite residual aborts
/// with [`FixpointError::NonFiniteValue`], which is how divergent dynamics
/// (e.g. Jordan blocks) surface.
pub fn iterate_to_fixpoint<S, F, M>(
    step: F,
    start: S,
    metric: M,
    policy: &StabilizationPolicy,
) -> Result<IterationReport<S>, FixpointError>
where
    S: Clone,
    F: Fn(&S) -> S,
    M: Fn(&S, &S) -> f64,
{
    let mut current = start.clone();
    let mut residuals = Vec::new();
    for stage in 0..policy.max_iter {
        let next = step(&current);
        let residual = metric(&current, &next);
        if !residual.is_finite() {
            return Err(FixpointError::NonFiniteValue { stage });
        }
        residuals.push(residual);
        if residual <= policy.threshold(metric(&next, &start)) {
            return Ok(IterationReport {
                fixed_point: current,
                stage: Stage::Finite(stage),
                residuals,
                converged: true,
            });
        }
        current = next;
    }
    Ok(IterationReport {
        fixed_point: current,
        stage: Stage::Finite(policy.max_iter),
        residuals,
        converged: false,
    })
}

/// One observed contraction ratio at a scheduled event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventObservation {
    pub probe: usize,
    pub event_index: u64,
    pub declared_factor: f64,
    pub observed_ratio: f64,
    pub compliant: bool,
}

/// Outcome of [`verify_event_contraction`]: one record per probe pair and
/// scheduled event. This is a falsification harness, not a proof — a fully
/// compliant report only says the finite prefix did not contradict the
/// declared schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub observations: Vec<EventObservation>,
}

impl ContractionReport {
    pub fn all_compliant(&self) -> bool {
        self.observations.iter().all(|o| o.compliant)
    }

    pub fn violations(&self) -> impl Iterator<Item = &EventObservation> {
        self.observations.iter().filter(|o| !o.compliant)
    }
}

// Relative slack when comparing an observed ratio against its declared
// factor, so that exact-equality schedules are not flagged over roundoff.
const RATIO_SLACK: f64 = 1e-9;

/// Check declared event-indexed contraction factors against observed orbit
/// ratios: for each probe pair `(x, y)` and each event `(n_k, lambda_k)`,
/// record `metric(step^{n_k} x, step^{n_k} y) / metric(x, y)` and flag it if
/// it exceeds `lambda_k`.
pub fn verify_event_contraction<S, F, M>(
    step: F,
    schedule: &EventSchedule,
    probes: &[(S, S)],
    metric: M,
) -> Result<ContractionReport, FixpointError>
where
    S: Clone,
    F: Fn(&S) -> S,
    M: Fn(&S, &S) -> f64,
{
    if probes.is_empty() {
        return Err(FixpointError::EmptyInput("probes"));
    }
    if schedule.is_empty() {
        return Err(FixpointError::EmptyInput("schedule"));
    }
    let mut observations = Vec::with_capacity(probes.len() * schedule.len());
    for (probe, (x0, y0)) in probes.iter().enumerate() {
        let base = metric(x0, y0);
        if base == 0.0 {
            return Err(FixpointError::ZeroDistanceProbe { probe });
        }
        let mut x = x0.clone();
        let mut y = y0.clone();
        let mut applied = 0u64;
        for (event_index, declared_factor) in schedule.events() {
            while applied < event_index {
                x = step(&x);
                y = step(&y);
                applied += 1;
            }
            let observed_ratio = metric(&x, &y) / base;
            let compliant = observed_ratio <= declared_factor * (1.0 + RATIO_SLACK);
            observations.push(EventObservation {
                probe,
                event_index,
                declared_factor,
                observed_ratio,
                compliant,
            });
        }
    }
    Ok(ContractionReport { observations })
}

/// States that can produce a second start point a unit distance away, used
/// by [`contraction_fixed_point`] when the caller does not supply one. The
/// offset is along the first coordinate so reruns are reproducible.
pub trait UnitOffset {
    fn unit_offset(&self) -> Self;
}

impl UnitOffset for f64 {
    fn unit_offset(&self) -> Self {
        self + 1.0
    }
}

impl UnitOffset for Vec<f64> {
    fn unit_offset(&self) -> Self {
        let mut out = self.clone();
        if let Some(first) = out.first_mut() {
            *first += 1.0;
        }
        out
    }
}

impl UnitOffset for nalgebra::DVector<f64> {
    fn unit_offset(&self) -> Self {
        let mut out = self.clone();
        if !out.is_empty() {
            out[0] += 1.0;
        }
        out
    }
}

/// [`contraction_fixed_point_from`] with the second start derived from the
/// first by a unit-norm offset along the first coordinate.
pub fn contraction_fixed_point<S, F, M>(
    step: F,
    schedule: &EventSchedule,
    start: S,
    metric: M,
    policy: &StabilizationPolicy,
) -> Result<IterationReport<S>, FixpointError>
where
    S: Clone + UnitOffset,
    F: Fn(&S) -> S,
    M: Fn(&S, &S) -> f64,
{
    let second = start.unit_offset();
    contraction_fixed_point_from(step, schedule, start, second, metric, policy)
}

/// Fixed point of a map declared contractive by `schedule`, with a
/// uniqueness check: the iteration is run from both start points and the two
/// limits must agree within `10 * tol_abs` (exact equality in exact mode).
///
/// A disagreement — including a second run that fails to stabilize although
/// the first one did — yields [`FixpointError::UniquenessCheckFailed`] and
/// signals that the contraction hypothesis is false for this map. The
/// schedule itself is evidence supplied by the caller; the iteration is
/// governed by the policy alone.
pub fn contraction_fixed_point_from<S, F, M>(
    step: F,
    schedule: &EventSchedule,
    start: S,
    second_start: S,
    metric: M,
    policy: &StabilizationPolicy,
) -> Result<IterationReport<S>, FixpointError>
where
    S: Clone,
    F: Fn(&S) -> S,
    M: Fn(&S, &S) -> f64,
{
    if schedule.is_empty() {
        return Err(FixpointError::EmptyInput("schedule"));
    }
    let primary = iterate_to_fixpoint(&step, start, &metric, policy)?;
    if !primary.converged {
        return Ok(primary);
    }
    let secondary = iterate_to_fixpoint(&step, second_start, &metric, policy)?;
    let tolerance = match policy.mode {
        ConvergenceMode::Exact => 0.0,
        ConvergenceMode::Numeric => 10.0 * policy.tol_abs,
    };
    let distance = metric(&primary.fixed_point, &secondary.fixed_point);
    if !secondary.converged || distance > tolerance {
        return Err(FixpointError::UniquenessCheckFailed { distance, tolerance });
    }
    Ok(primary)
}
