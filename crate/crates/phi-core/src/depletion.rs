//! Coupled intact/projected iteration `x_{n+1} = B(x_n + E s_n)` and its
//! quantitative gap bounds.
//!
//! Two copies of the same recursion run in lockstep on a shared stimulus
//! stream: the intact copy sees `E s_n`, the projected copy sees
//! `E P_F s_n` with the removed coordinates zeroed. Positivity of the
//! embedding and monotonicity of the update force the intact state to
//! dominate the projected one at every step, and the steady-state gap
//! admits explicit geometric-series lower bounds for periodic,
//! bounded-gap and density-constrained event streams. A declared
//! incremental bound `kappa` extends the linear bounds to nonlinear
//! updates by a comparison recursion.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fixpoint::{ConvergenceMode, StabilizationPolicy};

/// Numerical slack on the exact monotone-coupling inequality.
pub const COUPLING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DepletionError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("stimulus must be entrywise nonnegative: {0}")]
    NonPositiveStimulus(String),
    #[error("iteration produced a non-finite state at step {step}")]
    DivergedIteration { step: u64 },
    #[error("steady state differs from the closed form by {distance:e} (tolerance {tolerance:e})")]
    ClosedFormMismatch { distance: f64, tolerance: f64 },
    #[error("per-event gap fails the declared bound at step {step}, coordinate {coordinate}")]
    BoundHypothesisViolated { step: u64, coordinate: usize },
    #[error("update violates its declared incremental bound on probe {probe}")]
    KappaDeclarationViolated { probe: usize },
    #[error("tail estimate unreliable: {steps} steps but at least {required} required")]
    InsufficientTail { steps: u64, required: u64 },
    #[error("monotone coupling violated at step {step}: projected state exceeds intact state")]
    MonotoneCouplingViolated { step: u64 },
    #[error("operation requires a {expected} stimulus")]
    WrongStimulusKind { expected: &'static str },
    #[error("operation requires a {expected} update")]
    WrongUpdateKind { expected: &'static str },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A monotone state update supplied as a callable.
pub type UpdateFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// The update map `B`.
#[derive(Clone)]
pub enum UpdateRule {
    /// `B(z) = rho z` with `rho` in (0, 1).
    Linear { rho: f64 },
    /// A monotone map with a declared incremental lower bound
    /// `B(x + w) - B(x) >= kappa w`, `kappa` in (0, 1].
    Nonlinear { map: UpdateFn, kappa: f64 },
}

impl std::fmt::Debug for UpdateRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpdateRule::Linear { rho } => f.debug_struct("Linear").field("rho", rho).finish(),
            UpdateRule::Nonlinear { kappa, .. } => {
                f.debug_struct("Nonlinear").field("kappa", kappa).finish()
            }
        }
    }
}

impl UpdateRule {
    pub fn linear(rho: f64) -> Result<Self, DepletionError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(DepletionError::InvalidConfig(format!(
                "rho must lie strictly in (0, 1), got {rho}"
            )));
        }
        Ok(UpdateRule::Linear { rho })
    }

    pub fn nonlinear<F>(map: F, kappa: f64) -> Result<Self, DepletionError>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(DepletionError::InvalidConfig(format!(
                "kappa must lie in (0, 1], got {kappa}"
            )));
        }
        Ok(UpdateRule::Nonlinear { map: Arc::new(map), kappa })
    }

    /// `B(z) = rho z + gain tanh(z)` componentwise; increments are at least
    /// `rho w`, so `kappa = rho` is a valid declaration.
    pub fn tanh_gain(rho: f64, gain: f64, kappa: f64) -> Result<Self, DepletionError> {
        if !(rho > 0.0 && rho < 1.0) || gain.is_nan() || gain < 0.0 || rho + gain >= 1.0 {
            return Err(DepletionError::InvalidConfig(format!(
                "tanh update needs rho in (0,1), gain >= 0, rho + gain < 1; got rho={rho} gain={gain}"
            )));
        }
        Self::nonlinear(move |z| z.map(|x| rho * x + gain * x.tanh()), kappa)
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            UpdateRule::Linear { rho } => z * *rho,
            UpdateRule::Nonlinear { map, .. } => map(z),
        }
    }
}

/// Stimulus stream specification. Event kinds deliver `base + delta * event`
/// at event steps and `base` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StimulusSpec {
    Constant { base: Vec<f64> },
    Periodic { base: Vec<f64>, event: Vec<f64>, delta: f64, period: u64 },
    Bernoulli { base: Vec<f64>, event: Vec<f64>, delta: f64, p: f64, seed: u64 },
    BoundedGap { base: Vec<f64>, event: Vec<f64>, delta: f64, max_gap: u64, seed: u64 },
}

impl StimulusSpec {
    fn validate(&self, dim: usize) -> Result<(), DepletionError> {
        let check_vec = |v: &[f64], name: &str| -> Result<(), DepletionError> {
            if v.len() != dim {
                return Err(DepletionError::InvalidConfig(format!(
                    "{name} has length {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| x.is_nan() || *x < 0.0 || !x.is_finite()) {
                return Err(DepletionError::NonPositiveStimulus(format!(
                    "{name} must be entrywise nonnegative and finite"
                )));
            }
            Ok(())
        };
        let check_delta = |delta: f64| -> Result<(), DepletionError> {
            if delta.is_nan() || delta < 0.0 || !delta.is_finite() {
                return Err(DepletionError::InvalidConfig(format!(
                    "delta must be a nonnegative real, got {delta}"
                )));
            }
            Ok(())
        };
        match self {
            StimulusSpec::Constant { base } => check_vec(base, "base"),
            StimulusSpec::Periodic { base, event, delta, period } => {
                check_vec(base, "base")?;
                check_vec(event, "event")?;
                check_delta(*delta)?;
                if *period == 0 {
                    return Err(DepletionError::InvalidConfig("period must be >= 1".into()));
                }
                Ok(())
            }
            StimulusSpec::Bernoulli { base, event, delta, p, .. } => {
                check_vec(base, "base")?;
                check_vec(event, "event")?;
                check_delta(*delta)?;
                if !(*p >= 0.0 && *p <= 1.0) {
                    return Err(DepletionError::InvalidConfig(format!(
                        "event probability must lie in [0, 1], got {p}"
                    )));
                }
                Ok(())
            }
            StimulusSpec::BoundedGap { base, event, delta, .. } => {
                check_vec(base, "base")?;
                check_vec(event, "event")?;
                check_delta(*delta)
            }
        }
    }

    fn base(&self) -> &[f64] {
        match self {
            StimulusSpec::Constant { base }
            | StimulusSpec::Periodic { base, .. }
            | StimulusSpec::Bernoulli { base, .. }
            | StimulusSpec::BoundedGap { base, .. } => base,
        }
    }

    fn event_part(&self) -> Option<(&[f64], f64)> {
        match self {
            StimulusSpec::Constant { .. } => None,
            StimulusSpec::Periodic { event, delta, .. }
            | StimulusSpec::Bernoulli { event, delta, .. }
            | StimulusSpec::BoundedGap { event, delta, .. } => Some((event, *delta)),
        }
    }

    /// Realize the event indicator for `steps` steps. Deterministic: the
    /// random kinds derive their stream from the embedded (or overridden)
    /// seed.
    fn realize_events(&self, steps: u64, seed_override: Option<u64>) -> Vec<bool> {
        match self {
            StimulusSpec::Constant { .. } => vec![false; steps as usize],
            StimulusSpec::Periodic { period, .. } => {
                (0..steps).map(|t| t % period == 0).collect()
            }
            StimulusSpec::Bernoulli { p, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_override.unwrap_or(*seed));
                (0..steps).map(|_| rng.gen_bool(*p)).collect()
            }
            StimulusSpec::BoundedGap { max_gap, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_override.unwrap_or(*seed));
                let mut events = vec![false; steps as usize];
                let mut t = 0u64;
                while t < steps {
                    events[t as usize] = true;
                    t += rng.gen_range(1..=max_gap + 1);
                }
                events
            }
        }
    }
}

/// Full model configuration: dimension, embedding, removed set, update,
/// utility weights and stimulus.
#[derive(Debug, Clone)]
pub struct DepletionConfig {
    dim: usize,
    embedding: DMatrix<f64>,
    removed: Vec<usize>,
    update: UpdateRule,
    weights: Vec<f64>,
    stimulus: StimulusSpec,
}

impl DepletionConfig {
    pub fn new(
        dim: usize,
        embedding: DMatrix<f64>,
        removed: Vec<usize>,
        update: UpdateRule,
        weights: Vec<f64>,
        stimulus: StimulusSpec,
    ) -> Result<Self, DepletionError> {
        if dim == 0 {
            return Err(DepletionError::InvalidConfig("dimension must be >= 1".into()));
        }
        if embedding.nrows() != dim || embedding.ncols() != dim {
            return Err(DepletionError::InvalidConfig(format!(
                "embedding is {}x{}, expected {dim}x{dim}",
                embedding.nrows(),
                embedding.ncols()
            )));
        }
        if embedding.iter().any(|x| x.is_nan() || *x < 0.0 || !x.is_finite()) {
            return Err(DepletionError::InvalidConfig(
                "embedding must be entrywise nonnegative and finite".into(),
            ));
        }
        let mut removed = removed;
        removed.sort_unstable();
        removed.dedup();
        for &i in &removed {
            if i >= dim {
                return Err(DepletionError::IndexOutOfRange { index: i, dim });
            }
        }
        if weights.len() != dim {
            return Err(DepletionError::InvalidConfig(format!(
                "weights have length {}, expected {dim}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| w.is_nan() || *w < 0.0 || !w.is_finite()) {
            return Err(DepletionError::InvalidConfig(
                "weights must be entrywise nonnegative and finite".into(),
            ));
        }
        stimulus.validate(dim)?;
        Ok(Self { dim, embedding, removed, update, weights, stimulus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.embedding
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn update(&self) -> &UpdateRule {
        &self.update
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn stimulus(&self) -> &StimulusSpec {
        &self.stimulus
    }

    /// Some embedding column indexed by the removed set is nonzero, i.e.
    /// the embedding can see stimulation on the removed coordinates.
    pub fn is_f_detectable(&self) -> bool {
        self.removed
            .iter()
            .any(|&j| (0..self.dim).any(|i| self.embedding[(i, j)] > 0.0))
    }

    pub fn weights_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }

    fn rho(&self) -> Result<f64, DepletionError> {
        match &self.update {
            UpdateRule::Linear { rho } => Ok(*rho),
            UpdateRule::Nonlinear { .. } => {
                Err(DepletionError::WrongUpdateKind { expected: "linear" })
            }
        }
    }

    /// Claimed per-event gap direction in embedded space: `E event`.
    fn embedded_event(&self) -> Option<DVector<f64>> {
        self.stimulus.event_part().map(|(event, _)| {
            &self.embedding * DVector::from_column_slice(event)
        })
    }

    /// Parse the flat key-value config format. Keys: `dim`, `embedding`
    /// (`identity` or `;`-separated rows), `removed` (indices or `none`),
    /// `update` (`linear <rho>` or `tanh <rho> <gain> <kappa>`), `weights`,
    /// and the `stimulus.*` block (`kind`, `base`, `event`, `delta`,
    /// `period`, `p`, `max_gap`, `seed`).
    pub fn parse(text: &str) -> Result<Self, DepletionError> {
        let mut fields: std::collections::BTreeMap<String, (usize, String)> =
            std::collections::BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| DepletionError::Parse {
                line: line_no,
                message: "expected `key = value`".into(),
            })?;
            fields.insert(key.trim().to_string(), (line_no, value.trim().to_string()));
        }
        let take = |fields: &std::collections::BTreeMap<String, (usize, String)>,
                    key: &str|
         -> Result<(usize, String), DepletionError> {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| DepletionError::Parse {
                    line: 0,
                    message: format!("missing required key `{key}`"),
                })
        };
        let parse_f64 = |line: usize, tok: &str| -> Result<f64, DepletionError> {
            tok.parse().map_err(|_| DepletionError::Parse {
                line,
                message: format!("invalid real `{tok}`"),
            })
        };
        let parse_u64 = |line: usize, tok: &str| -> Result<u64, DepletionError> {
            tok.parse().map_err(|_| DepletionError::Parse {
                line,
                message: format!("invalid integer `{tok}`"),
            })
        };
        let parse_vec = |line: usize, s: &str| -> Result<Vec<f64>, DepletionError> {
            s.split_whitespace().map(|t| parse_f64(line, t)).collect()
        };

        let (line, dim_s) = take(&fields, "dim")?;
        let dim = parse_u64(line, &dim_s)? as usize;

        let (line, emb_s) = take(&fields, "embedding")?;
        let embedding = if emb_s == "identity" {
            DMatrix::identity(dim, dim)
        } else {
            let rows: Vec<Vec<f64>> = emb_s
                .split(';')
                .map(|r| parse_vec(line, r))
                .collect::<Result<_, _>>()?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(DepletionError::Parse {
                    line,
                    message: format!("embedding must be {dim} rows of {dim} entries"),
                });
            }
            DMatrix::from_fn(dim, dim, |r, c| rows[r][c])
        };

        let removed = match fields.get("removed") {
            None => Vec::new(),
            Some((_, v)) if v == "none" || v.is_empty() => Vec::new(),
            Some((line, v)) => v
                .split_whitespace()
                .map(|t| parse_u64(*line, t).map(|x| x as usize))
                .collect::<Result<_, _>>()?,
        };

        let (line, upd_s) = take(&fields, "update")?;
        let upd_tokens: Vec<&str> = upd_s.split_whitespace().collect();
        let update = match upd_tokens.as_slice() {
            ["linear", rho] => UpdateRule::linear(parse_f64(line, rho)?),
            ["tanh", rho, gain, kappa] => UpdateRule::tanh_gain(
                parse_f64(line, rho)?,
                parse_f64(line, gain)?,
                parse_f64(line, kappa)?,
            ),
            _ => {
                return Err(DepletionError::Parse {
                    line,
                    message: format!(
                        "update must be `linear <rho>` or `tanh <rho> <gain> <kappa>`, got `{upd_s}`"
                    ),
                })
            }
        }
        .map_err(|e| DepletionError::Parse { line, message: e.to_string() })?;

        let (line, w_s) = take(&fields, "weights")?;
        let weights = parse_vec(line, &w_s)?;

        let (kind_line, kind) = take(&fields, "stimulus.kind")?;
        let (line, base_s) = take(&fields, "stimulus.base")?;
        let base = parse_vec(line, &base_s)?;
        let event_part = |fields: &std::collections::BTreeMap<String, (usize, String)>|
         -> Result<(Vec<f64>, f64), DepletionError> {
            let (line, e_s) = take(fields, "stimulus.event")?;
            let event = parse_vec(line, &e_s)?;
            let (line, d_s) = take(fields, "stimulus.delta")?;
            let delta = parse_f64(line, &d_s)?;
            Ok((event, delta))
        };
        let seed = match fields.get("stimulus.seed") {
            Some((line, v)) => parse_u64(*line, v)?,
            None => 0,
        };
        let stimulus = match kind.as_str() {
            "constant" => StimulusSpec::Constant { base },
            "periodic" => {
                let (event, delta) = event_part(&fields)?;
                let (line, m_s) = take(&fields, "stimulus.period")?;
                StimulusSpec::Periodic { base, event, delta, period: parse_u64(line, &m_s)? }
            }
            "bernoulli" => {
                let (event, delta) = event_part(&fields)?;
                let (line, p_s) = take(&fields, "stimulus.p")?;
                StimulusSpec::Bernoulli { base, event, delta, p: parse_f64(line, &p_s)?, seed }
            }
            "boundedgap" => {
                let (event, delta) = event_part(&fields)?;
                let (line, g_s) = take(&fields, "stimulus.max_gap")?;
                StimulusSpec::BoundedGap {
                    base,
                    event,
                    delta,
                    max_gap: parse_u64(line, &g_s)?,
                    seed,
                }
            }
            other => {
                return Err(DepletionError::Parse {
                    line: kind_line,
                    message: format!(
                        "stimulus.kind must be constant|periodic|bernoulli|boundedgap, got `{other}`"
                    ),
                })
            }
        };

        Self::new(dim, embedding, removed, update, weights, stimulus)
            .map_err(|e| DepletionError::Parse { line: 0, message: e.to_string() })
    }
}

/// Zero the removed coordinates of a stimulus vector.
pub fn project_f(s: &[f64], removed_set: &[usize]) -> Result<Vec<f64>, DepletionError> {
    let mut out = s.to_vec();
    for &i in removed_set {
        if i >= out.len() {
            return Err(DepletionError::IndexOutOfRange { index: i, dim: out.len() });
        }
        out[i] = 0.0;
    }
    Ok(out)
}

/// Which tail statistic backs a reported bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailStatistic {
    /// Utility gap measured right after the last event (periodic bounds).
    PostEventGap,
    /// Minimum of the l1 gap over the tail half (bounded-gap liminf bound).
    TailMin,
    /// Mean of the l1 gap over the tail half (density bound; a finite run
    /// cannot certify a liminf, so the mean is the honest tail estimate).
    TailMean,
}

/// Uniform result record of a coupled run, with optional bound comparison.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub intact_fixed: Vec<f64>,
    pub circ_fixed: Vec<f64>,
    pub gap_vector: Vec<f64>,
    pub utility_gap: f64,
    pub bound_value: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub tail_statistic: Option<TailStatistic>,
    pub tail_estimate: Option<f64>,
    pub realized_density: Option<f64>,
    /// Set when the tail estimate sits within 5% of the bound.
    pub near_bound: Option<bool>,
    pub steps_run: u64,
}

struct Lockstep {
    intact: DVector<f64>,
    circ: DVector<f64>,
    post_event: Option<(DVector<f64>, DVector<f64>)>,
    gap_l1: Vec<f64>,
    events: Vec<bool>,
    steps_run: u64,
}

/// Advance both recursions from zero under a shared stimulus realization.
///
/// `claimed_gap`, when given, is the vector `delta * E event`; each event's
/// realized embedded gap `E s_t - E P_F s_t` must dominate it entrywise.
/// `early_stop` halts a constant-stimulus run once both step residuals fall
/// below the policy threshold.
fn run_lockstep(
    config: &DepletionConfig,
    steps: u64,
    seed_override: Option<u64>,
    claimed_gap: Option<&DVector<f64>>,
    early_stop: Option<&StabilizationPolicy>,
) -> Result<Lockstep, DepletionError> {
    let dim = config.dim;
    let events = config.stimulus.realize_events(steps, seed_override);
    let base = DVector::from_column_slice(config.stimulus.base());
    let base_projected =
        DVector::from_column_slice(&project_f(config.stimulus.base(), &config.removed)?);
    let (bump, bump_projected) = match config.stimulus.event_part() {
        Some((event, delta)) => {
            let e = DVector::from_column_slice(event) * delta;
            let p = DVector::from_column_slice(&project_f(event, &config.removed)?) * delta;
            (e, p)
        }
        None => (DVector::zeros(dim), DVector::zeros(dim)),
    };

    let embed = |s: &DVector<f64>| &config.embedding * s;
    let mut x = DVector::zeros(dim);
    let mut y = DVector::zeros(dim);
    let mut post_event = None;
    let mut gap_l1 = Vec::with_capacity(steps as usize);
    let mut steps_run = 0u64;

    for (t, &is_event) in events.iter().enumerate() {
        let s = if is_event { &base + &bump } else { base.clone() };
        let s_projected =
            if is_event { &base_projected + &bump_projected } else { base_projected.clone() };
        let u_intact = embed(&s);
        let u_circ = embed(&s_projected);
        if is_event {
            if let Some(claim) = claimed_gap {
                let realized = &u_intact - &u_circ;
                for i in 0..dim {
                    if realized[i] < claim[i] - COUPLING_TOL {
                        return Err(DepletionError::BoundHypothesisViolated {
                            step: t as u64,
                            coordinate: i,
                        });
                    }
                }
            }
        }
        let next_x = config.update.apply(&(&x + u_intact));
        let next_y = config.update.apply(&(&y + u_circ));
        if next_x.iter().any(|v| !v.is_finite()) || next_y.iter().any(|v| !v.is_finite()) {
            return Err(DepletionError::DivergedIteration { step: t as u64 });
        }
        for i in 0..dim {
            if next_x[i] < next_y[i] - COUPLING_TOL {
                return Err(DepletionError::MonotoneCouplingViolated { step: t as u64 });
            }
        }
        gap_l1.push((&next_x - &next_y).iter().map(|v| v.abs()).sum());
        if is_event {
            post_event = Some((next_x.clone(), next_y.clone()));
        }
        let (res_x, res_y) = (
            (&next_x - &x).iter().map(|v| v.abs()).fold(0.0f64, f64::max),
            (&next_y - &y).iter().map(|v| v.abs()).fold(0.0f64, f64::max),
        );
        x = next_x;
        y = next_y;
        steps_run = t as u64 + 1;
        if let Some(policy) = early_stop {
            let scale = x.iter().map(|v| v.abs()).sum::<f64>();
            let threshold = match policy.mode {
                ConvergenceMode::Exact => 0.0,
                ConvergenceMode::Numeric => policy.tol_abs + policy.tol_rel * scale,
            };
            if res_x <= threshold && res_y <= threshold {
                break;
            }
        }
    }
    Ok(Lockstep { intact: x, circ: y, post_event, gap_l1, events, steps_run })
}

fn gap_report_from_states(
    config: &DepletionConfig,
    intact: &DVector<f64>,
    circ: &DVector<f64>,
    steps_run: u64,
) -> Result<GapReport, DepletionError> {
    let gap = intact - circ;
    if gap.iter().any(|v| *v < -1e-9) {
        return Err(DepletionError::MonotoneCouplingViolated { step: steps_run });
    }
    let utility_gap = gap
        .iter()
        .zip(&config.weights)
        .map(|(g, w)| g * w)
        .sum();
    Ok(GapReport {
        intact_fixed: intact.iter().copied().collect(),
        circ_fixed: circ.iter().copied().collect(),
        gap_vector: gap.iter().copied().collect(),
        utility_gap,
        bound_value: None,
        bound_satisfied: None,
        tail_statistic: None,
        tail_estimate: None,
        realized_density: None,
        near_bound: None,
        steps_run,
    })
}

/// Run the coupled pair and report steady states and the gap.
///
/// For a linear update with constant stimulus the limit has the closed form
/// `(rho / (1 - rho)) E s`; the run is verified against it within 1e-9 and
/// may stop early once the policy accepts both step residuals. Event-driven
/// stimuli always run the full `steps`.
pub fn run_pair(
    config: &DepletionConfig,
    steps: u64,
    policy: &StabilizationPolicy,
) -> Result<GapReport, DepletionError> {
    if steps == 0 {
        return Err(DepletionError::InvalidConfig("steps must be >= 1".into()));
    }
    let constant = matches!(config.stimulus, StimulusSpec::Constant { .. });
    let early = if constant { Some(policy) } else { None };
    let run = run_lockstep(config, steps, None, None, early)?;
    if constant {
        if let UpdateRule::Linear { rho } = config.update {
            let s = DVector::from_column_slice(config.stimulus.base());
            let s_projected =
                DVector::from_column_slice(&project_f(config.stimulus.base(), &config.removed)?);
            let factor = rho / (1.0 - rho);
            let intact_closed = (&config.embedding * s) * factor;
            let circ_closed = (&config.embedding * s_projected) * factor;
            let d1 = (&run.intact - &intact_closed)
                .iter()
                .map(|v| v.abs())
                .fold(0.0f64, f64::max);
            let d2 =
                (&run.circ - &circ_closed).iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            let distance = d1.max(d2);
            if distance > 1e-9 {
                return Err(DepletionError::ClosedFormMismatch { distance, tolerance: 1e-9 });
            }
        }
    }
    gap_report_from_states(config, &run.intact, &run.circ, run.steps_run)
}

fn periodic_bound_report(
    config: &DepletionConfig,
    steps: u64,
    factor: f64,
    tolerance: f64,
) -> Result<GapReport, DepletionError> {
    let StimulusSpec::Periodic { delta, period, .. } = config.stimulus else {
        return Err(DepletionError::WrongStimulusKind { expected: "periodic" });
    };
    if steps == 0 {
        return Err(DepletionError::InvalidConfig("steps must be >= 1".into()));
    }
    let embedded_event = config.embedded_event().expect("periodic stimulus has an event");
    let claimed = &embedded_event * delta;
    let run = run_lockstep(config, steps, None, Some(&claimed), None)?;
    let (px, py) = run.post_event.ok_or(DepletionError::InsufficientTail {
        steps,
        required: period,
    })?;
    let mut report = gap_report_from_states(config, &px, &py, run.steps_run)?;
    let weighted_direction: f64 = embedded_event
        .iter()
        .zip(&config.weights)
        .map(|(v, w)| v * w)
        .sum();
    let bound = factor / (1.0 - factor.powi(period as i32)) * delta * weighted_direction;
    report.bound_value = Some(bound);
    report.bound_satisfied = Some(report.utility_gap >= bound - tolerance);
    report.tail_statistic = Some(TailStatistic::PostEventGap);
    report.tail_estimate = Some(report.utility_gap);
    report.near_bound = Some((report.utility_gap - bound).abs() <= 0.05 * bound.max(1e-12));
    Ok(report)
}

/// Periodic-event lower bound for a linear update: the utility gap measured
/// just after the last event dominates
/// `rho / (1 - rho^m) * delta * <w, E event>` up to 1e-9.
///
/// Each event's realized embedded gap is checked against the claimed
/// direction `delta * E event`; a shortfall reports
/// [`DepletionError::BoundHypothesisViolated`].
pub fn quantified_gap_bound(
    config: &DepletionConfig,
    steps: u64,
) -> Result<GapReport, DepletionError> {
    let rho = config.rho()?;
    periodic_bound_report(config, steps, rho, 1e-9)
}

/// Density-constrained lower bounds for a linear update.
///
/// Bounded-gap streams compare the minimum tail-half l1 gap against
/// `rho^{G+1} / (1 - rho^{G+1}) * delta * ||E event||_1`. Bernoulli streams
/// report the density bound `rho / (1 - rho) * D * delta * ||E event||_1`
/// with `D` the realized tail-half event density, compared against the
/// tail-half mean gap: a finite run cannot certify a liminf, so this is an
/// asymptotic estimate with a 0.02 slack.
pub fn density_gap_bound(
    config: &DepletionConfig,
    steps: u64,
) -> Result<GapReport, DepletionError> {
    let rho = config.rho()?;
    let (delta, kind_bounded, max_gap) = match &config.stimulus {
        StimulusSpec::BoundedGap { delta, max_gap, .. } => (*delta, true, *max_gap),
        StimulusSpec::Bernoulli { delta, .. } => (*delta, false, 0),
        _ => {
            return Err(DepletionError::WrongStimulusKind {
                expected: "bounded-gap or bernoulli",
            })
        }
    };
    let required = if kind_bounded { (10 * (max_gap + 1)).max(1000) } else { 1000 };
    if steps < required {
        return Err(DepletionError::InsufficientTail { steps, required });
    }
    let embedded_event = config.embedded_event().expect("event stimulus");
    let direction_l1: f64 = embedded_event.iter().map(|v| v.abs()).sum();
    let claimed = &embedded_event * delta;
    // The per-event hypothesis is part of both bounds' premises.
    let run = run_lockstep(config, steps, None, Some(&claimed), None)?;
    let tail_start = (steps / 2) as usize;
    let tail = &run.gap_l1[tail_start..];
    let mut report = gap_report_from_states(config, &run.intact, &run.circ, run.steps_run)?;
    if kind_bounded {
        let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let bound = rho.powi(max_gap as i32 + 1) / (1.0 - rho.powi(max_gap as i32 + 1))
            * delta
            * direction_l1;
        report.bound_value = Some(bound);
        report.bound_satisfied = Some(tail_min >= bound - 1e-6);
        report.tail_statistic = Some(TailStatistic::TailMin);
        report.tail_estimate = Some(tail_min);
        report.near_bound = Some((tail_min - bound).abs() <= 0.05 * bound.max(1e-12));
    } else {
        let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let tail_events =
            run.events[tail_start..].iter().filter(|e| **e).count() as f64;
        let density = tail_events / tail.len() as f64;
        let bound = rho / (1.0 - rho) * density * delta * direction_l1;
        report.bound_value = Some(bound);
        report.bound_satisfied = Some(tail_mean >= bound - 0.02);
        report.tail_statistic = Some(TailStatistic::TailMean);
        report.tail_estimate = Some(tail_mean);
        report.realized_density = Some(density);
        report.near_bound = Some((tail_mean - bound).abs() <= 0.05 * bound.max(1e-12));
    }
    Ok(report)
}

/// Periodic-event bound for a nonlinear update with declared incremental
/// bound `kappa`: the comparison recursion replaces `rho` by `kappa` in the
/// linear bound. Before the run, the declaration is spot-checked on 100
/// seeded probe pairs; a probe with `B(x + w) - B(x)` short of `kappa w`
/// reports [`DepletionError::KappaDeclarationViolated`].
pub fn nonlinear_kappa_bound(
    config: &DepletionConfig,
    steps: u64,
) -> Result<GapReport, DepletionError> {
    let UpdateRule::Nonlinear { map, kappa } = &config.update else {
        return Err(DepletionError::WrongUpdateKind { expected: "nonlinear" });
    };
    let StimulusSpec::Periodic { delta, .. } = config.stimulus else {
        return Err(DepletionError::WrongStimulusKind { expected: "periodic" });
    };
    // Probe scale: generously past the kappa-comparison steady state.
    let peak = {
        let base = DVector::from_column_slice(config.stimulus.base());
        let event = config.embedded_event().expect("periodic stimulus has an event");
        let drive = &config.embedding * base + event * delta;
        drive.iter().map(|v| v.abs()).sum::<f64>() / (1.0 - kappa).max(1e-3) + 1.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b61_7070_6121);
    for probe in 0..100 {
        let x = DVector::from_fn(config.dim, |_, _| rng.gen_range(0.0..peak));
        let w = DVector::from_fn(config.dim, |_, _| rng.gen_range(0.0..1.0));
        let lhs = map(&(&x + &w)) - map(&x);
        for i in 0..config.dim {
            if lhs[i] < kappa * w[i] - 1e-9 {
                return Err(DepletionError::KappaDeclarationViolated { probe });
            }
        }
    }
    periodic_bound_report(config, steps, *kappa, 1e-9)
}

/// Final states of a stochastic shared-stream run.
#[derive(Debug, Clone, Serialize)]
pub struct StochasticDemo {
    pub final_intact: Vec<f64>,
    pub final_circ: Vec<f64>,
    /// Componentwise `intact >= circ` held at every step (a violation
    /// aborts the run instead).
    pub dominance_every_step: bool,
    pub realized_event_fraction: f64,
}

/// Shared-stimulus stochastic run: both recursions advance in lockstep on
/// the same Bernoulli stream seeded by `seed`, and the intact state must
/// dominate the projected one componentwise at every step.
pub fn stochastic_demo(
    config: &DepletionConfig,
    steps: u64,
    seed: u64,
) -> Result<StochasticDemo, DepletionError> {
    if !matches!(config.stimulus, StimulusSpec::Bernoulli { .. }) {
        return Err(DepletionError::WrongStimulusKind { expected: "bernoulli" });
    }
    if steps == 0 {
        return Err(DepletionError::InvalidConfig("steps must be >= 1".into()));
    }
    let run = run_lockstep(config, steps, Some(seed), None, None)?;
    let event_count = run.events.iter().filter(|e| **e).count();
    Ok(StochasticDemo {
        final_intact: run.intact.iter().copied().collect(),
        final_circ: run.circ.iter().copied().collect(),
        dominance_every_step: true,
        realized_event_fraction: event_count as f64 / steps as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_config() -> DepletionConfig {
        DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Constant { base: vec![1.0, 0.5] },
        )
        .unwrap()
    }

    #[test]
    fn project_f_cases() {
        assert_eq!(project_f(&[1.0, 0.5], &[1]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_f(&[1.0, 0.5], &[]).unwrap(), vec![1.0, 0.5]);
        assert_eq!(project_f(&[0.0, 0.0], &[0, 1]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            project_f(&[1.0], &[3]),
            Err(DepletionError::IndexOutOfRange { index: 3, dim: 1 })
        ));
    }

    #[test]
    fn finite_dimensional_witness() {
        // E = I, rho = 0.8, s = (1, 0.5), F removes the second coordinate:
        // intact (4, 2), projected (4, 0), gap (0, 2), utility gap 2.
        let report =
            run_pair(&example_config(), 2000, &StabilizationPolicy::default()).unwrap();
        assert!((report.intact_fixed[0] - 4.0).abs() < 1e-9);
        assert!((report.intact_fixed[1] - 2.0).abs() < 1e-9);
        assert!((report.circ_fixed[0] - 4.0).abs() < 1e-9);
        assert!(report.circ_fixed[1].abs() < 1e-9);
        assert!((report.gap_vector[1] - 2.0).abs() < 1e-9);
        assert!((report.utility_gap - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_removed_set_gives_zero_gap() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Constant { base: vec![1.0, 0.5] },
        )
        .unwrap();
        let report = run_pair(&config, 500, &StabilizationPolicy::default()).unwrap();
        assert_eq!(report.gap_vector, vec![0.0, 0.0]);
        assert_eq!(report.utility_gap, 0.0);
    }

    #[test]
    fn blind_embedding_counterexample_gives_exactly_zero_gap() {
        // The embedding ignores the removed coordinate entirely, so both
        // trajectories coincide bit for bit despite a nonempty removed set.
        let embedding = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.0]);
        let config = DepletionConfig::new(
            2,
            embedding,
            vec![1],
            UpdateRule::linear(0.5).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Bernoulli {
                base: vec![1.0, 0.5],
                event: vec![0.0, 1.0],
                delta: 1.0,
                p: 0.4,
                seed: 9,
            },
        )
        .unwrap();
        assert!(!config.is_f_detectable());
        let report = run_pair(&config, 10_000, &StabilizationPolicy::default()).unwrap();
        assert_eq!(report.utility_gap, 0.0);
        assert_eq!(report.gap_vector, vec![0.0, 0.0]);
    }

    #[test]
    fn periodic_bound_every_step_is_exact_geometric_series() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Periodic {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 1.0,
                period: 1,
            },
        )
        .unwrap();
        let report = quantified_gap_bound(&config, 2000).unwrap();
        assert!((report.bound_value.unwrap() - 4.0).abs() < 1e-12);
        assert!((report.utility_gap - 4.0).abs() < 1e-9);
        assert_eq!(report.bound_satisfied, Some(true));
    }

    #[test]
    fn periodic_bound_period_two() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.5).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Periodic {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 1.0,
                period: 2,
            },
        )
        .unwrap();
        let report = quantified_gap_bound(&config, 2000).unwrap();
        let expected = 0.5 / (1.0 - 0.25);
        assert!((report.bound_value.unwrap() - expected).abs() < 1e-12);
        assert_eq!(report.bound_satisfied, Some(true));
        // Partial-sum oracle at the post-event phase: sum_k rho^(km+1) delta.
        let mut oracle = 0.0;
        let mut power = 0.5; // rho^1
        while power > 1e-18 {
            oracle += power;
            power *= 0.25; // rho^m
        }
        assert!((report.utility_gap - oracle).abs() < 1e-9);
    }

    #[test]
    fn degenerate_delta_zero_bound() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.7).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Periodic {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 0.0,
                period: 3,
            },
        )
        .unwrap();
        let report = quantified_gap_bound(&config, 1500).unwrap();
        assert_eq!(report.bound_value, Some(0.0));
        assert!(report.utility_gap >= 0.0);
        assert_eq!(report.bound_satisfied, Some(true));
    }

    #[test]
    fn off_removed_event_direction_violates_hypothesis() {
        // The event also stimulates the surviving coordinate, so the
        // realized embedded gap cannot dominate `delta * E event`.
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Periodic {
                base: vec![1.0, 0.0],
                event: vec![1.0, 1.0],
                delta: 1.0,
                period: 1,
            },
        )
        .unwrap();
        assert!(matches!(
            quantified_gap_bound(&config, 100),
            Err(DepletionError::BoundHypothesisViolated { coordinate: 0, .. })
        ));
    }

    #[test]
    fn bounded_gap_bound_holds_on_tail_minimum() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::BoundedGap {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 1.0,
                max_gap: 2,
                seed: 3,
            },
        )
        .unwrap();
        let report = density_gap_bound(&config, 6000).unwrap();
        let expected = 0.8f64.powi(3) / (1.0 - 0.8f64.powi(3));
        assert!((report.bound_value.unwrap() - expected).abs() < 1e-12);
        assert!(report.bound_satisfied.unwrap());
        assert_eq!(report.tail_statistic, Some(TailStatistic::TailMin));
    }

    #[test]
    fn bounded_gap_reduces_to_periodic_at_zero_gap() {
        // G = 0 means an event every step; the bound collapses to the
        // every-step geometric series rho/(1-rho) delta.
        let config = DepletionConfig::new(
            1,
            DMatrix::identity(1, 1),
            vec![0],
            UpdateRule::linear(0.6).unwrap(),
            vec![1.0],
            StimulusSpec::BoundedGap {
                base: vec![0.0],
                event: vec![1.0],
                delta: 1.0,
                max_gap: 0,
                seed: 1,
            },
        )
        .unwrap();
        let report = density_gap_bound(&config, 2000).unwrap();
        let expected = 0.6 / (1.0 - 0.6);
        assert!((report.bound_value.unwrap() - expected).abs() < 1e-12);
        assert!(report.bound_satisfied.unwrap());
        assert!((report.tail_estimate.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn bernoulli_density_bound_with_realized_density() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Bernoulli {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 1.0,
                p: 0.3,
                seed: 0,
            },
        )
        .unwrap();
        let report = density_gap_bound(&config, 20_000).unwrap();
        let density = report.realized_density.unwrap();
        assert!((0.27..=0.33).contains(&density));
        assert!(report.bound_satisfied.unwrap());
        assert_eq!(report.tail_statistic, Some(TailStatistic::TailMean));
    }

    #[test]
    fn insufficient_tail_is_refused() {
        let config = DepletionConfig::new(
            1,
            DMatrix::identity(1, 1),
            vec![0],
            UpdateRule::linear(0.5).unwrap(),
            vec![1.0],
            StimulusSpec::Bernoulli {
                base: vec![0.0],
                event: vec![1.0],
                delta: 1.0,
                p: 0.5,
                seed: 0,
            },
        )
        .unwrap();
        assert!(matches!(
            density_gap_bound(&config, 500),
            Err(DepletionError::InsufficientTail { .. })
        ));
    }

    #[test]
    fn nonlinear_declared_linear_matches_linear_bound() {
        let stimulus = StimulusSpec::Periodic {
            base: vec![1.0, 0.0],
            event: vec![0.0, 1.0],
            delta: 1.0,
            period: 1,
        };
        let linear = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            stimulus.clone(),
        )
        .unwrap();
        let nonlinear = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::nonlinear(|z| z * 0.8, 0.8).unwrap(),
            vec![1.0, 1.0],
            stimulus,
        )
        .unwrap();
        let lb = quantified_gap_bound(&linear, 1000).unwrap();
        let nb = nonlinear_kappa_bound(&nonlinear, 1000).unwrap();
        assert!((lb.bound_value.unwrap() - nb.bound_value.unwrap()).abs() < 1e-12);
        assert!((lb.utility_gap - nb.utility_gap).abs() < 1e-12);
    }

    #[test]
    fn tanh_update_passes_probes_and_dominates_bound() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::tanh_gain(0.8, 0.1, 0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Periodic {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 1.0,
                period: 1,
            },
        )
        .unwrap();
        let report = nonlinear_kappa_bound(&config, 2000).unwrap();
        assert!(report.bound_satisfied.unwrap());
        assert!(report.utility_gap >= report.bound_value.unwrap() - 1e-9);
    }

    #[test]
    fn saturating_update_violates_kappa_declaration() {
        let cap = 1.0; // well below the intact steady state
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::nonlinear(move |z| z.map(|x| (0.8 * x).min(cap)), 0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Periodic {
                base: vec![1.0, 0.0],
                event: vec![0.0, 1.0],
                delta: 1.0,
                period: 1,
            },
        )
        .unwrap();
        assert!(matches!(
            nonlinear_kappa_bound(&config, 500),
            Err(DepletionError::KappaDeclarationViolated { .. })
        ));
    }

    #[test]
    fn stochastic_demo_shared_stream() {
        let config = DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![1],
            UpdateRule::linear(0.8).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Bernoulli {
                base: vec![1.0, 0.0],
                event: vec![0.0, 0.5],
                delta: 1.0,
                p: 0.3,
                seed: 0,
            },
        )
        .unwrap();
        let demo = stochastic_demo(&config, 20_000, 0).unwrap();
        assert!(demo.dominance_every_step);
        // The surviving coordinate is a plain geometric series to 4.
        assert!((demo.final_intact[0] - 4.0).abs() < 1e-9);
        assert!((demo.final_circ[0] - 4.0).abs() < 1e-9);
        assert!((demo.realized_event_fraction - 0.3).abs() < 0.03);
    }

    #[test]
    fn stochastic_demo_degenerate_probabilities() {
        let make = |p: f64| {
            DepletionConfig::new(
                2,
                DMatrix::identity(2, 2),
                vec![1],
                UpdateRule::linear(0.8).unwrap(),
                vec![1.0, 1.0],
                StimulusSpec::Bernoulli {
                    base: vec![1.0, 0.0],
                    event: vec![0.0, 0.5],
                    delta: 1.0,
                    p,
                    seed: 0,
                },
            )
            .unwrap()
        };
        // p = 0: no event ever fires, the two runs coincide.
        let demo = stochastic_demo(&make(0.0), 5000, 0).unwrap();
        assert_eq!(demo.final_intact, demo.final_circ);
        // p = 1: the constant-stream witness values (4, 2) / (4, 0).
        let demo = stochastic_demo(&make(1.0), 5000, 0).unwrap();
        assert!((demo.final_intact[0] - 4.0).abs() < 1e-9);
        assert!((demo.final_intact[1] - 2.0).abs() < 1e-9);
        assert!((demo.final_circ[1] - 0.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(UpdateRule::linear(1.0).is_err());
        assert!(UpdateRule::linear(0.0).is_err());
        assert!(UpdateRule::nonlinear(|z| z.clone(), 1.5).is_err());
        let bad_embedding = DMatrix::from_row_slice(2, 2, &[1.0, -0.1, 0.0, 1.0]);
        assert!(DepletionConfig::new(
            2,
            bad_embedding,
            vec![],
            UpdateRule::linear(0.5).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Constant { base: vec![0.0, 0.0] },
        )
        .is_err());
        assert!(DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![5],
            UpdateRule::linear(0.5).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Constant { base: vec![0.0, 0.0] },
        )
        .is_err());
        assert!(DepletionConfig::new(
            2,
            DMatrix::identity(2, 2),
            vec![],
            UpdateRule::linear(0.5).unwrap(),
            vec![1.0, 1.0],
            StimulusSpec::Constant { base: vec![-1.0, 0.0] },
        )
        .is_err());
    }

    #[test]
    fn config_text_round_trip() {
        let text = "\
# finite-dimensional witness
dim = 2
embedding = identity
removed = 1
update = linear 0.8
weights = 1 1
stimulus.kind = constant
stimulus.base = 1 0.5
";
        let config = DepletionConfig::parse(text).unwrap();
        assert_eq!(config.dim(), 2);
        assert_eq!(config.removed(), &[1]);
        let report = run_pair(&config, 2000, &StabilizationPolicy::default()).unwrap();
        assert!((report.utility_gap - 2.0).abs() < 1e-9);

        let periodic = "\
dim = 2
embedding = 1 0 ; 0 1
removed = 1
update = linear 0.8
weights = 1 1
stimulus.kind = periodic
stimulus.base = 1 0
stimulus.event = 0 1
stimulus.delta = 1
stimulus.period = 1
";
        let config = DepletionConfig::parse(periodic).unwrap();
        let report = quantified_gap_bound(&config, 2000).unwrap();
        assert!((report.bound_value.unwrap() - 4.0).abs() < 1e-12);

        assert!(matches!(
            DepletionConfig::parse("dim = x\n"),
            Err(DepletionError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            DepletionConfig::parse("dim = 2\n"),
            Err(DepletionError::Parse { .. })
        ));
    }
}
