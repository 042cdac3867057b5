//! Track runners: translate CLI flags into core calls and emit records.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use phi_core::depletion::{
    density_gap_bound, nonlinear_kappa_bound, quantified_gap_bound, run_pair, stochastic_demo,
    DepletionConfig, GapReport, StimulusSpec, StochasticDemo, UpdateRule,
};
use phi_core::fixpoint::{
    contraction_fixed_point_from, EventSchedule, IterationReport, StabilizationPolicy, Stage,
};
use phi_core::kernel::{stationary_distribution, Distribution, Kernel};
use phi_core::lattice::{least_fixed_point_from, lift, PowersetElement, SetValuedMap};
use phi_core::oml::{oml_fixed_point, OmlSystem, SubspaceProjection};
use phi_core::spectral::{
    parse_complex, riesz_projection, stabilize_normal, OperatorMatrix, ProjectionOperator,
    RieszContour, SpectralFilter,
};

use crate::inputs::{
    from_depletion, from_fixpoint, from_kernel, from_lattice, from_oml, from_spectral,
    parse_basis, parse_real_vector, read_file, require,
};
use crate::records::RecordSink;
use crate::{CliError, DemoArgs, RunArgs};

fn policy_from(args: &RunArgs, track: &str) -> Result<StabilizationPolicy, CliError> {
    let tol_abs = args.policy_tol.unwrap_or(1e-10);
    StabilizationPolicy::numeric(tol_abs, tol_abs / 100.0, args.max_iter.unwrap_or(100_000))
        .map_err(|e| from_fixpoint(track, e))
}

fn stage_label(stage: Stage) -> String {
    match stage {
        Stage::Finite(n) => format!("finite({n})"),
        Stage::Omega => "omega".to_string(),
    }
}

#[derive(Serialize)]
struct LatticeRecord {
    record: &'static str,
    n_states: usize,
    seed_state: usize,
    report: IterationReport<PowersetElement>,
}

pub fn run_lattice(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let path = require(args.map.as_ref(), "--map")?;
    let map = SetValuedMap::parse(&read_file(path)?).map_err(|e| from_lattice("lattice", e))?;
    let start = args.start.unwrap_or(0);
    if start >= map.n_states() {
        return Err(CliError::Precondition(format!(
            "[lattice] start state {start} out of range for {} states",
            map.n_states()
        )));
    }
    let seed = PowersetElement::singleton(map.n_states(), start);
    let report =
        least_fixed_point_from(&lift(&map), &seed).map_err(|e| from_lattice("lattice", e))?;
    sink.summary(format!(
        "lattice: least fixed point {} at stage {} ({} states)",
        report.fixed_point,
        stage_label(report.stage),
        map.n_states()
    ));
    sink.record(&LatticeRecord {
        record: "lattice_report",
        n_states: map.n_states(),
        seed_state: start,
        report,
    })
}

#[derive(Serialize)]
struct KernelRecord {
    record: &'static str,
    n_states: usize,
    report: IterationReport<Distribution>,
}

pub fn run_kernel(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let kernel = match (&args.kernel, args.p) {
        (Some(path), None) => {
            Kernel::parse(&read_file(path)?).map_err(|e| from_kernel("kernel", e))?
        }
        (None, Some(p)) => Kernel::toy(p).map_err(|e| from_kernel("kernel", e))?,
        _ => {
            return Err(CliError::Precondition(
                "[kernel] pass exactly one of --kernel <file> or --p <prob>".into(),
            ))
        }
    };
    let policy = policy_from(args, "kernel")?;
    let report =
        stationary_distribution(&kernel, &policy).map_err(|e| from_kernel("kernel", e))?;
    sink.summary(format!(
        "kernel: stationary {:?} at stage {}",
        report.fixed_point.probs(),
        stage_label(report.stage)
    ));
    sink.record(&KernelRecord {
        record: "kernel_report",
        n_states: kernel.n_states(),
        report,
    })
}

#[derive(Serialize)]
struct SpectralRecord {
    record: &'static str,
    beta: f64,
    contraction_rate: f64,
    observed_decay_ratio: Option<f64>,
    analytic_limit: ProjectionOperator,
    analytic_rank: usize,
    report: IterationReport<OperatorMatrix>,
}

pub fn run_spectral(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let path = require(args.matrix.as_ref(), "--matrix")?;
    let t = OperatorMatrix::parse(&read_file(path)?).map_err(|e| from_spectral("spectral", e))?;
    let filter = SpectralFilter::new(args.beta.unwrap_or(0.5))
        .map_err(|e| from_spectral("spectral", e))?;
    let policy = policy_from(args, "spectral")?;
    let outcome =
        stabilize_normal(&t, &filter, &policy).map_err(|e| from_spectral("spectral", e))?;
    if !outcome.report.converged {
        return Err(CliError::NotConverged(format!(
            "[spectral] filter powers did not reach the analytic limit in {} steps",
            policy.max_iter
        )));
    }
    sink.summary(format!(
        "spectral: stage {} after {} residuals, rank {} limit, rate {:.6}",
        stage_label(outcome.report.stage),
        outcome.report.residuals.len(),
        outcome.analytic_limit.rank(),
        outcome.contraction_rate
    ));
    sink.record(&SpectralRecord {
        record: "spectral_report",
        beta: filter.beta(),
        contraction_rate: outcome.contraction_rate,
        observed_decay_ratio: outcome.observed_decay_ratio(10),
        analytic_rank: outcome.analytic_limit.rank(),
        analytic_limit: outcome.analytic_limit,
        report: outcome.report,
    })
}

#[derive(Serialize)]
struct RieszRecord {
    record: &'static str,
    center: String,
    radius: f64,
    nodes: usize,
    rank: usize,
    orthogonal: bool,
    idempotency_defect: f64,
    doubled_node_drift: f64,
    projection: ProjectionOperator,
}

pub fn run_riesz(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let path = require(args.matrix.as_ref(), "--matrix")?;
    let t = OperatorMatrix::parse(&read_file(path)?).map_err(|e| from_spectral("riesz", e))?;
    let center = match &args.center {
        Some(tok) => parse_complex(tok)
            .ok_or_else(|| CliError::Parse(format!("[riesz] invalid complex token `{tok}`")))?,
        None => num_complex::Complex64::new(1.0, 0.0),
    };
    let nodes = args.nodes.unwrap_or(64);
    let contour = match args.radius {
        Some(radius) => RieszContour::new(center, radius, nodes),
        None => RieszContour::auto_around_one(&t),
    }
    .map_err(|e| from_spectral("riesz", e))?;
    let projection = riesz_projection(&t, &contour).map_err(|e| from_spectral("riesz", e))?;
    let doubled = RieszContour::new(contour.center(), contour.radius, contour.nodes * 2)
        .and_then(|c| riesz_projection(&t, &c))
        .map_err(|e| from_spectral("riesz", e))?;
    let drift =
        phi_core::linalg::frobenius(&(projection.entries() - doubled.entries()));
    sink.summary(format!(
        "riesz: rank {} projection, idempotency defect {:.3e}, node-doubling drift {:.3e}",
        projection.rank(),
        projection.idempotency_defect(),
        drift
    ));
    sink.record(&RieszRecord {
        record: "riesz_report",
        center: phi_core::spectral::format_complex(contour.center()),
        radius: contour.radius,
        nodes: contour.nodes,
        rank: projection.rank(),
        orthogonal: projection.is_orthogonal(),
        idempotency_defect: projection.idempotency_defect(),
        doubled_node_drift: drift,
        projection,
    })
}

#[derive(Serialize)]
struct OmlRecord {
    record: &'static str,
    ambient_dim: usize,
    fixed_rank: usize,
    report: IterationReport<SubspaceProjection>,
}

pub fn run_oml(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let v_path = require(args.matrix.as_ref(), "--matrix (the unitary V)")?;
    let q_path = require(args.q_basis.as_ref(), "--q-basis")?;
    let p0_path = require(args.p0_basis.as_ref(), "--p0-basis")?;
    let v = OperatorMatrix::parse(&read_file(v_path)?).map_err(|e| from_spectral("oml", e))?;
    // Basis files may contain any spanning set; they are orthonormalized.
    let q = SubspaceProjection::span_of(&parse_basis(&read_file(q_path)?)?);
    let p0 = SubspaceProjection::span_of(&parse_basis(&read_file(p0_path)?)?);
    let system =
        OmlSystem::new(v.entries().clone(), q, p0).map_err(|e| from_oml("oml", e))?;
    let policy = policy_from(args, "oml")?;
    let report = oml_fixed_point(&system, &policy).map_err(|e| from_oml("oml", e))?;
    sink.summary(format!(
        "oml: fixed projection of rank {} at stage {}",
        report.fixed_point.rank(),
        stage_label(report.stage)
    ));
    sink.record(&OmlRecord {
        record: "oml_report",
        ambient_dim: system.ambient_dim(),
        fixed_rank: report.fixed_point.rank(),
        report,
    })
}

#[derive(Serialize)]
struct DepletionRecord {
    record: &'static str,
    operation: &'static str,
    steps: u64,
    report: GapReport,
}

#[derive(Serialize)]
struct StochasticRecord {
    record: &'static str,
    steps: u64,
    seed: u64,
    demo: StochasticDemo,
}

pub fn run_depletion(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let path = require(args.config.as_ref(), "--config")?;
    let config =
        DepletionConfig::parse(&read_file(path)?).map_err(|e| from_depletion("depletion", e))?;
    let steps = args.steps.unwrap_or(2000);
    let policy = policy_from(args, "depletion")?;
    // The config picks the operation: constant stimulus runs the plain
    // pair, periodic stimulus the quantified bound (kappa-comparison for a
    // nonlinear update), event streams the density bound.
    let (operation, report) = match (config.stimulus(), config.update()) {
        (StimulusSpec::Constant { .. }, _) => {
            ("run_pair", run_pair(&config, steps, &policy))
        }
        (StimulusSpec::Periodic { .. }, UpdateRule::Linear { .. }) => {
            ("quantified_gap_bound", quantified_gap_bound(&config, steps))
        }
        (StimulusSpec::Periodic { .. }, UpdateRule::Nonlinear { .. }) => {
            ("nonlinear_kappa_bound", nonlinear_kappa_bound(&config, steps))
        }
        (StimulusSpec::Bernoulli { .. }, UpdateRule::Linear { .. })
        | (StimulusSpec::BoundedGap { .. }, UpdateRule::Linear { .. }) => {
            ("density_gap_bound", density_gap_bound(&config, steps))
        }
        _ => ("run_pair", run_pair(&config, steps, &policy)),
    };
    let report = report.map_err(|e| from_depletion("depletion", e))?;
    sink.summary(format!(
        "depletion[{operation}]: intact {:?}, circ {:?}, utility gap {:.9}{}",
        report.intact_fixed,
        report.circ_fixed,
        report.utility_gap,
        match report.bound_value {
            Some(b) => format!(", bound {b:.9}"),
            None => String::new(),
        }
    ));
    sink.record(&DepletionRecord { record: "gap_report", operation, steps, report })?;

    if let StimulusSpec::Bernoulli { .. } = config.stimulus() {
        let demo = stochastic_demo(&config, steps, args.seed)
            .map_err(|e| from_depletion("depletion", e))?;
        sink.summary(format!(
            "depletion[stochastic_demo]: final intact {:?}, final circ {:?}, events {:.4}",
            demo.final_intact, demo.final_circ, demo.realized_event_fraction
        ));
        sink.record(&StochasticRecord {
            record: "stochastic_demo",
            steps,
            seed: args.seed,
            demo,
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ContractionRecord {
    record: &'static str,
    rho: f64,
    shift: Vec<f64>,
    report: IterationReport<Vec<f64>>,
}

pub fn run_contraction(args: &RunArgs, sink: &mut RecordSink) -> Result<(), CliError> {
    let rho = require(args.rho, "--rho")?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(CliError::Precondition(format!(
            "[contraction] rho must lie in (0, 1], got {rho}"
        )));
    }
    let shift = match &args.shift {
        Some(s) => parse_real_vector(s, "shift vector")?,
        None => vec![1.0],
    };
    let dim = shift.len();
    let start = match &args.start_vec {
        Some(s) => parse_real_vector(s, "start vector")?,
        None => vec![0.0; dim],
    };
    if start.len() != dim {
        return Err(CliError::Precondition(
            "[contraction] start and shift must have equal length".into(),
        ));
    }
    let second = match &args.start2 {
        Some(s) => {
            let v = parse_real_vector(s, "second start vector")?;
            if v.len() != dim {
                return Err(CliError::Precondition(
                    "[contraction] start2 and shift must have equal length".into(),
                ));
            }
            v
        }
        None => {
            let mut v = start.clone();
            v[0] += 1.0;
            v
        }
    };
    // Schedule evidence derived from the declared factor.
    let clamp = |x: f64| x.clamp(1e-9, 1.0 - 1e-9);
    let schedule = EventSchedule::new(&[
        (1, clamp(rho)),
        (2, clamp(rho * rho)),
        (3, clamp(rho * rho * rho)),
    ])
    .map_err(|e| from_fixpoint("contraction", e))?;
    let policy = policy_from(args, "contraction")?;
    let step = {
        let shift = shift.clone();
        move |z: &Vec<f64>| -> Vec<f64> {
            z.iter().zip(&shift).map(|(zi, ci)| rho * zi + ci).collect()
        }
    };
    let metric = |a: &Vec<f64>, b: &Vec<f64>| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let report = contraction_fixed_point_from(step, &schedule, start, second, metric, &policy)
        .map_err(|e| from_fixpoint("contraction", e))?;
    if !report.converged {
        return Err(CliError::NotConverged(format!(
            "[contraction] no fixed point within {} steps",
            policy.max_iter
        )));
    }
    sink.summary(format!(
        "contraction: fixed point {:?} at stage {}",
        report.fixed_point,
        stage_label(report.stage)
    ));
    sink.record(&ContractionRecord { record: "contraction_report", rho, shift, report })
}

#[derive(Serialize)]
struct FlipflopStep {
    record: &'static str,
    step: usize,
    path_state: Option<usize>,
    lifted_set: Vec<usize>,
    contained: bool,
    dead_end: bool,
}

/// Seeded single path next to the deterministic lifted set sequence. Every
/// sampled state must lie inside the lifted set of its step; a state with
/// no successors ends the path as a reported (non-fatal) dead end.
pub fn demo_flipflop(args: DemoArgs) -> Result<(), CliError> {
    let map =
        SetValuedMap::parse(&read_file(&args.map)?).map_err(|e| from_lattice("flipflop", e))?;
    if args.start >= map.n_states() {
        return Err(CliError::Precondition(format!(
            "[flipflop] start state {} out of range for {} states",
            args.start,
            map.n_states()
        )));
    }
    let mut sink = RecordSink::open(args.out.clone())?;
    sink.meta("flipflop", args.seed)?;
    let lifted = lift(&map);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut set = PowersetElement::singleton(map.n_states(), args.start);
    let mut path: Option<usize> = Some(args.start);

    for step in 0..=args.steps {
        let (contained, dead_end) = match path {
            Some(state) => (set.contains(state), map.successors(state).is_empty()),
            None => (true, false),
        };
        if !contained {
            return Err(CliError::HypothesisViolated(format!(
                "[flipflop] sampled state {:?} escaped the lifted set at step {step}",
                path
            )));
        }
        sink.summary(format!(
            "step {step:>3}: path {} lifted {}",
            match path {
                Some(s) => format!("{s}"),
                None => "-".into(),
            },
            set
        ));
        sink.record(&FlipflopStep {
            record: "flipflop_step",
            step,
            path_state: path,
            lifted_set: set.to_indices(),
            contained,
            dead_end,
        })?;
        if dead_end {
            sink.summary(format!(
                "dead end: state {} has no successors; path stops (lifted run continues)",
                path.expect("dead end requires a live path")
            ));
            path = None;
        }
        if step == args.steps {
            break;
        }
        path = path.and_then(|state| {
            let succ = map.successors(state).to_indices();
            if succ.is_empty() {
                None
            } else {
                Some(succ[rng.gen_range(0..succ.len())])
            }
        });
        set = lifted.apply(&set);
    }
    sink.finish()
}
