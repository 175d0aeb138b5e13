//! Experiment dispatch: integrate in the requested mode, compute the
//! standard metric set, evaluate configured thresholds, render outputs.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use qsync_core::analysis::{
    classify_orbits, corner_phase_check, decoherence_series, exponential_rate_fit,
    predicted_diagonal_limits, reduced_state_gap, OrbitKind, PredictedLimit,
};
use qsync_core::consensus::{
    integrate_classical, limit_modulus, max_sq_modulus_series, ClassicalTrajectory,
};
use qsync_core::hilbert::Tolerances;
use qsync_core::lindblad::{cptp_diagnostics, integrate, Trajectory};
use qsync_core::orbits::{integrate_orbit, OrbitDecomposition};
use qsync_core::Error as CoreError;

use crate::config::{ClassicalSetup, Experiment, Mode, QuantumSetup};
use crate::csv;
use crate::error::CliError;
use crate::report::{Direction, MetricResult, RunReport};

/// Fraction of the horizon treated as the asymptotic tail.
const TAIL_FRACTION: f64 = 0.25;

/// Pass direction of each known metric; `None` marks an unknown name.
pub fn metric_direction(name: &str) -> Option<Direction> {
    Some(match name {
        "eo_final"
        | "eo_fit_slope"
        | "eo_fit_residual"
        | "corner_deviation"
        | "corner_modulus_drift"
        | "offdiag_max_final"
        | "diagonal_limit_error"
        | "trace_drift"
        | "hermiticity_defect"
        | "reduced_gap_tail"
        | "compare_deviation"
        | "classical_final_max_modulus"
        | "classical_tail_spread"
        | "classical_max_f_increment"
        | "classical_limit_z"
        | "rotating_mean_deviation" => Direction::AtMost,
        "min_eigenvalue" => Direction::AtLeast,
        _ => return None,
    })
}

/// CSV outputs available per mode.
pub fn output_names_for_mode(mode: Mode) -> Vec<&'static str> {
    if mode.is_quantum() {
        vec!["diagonals", "eo", "corner"]
    } else {
        vec!["states", "fmax"]
    }
}

/// A finished run: the report plus rendered output files.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    /// (file name, contents) for each requested output.
    pub files: Vec<(String, String)>,
}

struct MetricSink<'a> {
    thresholds: &'a BTreeMap<String, f64>,
    metrics: Vec<MetricResult>,
}

impl<'a> MetricSink<'a> {
    fn new(thresholds: &'a BTreeMap<String, f64>) -> Self {
        Self {
            thresholds,
            metrics: Vec::new(),
        }
    }

    fn push(&mut self, name: &'static str, value: f64) {
        let direction = metric_direction(name).expect("metric names are registered");
        let threshold = self.thresholds.get(name).copied();
        self.metrics
            .push(MetricResult::new(name, value, direction, threshold));
    }
}

/// Runs the experiment and collects metrics and outputs.
pub fn run_experiment(exp: &Experiment) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let mut sink = MetricSink::new(&exp.thresholds);
    let mut notes = Vec::new();

    let files = match (&exp.mode, exp.quantum(), exp.classical()) {
        (Mode::Full, Some(q), _) => {
            let traj = integrate(&q.rho0, &q.hamiltonian, &q.graph, &exp.params)?;
            note_grid(&mut notes, &traj);
            quantum_metrics(&mut sink, q, &traj)?;
            quantum_files(&exp.outputs, q, &traj)
        }
        (Mode::Orbit, Some(q), _) => {
            let (traj, integrated, total) = orbit_run(q, exp)?;
            note_grid(&mut notes, &traj);
            notes.push(format!("orbits: integrated {integrated} of {total}"));
            quantum_metrics(&mut sink, q, &traj)?;
            quantum_files(&exp.outputs, q, &traj)
        }
        (Mode::Compare, Some(q), _) => {
            let dense = integrate(&q.rho0, &q.hamiltonian, &q.graph, &exp.params)?;
            let (orbit, integrated, total) = orbit_run(q, exp)?;
            note_grid(&mut notes, &dense);
            notes.push(format!("orbits: integrated {integrated} of {total}"));
            let deviation = max_entrywise_deviation(&dense, &orbit)?;
            sink.push("compare_deviation", deviation);
            quantum_metrics(&mut sink, q, &dense)?;
            quantum_files(&exp.outputs, q, &dense)
        }
        (Mode::Classical, _, Some(c)) => {
            let traj = integrate_classical(&c.system, &c.x0, &exp.params)?;
            notes.push(format!(
                "grid: {} samples over horizon {}",
                traj.len(),
                exp.params.horizon
            ));
            classical_metrics(&mut sink, c, &traj, &mut notes);
            classical_files(&exp.outputs, &traj)
        }
        _ => unreachable!("resolve() pairs each mode with its setup"),
    };

    Ok(RunOutcome {
        report: RunReport {
            mode: exp.mode,
            fingerprint: exp.fingerprint.clone(),
            metrics: sink.metrics,
            notes,
            wall: started.elapsed(),
        },
        files,
    })
}

fn note_grid(notes: &mut Vec<String>, traj: &Trajectory) {
    notes.push(format!(
        "grid: rk4 step {:.6e}, {} samples over horizon {}",
        traj.meta.step,
        traj.len(),
        traj.meta.horizon
    ));
}

/// Integrates every active orbit in parallel on the shared grid and
/// reassembles the dense trajectory.
fn orbit_run(q: &QuantumSetup, exp: &Experiment) -> Result<(Trajectory, usize, usize), CliError> {
    let decomposition = OrbitDecomposition::new(&q.graph);
    let active = decomposition.active_indices(&q.rho0, exp.force_all_orbits)?;
    let runs = active
        .par_iter()
        .map(|&i| {
            let orbit = &decomposition.orbits()[i];
            integrate_orbit(orbit, &orbit.initial_values(&q.rho0)?, &q.hamiltonian, &exp.params)
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let traj = decomposition.assemble(&active, &runs, &q.hamiltonian, &q.graph, &exp.params)?;
    Ok((traj, active.len(), decomposition.len()))
}

fn max_entrywise_deviation(a: &Trajectory, b: &Trajectory) -> Result<f64, CliError> {
    if a.times != b.times {
        return Err(CliError::Core(CoreError::LengthMismatch {
            context: "compare sample grids",
            expected: a.len(),
            actual: b.len(),
        }));
    }
    let mut worst = 0.0f64;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let diff = sa.matrix() - sb.matrix();
        worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

fn quantum_metrics(
    sink: &mut MetricSink<'_>,
    q: &QuantumSetup,
    traj: &Trajectory,
) -> Result<(), CliError> {
    let corner = corner_phase_check(traj, &q.hamiltonian);
    sink.push("corner_deviation", corner.max_deviation);
    sink.push("corner_modulus_drift", corner.max_modulus_drift);

    let eo = decoherence_series(traj);
    sink.push("eo_final", eo.last().map(|&(_, v)| v).unwrap_or(0.0));
    let horizon = traj.meta.horizon;
    let window: Vec<(f64, f64)> = eo
        .iter()
        .copied()
        .filter(|&(t, _)| t >= 0.1 * horizon && t <= 0.5 * horizon)
        .collect();
    if window.len() >= 2 {
        let fit = exponential_rate_fit(&window)?;
        sink.push("eo_fit_slope", fit.slope);
        sink.push("eo_fit_residual", fit.max_residual);
    }

    let final_state = traj.final_state();
    let dim = final_state.dim();
    let mut offdiag_max = 0.0f64;
    for x in 0..dim {
        for y in 0..dim {
            if x == y || (x == 0 && y == dim - 1) || (x == dim - 1 && y == 0) {
                continue;
            }
            offdiag_max = offdiag_max.max(final_state.entry(x, y).norm());
        }
    }
    sink.push("offdiag_max_final", offdiag_max);

    let limits = predicted_diagonal_limits(&q.rho0);
    let diag_err = (0..dim)
        .map(|x| (final_state.entry(x, x).re - limits.per_label[x]).abs())
        .fold(0.0f64, f64::max);
    sink.push("diagonal_limit_error", diag_err);

    let cptp = cptp_diagnostics(traj, &Tolerances::default());
    sink.push("trace_drift", cptp.max_trace_defect);
    sink.push("hermiticity_defect", cptp.max_hermiticity_defect);
    sink.push("min_eigenvalue", cptp.min_eigenvalue);

    if traj.meta.n >= 2 {
        sink.push("reduced_gap_tail", reduced_state_gap(traj, TAIL_FRACTION)?);
    }
    Ok(())
}

fn classical_metrics(
    sink: &mut MetricSink<'_>,
    c: &ClassicalSetup,
    traj: &ClassicalTrajectory,
    notes: &mut Vec<String>,
) {
    let mono = max_sq_modulus_series(traj);
    sink.push("classical_max_f_increment", mono.max_increment);

    let final_max = traj
        .final_values()
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    sink.push("classical_final_max_modulus", final_max);

    match limit_modulus(traj, TAIL_FRACTION) {
        Ok(limit) => {
            sink.push("classical_limit_z", limit.z);
            sink.push("classical_tail_spread", limit.spread);
        }
        Err(e) => notes.push(format!("limit modulus skipped: {e}")),
    }

    if let Some(theta) = c.system.common_theta() {
        // Common-rate runs track e^{i theta t} times the initial mean;
        // evaluated at the end of the horizon.
        let mean: Complex64 =
            c.x0.iter().sum::<Complex64>() / c.x0.len() as f64;
        let t_end = traj.final_time();
        let target = Complex64::from_polar(1.0, theta * t_end) * mean;
        let deviation = traj
            .final_values()
            .iter()
            .fold(0.0f64, |m, z| m.max((z - target).norm()));
        sink.push("rotating_mean_deviation", deviation);
    }
}

fn quantum_files(
    outputs: &[String],
    q: &QuantumSetup,
    traj: &Trajectory,
) -> Vec<(String, String)> {
    outputs
        .iter()
        .map(|name| {
            let content = match name.as_str() {
                "diagonals" => csv::diagonals_csv(traj),
                "eo" => csv::eo_csv(traj),
                "corner" => csv::corner_csv(traj, &q.hamiltonian),
                other => unreachable!("output `{other}` validated at resolve time"),
            };
            (format!("{name}.csv"), content)
        })
        .collect()
}

fn classical_files(outputs: &[String], traj: &ClassicalTrajectory) -> Vec<(String, String)> {
    outputs
        .iter()
        .map(|name| {
            let content = match name.as_str() {
                "states" => csv::states_csv(traj),
                "fmax" => csv::fmax_csv(traj),
                other => unreachable!("output `{other}` validated at resolve time"),
            };
            (format!("{name}.csv"), content)
        })
        .collect()
}

/// Writes each output file into `out_dir`, creating the directory if needed.
pub fn write_outputs(outcome: &RunOutcome, out_dir: &std::path::Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    for (name, content) in &outcome.files {
        let path = out_dir.join(name);
        std::fs::write(&path, content).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

/// Renders the orbit classification table for `classify`.
pub fn render_classification(exp: &Experiment) -> Result<String, CliError> {
    use std::fmt::Write as _;
    let q = exp.quantum().ok_or_else(|| CliError::Field {
        field: "mode",
        message: "classify requires a quantum-mode config".into(),
    })?;
    let decomposition = OrbitDecomposition::new(&q.graph);
    let classes = classify_orbits(decomposition.orbits(), &q.hamiltonian)?;
    let limits = predicted_diagonal_limits(&q.rho0);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "orbit classification ({} orbits, n = {})",
        decomposition.len(),
        q.graph.n()
    );
    let _ = writeln!(out, "  {:<14} {:<6} {:<26} limit", "pair", "size", "kind");
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for class in &classes {
        let kind = match class.kind {
            OrbitKind::CornerPersistent => "corner-persistent",
            OrbitKind::Decohering => "decohering",
            OrbitKind::DiagonalAveraging => "diagonal-averaging",
            OrbitKind::ConditionallyPersistent => "conditionally-persistent",
        };
        *counts.entry(kind).or_default() += 1;
        let limit = match class.limit {
            PredictedLimit::Zero => "0".to_string(),
            PredictedLimit::RotatingPhase { rate } => {
                format!("initial value rotating at rate {rate}")
            }
            PredictedLimit::ClassAverage { weight } => format!(
                "class average {:.9e} (weight {weight})",
                limits.class_values[weight as usize]
            ),
        };
        let (x, y) = class.representative;
        let _ = writeln!(
            out,
            "  ({}, {})   {:<6} {:<26} {}",
            x.bitstring(),
            y.bitstring(),
            class.size,
            kind,
            limit
        );
    }
    let _ = writeln!(out, "  summary:");
    for (kind, count) in counts {
        let _ = writeln!(out, "    {kind}: {count}");
    }
    Ok(out)
}

/// Renders config / initial-state diagnostics for `validate`; the flag is
/// false when the state fails validation.
pub fn render_validation(exp: &Experiment) -> (String, bool) {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "config ok: mode {}", exp.mode.as_str());
    let _ = writeln!(
        out,
        "  grid: step {:.6e}, horizon {}, stride {}",
        exp.params.step, exp.params.horizon, exp.params.stride
    );
    match &exp.setup {
        crate::config::ResolvedSetup::Quantum(q) => {
            let _ = writeln!(
                out,
                "  quantum setup: n = {}, |E| = {}",
                q.graph.n(),
                q.graph.edge_count()
            );
            let raw_trace = q.rho0_raw.trace();
            let _ = writeln!(
                out,
                "  rho0 trace as configured: {:.9} + {:.1e} i",
                raw_trace.re, raw_trace.im
            );
            let report = q.rho0.validate(&Tolerances::default());
            let _ = writeln!(out, "  rho0 after normalize policy: {}", report.summary());
            (out, report.is_valid())
        }
        crate::config::ResolvedSetup::Classical(c) => {
            let _ = writeln!(
                out,
                "  classical setup: {} nodes, {} edges, common theta: {}",
                c.system.node_count(),
                c.system.edges().len(),
                c.system
                    .common_theta()
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "no".into())
            );
            (out, true)
        }
    }
}
