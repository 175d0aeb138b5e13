//! TOML experiment configuration: parsing, validation, preset expansion.
//!
//! One flat document describes either a quantum run (modes `full`, `orbit`,
//! `compare`) or a classical consensus run (mode `classical`). Qubit and
//! node indices are 1-based in configuration files and converted to the
//! library's 0-based indexing here.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qsync_core::consensus::ClassicalSystem;
use qsync_core::hilbert::{DensityMatrix, InteractionGraph};
use qsync_core::lindblad::{stiffness_bound, DiagonalHamiltonian, StepParams};
use qsync_core::{presets, DMatrix};

use crate::error::CliError;
use crate::report::fnv1a64_hex;
use crate::run::{metric_direction, output_names_for_mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Orbit,
    Classical,
    Compare,
}

impl Mode {
    pub fn is_quantum(self) -> bool {
        !matches!(self, Mode::Classical)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Orbit => "orbit",
            Mode::Classical => "classical",
            Mode::Compare => "compare",
        }
    }
}

/// Hamiltonian field: preset name or explicit eigenvalue list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    Preset(String),
    Lambdas(Vec<f64>),
}

/// Initial-state field: preset name or dense complex matrix as nested
/// arrays of [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSpec {
    Preset(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

fn default_hbar() -> f64 {
    1.0
}

fn default_horizon() -> f64 {
    20.0
}

fn is_false(b: &bool) -> bool {
    !b
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn is_default_horizon(v: &f64) -> bool {
    *v == default_horizon()
}

/// The raw configuration document. `parse` gives exactly the fields written
/// by the user; call [`ConfigFile::resolve`] for a validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Mode,

    // quantum fields
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Edge list with 1-based endpoints; shared by quantum and classical modes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default = "default_hbar", skip_serializing_if = "is_one")]
    pub hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<RhoSpec>,
    /// Divide rho0 by its trace before running.
    #[serde(default, skip_serializing_if = "is_false")]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub force_all_orbits: bool,

    // classical fields
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<[f64; 2]>>,

    // integration grid
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default = "default_horizon", skip_serializing_if = "is_default_horizon")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<f64>,

    // outputs and pass/fail gates
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, f64>,
}

/// Parses a configuration document from TOML text.
pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    Ok(toml::from_str(text)?)
}

impl ConfigFile {
    /// Canonical TOML rendering; `parse_config(to_toml(c)) == c`.
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Field {
            field: "config",
            message: format!("serialization failed: {e}"),
        })
    }
}

/// Fully resolved quantum setup.
#[derive(Clone, Debug)]
pub struct QuantumSetup {
    pub graph: InteractionGraph,
    pub hamiltonian: DiagonalHamiltonian,
    /// The state exactly as configured (before the normalize flag).
    pub rho0_raw: DensityMatrix,
    /// The state handed to the integrator (normalized when requested).
    pub rho0: DensityMatrix,
}

/// Fully resolved classical setup.
#[derive(Clone, Debug)]
pub struct ClassicalSetup {
    pub system: ClassicalSystem,
    pub x0: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub enum ResolvedSetup {
    Quantum(QuantumSetup),
    Classical(ClassicalSetup),
}

/// A validated experiment with presets expanded and the integration grid
/// pinned down.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub mode: Mode,
    pub setup: ResolvedSetup,
    pub params: StepParams,
    pub force_all_orbits: bool,
    pub outputs: Vec<String>,
    pub thresholds: BTreeMap<String, f64>,
    /// FNV-1a hash of the canonical configuration text.
    pub fingerprint: String,
}

impl Experiment {
    pub fn quantum(&self) -> Option<&QuantumSetup> {
        match &self.setup {
            ResolvedSetup::Quantum(q) => Some(q),
            ResolvedSetup::Classical(_) => None,
        }
    }

    pub fn classical(&self) -> Option<&ClassicalSetup> {
        match &self.setup {
            ResolvedSetup::Classical(c) => Some(c),
            ResolvedSetup::Quantum(_) => None,
        }
    }
}

fn field_err(field: &'static str, message: impl Into<String>) -> CliError {
    CliError::Field {
        field,
        message: message.into(),
    }
}

fn convert_edges(
    edges: &[[usize; 2]],
    count: usize,
    what: &'static str,
) -> Result<Vec<(usize, usize)>, CliError> {
    edges
        .iter()
        .map(|&[a, b]| {
            if a == 0 || b == 0 || a > count || b > count {
                Err(field_err(
                    "edges",
                    format!("edge [{a}, {b}] out of range: {what} indices are 1..={count}"),
                ))
            } else {
                Ok((a - 1, b - 1))
            }
        })
        .collect()
}

fn resolve_hamiltonian(
    spec: &HamiltonianSpec,
    n: usize,
    hbar: f64,
) -> Result<DiagonalHamiltonian, CliError> {
    let dim = 1usize << n;
    let h = match spec {
        HamiltonianSpec::Preset(name) => match name.as_str() {
            "powers_of_two" => DiagonalHamiltonian::powers_of_two(n)?,
            "zero" => DiagonalHamiltonian::zero(n)?,
            other => {
                if let Some(value) = other.strip_prefix("constant:") {
                    let v: f64 = value.parse().map_err(|_| {
                        field_err(
                            "hamiltonian",
                            format!("cannot parse constant value in preset `{other}`"),
                        )
                    })?;
                    DiagonalHamiltonian::constant(n, v)?
                } else {
                    return Err(field_err(
                        "hamiltonian",
                        format!(
                            "unknown preset `{other}` (expected powers_of_two, zero, \
                             constant:<value>, or an explicit eigenvalue list)"
                        ),
                    ));
                }
            }
        },
        HamiltonianSpec::Lambdas(lambdas) => {
            if lambdas.len() != dim {
                return Err(field_err(
                    "hamiltonian",
                    format!("expected {dim} eigenvalues for n = {n}, got {}", lambdas.len()),
                ));
            }
            DiagonalHamiltonian::new(lambdas.clone(), 1.0)?
        }
    };
    Ok(h.with_hbar(hbar)?)
}

fn resolve_rho0(spec: &RhoSpec, n: usize) -> Result<DensityMatrix, CliError> {
    let dim = 1usize << n;
    match spec {
        RhoSpec::Preset(name) => match name.as_str() {
            "paper_example" => {
                if n != presets::DEMO_QUBITS {
                    return Err(field_err(
                        "rho0",
                        format!("preset `paper_example` is defined for n = 3, got n = {n}"),
                    ));
                }
                Ok(presets::demo_rho0_raw())
            }
            "maximally_mixed" => Ok(DensityMatrix::maximally_mixed(n)?),
            "uniform_coherent" => Ok(DensityMatrix::uniform_coherent(n)?),
            other => Err(field_err(
                "rho0",
                format!(
                    "unknown preset `{other}` (expected paper_example, maximally_mixed, \
                     uniform_coherent, or an explicit matrix)"
                ),
            )),
        },
        RhoSpec::Matrix(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(field_err(
                    "rho0",
                    format!("expected a {dim}x{dim} matrix for n = {n}"),
                ));
            }
            let m = DMatrix::from_fn(dim, dim, |r, c| {
                Complex64::new(rows[r][c][0], rows[r][c][1])
            });
            Ok(DensityMatrix::new(n, m)?)
        }
    }
}

impl ConfigFile {
    /// Validates the document, expands presets, converts indices, checks
    /// connectivity and dimensions, and pins the integration grid.
    pub fn resolve(&self) -> Result<Experiment, CliError> {
        for (name, value) in [("horizon", Some(self.horizon)), ("step", self.step), ("stride", self.stride)]
        {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Field {
                        field: match name {
                            "horizon" => "horizon",
                            "step" => "step",
                            _ => "stride",
                        },
                        message: format!("must be positive and finite, got {v}"),
                    });
                }
            }
        }
        for key in self.thresholds.keys() {
            if metric_direction(key).is_none() {
                return Err(field_err(
                    "thresholds",
                    format!("unknown metric `{key}`"),
                ));
            }
        }
        let allowed_outputs = output_names_for_mode(self.mode);
        for name in &self.outputs {
            if !allowed_outputs.contains(&name.as_str()) {
                return Err(field_err(
                    "outputs",
                    format!(
                        "unknown output `{name}` for mode {} (expected one of {})",
                        self.mode.as_str(),
                        allowed_outputs.join(", ")
                    ),
                ));
            }
        }

        let (setup, stiffness) = if self.mode.is_quantum() {
            let n = self
                .n
                .ok_or_else(|| field_err("n", "required for quantum modes"))?;
            if n == 0 || n > qsync_core::MAX_QUBITS {
                return Err(field_err(
                    "n",
                    format!("qubit count must be in 1..={}", qsync_core::MAX_QUBITS),
                ));
            }
            for (field, present) in [
                ("nodes", self.nodes.is_some()),
                ("thetas", self.thetas.is_some()),
                ("x0", self.x0.is_some()),
            ] {
                if present {
                    return Err(field_err(
                        match field {
                            "nodes" => "nodes",
                            "thetas" => "thetas",
                            _ => "x0",
                        },
                        "only valid in classical mode",
                    ));
                }
            }
            let edges = convert_edges(&self.edges, n, "qubit")?;
            let graph = InteractionGraph::new(n, &edges).map_err(|e| match e {
                qsync_core::Error::DisconnectedGraph { .. } => field_err(
                    "edges",
                    format!("the edge set does not connect all {n} qubits"),
                ),
                other => CliError::Core(other),
            })?;
            let hspec = self
                .hamiltonian
                .as_ref()
                .ok_or_else(|| field_err("hamiltonian", "required for quantum modes"))?;
            let hamiltonian = resolve_hamiltonian(hspec, n, self.hbar)?;
            let rspec = self
                .rho0
                .as_ref()
                .ok_or_else(|| field_err("rho0", "required for quantum modes"))?;
            let rho0_raw = resolve_rho0(rspec, n)?;
            let rho0 = if self.normalize {
                rho0_raw.normalized()?
            } else {
                rho0_raw.clone()
            };
            let stiffness = stiffness_bound(&hamiltonian, &graph);
            (
                ResolvedSetup::Quantum(QuantumSetup {
                    graph,
                    hamiltonian,
                    rho0_raw,
                    rho0,
                }),
                stiffness,
            )
        } else {
            let nodes = self
                .nodes
                .ok_or_else(|| field_err("nodes", "required for classical mode"))?;
            if nodes == 0 {
                return Err(field_err("nodes", "node count must be at least 1"));
            }
            for (field, present) in [
                ("n", self.n.is_some()),
                ("hamiltonian", self.hamiltonian.is_some()),
                ("rho0", self.rho0.is_some()),
            ] {
                if present {
                    return Err(field_err(
                        match field {
                            "n" => "n",
                            "hamiltonian" => "hamiltonian",
                            _ => "rho0",
                        },
                        "only valid in quantum modes",
                    ));
                }
            }
            let thetas = self
                .thetas
                .clone()
                .ok_or_else(|| field_err("thetas", "required for classical mode"))?;
            if thetas.len() != nodes {
                return Err(field_err(
                    "thetas",
                    format!("expected {nodes} rates, got {}", thetas.len()),
                ));
            }
            let x0_pairs = self
                .x0
                .clone()
                .ok_or_else(|| field_err("x0", "required for classical mode"))?;
            if x0_pairs.len() != nodes {
                return Err(field_err(
                    "x0",
                    format!("expected {nodes} states, got {}", x0_pairs.len()),
                ));
            }
            let edges = convert_edges(&self.edges, nodes, "node")?;
            let system = ClassicalSystem::new(thetas, edges).map_err(|e| match e {
                qsync_core::Error::DisconnectedGraph { .. } => field_err(
                    "edges",
                    format!("the edge set does not connect all {nodes} nodes"),
                ),
                other => CliError::Core(other),
            })?;
            let x0 = x0_pairs
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect();
            let stiffness = system.stiffness_bound();
            (ResolvedSetup::Classical(ClassicalSetup { system, x0 }), stiffness)
        };

        let params = match self.step {
            Some(step) => StepParams::new(
                step,
                self.horizon,
                self.stride.unwrap_or(self.horizon / 200.0),
            )?,
            None => StepParams::auto(stiffness, self.horizon, self.stride)?,
        };

        let canonical = self.to_toml()?;
        Ok(Experiment {
            mode: self.mode,
            setup,
            params,
            force_all_orbits: self.force_all_orbits,
            outputs: self.outputs.clone(),
            thresholds: self.thresholds.clone(),
            fingerprint: fnv1a64_hex(canonical.as_bytes()),
        })
    }
}
