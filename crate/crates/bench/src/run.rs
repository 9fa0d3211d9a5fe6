//! One sweep point end to end, and the exhaustive oracle.

use std::collections::BTreeMap;

use polyqaoa::circuit::{build_qaoa, GateCircuit, GateModel};
use polyqaoa::encoding::{discretize, render_bits, BitLayout};
use polyqaoa::optimize::{train_qaoa, Termination};
use polyqaoa::parser::parse_objective;
use polyqaoa::quadratize::{quadratize, QuadratizationResult};
use polyqaoa::sim::{sample, simulate_fast};
use polyqaoa::spin::to_spin;
use polyqaoa::{BinaryPoly, ContinuousPoly, SpinPoly};
use serde::{Deserialize, Serialize};

use crate::config::{DomainEntry, Formulation, Problem, RunSettings, SweepPoint};
use crate::stats::Summary;
use crate::{HarnessError, SCHEMA_VERSION};

/// A problem compiled at one bit resolution and formulation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub formulation: Formulation,
    pub bit_resolution: u32,
    pub objective: ContinuousPoly,
    pub layout: BitLayout,
    pub pubo: BinaryPoly,
    pub quadratization: Option<QuadratizationResult>,
    /// The polynomial the circuit is trained on: the PUBO, or the QUBO with penalties.
    pub training: BinaryPoly,
    pub hamiltonian: SpinPoly,
}

impl Instance {
    pub fn build(problem: &Problem, bit_resolution: u32, formulation: Formulation) -> Result<Self, HarnessError> {
        let objective = parse_objective(&problem.objective)?;
        let domain = problem.domain_spec(bit_resolution)?;
        let (pubo, layout) = discretize(&objective, &domain)?;
        let quadratization = match formulation {
            Formulation::Pubo => None,
            Formulation::Qubo => Some(quadratize(&pubo)?),
        };
        let training = quadratization.as_ref().map_or_else(|| pubo.clone(), |q| q.qubo.clone());
        let hamiltonian = to_spin(&training);
        Ok(Self {
            formulation,
            bit_resolution,
            objective,
            layout,
            pubo,
            quadratization,
            training,
            hamiltonian,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.training.num_bits()
    }

    pub fn num_ancilla(&self) -> usize {
        self.quadratization.as_ref().map_or(0, |q| q.num_ancilla)
    }

    pub fn circuit(&self, layers: usize, model: GateModel) -> Result<GateCircuit, HarnessError> {
        Ok(build_qaoa(&self.hamiltonian, layers, model)?)
    }

    /// Renders the original bits of basis state `index` (over all qubits).
    pub fn describe(&self, index: usize) -> (String, BTreeMap<String, f64>) {
        let original = index >> self.num_ancilla();
        let n = self.layout.total_bits;
        let bits: Vec<bool> = (0..n).map(|q| original >> (n - 1 - q) & 1 == 1).collect();
        let rendered: Vec<String> = self
            .layout
            .entries
            .iter()
            .map(|e| render_bits(&bits[e.range()], &e.spec))
            .collect();
        let values = self.layout.decode_basis(original).into_iter().collect();
        (rendered.join(" | "), values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// Coarse class of a failed run, matching the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Config,
    Runtime,
    Capacity,
}

impl ErrorKind {
    pub fn of(e: &HarnessError) -> Self {
        match e.exit_code() {
            1 => ErrorKind::Config,
            3 => ErrorKind::Capacity,
            _ => ErrorKind::Runtime,
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Config => 1,
            ErrorKind::Runtime => 2,
            ErrorKind::Capacity => 3,
        }
    }
}

/// Metrics of a successful run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub num_qubits: usize,
    pub num_original_bits: usize,
    pub num_ancilla: usize,
    pub pubo_degree: usize,
    pub depth_ladder: usize,
    pub depth_native: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub wall_clock_ms: f64,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Best training objective after each optimizer iteration.
    pub trace: Vec<f64>,
    pub initial_expectation: f64,
    /// Trained expectation of the polynomial the circuit was trained on.
    pub training_expectation: f64,
    /// Trained expectation of the original objective, ancillae ignored.
    pub reported_expectation: f64,
    pub best_sampled: f64,
    pub best_sampled_bits: String,
    pub best_sampled_point: BTreeMap<String, f64>,
    /// Per-shot original objective values.
    pub samples: Summary,
    pub grid_minimum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub index: usize,
    pub objective: String,
    pub domain: Vec<DomainEntry>,
    pub formulation: Formulation,
    pub bit_resolution: u32,
    pub layers: usize,
    pub seed: u64,
    pub settings: RunSettings,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<ErrorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<RunMetrics>,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    /// The record with timing fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        if let Some(m) = r.metrics.as_mut() {
            m.wall_clock_ms = 0.0;
        }
        r
    }
}

fn measure(
    problem: &Problem,
    point: &SweepPoint,
    settings: &RunSettings,
) -> Result<RunMetrics, HarnessError> {
    let inst = Instance::build(problem, point.bit_resolution, point.formulation)?;
    let depth_ladder = inst.circuit(point.layers, GateModel::Ladder)?.depth();
    let depth_native = inst.circuit(point.layers, GateModel::NativeGadget)?.depth();

    let report = inst.pubo.energy_table()?;
    let grid_minimum = report.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = inst.num_ancilla();

    let trained = train_qaoa(&inst.hamiltonian, point.layers, &settings.optimizer.to_config(), point.seed)?;
    let sv = simulate_fast(&inst.hamiltonian, &trained.gammas, &trained.betas)?;
    let reported_expectation = sv
        .probabilities()
        .iter()
        .enumerate()
        .map(|(k, p)| p * report[k >> shift])
        .sum();

    let shots = sample(&sv, settings.shots, point.seed)?;
    let (best_index, best_sampled) = shots
        .counts
        .keys()
        .map(|&k| (k, report[k >> shift]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one shot");
    let samples = Summary::of_weighted(shots.counts.iter().map(|(&k, &c)| (report[k >> shift], c)))
        .expect("at least one shot");
    let (best_sampled_bits, best_sampled_point) = inst.describe(best_index);

    let t = trained.trace;
    Ok(RunMetrics {
        num_qubits: inst.num_qubits(),
        num_original_bits: inst.layout.total_bits,
        num_ancilla: shift,
        pubo_degree: inst.pubo.degree(),
        depth_ladder,
        depth_native,
        iterations: t.iterations,
        evaluations: t.evaluations,
        termination: t.termination,
        wall_clock_ms: t.wall_clock.as_secs_f64() * 1e3,
        gammas: trained.gammas,
        betas: trained.betas,
        trace: t.values,
        initial_expectation: t.initial_value,
        training_expectation: t.best_value,
        reported_expectation,
        best_sampled,
        best_sampled_bits,
        best_sampled_point,
        samples,
        grid_minimum,
    })
}

/// Runs one sweep point. Failures become records with `status = failed`.
pub fn run_single(problem: &Problem, point: &SweepPoint, settings: &RunSettings, index: usize) -> ExperimentRecord {
    let (status, error, error_kind, metrics) = match measure(problem, point, settings) {
        Ok(m) => (Status::Ok, None, None, Some(m)),
        Err(e) => (Status::Failed, Some(e.to_string()), Some(ErrorKind::of(&e)), None),
    };
    ExperimentRecord {
        schema_version: SCHEMA_VERSION,
        index,
        objective: problem.objective.clone(),
        domain: problem.domain.clone(),
        formulation: point.formulation,
        bit_resolution: point.bit_resolution,
        layers: point.layers,
        seed: point.seed,
        settings: settings.clone(),
        status,
        error,
        error_kind,
        metrics,
    }
}

/// Exhaustive minimum of the compiled objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForce {
    pub formulation: Formulation,
    pub bit_resolution: u32,
    pub original_bits: usize,
    pub total_bits: usize,
    pub minimum: f64,
    /// Original-bit basis indices attaining the minimum.
    pub argmin: Vec<usize>,
    pub argmin_bits: Vec<String>,
    pub argmin_points: Vec<BTreeMap<String, f64>>,
    /// Value per original assignment; for QUBO the minimum over ancillae.
    pub table: Vec<f64>,
}

pub fn brute_force(problem: &Problem, bit_resolution: u32, formulation: Formulation) -> Result<BruteForce, HarnessError> {
    let inst = Instance::build(problem, bit_resolution, formulation)?;
    let full = inst.training.energy_table()?;
    let chunk = 1 << inst.num_ancilla();
    let table: Vec<f64> = full
        .chunks(chunk)
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let minimum = table.iter().copied().fold(f64::INFINITY, f64::min);
    let argmin: Vec<usize> = (0..table.len()).filter(|&k| table[k] == minimum).collect();
    let (argmin_bits, argmin_points) = argmin.iter().map(|&k| inst.describe(k << inst.num_ancilla())).unzip();
    Ok(BruteForce {
        formulation,
        bit_resolution,
        original_bits: inst.layout.total_bits,
        total_bits: inst.num_qubits(),
        minimum,
        argmin,
        argmin_bits,
        argmin_points,
        table,
    })
}
