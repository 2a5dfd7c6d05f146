//! Machine-readable run records. Tables for humans go to standard output;
//! these go behind `--json`.

use qbilerp_core::bilerp::{BlockCensus, InterpolationSpec};
use qbilerp_core::ResourceReport;
use serde::Serialize;

/// Closed-form cost figures evaluated at one scale exponent.
#[derive(Serialize, Clone, Copy, Debug)]
pub struct FormulaFigures {
    /// Composed closed form for the measurement-assisted design.
    pub proposed_t_count: u64,
    /// Baseline closed form; only defined at power-of-two n.
    pub prior_t_count: Option<u64>,
    /// 1 - proposed/prior at this n.
    pub improvement: Option<f64>,
    /// Quadratic-coefficient limit of the improvement.
    pub asymptotic_improvement: f64,
}

/// Record of one `count` invocation.
#[derive(Serialize, Debug)]
pub struct CountReport {
    pub file: String,
    pub resources: ResourceReport,
    pub t_type_count: u64,
}

/// Record of one `interpolate` invocation.
#[derive(Serialize, Debug)]
pub struct RunReport {
    pub spec: InterpolationSpec,
    pub subpixel: (u32, u32),
    pub backend: String,
    /// Block census of the generated circuit, when one was generated.
    pub census: Option<BlockCensus>,
    /// Measured gate counts of the generated circuit.
    pub measured: Option<ResourceReport>,
    pub formula: FormulaFigures,
    /// Whether the measured t-type count stays within the composed formula.
    /// The generated circuit needs wider registers than the formula's
    /// uniform width-n cost model, so this is expected to read false.
    pub measured_within_formula: Option<bool>,
    /// Oracle/simulation agreement; present only with `--backend both`.
    pub backend_agreement: Option<bool>,
    pub elapsed_ms: u128,
}

/// One row of the `compare` table.
#[derive(Serialize, Clone, Copy, Debug)]
pub struct CompareRow {
    pub n: u32,
    pub proposed_t_count: u64,
    pub prior_t_count: Option<u64>,
    /// Measured t-type count of a generated scale-down circuit at q = n.
    pub measured_t_type: Option<u64>,
    pub improvement: Option<f64>,
}

#[derive(Serialize, Debug)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub asymptotic_improvement: f64,
}

/// One measurement in a simulation record.
#[derive(Serialize, Debug)]
pub struct MeasurementEcho {
    pub cbit: usize,
    pub outcome: bool,
    pub probability: f64,
}

/// One branch of a statevector run, or the single permutation result.
#[derive(Serialize, Debug)]
pub struct BranchEcho {
    pub probability: f64,
    pub measurements: Vec<MeasurementEcho>,
    /// Basis-state output when the branch ends in one (always for the
    /// permutation backend), qubit 0 first.
    pub output_bits: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct SimulateReport {
    pub file: String,
    pub backend: String,
    pub qubits: usize,
    pub input_bits: String,
    pub seed: Option<u64>,
    pub branches: Vec<BranchEcho>,
}
