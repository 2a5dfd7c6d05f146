//! Command-line front end: build circuits to text files, count their
//! gates, compare designs, simulate, and rescale PGM images.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 verification or
//! agreement failures.

mod circuit_text;
mod pgm;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use qbilerp_core::arithmetic::{
    build_adder, build_conditional_adder, build_multiplier, build_subtractor,
};
use qbilerp_core::bilerp::{
    build_interpolation, interpolate_image, Backend, InterpolationSpec, ScaleMode,
};
use qbilerp_core::neqr::NeqrImage;
use qbilerp_core::resources::{
    asymptotic_improvement_ratio, formula_prior_interp_t_count, formula_proposed_interp_t_count,
    improvement_ratio,
};
use qbilerp_core::{
    count_resources, run_permutation, run_statevector, BranchPolicy, Circuit, ClassicalState,
    QubitId, RegisterRole, RunOptions, SimError, StateVector,
};

use report::{
    BranchEcho, CompareReport, CompareRow, CountReport, FormulaFigures, MeasurementEcho,
    RunReport, SimulateReport,
};

/// Environment variable naming the default statevector width cap.
const SV_CAP_VAR: &str = "QBILERP_SV_CAP";

#[derive(Parser)]
#[command(
    name = "qbilerp",
    version,
    about = "Clifford+T circuits for bilinear rescaling of NEQR images"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a circuit as a text file
    Build {
        #[command(subcommand)]
        target: BuildTarget,
    },
    /// Parse a circuit file and report gate counts
    Count {
        circuit: PathBuf,
        /// also write the report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Tabulate formula and measured T-counts over scale exponents
    Compare {
        /// inclusive `lo:hi` range of scale exponents n
        #[arg(long = "n-range", default_value = "1:8", value_parser = parse_range)]
        n_range: (u32, u32),
        /// skip generating circuits for the measured column
        #[arg(long)]
        no_measured: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a circuit file on one simulation backend
    Simulate {
        circuit: PathBuf,
        /// input bits, one character per qubit, qubit 0 first
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = SimBackendArg::Permutation)]
        backend: SimBackendArg,
        /// sample a single measurement branch with this seed
        #[arg(long)]
        seed: Option<u64>,
        /// statevector qubit cap (default from QBILERP_SV_CAP, else 16)
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rescale a PGM image by 2^n per side
    Interpolate {
        image: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// scale exponent
        #[arg(long)]
        n: u32,
        /// scale-down sampling point `sy,sx` within each 2^n block
        #[arg(long, default_value = "0,0", value_parser = parse_pair)]
        subpixel: (u32, u32),
        #[arg(long, value_enum, default_value_t = BackendArg::Both)]
        backend: BackendArg,
        /// output image path
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BuildTarget {
    /// in-place adder, b += a mod 2^n
    Adder(BlockArgs),
    /// in-place subtractor, b -= a mod 2^n
    Subtractor(BlockArgs),
    /// adder applied only when a control wire is 1
    ConditionalAdder(BlockArgs),
    /// full 2n-bit product p = a*b
    Multiplier(BlockArgs),
    /// whole interpolation circuit
    Bilerp {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// input position bits per axis (image side 2^m)
        #[arg(long)]
        m: u32,
        /// scale exponent
        #[arg(long)]
        n: u32,
        /// color bits
        #[arg(long)]
        q: u32,
        /// output path (default: standard output)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct BlockArgs {
    /// operand width in bits
    #[arg(long)]
    n: usize,
    /// output path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Down,
    Up,
}

impl From<ModeArg> for ScaleMode {
    fn from(m: ModeArg) -> ScaleMode {
        match m {
            ModeArg::Down => ScaleMode::Down,
            ModeArg::Up => ScaleMode::Up,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Oracle,
    Sim,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimBackendArg {
    Permutation,
    Statevector,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected `lo:hi`")?;
    let lo: u32 = lo.trim().parse().map_err(|_| "bad lower bound")?;
    let hi: u32 = hi.trim().parse().map_err(|_| "bad upper bound")?;
    if lo == 0 || hi < lo {
        return Err("need 1 <= lo <= hi".into());
    }
    Ok((lo, hi))
}

fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected `sy,sx`")?;
    Ok((
        a.trim().parse().map_err(|_| "bad sy")?,
        b.trim().parse().map_err(|_| "bad sx")?,
    ))
}

/// An error paired with the process exit code it deserves.
struct Failure {
    code: i32,
    error: anyhow::Error,
}

trait IntoFailure<T> {
    fn or_usage(self) -> Result<T, Failure>;
    fn or_verification(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> IntoFailure<T> for Result<T, E> {
    fn or_usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 1, error: e.into() })
    }

    fn or_verification(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, error: e.into() })
    }
}

fn verification_failure(msg: String) -> Failure {
    Failure { code: 2, error: anyhow!(msg) }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("error: {:#}", f.error);
        std::process::exit(f.code);
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Build { target } => cmd_build(target),
        Cmd::Count { circuit, json } => cmd_count(&circuit, json.as_deref()),
        Cmd::Compare { n_range, no_measured, json } => {
            cmd_compare(n_range, no_measured, json.as_deref())
        }
        Cmd::Simulate { circuit, input, backend, seed, cap, json } => {
            cmd_simulate(&circuit, &input, backend, seed, cap, json.as_deref())
        }
        Cmd::Interpolate { image, mode, n, subpixel, backend, out, json } => {
            cmd_interpolate(&image, mode.into(), n, subpixel, backend, out.as_deref(), json.as_deref())
        }
    }
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("writing {}", p.display()))
            .or_usage(),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let Some(p) = path else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(value).or_usage()?;
    text.push('\n');
    std::fs::write(p, text)
        .with_context(|| format!("writing {}", p.display()))
        .or_usage()
}

// ---- build ----

fn cmd_build(target: BuildTarget) -> Result<(), Failure> {
    let (circuit, out) = match target {
        BuildTarget::Adder(args) => (build_block(args.n, BlockKindArg::Adder)?, args.out),
        BuildTarget::Subtractor(args) => {
            (build_block(args.n, BlockKindArg::Subtractor)?, args.out)
        }
        BuildTarget::ConditionalAdder(args) => {
            (build_block(args.n, BlockKindArg::ConditionalAdder)?, args.out)
        }
        BuildTarget::Multiplier(args) => {
            (build_block(args.n, BlockKindArg::Multiplier)?, args.out)
        }
        BuildTarget::Bilerp { mode, m, n, q, out } => {
            let spec = InterpolationSpec { mode: mode.into(), m, n, q };
            let (circuit, _) = build_interpolation(&spec).or_usage()?;
            (circuit, out)
        }
    };
    write_or_print(out.as_deref(), &circuit_text::emit(&circuit))
}

enum BlockKindArg {
    Adder,
    Subtractor,
    ConditionalAdder,
    Multiplier,
}

fn build_block(n: usize, kind: BlockKindArg) -> Result<Circuit, Failure> {
    let mut c = Circuit::new(0);
    let build = |c: &mut Circuit| -> Result<(), qbilerp_core::arithmetic::ArithmeticError> {
        match kind {
            BlockKindArg::ConditionalAdder => {
                let ctl = c.alloc_register("ctl", 1, RegisterRole::Color)?;
                let a = c.alloc_register("a", n, RegisterRole::Color)?;
                let b = c.alloc_register("b", n, RegisterRole::Color)?;
                build_conditional_adder(c, ctl.qubits[0], &a, &b)?;
            }
            _ => {
                let a = c.alloc_register("a", n, RegisterRole::Color)?;
                let b = c.alloc_register("b", n, RegisterRole::Color)?;
                match kind {
                    BlockKindArg::Adder => build_adder(c, &a, &b).map(drop)?,
                    BlockKindArg::Subtractor => build_subtractor(c, &a, &b).map(drop)?,
                    BlockKindArg::Multiplier => build_multiplier(c, &a, &b, "p").map(drop)?,
                    BlockKindArg::ConditionalAdder => unreachable!(),
                }
            }
        }
        Ok(())
    };
    build(&mut c).or_usage()?;
    Ok(c)
}

// ---- count ----

fn cmd_count(path: &Path, json: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .or_usage()?;
    let circuit = circuit_text::parse(&text).or_usage()?;
    let r = count_resources(&circuit);
    println!("qubits        {}", r.qubit_count);
    println!("ancilla peak  {}", r.ancilla_high_water);
    println!("t-type        {}  (T {}, Tdg {})", r.t_type_count(), r.t_count, r.tdg_count);
    println!("H             {}", r.h_count);
    println!("S             {}", r.s_count);
    println!("X             {}", r.x_count);
    println!("CNOT          {}", r.cnot_count);
    println!("CZ            {}", r.cz_count);
    println!("measurements  {}", r.measurement_count);
    write_json(
        json,
        &CountReport {
            file: path.display().to_string(),
            resources: r,
            t_type_count: r.t_type_count(),
        },
    )
}

// ---- compare ----

fn measured_interp_t_type(n: u32) -> Option<u64> {
    // the formulas carry no color depth; q = n keeps the single-parameter
    // model, m = n is the smallest legal input size
    if n == 0 || n > 12 {
        return None;
    }
    let spec = InterpolationSpec { mode: ScaleMode::Down, m: n, n, q: n };
    let (circuit, _) = build_interpolation(&spec).ok()?;
    Some(count_resources(&circuit).t_type_count())
}

fn cmd_compare(
    (lo, hi): (u32, u32),
    no_measured: bool,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for n in lo..=hi {
        rows.push(CompareRow {
            n,
            proposed_t_count: formula_proposed_interp_t_count(n),
            prior_t_count: formula_prior_interp_t_count(n),
            measured_t_type: if no_measured { None } else { measured_interp_t_type(n) },
            improvement: improvement_ratio(n),
        });
    }
    let fmt_u64 = |v: Option<u64>| v.map_or("n/a".into(), |v| v.to_string());
    let fmt_pct = |v: Option<f64>| v.map_or("n/a".into(), |v| format!("{:.2}%", v * 100.0));
    println!(
        "{:>4} {:>12} {:>12} {:>14} {:>12}",
        "n", "proposed", "prior", "measured(q=n)", "improvement"
    );
    for row in &rows {
        println!(
            "{:>4} {:>12} {:>12} {:>14} {:>12}",
            row.n,
            row.proposed_t_count,
            fmt_u64(row.prior_t_count),
            fmt_u64(row.measured_t_type),
            fmt_pct(row.improvement),
        );
    }
    let asymptotic = asymptotic_improvement_ratio();
    println!("asymptotic improvement: {:.2}%", asymptotic * 100.0);
    write_json(json, &CompareReport { rows, asymptotic_improvement: asymptotic })
}

// ---- simulate ----

fn parse_input_bits(s: &str, qubits: usize) -> Result<ClassicalState, Failure> {
    if s.len() != qubits {
        return Err(Failure {
            code: 1,
            error: anyhow!("input has {} bits but the circuit has {qubits} qubits", s.len()),
        });
    }
    let mut state = ClassicalState::zeros(qubits);
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => state.set(QubitId(i), true),
            _ => {
                return Err(Failure {
                    code: 1,
                    error: anyhow!("input bit {i} is `{ch}`; only 0 and 1 are allowed"),
                })
            }
        }
    }
    Ok(state)
}

fn bits_string(state: &ClassicalState) -> String {
    (0..state.len())
        .map(|i| if state.get(QubitId(i)) { '1' } else { '0' })
        .collect()
}

/// Simulator failures that indicate bad input rather than a broken circuit.
fn sim_exit_code(e: &SimError) -> i32 {
    match e {
        SimError::WidthMismatch { .. }
        | SimError::ValueTooWide { .. }
        | SimError::NonZeroAncillaInput { .. }
        | SimError::UnsupportedGate { .. }
        | SimError::WidthExceedsCap { .. } => 1,
        _ => 2,
    }
}

fn cmd_simulate(
    path: &Path,
    input: &str,
    backend: SimBackendArg,
    seed: Option<u64>,
    cap: Option<usize>,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .or_usage()?;
    let circuit = circuit_text::parse(&text).or_usage()?;
    let state = parse_input_bits(input, circuit.qubit_count())?;
    let as_failure = |e: SimError| Failure { code: sim_exit_code(&e), error: e.into() };

    let branches = match backend {
        SimBackendArg::Permutation => {
            let out = run_permutation(&circuit, &state).map_err(as_failure)?;
            let bits = bits_string(&out);
            println!("output {bits}");
            vec![BranchEcho { probability: 1.0, measurements: Vec::new(), output_bits: Some(bits) }]
        }
        SimBackendArg::Statevector => {
            let cap = cap
                .or_else(|| std::env::var(SV_CAP_VAR).ok()?.parse().ok())
                .unwrap_or_else(|| RunOptions::default().qubit_cap);
            let options = RunOptions {
                qubit_cap: cap,
                policy: match seed {
                    Some(seed) => BranchPolicy::Sample { seed },
                    None => BranchPolicy::EnumerateAll,
                },
                ..RunOptions::default()
            };
            let outcomes = run_statevector(&circuit, &state, &options).map_err(as_failure)?;
            outcomes
                .iter()
                .map(|o| {
                    let bits = basis_state_bits(&o.state, circuit.qubit_count());
                    let echo = BranchEcho {
                        probability: o.probability,
                        measurements: o
                            .measurements
                            .iter()
                            .map(|m| MeasurementEcho {
                                cbit: m.result.0,
                                outcome: m.outcome,
                                probability: m.probability,
                            })
                            .collect(),
                        output_bits: bits,
                    };
                    let desc = echo.output_bits.as_deref().unwrap_or("superposition");
                    println!("branch p={:.6} output {desc}", o.probability);
                    echo
                })
                .collect()
        }
    };
    write_json(
        json,
        &SimulateReport {
            file: path.display().to_string(),
            backend: match backend {
                SimBackendArg::Permutation => "permutation".into(),
                SimBackendArg::Statevector => "statevector".into(),
            },
            qubits: circuit.qubit_count(),
            input_bits: input.to_string(),
            seed,
            branches,
        },
    )
}

/// Renders a state as bits when it is concentrated on one basis vector.
fn basis_state_bits(state: &StateVector, qubits: usize) -> Option<String> {
    let (idx, peak) = state
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))?;
    if peak.norm_sqr() < 1.0 - 1e-9 {
        return None;
    }
    Some((0..qubits).map(|i| if idx >> i & 1 == 1 { '1' } else { '0' }).collect())
}

// ---- interpolate ----

fn formula_figures(n: u32) -> FormulaFigures {
    FormulaFigures {
        proposed_t_count: formula_proposed_interp_t_count(n),
        prior_t_count: formula_prior_interp_t_count(n),
        improvement: improvement_ratio(n),
        asymptotic_improvement: asymptotic_improvement_ratio(),
    }
}

fn cmd_interpolate(
    image_path: &Path,
    mode: ScaleMode,
    n: u32,
    subpixel: (u32, u32),
    backend: BackendArg,
    out: Option<&Path>,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let started = Instant::now();
    let text = std::fs::read_to_string(image_path)
        .with_context(|| format!("reading {}", image_path.display()))
        .or_usage()?;
    let image = pgm::read_pgm(&text).or_usage()?;
    let spec = InterpolationSpec { mode, m: image.m(), n, q: image.q() };
    spec.validate().or_usage()?;
    println!("in   {0}x{0}, {1}-bit colors", image.side(), image.q());

    let oracle = (backend != BackendArg::Sim)
        .then(|| interpolate_image(&image, &spec, Backend::Oracle, subpixel))
        .transpose()
        .or_usage()?;
    let simulated = (backend != BackendArg::Oracle)
        .then(|| interpolate_image(&image, &spec, Backend::PermutationSim, subpixel))
        .transpose()
        .or_verification()?;

    let agreement = match (&oracle, &simulated) {
        (Some(a), Some(b)) => {
            if let Some(diff) = first_difference(a, b) {
                let (y, x, want, got) = diff;
                return Err(verification_failure(format!(
                    "backends disagree at pixel ({y}, {x}): oracle {want}, simulation {got}"
                )));
            }
            println!("agreement oracle == simulation: yes");
            Some(true)
        }
        _ => None,
    };

    // census and measured costs describe the generated circuit
    let (census, measured) = if backend == BackendArg::Oracle {
        (None, None)
    } else {
        let (circuit, layout) = build_interpolation(&spec).or_usage()?;
        (Some(layout.census()), Some(count_resources(&circuit)))
    };
    if let Some(c) = &census {
        println!(
            "census {} adders, {} subtractors, {} multipliers, {} dividers",
            c.adders, c.subtractors, c.multipliers, c.dividers
        );
    }
    let formula = formula_figures(n);
    if let Some(r) = &measured {
        println!(
            "t-type measured {} (composed width-n formula {})",
            r.t_type_count(),
            formula.proposed_t_count
        );
    }

    let result = oracle.clone().or_else(|| simulated.clone()).expect("one backend ran");
    println!("out  {0}x{0}", result.side());
    if let Some(p) = out {
        std::fs::write(p, pgm::write_pgm(&result))
            .with_context(|| format!("writing {}", p.display()))
            .or_usage()?;
    }

    write_json(
        json,
        &RunReport {
            spec,
            subpixel,
            backend: match backend {
                BackendArg::Oracle => "oracle",
                BackendArg::Sim => "sim",
                BackendArg::Both => "both",
            }
            .into(),
            census,
            measured_within_formula: measured
                .as_ref()
                .map(|r| r.t_type_count() <= formula.proposed_t_count),
            measured,
            formula,
            backend_agreement: agreement,
            elapsed_ms: started.elapsed().as_millis(),
        },
    )
}

fn first_difference(a: &NeqrImage, b: &NeqrImage) -> Option<(u32, u32, u32, u32)> {
    for y in 0..a.side() {
        for x in 0..a.side() {
            if a.pixel(y, x) != b.pixel(y, x) {
                return Some((y, x, a.pixel(y, x), b.pixel(y, x)));
            }
        }
    }
    None
}
