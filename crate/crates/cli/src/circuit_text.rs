//! Plain-text circuit files.
//!
//! ```text
//! qubits 5
//! reg a color 0 1
//! reg b color 2 3
//! reg _magic4 ancilla_magic 4
//! TemporaryAND 0 2 4
//! MeasureX 4 @0
//! ClassicallyControlledCZ 0 2 @0
//! ```
//!
//! One statement per line: a `qubits <N>` header, then `reg <name> <role>
//! <idx...>` lines, then gates as `<KIND> <idx...> [@<cbit>]`. `#` starts a
//! comment. Wires the emitter finds outside every register are written as
//! synthetic `_zero<i>`/`_magic<i>` registers when their initial state
//! matters; plain data wires need no declaration. Release checkpoints are
//! not serialized. Parsing then emitting reproduces emitted text verbatim.
//!
//! The format carries no initial-state column, so the parser reconstructs
//! initials from roles. One case needs gate context: a multiplier writes
//! product bits straight onto its AND targets, leaving magic-state wires
//! inside ordinary registers. Those are recognized by their first use,
//! since only a fresh magic wire may serve as a temporary-AND target.

use std::collections::HashSet;
use std::fmt::Write as _;

use qbilerp_core::{
    CbitId, Circuit, CircuitError, Gate, GateKind, InitialState, QubitId, RegisterRole,
};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Circuit {
        line: usize,
        source: CircuitError,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> TextError {
    TextError::Parse { line, msg: msg.into() }
}

/// Serializes a circuit in canonical form.
pub fn emit(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "qubits {}", c.qubit_count()).unwrap();

    let mut covered = vec![false; c.qubit_count()];
    let mut reg_lines: Vec<(usize, String)> = Vec::new();
    for reg in c.registers() {
        let mut line = format!("reg {} {}", reg.name, reg.role.as_str());
        for &q in &reg.qubits {
            covered[q.0] = true;
            write!(line, " {}", q.0).unwrap();
        }
        let first = reg.qubits.iter().map(|q| q.0).min().unwrap_or(0);
        reg_lines.push((first, line));
    }
    // group leftover non-data wires into runs of one initial state
    let mut i = 0;
    while i < c.qubit_count() {
        let state = c.initial_state(QubitId(i));
        if covered[i] || state == InitialState::Data {
            i += 1;
            continue;
        }
        let start = i;
        let (prefix, role) = match state {
            InitialState::Zero => ("_zero", RegisterRole::AncillaZero),
            InitialState::MagicA => ("_magic", RegisterRole::AncillaMagic),
            InitialState::Data => unreachable!(),
        };
        let mut line = format!("reg {prefix}{start} {}", role.as_str());
        while i < c.qubit_count() && !covered[i] && c.initial_state(QubitId(i)) == state {
            write!(line, " {i}").unwrap();
            i += 1;
        }
        reg_lines.push((start, line));
    }
    reg_lines.sort();
    for (_, line) in reg_lines {
        out.push_str(&line);
        out.push('\n');
    }

    for gate in c.gates() {
        out.push_str(gate.kind().as_str());
        for q in gate.qubits() {
            write!(out, " {}", q.0).unwrap();
        }
        if let Some(cbit) = gate.cbit() {
            write!(out, " @{}", cbit.0).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the text format back into a validated circuit.
///
/// Files holding only primitive gates are assumed to be expanded forms, so
/// the builder's magic-wire discipline (first use as an AND target) is
/// relaxed for them; files with macro gates are validated in full.
pub fn parse(text: &str) -> Result<Circuit, TextError> {
    let mut circuit: Option<Circuit> = None;
    let mut gates_started = false;

    let statements = text.lines().enumerate().filter_map(|(i, raw)| {
        let stmt = raw.split('#').next().unwrap_or("").trim();
        if stmt.is_empty() {
            None
        } else {
            Some((i + 1, stmt))
        }
    });

    // pre-scan gates for macro use and for wires first used as AND targets
    let mut has_macro = false;
    let mut inferred_magic = HashSet::new();
    let mut seen = HashSet::new();
    for (_, stmt) in statements.clone() {
        let mut toks = tokens_of(stmt);
        let Some(kind) = toks.next().and_then(|t| t.parse::<GateKind>().ok()) else {
            continue;
        };
        has_macro |= kind.is_macro();
        let qubits: Vec<usize> = toks
            .take_while(|t| !t.starts_with('@'))
            .filter_map(|t| t.parse().ok())
            .collect();
        if kind == GateKind::TemporaryAnd && qubits.len() == 3 && !seen.contains(&qubits[2]) {
            inferred_magic.insert(qubits[2]);
        }
        seen.extend(qubits);
    }

    for (line, stmt) in statements {
        let mut tokens = tokens_of(stmt);
        let head = tokens.next().expect("nonempty statement");

        let Some(c) = circuit.as_mut() else {
            if head != "qubits" {
                return Err(parse_err(line, "expected `qubits <N>` header"));
            }
            let n: usize = tokens
                .next()
                .ok_or_else(|| parse_err(line, "missing qubit count"))?
                .parse()
                .map_err(|_| parse_err(line, "qubit count must be an integer"))?;
            if tokens.next().is_some() {
                return Err(parse_err(line, "trailing tokens after qubit count"));
            }
            let mut c = Circuit::new(n);
            if !has_macro {
                c.relax_magic_rule();
            }
            circuit = Some(c);
            continue;
        };

        if head == "qubits" {
            return Err(parse_err(line, "duplicate `qubits` header"));
        }
        if head == "reg" {
            if gates_started {
                return Err(parse_err(line, "register declared after gates"));
            }
            parse_reg(c, line, tokens, &inferred_magic)?;
            continue;
        }
        gates_started = true;
        parse_gate(c, line, head, tokens)?;
    }
    circuit.ok_or_else(|| parse_err(0, "empty circuit file".to_string()))
}

fn tokens_of(stmt: &str) -> impl Iterator<Item = &str> + Clone {
    stmt.split_whitespace()
}

fn parse_reg<'a>(
    c: &mut Circuit,
    line: usize,
    mut tokens: impl Iterator<Item = &'a str>,
    inferred_magic: &HashSet<usize>,
) -> Result<(), TextError> {
    let name = tokens
        .next()
        .ok_or_else(|| parse_err(line, "missing register name"))?;
    let role: RegisterRole = tokens
        .next()
        .ok_or_else(|| parse_err(line, "missing register role"))?
        .parse()
        .map_err(|_| parse_err(line, "unknown register role"))?;
    let mut qubits = Vec::new();
    for tok in tokens {
        let idx: usize = tok
            .parse()
            .map_err(|_| parse_err(line, format!("bad qubit index `{tok}`")))?;
        qubits.push(QubitId(idx));
    }
    let reg = c
        .attach_register(name, role, qubits)
        .map_err(|source| TextError::Circuit { line, source })?;
    let initial = match role {
        RegisterRole::PositionY | RegisterRole::PositionX | RegisterRole::Color => {
            InitialState::Data
        }
        RegisterRole::AncillaMagic => InitialState::MagicA,
        _ => InitialState::Zero,
    };
    for &q in &reg.qubits {
        // zero-initial roles other than the explicit ancilla_zero may hold
        // wires that were AND targets; those started in the magic state
        let state = if initial == InitialState::Zero
            && role != RegisterRole::AncillaZero
            && inferred_magic.contains(&q.0)
        {
            InitialState::MagicA
        } else {
            initial
        };
        c.set_initial_state(q, state)
            .map_err(|source| TextError::Circuit { line, source })?;
    }
    Ok(())
}

fn parse_gate<'a>(
    c: &mut Circuit,
    line: usize,
    head: &str,
    tokens: impl Iterator<Item = &'a str>,
) -> Result<(), TextError> {
    let kind: GateKind = head
        .parse()
        .map_err(|_| parse_err(line, format!("unknown gate `{head}`")))?;
    let mut qubits = Vec::new();
    let mut cbit: Option<usize> = None;
    for tok in tokens {
        if let Some(id) = tok.strip_prefix('@') {
            if cbit.is_some() {
                return Err(parse_err(line, "more than one classical id"));
            }
            cbit = Some(
                id.parse()
                    .map_err(|_| parse_err(line, format!("bad classical id `{tok}`")))?,
            );
        } else {
            if cbit.is_some() {
                return Err(parse_err(line, "qubit index after classical id"));
            }
            qubits.push(QubitId(tok.parse().map_err(|_| {
                parse_err(line, format!("bad qubit index `{tok}`"))
            })?));
        }
    }

    let arity_err = |want: usize, with_cbit: bool| {
        parse_err(
            line,
            format!(
                "{head} takes {want} qubit index{} {}a classical id",
                if want == 1 { "" } else { "es" },
                if with_cbit { "and " } else { "and no " }
            ),
        )
    };
    let want_cbit = matches!(kind, GateKind::MeasureX | GateKind::ClassicallyControlledCz);
    let want_qubits = match kind {
        GateKind::X | GateKind::H | GateKind::S | GateKind::T | GateKind::Tdg
        | GateKind::MeasureX => 1,
        GateKind::Cnot | GateKind::Cz | GateKind::ClassicallyControlledCz => 2,
        GateKind::TemporaryAnd | GateKind::UncomputeAnd | GateKind::Toffoli => 3,
    };
    if qubits.len() != want_qubits || cbit.is_some() != want_cbit {
        return Err(arity_err(want_qubits, want_cbit));
    }

    let q = |i: usize| qubits[i];
    let gate = match kind {
        GateKind::X => Gate::X(q(0)),
        GateKind::H => Gate::H(q(0)),
        GateKind::S => Gate::S(q(0)),
        GateKind::T => Gate::T(q(0)),
        GateKind::Tdg => Gate::Tdg(q(0)),
        GateKind::Cnot => Gate::Cnot { control: q(0), target: q(1) },
        GateKind::Cz => Gate::Cz(q(0), q(1)),
        GateKind::TemporaryAnd => Gate::TemporaryAnd { a: q(0), b: q(1), target: q(2) },
        GateKind::UncomputeAnd => Gate::UncomputeAnd { a: q(0), b: q(1), target: q(2) },
        GateKind::Toffoli => Gate::Toffoli { a: q(0), b: q(1), target: q(2) },
        GateKind::MeasureX => {
            let want = cbit.expect("checked above");
            if want != c.cbit_count() {
                return Err(parse_err(
                    line,
                    format!("measurement ids must be sequential; expected @{}", c.cbit_count()),
                ));
            }
            Gate::MeasureX { qubit: q(0), result: CbitId(want) }
        }
        GateKind::ClassicallyControlledCz => Gate::ClassicallyControlledCz {
            a: q(0),
            b: q(1),
            condition: CbitId(cbit.expect("checked above")),
        },
    };
    c.append(gate)
        .map_err(|source| TextError::Circuit { line, source })
}
