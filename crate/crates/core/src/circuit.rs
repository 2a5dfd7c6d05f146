//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered gate list over an indexed set of qubit wires,
//! together with a table of named, non-overlapping registers and per-qubit
//! initial states. The gate set is Clifford+T plus three macro gates
//! (temporary AND, its measurement-based uncompute, and a Toffoli built from
//! the pair); [`Circuit::expand_macros`] lowers macros to primitives.
//!
//! Qubit `0` holds the least-significant bit of every value laid out on a
//! register, and bit `k` of a basis-state index corresponds to qubit `k`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Index of a qubit wire.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct QubitId(pub usize);

/// Identifier of a classical measurement result.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct CbitId(pub usize);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CbitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Purpose of a register within a circuit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegisterRole {
    PositionY,
    PositionX,
    Color,
    Constant,
    AncillaZero,
    AncillaMagic,
    Garbage,
    Output,
}

impl RegisterRole {
    /// Lowercase token used by the text format.
    pub fn as_str(self) -> &'static str {
        match self {
            RegisterRole::PositionY => "position_y",
            RegisterRole::PositionX => "position_x",
            RegisterRole::Color => "color",
            RegisterRole::Constant => "constant",
            RegisterRole::AncillaZero => "ancilla_zero",
            RegisterRole::AncillaMagic => "ancilla_magic",
            RegisterRole::Garbage => "garbage",
            RegisterRole::Output => "output",
        }
    }
}

impl core::str::FromStr for RegisterRole {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "position_y" => RegisterRole::PositionY,
            "position_x" => RegisterRole::PositionX,
            "color" => RegisterRole::Color,
            "constant" => RegisterRole::Constant,
            "ancilla_zero" => RegisterRole::AncillaZero,
            "ancilla_magic" => RegisterRole::AncillaMagic,
            "garbage" => RegisterRole::Garbage,
            "output" => RegisterRole::Output,
            _ => return Err(()),
        })
    }
}

/// State a qubit wire holds before the first gate.
///
/// `MagicA` is the T-basis resource state (|0> + e^{i pi/4}|1>)/sqrt(2)
/// consumed by a temporary-AND target.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InitialState {
    Zero,
    MagicA,
    Data,
}

/// How magic states reach temporary-AND targets.
///
/// `InitialState` injects them as circuit inputs, so each AND target must be
/// a fresh wire. `ExplicitGates` prepares them in place with an H and a T at
/// expansion time, which permits recycling released wires as AND targets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MagicPrep {
    InitialState,
    ExplicitGates,
}

/// A named, contiguous-by-convention group of qubits. Bit `i` of the value
/// lives on `qubits[i]`.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Register {
    pub name: String,
    pub role: RegisterRole,
    pub qubits: Vec<QubitId>,
}

impl Register {
    pub fn width(&self) -> usize {
        self.qubits.len()
    }
}

/// One gate in a circuit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gate {
    X(QubitId),
    H(QubitId),
    S(QubitId),
    T(QubitId),
    Tdg(QubitId),
    Cnot { control: QubitId, target: QubitId },
    Cz(QubitId, QubitId),
    /// Computes `target = a AND b` onto a magic-state ancilla.
    TemporaryAnd { a: QubitId, b: QubitId, target: QubitId },
    /// Erases a previously computed AND by X-basis measurement and a
    /// classically controlled phase fix on the controls.
    UncomputeAnd { a: QubitId, b: QubitId, target: QubitId },
    /// `target ^= a AND b`, lowered to an AND/CNOT/uncompute sandwich.
    Toffoli { a: QubitId, b: QubitId, target: QubitId },
    /// X-basis measurement; the wire is reset to |0> afterwards.
    MeasureX { qubit: QubitId, result: CbitId },
    /// CZ applied only on branches where `condition` measured 1.
    ClassicallyControlledCz { a: QubitId, b: QubitId, condition: CbitId },
}

/// Discriminant of [`Gate`], used for counting and the text format.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum GateKind {
    X,
    H,
    S,
    T,
    Tdg,
    Cnot,
    Cz,
    TemporaryAnd,
    UncomputeAnd,
    Toffoli,
    MeasureX,
    ClassicallyControlledCz,
}

impl GateKind {
    /// Canonical token used by the text format.
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::TemporaryAnd => "TemporaryAND",
            GateKind::UncomputeAnd => "UncomputeAND",
            GateKind::Toffoli => "Toffoli",
            GateKind::MeasureX => "MeasureX",
            GateKind::ClassicallyControlledCz => "ClassicallyControlledCZ",
        }
    }

    /// True for the three gates that [`Circuit::expand_macros`] rewrites.
    pub fn is_macro(self) -> bool {
        matches!(
            self,
            GateKind::TemporaryAnd | GateKind::UncomputeAnd | GateKind::Toffoli
        )
    }
}

impl core::str::FromStr for GateKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "X" => GateKind::X,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "T" => GateKind::T,
            "Tdg" => GateKind::Tdg,
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "TemporaryAND" => GateKind::TemporaryAnd,
            "UncomputeAND" => GateKind::UncomputeAnd,
            "Toffoli" => GateKind::Toffoli,
            "MeasureX" => GateKind::MeasureX,
            "ClassicallyControlledCZ" => GateKind::ClassicallyControlledCz,
            _ => return Err(()),
        })
    }
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) => GateKind::X,
            Gate::H(_) => GateKind::H,
            Gate::S(_) => GateKind::S,
            Gate::T(_) => GateKind::T,
            Gate::Tdg(_) => GateKind::Tdg,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cz(..) => GateKind::Cz,
            Gate::TemporaryAnd { .. } => GateKind::TemporaryAnd,
            Gate::UncomputeAnd { .. } => GateKind::UncomputeAnd,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::MeasureX { .. } => GateKind::MeasureX,
            Gate::ClassicallyControlledCz { .. } => GateKind::ClassicallyControlledCz,
        }
    }

    fn qubit_array(&self) -> ([QubitId; 3], usize) {
        let pad = QubitId(usize::MAX);
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::S(q) | Gate::T(q) | Gate::Tdg(q) => {
                ([q, pad, pad], 1)
            }
            Gate::Cnot { control, target } => ([control, target, pad], 2),
            Gate::Cz(a, b) => ([a, b, pad], 2),
            Gate::TemporaryAnd { a, b, target }
            | Gate::UncomputeAnd { a, b, target }
            | Gate::Toffoli { a, b, target } => ([a, b, target], 3),
            Gate::MeasureX { qubit, .. } => ([qubit, pad, pad], 1),
            Gate::ClassicallyControlledCz { a, b, .. } => ([a, b, pad], 2),
        }
    }

    /// Qubits the gate acts on, in declaration order.
    pub fn qubits(&self) -> impl Iterator<Item = QubitId> {
        let (arr, len) = self.qubit_array();
        arr.into_iter().take(len)
    }

    /// The classical bit the gate writes (`MeasureX`) or reads
    /// (`ClassicallyControlledCz`), if any.
    pub fn cbit(&self) -> Option<CbitId> {
        match *self {
            Gate::MeasureX { result, .. } => Some(result),
            Gate::ClassicallyControlledCz { condition, .. } => Some(condition),
            _ => None,
        }
    }
}

/// Errors raised while building a circuit.
#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum CircuitError {
    #[error("qubit {0} out of range (circuit has {1} qubits)")]
    QubitOutOfRange(usize, usize),
    #[error("gate operands must be distinct")]
    DuplicateOperands,
    #[error("qubit {0} was released and is not allocated to a register")]
    UseAfterRelease(usize),
    #[error("register name `{0}` is already in use")]
    DuplicateRegisterName(String),
    #[error("register width must be at least 1")]
    ZeroWidthRegister,
    #[error("register `{0}` not found")]
    UnknownRegister(String),
    #[error("qubit {0} already belongs to a live register")]
    QubitAliased(usize),
    #[error("register `{0}` has role `{1}` and cannot be released")]
    NotAnAncilla(String, &'static str),
    #[error("temporary-AND target {0} must be a fresh magic-state ancilla")]
    BadAndTarget(usize),
    #[error("magic-state qubit {0} must first be consumed as a temporary-AND target")]
    MagicFirstUse(usize),
    #[error("uncompute on target {0} does not match an open temporary-AND with the same controls")]
    UnmatchedUncompute(usize),
    #[error("register `{0}` holds an open temporary-AND target and cannot be released")]
    OpenAndRelease(String),
    #[error("measurement results must be numbered in sequence (expected {expected}, got {got})")]
    NonSequentialCbit { expected: usize, got: usize },
    #[error("classical bit {0} has not been produced at this point")]
    UnknownCbit(usize),
    #[error("initial state of qubit {0} cannot change after it has been used")]
    InitialStateFixed(usize),
}

/// A Clifford+T circuit with macro gates, registers, and ancilla bookkeeping.
#[derive(Clone, Debug)]
pub struct Circuit {
    qubit_count: usize,
    cbit_count: usize,
    gates: Vec<Gate>,
    initial: Vec<InitialState>,
    registers: BTreeMap<String, Register>,
    released: Vec<bool>,
    free_pool: Vec<QubitId>,
    used: Vec<bool>,
    open_ands: BTreeMap<usize, (usize, usize)>,
    magic_prep: MagicPrep,
    ancilla_live: usize,
    ancilla_high_water: usize,
    release_log: Vec<(usize, QubitId)>,
    anon_counter: usize,
    // Expanded circuits carry AND networks as raw primitives, where the
    // "magic qubits must first be an AND target" rule no longer applies.
    relaxed_magic_rule: bool,
}

impl Circuit {
    /// A circuit over `qubit_count` bare data wires and no registers.
    pub fn new(qubit_count: usize) -> Self {
        Circuit::with_magic_prep(qubit_count, MagicPrep::InitialState)
    }

    /// Like [`Circuit::new`] with an explicit magic-state policy.
    pub fn with_magic_prep(qubit_count: usize, magic_prep: MagicPrep) -> Self {
        Circuit {
            qubit_count,
            cbit_count: 0,
            gates: Vec::new(),
            initial: vec![InitialState::Data; qubit_count],
            registers: BTreeMap::new(),
            released: vec![false; qubit_count],
            free_pool: Vec::new(),
            used: vec![false; qubit_count],
            open_ands: BTreeMap::new(),
            magic_prep,
            ancilla_live: 0,
            ancilla_high_water: 0,
            release_log: Vec::new(),
            anon_counter: 0,
            relaxed_magic_rule: false,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn cbit_count(&self) -> usize {
        self.cbit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn magic_prep(&self) -> MagicPrep {
        self.magic_prep
    }

    pub fn initial_state(&self, q: QubitId) -> InitialState {
        self.initial[q.0]
    }

    /// Live registers in name order.
    pub fn registers(&self) -> impl Iterator<Item = &Register> {
        self.registers.values()
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.get(name)
    }

    /// Qubits whose initial state is caller-supplied data, in index order.
    pub fn data_qubits(&self) -> Vec<QubitId> {
        (0..self.qubit_count)
            .filter(|&q| self.initial[q] == InitialState::Data)
            .map(QubitId)
            .collect()
    }

    /// Highest number of ancilla-role qubits live at once.
    pub fn ancilla_high_water(&self) -> usize {
        self.ancilla_high_water
    }

    /// `(gate_index, qubit)` pairs recording where ancillas were released.
    /// Simulators assert the wire is |0> when crossing the recorded index.
    pub fn release_log(&self) -> &[(usize, QubitId)] {
        &self.release_log
    }

    /// Drops the magic-wire first-use and AND-target restrictions, for
    /// deserializers replaying circuits that were validated when built
    /// (expanded networks touch magic wires with plain gates).
    pub fn relax_magic_rule(&mut self) {
        self.relaxed_magic_rule = true;
    }

    /// True when no macro gates remain.
    pub fn is_primitive(&self) -> bool {
        !self.gates.iter().any(|g| g.kind().is_macro())
    }

    /// Overrides the pre-gate state of a wire. Only callable before the wire
    /// is touched by a gate; used by the text-format parser.
    pub fn set_initial_state(
        &mut self,
        q: QubitId,
        state: InitialState,
    ) -> Result<(), CircuitError> {
        if q.0 >= self.qubit_count {
            return Err(CircuitError::QubitOutOfRange(q.0, self.qubit_count));
        }
        if self.used[q.0] {
            return Err(CircuitError::InitialStateFixed(q.0));
        }
        self.initial[q.0] = state;
        Ok(())
    }

    fn initial_for(&self, role: RegisterRole) -> InitialState {
        match role {
            RegisterRole::PositionY | RegisterRole::PositionX | RegisterRole::Color => {
                InitialState::Data
            }
            RegisterRole::AncillaMagic => match self.magic_prep {
                MagicPrep::InitialState => InitialState::MagicA,
                MagicPrep::ExplicitGates => InitialState::Zero,
            },
            _ => InitialState::Zero,
        }
    }

    /// Allocates a fresh register, recycling released wires when permitted.
    ///
    /// Magic ancillas are never recycled under [`MagicPrep::InitialState`]:
    /// the magic state arrives as an input, so each AND target must be a
    /// brand-new wire.
    pub fn alloc_register(
        &mut self,
        name: &str,
        width: usize,
        role: RegisterRole,
    ) -> Result<Register, CircuitError> {
        if width == 0 {
            return Err(CircuitError::ZeroWidthRegister);
        }
        if self.registers.contains_key(name) {
            return Err(CircuitError::DuplicateRegisterName(name.to_string()));
        }
        let fresh_only = role == RegisterRole::AncillaMagic
            && self.magic_prep == MagicPrep::InitialState;
        let mut qubits = Vec::with_capacity(width);
        for _ in 0..width {
            let recycled = if fresh_only { None } else { self.free_pool.pop() };
            let q = match recycled {
                // A recycled wire keeps its original initial state; it is
                // back in |0> at this point regardless.
                Some(q) => {
                    self.released[q.0] = false;
                    q
                }
                None => {
                    let q = QubitId(self.qubit_count);
                    self.qubit_count += 1;
                    self.initial.push(self.initial_for(role));
                    self.released.push(false);
                    self.used.push(false);
                    q
                }
            };
            qubits.push(q);
        }
        if matches!(role, RegisterRole::AncillaZero | RegisterRole::AncillaMagic) {
            self.ancilla_live += width;
            self.ancilla_high_water = self.ancilla_high_water.max(self.ancilla_live);
        }
        let reg = Register {
            name: name.to_string(),
            role,
            qubits,
        };
        self.registers.insert(name.to_string(), reg.clone());
        Ok(reg)
    }

    /// Allocates a register with a generated name (for block internals).
    pub(crate) fn alloc_anon(
        &mut self,
        width: usize,
        role: RegisterRole,
    ) -> Result<Register, CircuitError> {
        let name = format!("_anc{}", self.anon_counter);
        self.anon_counter += 1;
        self.alloc_register(&name, width, role)
    }

    /// Adopts existing bare wires into a named register (text-format parser).
    pub fn attach_register(
        &mut self,
        name: &str,
        role: RegisterRole,
        qubits: Vec<QubitId>,
    ) -> Result<Register, CircuitError> {
        if qubits.is_empty() {
            return Err(CircuitError::ZeroWidthRegister);
        }
        if self.registers.contains_key(name) {
            return Err(CircuitError::DuplicateRegisterName(name.to_string()));
        }
        for &q in &qubits {
            if q.0 >= self.qubit_count {
                return Err(CircuitError::QubitOutOfRange(q.0, self.qubit_count));
            }
            if self.released[q.0] {
                return Err(CircuitError::UseAfterRelease(q.0));
            }
            for reg in self.registers.values() {
                if reg.qubits.contains(&q) {
                    return Err(CircuitError::QubitAliased(q.0));
                }
            }
        }
        let mut seen = qubits.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != qubits.len() {
            return Err(CircuitError::DuplicateOperands);
        }
        let reg = Register {
            name: name.to_string(),
            role,
            qubits,
        };
        self.registers.insert(name.to_string(), reg.clone());
        Ok(reg)
    }

    /// Returns an ancilla register's wires to the recycle pool.
    ///
    /// The caller asserts the wires are back in |0>; simulators check this at
    /// the recorded release point.
    pub fn release_ancilla(&mut self, reg: &Register) -> Result<(), CircuitError> {
        let live = self
            .registers
            .get(reg.name.as_str())
            .ok_or_else(|| CircuitError::UnknownRegister(reg.name.clone()))?;
        if live.qubits != reg.qubits {
            return Err(CircuitError::UnknownRegister(reg.name.clone()));
        }
        if !matches!(
            live.role,
            RegisterRole::AncillaZero | RegisterRole::AncillaMagic
        ) {
            return Err(CircuitError::NotAnAncilla(
                reg.name.clone(),
                live.role.as_str(),
            ));
        }
        for &q in &reg.qubits {
            if self.open_ands.contains_key(&q.0) {
                return Err(CircuitError::OpenAndRelease(reg.name.clone()));
            }
        }
        let width = reg.qubits.len();
        self.registers.remove(reg.name.as_str());
        for &q in &reg.qubits {
            self.released[q.0] = true;
            self.free_pool.push(q);
            self.release_log.push((self.gates.len(), q));
        }
        self.ancilla_live -= width;
        Ok(())
    }

    /// Appends one gate after validating it.
    pub fn append(&mut self, gate: Gate) -> Result<(), CircuitError> {
        let (arr, len) = gate.qubit_array();
        let ops = &arr[..len];
        for &q in ops {
            if q.0 >= self.qubit_count {
                return Err(CircuitError::QubitOutOfRange(q.0, self.qubit_count));
            }
            if self.released[q.0] {
                return Err(CircuitError::UseAfterRelease(q.0));
            }
        }
        for (i, &q) in ops.iter().enumerate() {
            if ops[..i].contains(&q) {
                return Err(CircuitError::DuplicateOperands);
            }
        }
        // A wire that starts in the magic state may only enter the circuit
        // as the target of a temporary AND.
        if !self.relaxed_magic_rule {
            // An UncomputeAnd target is exempt here: if it never computed an
            // AND the match check below rejects it with a sharper error.
            let and_target = match gate {
                Gate::TemporaryAnd { target, .. } | Gate::UncomputeAnd { target, .. } => {
                    Some(target)
                }
                _ => None,
            };
            for &q in ops {
                if self.initial[q.0] == InitialState::MagicA
                    && !self.used[q.0]
                    && and_target != Some(q)
                {
                    return Err(CircuitError::MagicFirstUse(q.0));
                }
            }
        }
        match gate {
            Gate::TemporaryAnd { a, b, target } => {
                if self.open_ands.contains_key(&target.0) {
                    return Err(CircuitError::BadAndTarget(target.0));
                }
                if !self.relaxed_magic_rule {
                    let ok = match self.magic_prep {
                        MagicPrep::InitialState => {
                            self.initial[target.0] == InitialState::MagicA
                                && !self.used[target.0]
                        }
                        // With explicit preparation any |0> ancilla wire works,
                        // including recycled ones; data wires never do.
                        MagicPrep::ExplicitGates => {
                            self.initial[target.0] != InitialState::Data
                        }
                    };
                    if !ok {
                        return Err(CircuitError::BadAndTarget(target.0));
                    }
                }
                self.open_ands.insert(target.0, (a.0, b.0));
            }
            Gate::UncomputeAnd { a, b, target } => {
                let matches_open = match self.open_ands.get(&target.0) {
                    Some(&(x, y)) => (x, y) == (a.0, b.0) || (x, y) == (b.0, a.0),
                    None => false,
                };
                if !matches_open {
                    return Err(CircuitError::UnmatchedUncompute(target.0));
                }
                self.open_ands.remove(&target.0);
            }
            Gate::MeasureX { result, .. } => {
                if result.0 != self.cbit_count {
                    return Err(CircuitError::NonSequentialCbit {
                        expected: self.cbit_count,
                        got: result.0,
                    });
                }
                self.cbit_count += 1;
            }
            Gate::ClassicallyControlledCz { condition, .. } => {
                if condition.0 >= self.cbit_count {
                    return Err(CircuitError::UnknownCbit(condition.0));
                }
            }
            _ => {}
        }
        for &q in ops {
            self.used[q.0] = true;
        }
        self.gates.push(gate);
        Ok(())
    }

    // ---- append helpers ----

    pub fn x(&mut self, q: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::X(q))
    }

    pub fn h(&mut self, q: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::H(q))
    }

    pub fn s(&mut self, q: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::S(q))
    }

    pub fn t(&mut self, q: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::T(q))
    }

    pub fn tdg(&mut self, q: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::Tdg(q))
    }

    pub fn cnot(&mut self, control: QubitId, target: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::Cnot { control, target })
    }

    pub fn cz(&mut self, a: QubitId, b: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::Cz(a, b))
    }

    pub fn toffoli(&mut self, a: QubitId, b: QubitId, target: QubitId) -> Result<(), CircuitError> {
        self.append(Gate::Toffoli { a, b, target })
    }

    pub fn temporary_and(
        &mut self,
        a: QubitId,
        b: QubitId,
        target: QubitId,
    ) -> Result<(), CircuitError> {
        self.append(Gate::TemporaryAnd { a, b, target })
    }

    pub fn uncompute_and(
        &mut self,
        a: QubitId,
        b: QubitId,
        target: QubitId,
    ) -> Result<(), CircuitError> {
        self.append(Gate::UncomputeAnd { a, b, target })
    }

    /// Appends an X-basis measurement and returns its result id.
    pub fn measure_x(&mut self, qubit: QubitId) -> Result<CbitId, CircuitError> {
        let result = CbitId(self.cbit_count);
        self.append(Gate::MeasureX { qubit, result })?;
        Ok(result)
    }

    pub fn classically_controlled_cz(
        &mut self,
        a: QubitId,
        b: QubitId,
        condition: CbitId,
    ) -> Result<(), CircuitError> {
        self.append(Gate::ClassicallyControlledCz { a, b, condition })
    }

    // ---- macro expansion ----

    /// Lowers macro gates to Clifford+T primitives plus measurements.
    ///
    /// Every `TemporaryAnd` becomes the magic-state AND network (two CNOTs
    /// into the target, a fan-out, Tdg/Tdg/T, the fan-out again, then H and
    /// S on the target; preceded by H,T preparation under
    /// [`MagicPrep::ExplicitGates`]). Every `UncomputeAnd` becomes an X-basis
    /// measurement plus a classically controlled CZ on its controls. Every
    /// `Toffoli` allocates a one-wire magic ancilla, computes the AND, CNOTs
    /// it into the target, and uncomputes.
    ///
    /// The result carries the same registers and initial states (plus any
    /// Toffoli ancillas) and remaps measurement ids in order.
    pub fn expand_macros(&self) -> Circuit {
        let mut out = Circuit {
            qubit_count: self.qubit_count,
            cbit_count: 0,
            gates: Vec::with_capacity(self.gates.len()),
            initial: self.initial.clone(),
            registers: self.registers.clone(),
            // The source already validated wire lifetimes; release points
            // are replayed into the log below without re-marking wires, so
            // re-validation here would reject gates that precede a release.
            released: vec![false; self.qubit_count],
            free_pool: Vec::new(),
            used: vec![false; self.qubit_count],
            open_ands: BTreeMap::new(),
            magic_prep: self.magic_prep,
            ancilla_live: self.ancilla_live,
            ancilla_high_water: self.ancilla_high_water,
            release_log: Vec::new(),
            anon_counter: self.anon_counter,
            relaxed_magic_rule: true,
        };
        // Releases recorded between original gate positions must land
        // between the corresponding expansions.
        let mut releases = self.release_log.iter().peekable();
        let mut cbit_map: Vec<CbitId> = Vec::with_capacity(self.cbit_count);
        let a_err = "macro expansion emits pre-validated gates";
        for (pos, gate) in self.gates.iter().enumerate() {
            while let Some(&&(at, q)) = releases.peek() {
                if at > pos {
                    break;
                }
                out.release_log.push((out.gates.len(), q));
                releases.next();
            }
            match *gate {
                Gate::TemporaryAnd { a, b, target } => {
                    out.emit_and_network(a, b, target).expect(a_err);
                }
                Gate::UncomputeAnd { a, b, target } => {
                    let m = out.measure_x(target).expect(a_err);
                    out.classically_controlled_cz(a, b, m).expect(a_err);
                }
                Gate::Toffoli { a, b, target } => {
                    let anc = out
                        .alloc_anon(1, RegisterRole::AncillaMagic)
                        .expect(a_err);
                    let t = anc.qubits[0];
                    out.emit_and_network(a, b, t).expect(a_err);
                    out.cnot(t, target).expect(a_err);
                    let m = out.measure_x(t).expect(a_err);
                    out.classically_controlled_cz(a, b, m).expect(a_err);
                    out.release_ancilla(&anc).expect(a_err);
                }
                Gate::MeasureX { qubit, result } => {
                    let m = out.measure_x(qubit).expect(a_err);
                    debug_assert_eq!(result.0, cbit_map.len());
                    cbit_map.push(m);
                }
                Gate::ClassicallyControlledCz { a, b, condition } => {
                    let m = cbit_map[condition.0];
                    out.classically_controlled_cz(a, b, m).expect(a_err);
                }
                other => out.append(other).expect(a_err),
            }
        }
        for &(_, q) in releases {
            out.release_log.push((out.gates.len(), q));
        }
        out
    }

    fn emit_and_network(
        &mut self,
        a: QubitId,
        b: QubitId,
        t: QubitId,
    ) -> Result<(), CircuitError> {
        if self.magic_prep == MagicPrep::ExplicitGates {
            self.h(t)?;
            self.t(t)?;
        }
        self.cnot(a, t)?;
        self.cnot(b, t)?;
        self.cnot(t, a)?;
        self.cnot(t, b)?;
        self.tdg(a)?;
        self.tdg(b)?;
        self.t(t)?;
        self.cnot(t, a)?;
        self.cnot(t, b)?;
        self.h(t)?;
        self.s(t)?;
        Ok(())
    }
}
