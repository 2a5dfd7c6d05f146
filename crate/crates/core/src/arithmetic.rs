//! Reversible integer arithmetic from temporary-AND gadgets.
//!
//! All blocks are in-place on little-endian registers (wire `i` carries bit
//! `2^i`). The carry chain follows the measurement-assisted ripple scheme:
//! one temporary AND per carry on the way up, one free uncompute per carry
//! on the way down, leaving the first operand and every ancilla untouched.
//!
//! T-type costs, exact:
//!
//! * adder, `b += a mod 2^n`: `4(n-1)`
//! * subtractor, `b -= a mod 2^n`: `4(n-1)` plus nothing (X gates are free),
//!   quoted as `4n-4`
//! * conditional adder, `b += ctrl*a mod 2^n`: `8n-4`
//! * multiplier, `p = a*b` over `2n` wires: `8n^2 - 4n`

use alloc::string::String;
use alloc::vec::Vec;

use crate::circuit::{Circuit, CircuitError, QubitId, Register, RegisterRole};

/// Errors raised while emitting arithmetic blocks.
#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum ArithmeticError {
    #[error("operand widths differ: {a} vs {b}")]
    WidthMismatch { a: usize, b: usize },
    #[error("operands must be at least 1 bit wide")]
    EmptyOperand,
    #[error("operands share qubit {0}")]
    OverlappingOperands(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// A named wire group an arithmetic block reads or writes. Thinner than
/// [`Register`]: it may describe a slice of one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Operand {
    pub label: String,
    pub qubits: Vec<QubitId>,
}

impl Operand {
    pub fn new(label: impl Into<String>, qubits: Vec<QubitId>) -> Self {
        Operand {
            label: label.into(),
            qubits,
        }
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }
}

impl From<&Register> for Operand {
    fn from(reg: &Register) -> Self {
        Operand {
            label: reg.name.clone(),
            qubits: reg.qubits.clone(),
        }
    }
}

/// What kind of block a gate span implements.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BlockKind {
    Adder,
    ConditionalAdder,
    Subtractor,
    Multiplier,
}

/// Record of one emitted block: its kind, operand width, the operands, and
/// the half-open gate index span it occupies in the circuit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ArithmeticBlock {
    pub kind: BlockKind,
    pub width: usize,
    pub operands: Vec<Operand>,
    pub gate_span: core::ops::Range<usize>,
}

fn check_disjoint(groups: &[&[QubitId]]) -> Result<(), ArithmeticError> {
    let mut all: Vec<usize> = groups
        .iter()
        .flat_map(|g| g.iter().map(|q| q.0))
        .collect();
    all.sort_unstable();
    for w in all.windows(2) {
        if w[0] == w[1] {
            return Err(ArithmeticError::OverlappingOperands(w[0]));
        }
    }
    Ok(())
}

/// Ripple core: `b += a`, in place on `b`.
///
/// With `b.len() == a.len()` the sum is reduced mod `2^n` (n-1 carries).
/// With `b.len() == a.len() + 1` the final carry lands on the extra top wire
/// of `b`, so the sum is exact when that wire starts at 0 (n carries).
fn emit_add_core(c: &mut Circuit, a: &[QubitId], b: &[QubitId]) -> Result<(), CircuitError> {
    let n = a.len();
    debug_assert!(b.len() == n || b.len() == n + 1);
    let carried_out = b.len() == n + 1;
    let ands = if carried_out { n } else { n - 1 };
    if ands == 0 {
        return c.cnot(a[0], b[0]);
    }
    let carries = c.alloc_anon(ands, RegisterRole::AncillaMagic)?;
    let carry = &carries.qubits;
    for i in 0..ands {
        if i > 0 {
            c.cnot(carry[i - 1], a[i])?;
            c.cnot(carry[i - 1], b[i])?;
        }
        c.temporary_and(a[i], b[i], carry[i])?;
        if i > 0 {
            c.cnot(carry[i - 1], carry[i])?;
        }
    }
    if carried_out {
        c.cnot(carry[n - 1], b[n])?;
    } else {
        c.cnot(carry[n - 2], b[n - 1])?;
        c.cnot(a[n - 1], b[n - 1])?;
    }
    for i in (0..ands).rev() {
        if i > 0 {
            c.cnot(carry[i - 1], carry[i])?;
        }
        c.uncompute_and(a[i], b[i], carry[i])?;
        if i > 0 {
            c.cnot(carry[i - 1], a[i])?;
        }
        c.cnot(a[i], b[i])?;
    }
    c.release_ancilla(&carries)
}

/// `b += a mod 2^n`; `a` is preserved.
pub fn build_adder(
    c: &mut Circuit,
    a: impl Into<Operand>,
    b: impl Into<Operand>,
) -> Result<ArithmeticBlock, ArithmeticError> {
    let (a, b) = (a.into(), b.into());
    if a.width() == 0 {
        return Err(ArithmeticError::EmptyOperand);
    }
    if a.width() != b.width() {
        return Err(ArithmeticError::WidthMismatch {
            a: a.width(),
            b: b.width(),
        });
    }
    check_disjoint(&[&a.qubits, &b.qubits])?;
    let start = c.gates().len();
    emit_add_core(c, &a.qubits, &b.qubits)?;
    Ok(ArithmeticBlock {
        kind: BlockKind::Adder,
        width: a.width(),
        gate_span: start..c.gates().len(),
        operands: alloc::vec![a, b],
    })
}

/// `b -= a mod 2^n` by complementing `b` around an addition; `a` preserved.
pub fn build_subtractor(
    c: &mut Circuit,
    a: impl Into<Operand>,
    b: impl Into<Operand>,
) -> Result<ArithmeticBlock, ArithmeticError> {
    let (a, b) = (a.into(), b.into());
    if a.width() == 0 {
        return Err(ArithmeticError::EmptyOperand);
    }
    if a.width() != b.width() {
        return Err(ArithmeticError::WidthMismatch {
            a: a.width(),
            b: b.width(),
        });
    }
    check_disjoint(&[&a.qubits, &b.qubits])?;
    let start = c.gates().len();
    for &q in &b.qubits {
        c.x(q)?;
    }
    emit_add_core(c, &a.qubits, &b.qubits)?;
    for &q in &b.qubits {
        c.x(q)?;
    }
    Ok(ArithmeticBlock {
        kind: BlockKind::Subtractor,
        width: a.width(),
        gate_span: start..c.gates().len(),
        operands: alloc::vec![a, b],
    })
}

/// `b += a mod 2^n` when `control` is 1, identity otherwise; `a` preserved.
///
/// Gates the operand into a scratch register with one AND per bit, adds the
/// scratch, then uncomputes it.
pub fn build_conditional_adder(
    c: &mut Circuit,
    control: QubitId,
    a: impl Into<Operand>,
    b: impl Into<Operand>,
) -> Result<ArithmeticBlock, ArithmeticError> {
    let (a, b) = (a.into(), b.into());
    if a.width() == 0 {
        return Err(ArithmeticError::EmptyOperand);
    }
    if a.width() != b.width() {
        return Err(ArithmeticError::WidthMismatch {
            a: a.width(),
            b: b.width(),
        });
    }
    check_disjoint(&[&a.qubits, &b.qubits, core::slice::from_ref(&control)])?;
    let start = c.gates().len();
    emit_conditional_add(c, control, &a.qubits, &b.qubits)?;
    Ok(ArithmeticBlock {
        kind: BlockKind::ConditionalAdder,
        width: a.width(),
        gate_span: start..c.gates().len(),
        operands: alloc::vec![
            Operand::new("control", alloc::vec![control]),
            a,
            b
        ],
    })
}

/// Core of the conditional add; `b` may carry one extra top wire, which
/// receives the exact carry as in [`emit_add_core`].
fn emit_conditional_add(
    c: &mut Circuit,
    control: QubitId,
    a: &[QubitId],
    b: &[QubitId],
) -> Result<(), CircuitError> {
    let n = a.len();
    let gated = c.alloc_anon(n, RegisterRole::AncillaMagic)?;
    for i in 0..n {
        c.temporary_and(control, a[i], gated.qubits[i])?;
    }
    emit_add_core(c, &gated.qubits, b)?;
    for i in (0..n).rev() {
        c.uncompute_and(control, a[i], gated.qubits[i])?;
    }
    c.release_ancilla(&gated)
}

/// Allocates a `2n`-wide product register, fills it with `a*b`, and returns
/// it alongside the block record. `a` and `b` are preserved.
///
/// Schoolbook over the partial products: row 0 is written with one Toffoli
/// per bit; each later row `j` adds `a` gated on `b[j]` into the product
/// window starting at bit `j`, whose top wire is provably still 0, so every
/// row add is exact.
pub fn build_multiplier(
    c: &mut Circuit,
    a: impl Into<Operand>,
    b: impl Into<Operand>,
    product_name: &str,
) -> Result<(ArithmeticBlock, Register), ArithmeticError> {
    let (a, b) = (a.into(), b.into());
    if a.width() == 0 {
        return Err(ArithmeticError::EmptyOperand);
    }
    if a.width() != b.width() {
        return Err(ArithmeticError::WidthMismatch {
            a: a.width(),
            b: b.width(),
        });
    }
    check_disjoint(&[&a.qubits, &b.qubits])?;
    let n = a.width();
    let start = c.gates().len();
    let product = c.alloc_register(product_name, 2 * n, RegisterRole::Output)?;
    for i in 0..n {
        crate::gadgets::emit_toffoli(c, b.qubits[0], a.qubits[i], product.qubits[i])?;
    }
    for j in 1..n {
        let window = &product.qubits[j..=j + n];
        emit_conditional_add(c, b.qubits[j], &a.qubits, window)?;
    }
    let block = ArithmeticBlock {
        kind: BlockKind::Multiplier,
        width: n,
        gate_span: start..c.gates().len(),
        operands: alloc::vec![a, b, Operand::from(&product)],
    };
    Ok((block, product))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::count_resources;
    use crate::simulator::{run_permutation, ClassicalState};

    fn two_regs(n: usize) -> (Circuit, Register, Register) {
        let mut c = Circuit::new(0);
        let a = c.alloc_register("a", n, RegisterRole::Color).unwrap();
        let b = c.alloc_register("b", n, RegisterRole::Color).unwrap();
        (c, a, b)
    }

    #[test]
    fn adder_matches_wrapping_add_exhaustively() {
        for n in 1..=4usize {
            let (mut c, a, b) = two_regs(n);
            build_adder(&mut c, &a, &b).unwrap();
            let mask = (1u64 << n) - 1;
            for x in 0..=mask {
                for y in 0..=mask {
                    let mut input = ClassicalState::zeros(c.qubit_count());
                    input.set_register(&a, x).unwrap();
                    input.set_register(&b, y).unwrap();
                    let out = run_permutation(&c, &input).unwrap();
                    assert_eq!(out.read_register(&a), x, "a preserved n={n}");
                    assert_eq!(out.read_register(&b), (x + y) & mask, "n={n} {x}+{y}");
                }
            }
        }
    }

    #[test]
    fn subtractor_matches_wrapping_sub_exhaustively() {
        for n in 1..=4usize {
            let (mut c, a, b) = two_regs(n);
            build_subtractor(&mut c, &a, &b).unwrap();
            let mask = (1u64 << n) - 1;
            for x in 0..=mask {
                for y in 0..=mask {
                    let mut input = ClassicalState::zeros(c.qubit_count());
                    input.set_register(&a, x).unwrap();
                    input.set_register(&b, y).unwrap();
                    let out = run_permutation(&c, &input).unwrap();
                    assert_eq!(out.read_register(&b), y.wrapping_sub(x) & mask, "n={n} {y}-{x}");
                }
            }
        }
    }

    #[test]
    fn conditional_adder_obeys_control() {
        for n in 1..=3usize {
            let mut c = Circuit::new(0);
            let ctrl = c.alloc_register("ctrl", 1, RegisterRole::Color).unwrap();
            let a = c.alloc_register("a", n, RegisterRole::Color).unwrap();
            let b = c.alloc_register("b", n, RegisterRole::Color).unwrap();
            build_conditional_adder(&mut c, ctrl.qubits[0], &a, &b).unwrap();
            let mask = (1u64 << n) - 1;
            for k in 0..=1u64 {
                for x in 0..=mask {
                    for y in 0..=mask {
                        let mut input = ClassicalState::zeros(c.qubit_count());
                        input.set_register(&ctrl, k).unwrap();
                        input.set_register(&a, x).unwrap();
                        input.set_register(&b, y).unwrap();
                        let out = run_permutation(&c, &input).unwrap();
                        let want = if k == 1 { (x + y) & mask } else { y };
                        assert_eq!(out.read_register(&b), want, "n={n} k={k} {x}+{y}");
                    }
                }
            }
        }
    }

    #[test]
    fn multiplier_matches_product_exhaustively() {
        for n in 1..=3usize {
            let (mut c, a, b) = two_regs(n);
            let (_, p) = build_multiplier(&mut c, &a, &b, "p").unwrap();
            let mask = (1u64 << n) - 1;
            for x in 0..=mask {
                for y in 0..=mask {
                    let mut input = ClassicalState::zeros(c.qubit_count());
                    input.set_register(&a, x).unwrap();
                    input.set_register(&b, y).unwrap();
                    let out = run_permutation(&c, &input).unwrap();
                    assert_eq!(out.read_register(&p), x * y, "n={n} {x}*{y}");
                    assert_eq!(out.read_register(&a), x);
                    assert_eq!(out.read_register(&b), y);
                }
            }
        }
    }

    #[test]
    fn block_t_counts_are_exact() {
        for n in 1..=8usize {
            let (mut c, a, b) = two_regs(n);
            build_adder(&mut c, &a, &b).unwrap();
            assert_eq!(count_resources(&c).t_type_count() as usize, 4 * (n - 1));

            let (mut c, a, b) = two_regs(n);
            build_subtractor(&mut c, &a, &b).unwrap();
            assert_eq!(count_resources(&c).t_type_count() as usize, 4 * n - 4);

            let mut c = Circuit::new(1);
            let a = c.alloc_register("a", n, RegisterRole::Color).unwrap();
            let b = c.alloc_register("b", n, RegisterRole::Color).unwrap();
            build_conditional_adder(&mut c, QubitId(0), &a, &b).unwrap();
            assert_eq!(count_resources(&c).t_type_count() as usize, 8 * n - 4);

            let (mut c, a, b) = two_regs(n);
            build_multiplier(&mut c, &a, &b, "p").unwrap();
            assert_eq!(count_resources(&c).t_type_count() as usize, 8 * n * n - 4 * n);
        }
    }

    #[test]
    fn operand_overlap_is_rejected() {
        let mut c = Circuit::new(3);
        let a = Operand::new("a", alloc::vec![QubitId(0), QubitId(1)]);
        let b = Operand::new("b", alloc::vec![QubitId(1), QubitId(2)]);
        assert_eq!(
            build_adder(&mut c, a, b),
            Err(ArithmeticError::OverlappingOperands(1))
        );
    }
}
