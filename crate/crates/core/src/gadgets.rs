//! Convenience emitters for the measurement-assisted gadgets.
//!
//! A temporary AND writes `a AND b` onto a dedicated magic-state ancilla for
//! 4 T-type operations; the uncompute erases it for 0 by an X-basis
//! measurement and a classically controlled CZ. A Toffoli is the sandwich
//! AND, CNOT into the target, uncompute, also 4 T-type operations.
//!
//! These wrappers allocate and release the ancilla registers involved.
//! Arithmetic blocks that manage multi-wire carry registers append the
//! macro gates on [`Circuit`] directly.

use crate::circuit::{Circuit, CircuitError, QubitId, Register, RegisterRole};

/// Handle to an open temporary AND: the controls and the ancilla register
/// holding their product.
#[derive(Clone, Debug)]
pub struct AndHandle {
    pub a: QubitId,
    pub b: QubitId,
    pub ancilla: Register,
}

impl AndHandle {
    /// The wire carrying `a AND b` while the gadget is open.
    pub fn target(&self) -> QubitId {
        self.ancilla.qubits[0]
    }
}

/// Allocates a magic ancilla and computes `a AND b` onto it.
pub fn emit_temporary_and(
    circuit: &mut Circuit,
    a: QubitId,
    b: QubitId,
) -> Result<AndHandle, CircuitError> {
    let ancilla = circuit.alloc_anon(1, RegisterRole::AncillaMagic)?;
    circuit.temporary_and(a, b, ancilla.qubits[0])?;
    Ok(AndHandle { a, b, ancilla })
}

/// Erases an open AND and releases its ancilla for reuse.
pub fn emit_uncompute_and(circuit: &mut Circuit, handle: AndHandle) -> Result<(), CircuitError> {
    circuit.uncompute_and(handle.a, handle.b, handle.target())?;
    circuit.release_ancilla(&handle.ancilla)
}

/// `target ^= a AND b` via a compute/copy/uncompute sandwich around an
/// internally managed ancilla.
pub fn emit_toffoli(
    circuit: &mut Circuit,
    a: QubitId,
    b: QubitId,
    target: QubitId,
) -> Result<(), CircuitError> {
    let handle = emit_temporary_and(circuit, a, b)?;
    circuit.cnot(handle.target(), target)?;
    emit_uncompute_and(circuit, handle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::count_resources;

    #[test]
    fn gadget_t_costs() {
        let mut c = Circuit::new(2);
        let h = emit_temporary_and(&mut c, QubitId(0), QubitId(1)).unwrap();
        assert_eq!(count_resources(&c).t_type_count(), 4);
        emit_uncompute_and(&mut c, h).unwrap();
        assert_eq!(count_resources(&c).t_type_count(), 4);

        let mut c = Circuit::new(3);
        emit_toffoli(&mut c, QubitId(0), QubitId(1), QubitId(2)).unwrap();
        assert_eq!(count_resources(&c).t_type_count(), 4);
    }

    #[test]
    fn toffoli_ancilla_is_recycled_for_zero_roles() {
        let mut c = Circuit::new(3);
        emit_toffoli(&mut c, QubitId(0), QubitId(1), QubitId(2)).unwrap();
        emit_toffoli(&mut c, QubitId(0), QubitId(1), QubitId(2)).unwrap();
        // two Toffolis, two fresh magic wires (strict mode never recycles them)
        assert_eq!(c.qubit_count(), 5);
    }
}
