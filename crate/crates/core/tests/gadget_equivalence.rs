//! Statevector equivalence of the AND gadgets against hand-built
//! references, including mutation tests that corrupt a network and expect
//! the checker to notice.

use num_complex::Complex64;
use qbilerp_core::gadgets::{emit_temporary_and, emit_toffoli, emit_uncompute_and};
use qbilerp_core::simulator::BranchPolicy;
use qbilerp_core::{
    assert_equivalence, run_permutation, run_statevector, Circuit, ClassicalState, MagicPrep,
    QubitId, Reference, RegisterRole, RunOptions, SimError,
};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Dense matrix of a basis permutation over `d` qubits, `m[f(col)][col] = 1`.
fn permutation_matrix(d: usize, f: impl Fn(usize) -> usize) -> Vec<Vec<Complex64>> {
    let dim = 1usize << d;
    let mut m = vec![vec![re(0.0); dim]; dim];
    for col in 0..dim {
        m[f(col)][col] = re(1.0);
    }
    m
}

fn toffoli_map(col: usize) -> usize {
    // wires (a, b, t) packed LSB-first
    let a = col & 1;
    let b = col >> 1 & 1;
    col ^ ((a & b) << 2)
}

#[test]
fn toffoli_gadget_matches_truth_table_unitary() {
    let mut c = Circuit::new(0);
    let d = c.alloc_register("d", 3, RegisterRole::Color).unwrap();
    emit_toffoli(&mut c, d.qubits[0], d.qubits[1], d.qubits[2]).unwrap();
    let reference = Reference::Unitary(permutation_matrix(3, toffoli_map));
    let dev = assert_equivalence(&c, &reference, 1e-9).unwrap();
    assert!(dev <= 1e-9, "deviation {dev}");
}

#[test]
fn explicit_prep_toffoli_matches_the_same_unitary() {
    let mut c = Circuit::with_magic_prep(0, MagicPrep::ExplicitGates);
    let d = c.alloc_register("d", 3, RegisterRole::Color).unwrap();
    emit_toffoli(&mut c, d.qubits[0], d.qubits[1], d.qubits[2]).unwrap();
    let reference = Reference::Unitary(permutation_matrix(3, toffoli_map));
    assert_equivalence(&c, &reference, 1e-9).unwrap();
}

#[test]
fn compute_only_and_leaves_product_on_ancilla() {
    let mut c = Circuit::new(0);
    let d = c.alloc_register("d", 2, RegisterRole::Color).unwrap();
    let handle = emit_temporary_and(&mut c, d.qubits[0], d.qubits[1]).unwrap();
    assert_eq!(handle.target(), QubitId(2));
    // full-width table: the ancilla wire carries a AND b at the end
    let table: Vec<u64> = (0..4u64).map(|col| col | ((col & col >> 1 & 1) << 2)).collect();
    assert_equivalence(&c, &Reference::Permutation(table), 1e-9).unwrap();
}

#[test]
fn compute_then_uncompute_is_the_identity() {
    let mut c = Circuit::new(0);
    let d = c.alloc_register("d", 2, RegisterRole::Color).unwrap();
    let handle = emit_temporary_and(&mut c, d.qubits[0], d.qubits[1]).unwrap();
    emit_uncompute_and(&mut c, handle).unwrap();
    let reference = Reference::Unitary(permutation_matrix(2, |col| col));
    let dev = assert_equivalence(&c, &reference, 1e-9).unwrap();
    assert!(dev <= 1e-9);
}

/// Emits the AND network by hand so single gates can be swapped out.
fn hand_network(c: &mut Circuit, corrupt: bool) {
    let d = c.alloc_register("d", 2, RegisterRole::Color).unwrap();
    let anc = c.alloc_register("t", 1, RegisterRole::AncillaZero).unwrap();
    let (a, b, t) = (d.qubits[0], d.qubits[1], anc.qubits[0]);
    c.h(t).unwrap();
    c.t(t).unwrap();
    c.cnot(a, t).unwrap();
    c.cnot(b, t).unwrap();
    c.cnot(t, a).unwrap();
    c.cnot(t, b).unwrap();
    if corrupt {
        c.t(a).unwrap(); // wrong sign: the network needs T dagger here
    } else {
        c.tdg(a).unwrap();
    }
    c.tdg(b).unwrap();
    c.t(t).unwrap();
    c.cnot(t, a).unwrap();
    c.cnot(t, b).unwrap();
    c.h(t).unwrap();
    c.s(t).unwrap();
}

#[test]
fn corrupted_network_is_rejected() {
    let and_table: Vec<u64> = (0..4u64).map(|col| col | ((col & col >> 1 & 1) << 2)).collect();
    let mut good = Circuit::with_magic_prep(0, MagicPrep::ExplicitGates);
    hand_network(&mut good, false);
    assert_equivalence(&good, &Reference::Permutation(and_table.clone()), 1e-9).unwrap();

    let mut bad = Circuit::with_magic_prep(0, MagicPrep::ExplicitGates);
    hand_network(&mut bad, true);
    let err = assert_equivalence(&bad, &Reference::Permutation(and_table), 1e-9).unwrap_err();
    assert!(
        matches!(err, SimError::EquivalenceFailed { .. } | SimError::BranchMismatch { .. }),
        "unexpected error {err:?}"
    );
}

#[test]
fn phase_corrupted_uncompute_is_rejected() {
    // an extra Z (two S gates) on the AND result before uncomputing makes
    // the measurement branches disagree on the data phase
    let mut c = Circuit::new(0);
    let d = c.alloc_register("d", 2, RegisterRole::Color).unwrap();
    let handle = emit_temporary_and(&mut c, d.qubits[0], d.qubits[1]).unwrap();
    let t = handle.target();
    c.s(t).unwrap();
    c.s(t).unwrap();
    emit_uncompute_and(&mut c, handle).unwrap();
    let reference = Reference::Unitary(permutation_matrix(2, |col| col));
    let err = assert_equivalence(&c, &reference, 1e-9).unwrap_err();
    assert!(
        matches!(err, SimError::EquivalenceFailed { .. } | SimError::BranchMismatch { .. }),
        "unexpected error {err:?}"
    );
}

#[test]
fn superposed_control_entangles_with_the_and_result() {
    let mut c = Circuit::new(0);
    let d = c.alloc_register("d", 3, RegisterRole::Color).unwrap();
    c.h(d.qubits[0]).unwrap();
    c.x(d.qubits[1]).unwrap();
    c.toffoli(d.qubits[0], d.qubits[1], d.qubits[2]).unwrap();
    let outcomes =
        run_statevector(&c, &ClassicalState::zeros(c.qubit_count()), &RunOptions::default())
            .unwrap();
    assert_eq!(outcomes.len(), 2);
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for o in &outcomes {
        // (|a=0,b=1,t=0> + |a=1,b=1,t=1>)/sqrt(2), magic wire back to |0>
        let amps = o.state.amplitudes();
        assert!((amps[0b010].norm() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((amps[0b111].norm() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let rest: f64 = amps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 0b010 && *i != 0b111)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        assert!(rest < 1e-18);
    }
}

#[test]
fn dirty_ancilla_release_is_caught_at_runtime() {
    let mut c = Circuit::new(1);
    let z = c.alloc_register("z", 1, RegisterRole::AncillaZero).unwrap();
    c.cnot(QubitId(0), z.qubits[0]).unwrap();
    c.release_ancilla(&z).unwrap();
    let mut input = ClassicalState::zeros(2);
    input.set(QubitId(0), true);
    let err = run_permutation(&c, &input).unwrap_err();
    assert!(matches!(err, SimError::AncillaNotZeroAtRelease { .. }));
    // statevector backend flags the same release
    let err = run_statevector(
        &c,
        &input,
        &RunOptions { policy: BranchPolicy::EnumerateAll, ..RunOptions::default() },
    )
    .unwrap_err();
    assert!(matches!(err, SimError::AncillaNotZeroAtRelease { .. }));
}
