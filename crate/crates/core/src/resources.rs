//! Gate counting and block-level T-count formulas.
//!
//! T-count is the figure of merit: in a fault-tolerant setting T gates
//! dominate cost while Clifford gates are cheap. Counting convention: `T`
//! and `Tdg` are priced identically, and under
//! [`MagicPrep::InitialState`](crate::circuit::MagicPrep) each consumed
//! magic-state input is priced as one T-type operation, since producing the
//! resource state costs one T. With that convention a temporary AND costs 4
//! T-type operations, its uncompute costs 0, and a Toffoli costs 4.

use crate::circuit::{Circuit, Gate, InitialState};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Per-kind gate totals for a circuit, measured after macro expansion.
#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ResourceReport {
    pub x_count: u64,
    /// X-basis measurements contribute one H each (the folded basis change).
    pub h_count: u64,
    pub s_count: u64,
    /// Includes one count per magic-state input consumed.
    pub t_count: u64,
    pub tdg_count: u64,
    pub cnot_count: u64,
    /// Plain CZ gates plus classically controlled ones (counted whether or
    /// not a given branch applies them).
    pub cz_count: u64,
    pub measurement_count: u64,
    pub qubit_count: usize,
    pub ancilla_high_water: usize,
}

impl ResourceReport {
    /// Total T-type operations: T gates, Tdg gates, and magic-state inputs.
    pub fn t_type_count(&self) -> u64 {
        self.t_count + self.tdg_count
    }
}

/// Counts gates after lowering macros to primitives.
pub fn count_resources(circuit: &Circuit) -> ResourceReport {
    let expanded;
    let c = if circuit.is_primitive() {
        circuit
    } else {
        expanded = circuit.expand_macros();
        &expanded
    };
    let mut r = ResourceReport {
        qubit_count: c.qubit_count(),
        ancilla_high_water: c.ancilla_high_water(),
        ..ResourceReport::default()
    };
    for gate in c.gates() {
        match gate {
            Gate::X(_) => r.x_count += 1,
            Gate::H(_) => r.h_count += 1,
            Gate::S(_) => r.s_count += 1,
            Gate::T(_) => r.t_count += 1,
            Gate::Tdg(_) => r.tdg_count += 1,
            Gate::Cnot { .. } => r.cnot_count += 1,
            Gate::Cz(..) | Gate::ClassicallyControlledCz { .. } => r.cz_count += 1,
            Gate::MeasureX { .. } => {
                // an X-basis measurement is a basis-change H plus a Z
                // measurement; price the H even though it is folded in
                r.h_count += 1;
                r.measurement_count += 1;
            }
            Gate::TemporaryAnd { .. } | Gate::UncomputeAnd { .. } | Gate::Toffoli { .. } => {
                unreachable!("expanded circuits hold no macro gates")
            }
        }
    }
    for q in 0..c.qubit_count() {
        if c.initial_state(crate::circuit::QubitId(q)) == InitialState::MagicA {
            r.t_count += 1;
        }
    }
    r
}

/// Which arithmetic construction a formula refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Design {
    /// The measurement-assisted construction this crate emits.
    Proposed,
    /// The earlier Toffoli-based construction used as the baseline.
    Prior,
}

/// How many of each block one whole interpolation circuit instantiates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BlockMultiplicities {
    pub adders: u64,
    pub subtractors: u64,
    pub multipliers: u64,
    pub dividers: u64,
}

impl Design {
    /// Block census of one bilinear interpolation circuit (either scale
    /// direction). The proposed design needs no divider: it keeps the
    /// scaled numerator and reads the quotient off a bit slice.
    pub fn multiplicities(self) -> BlockMultiplicities {
        match self {
            Design::Proposed => BlockMultiplicities {
                adders: 3,
                subtractors: 2,
                multipliers: 8,
                dividers: 0,
            },
            Design::Prior => BlockMultiplicities {
                adders: 3,
                subtractors: 4,
                multipliers: 8,
                dividers: 2,
            },
        }
    }

    /// T-count of one n-bit in-place adder.
    pub fn adder_t_count(self, n: u32) -> u64 {
        let n = u64::from(n);
        match self {
            Design::Proposed => 4 * n,
            Design::Prior => 28 * n - 14,
        }
    }

    /// T-count of one n-bit in-place subtractor.
    pub fn subtractor_t_count(self, n: u32) -> u64 {
        let n = u64::from(n);
        match self {
            Design::Proposed => 4 * n - 4,
            Design::Prior => 28 * n - 14,
        }
    }

    /// T-count of one n-bit controlled adder (proposed design only appears
    /// inside the multiplier; the formula is exposed for completeness).
    pub fn conditional_adder_t_count(self, n: u32) -> Option<u64> {
        let n = u64::from(n);
        match self {
            Design::Proposed => Some(8 * n - 4),
            Design::Prior => None,
        }
    }

    /// T-count of one n-bit by n-bit multiplier. The prior formula carries a
    /// partial-sum term defined only for power-of-two widths.
    pub fn multiplier_t_count(self, n: u32) -> Option<u64> {
        let nn = u64::from(n);
        match self {
            Design::Proposed => Some(8 * nn * nn - 4 * nn),
            Design::Prior => {
                if !n.is_power_of_two() {
                    return None;
                }
                let mut total = 7 * nn * nn;
                let stages = n.trailing_zeros() as u64;
                for i in 1..=stages {
                    let lanes = nn >> i;
                    let width = nn + i - (1 << (i - 1));
                    total += lanes * (14 * width - 14);
                }
                Some(total)
            }
        }
    }

    /// T-count of one 2n-bit divider. The proposed design has none; the
    /// prior count is a stated estimate, see [`divider_is_approximate`].
    ///
    /// [`divider_is_approximate`]: Design::divider_is_approximate
    pub fn divider_t_count(self, n: u32) -> Option<u64> {
        let n = u64::from(n);
        match self {
            Design::Proposed => None,
            Design::Prior => Some(400 * n * n),
        }
    }

    /// True when the divider figure is an order-of-magnitude estimate
    /// rather than an exact gate count.
    pub fn divider_is_approximate(self) -> bool {
        matches!(self, Design::Prior)
    }
}

/// Closed form for the proposed whole-interpolation T-count: 64n^2 - 12n - 8.
pub fn formula_proposed_interp_t_count(n: u32) -> u64 {
    let n = u64::from(n);
    64 * n * n - 12 * n - 8
}

/// Closed form for the baseline whole-interpolation T-count:
/// 856n^2 + 196n - 98 plus eight times the multiplier partial-sum term.
/// Defined only for power-of-two n.
pub fn formula_prior_interp_t_count(n: u32) -> Option<u64> {
    if !n.is_power_of_two() {
        return None;
    }
    let nn = u64::from(n);
    let mut sum = 0u64;
    let stages = n.trailing_zeros() as u64;
    for i in 1..=stages {
        let lanes = nn >> i;
        let width = nn + i - (1 << (i - 1));
        sum += lanes * (14 * width - 14);
    }
    Some(856 * nn * nn + 196 * nn - 98 + 8 * sum)
}

/// Whole-interpolation T-count composed from block formulas and
/// multiplicities; agrees with the closed forms by construction.
pub fn composed_interp_t_count(design: Design, n: u32) -> Option<u64> {
    let m = design.multiplicities();
    let mut total = m.adders * design.adder_t_count(n)
        + m.subtractors * design.subtractor_t_count(n);
    total += m.multipliers * design.multiplier_t_count(n)?;
    if m.dividers > 0 {
        total += m.dividers * design.divider_t_count(n)?;
    }
    Some(total)
}

/// Fractional T-count saving of the proposed design over the baseline at
/// interpolation precision n: `1 - proposed/prior`.
pub fn improvement_ratio(n: u32) -> Option<f64> {
    let proposed = formula_proposed_interp_t_count(n) as f64;
    let prior = formula_prior_interp_t_count(n)? as f64;
    Some(1.0 - proposed / prior)
}

/// Limit of [`improvement_ratio`] as n grows: 1 - 64/856.
pub fn asymptotic_improvement_ratio() -> f64 {
    1.0 - 64.0 / 856.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{QubitId, RegisterRole};

    #[test]
    fn and_uncompute_toffoli_fixed_costs() {
        let mut c = Circuit::new(2);
        let m = c.alloc_register("m", 1, RegisterRole::AncillaMagic).unwrap();
        c.temporary_and(QubitId(0), QubitId(1), m.qubits[0]).unwrap();
        let r = count_resources(&c);
        assert_eq!(r.t_type_count(), 4);
        assert_eq!((r.cnot_count, r.h_count, r.s_count), (6, 1, 1));

        c.uncompute_and(QubitId(0), QubitId(1), m.qubits[0]).unwrap();
        let r = count_resources(&c);
        assert_eq!(r.t_type_count(), 4);
        assert_eq!((r.measurement_count, r.h_count, r.cz_count), (1, 2, 1));

        let mut c = Circuit::new(3);
        c.toffoli(QubitId(0), QubitId(1), QubitId(2)).unwrap();
        let r = count_resources(&c);
        assert_eq!(r.t_type_count(), 4);
        assert_eq!(r.qubit_count, 4);
    }

    #[test]
    fn counting_is_stable_under_expansion() {
        let mut c = Circuit::new(3);
        c.h(QubitId(0)).unwrap();
        c.toffoli(QubitId(0), QubitId(1), QubitId(2)).unwrap();
        c.cnot(QubitId(2), QubitId(0)).unwrap();
        assert_eq!(count_resources(&c), count_resources(&c.expand_macros()));
    }

    #[test]
    fn block_formula_values() {
        assert_eq!(Design::Proposed.adder_t_count(4), 16);
        assert_eq!(Design::Proposed.subtractor_t_count(4), 12);
        assert_eq!(Design::Proposed.conditional_adder_t_count(4), Some(28));
        assert_eq!(Design::Proposed.multiplier_t_count(4), Some(112));
        assert_eq!(Design::Prior.adder_t_count(2), 42);
        assert_eq!(Design::Prior.multiplier_t_count(2), Some(42));
        assert_eq!(Design::Prior.multiplier_t_count(3), None);
        assert_eq!(Design::Prior.divider_t_count(2), Some(1600));
        assert!(Design::Prior.divider_is_approximate());
    }

    #[test]
    fn interp_formula_values() {
        assert_eq!(formula_proposed_interp_t_count(1), 44);
        assert_eq!(formula_proposed_interp_t_count(2), 224);
        assert_eq!(formula_proposed_interp_t_count(4), 968);
        assert_eq!(formula_prior_interp_t_count(1), Some(954));
        assert_eq!(formula_prior_interp_t_count(2), Some(3830));
        assert_eq!(formula_prior_interp_t_count(3), None);
    }

    #[test]
    fn closed_forms_match_composition() {
        for n in 1..=64 {
            assert_eq!(
                composed_interp_t_count(Design::Proposed, n),
                Some(formula_proposed_interp_t_count(n)),
                "proposed n={n}"
            );
            if n.is_power_of_two() {
                assert_eq!(
                    composed_interp_t_count(Design::Prior, n),
                    formula_prior_interp_t_count(n),
                    "prior n={n}"
                );
            }
        }
    }

    #[test]
    fn improvement_values() {
        let r1 = improvement_ratio(1).unwrap();
        let r2 = improvement_ratio(2).unwrap();
        assert!((r1 - (1.0 - 44.0 / 954.0)).abs() < 1e-12);
        assert!((r2 - (1.0 - 224.0 / 3830.0)).abs() < 1e-12);
        assert!((asymptotic_improvement_ratio() - 0.925_233_644_859_813_1).abs() < 1e-12);
        // The exact ratio falls with n and stays above the quoted asymptote,
        // which compares quadratic leading coefficients only.
        let mut prev = r1;
        for n in [2u32, 4, 8, 16, 32, 64] {
            let r = improvement_ratio(n).unwrap();
            assert!(r < prev);
            assert!(r > asymptotic_improvement_ratio());
            prev = r;
        }
    }
}
