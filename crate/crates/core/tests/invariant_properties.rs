//! Property tests for the structural invariants: norm preservation,
//! clamping, modular helper algebra, expansion semantics, and the
//! fixed-point behavior of constant images.

use proptest::prelude::*;
use qbilerp_core::arithmetic::{build_adder, build_subtractor};
use qbilerp_core::neqr::{NeqrImage, PixelNeighborhood};
use qbilerp_core::oracle::{
    bilerp_color, mod_add, mod_mul, mod_sub, oracle_scale_down, oracle_scale_up,
    FixedPointWeights,
};
use qbilerp_core::{
    run_permutation, run_statevector, Circuit, ClassicalState, QubitId, RegisterRole,
    RunOptions,
};

fn full_index(state: &ClassicalState, width: usize) -> u64 {
    (0..width).map(|i| u64::from(state.get(QubitId(i))) << i).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blend_stays_within_the_neighbor_range(
        n in 1u32..=8,
        q in 1u32..=16,
        seed in any::<[u32; 6]>(),
    ) {
        let max = (1u32 << q) - 1;
        let nb = PixelNeighborhood {
            c_yx: seed[0] & max,
            c_y1x: seed[1] & max,
            c_yx1: seed[2] & max,
            c_y1x1: seed[3] & max,
        };
        let mask = (1u32 << n) - 1;
        let w = FixedPointWeights::new(n, seed[4] & mask, seed[5] & mask).unwrap();
        let v = bilerp_color(&nb, &w);
        let lo = nb.c_yx.min(nb.c_y1x).min(nb.c_yx1).min(nb.c_y1x1);
        let hi = nb.c_yx.max(nb.c_y1x).max(nb.c_yx1).max(nb.c_y1x1);
        prop_assert!(lo <= v && v <= hi);
    }

    #[test]
    fn modular_helpers_obey_ring_identities(
        a in any::<u64>(),
        b in any::<u64>(),
        bits in 1u32..=16,
    ) {
        let mask = (1u64 << bits) - 1;
        let (a, b) = (a & mask, b & mask);
        prop_assert_eq!(mod_sub(mod_add(a, b, bits), b, bits), a);
        prop_assert_eq!(mod_add(mod_sub(a, b, bits), b, bits), a);
        prop_assert_eq!(mod_mul(a, b, bits), a * b);
        prop_assert_eq!(mod_mul(a, b, bits), mod_mul(b, a, bits));
    }

    #[test]
    fn neighborhood_always_clamps_into_bounds(
        m in 1u32..=3,
        seed in any::<u64>(),
        y in any::<u32>(),
        x in any::<u32>(),
    ) {
        let mut rng = seed;
        let side = 1u32 << m;
        let pixels = (0..1usize << (2 * m)).map(|_| {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 33) as u32 & 0xFF
        }).collect();
        let img = NeqrImage::new(m, 8, pixels).unwrap();
        let (y, x) = (y % side, x % side);
        let nb = img.neighborhood(y, x);
        let y1 = (y + 1).min(side - 1);
        let x1 = (x + 1).min(side - 1);
        prop_assert_eq!(nb.c_yx, img.pixel(y, x));
        prop_assert_eq!(nb.c_y1x, img.pixel(y1, x));
        prop_assert_eq!(nb.c_yx1, img.pixel(y, x1));
        prop_assert_eq!(nb.c_y1x1, img.pixel(y1, x1));
    }

    #[test]
    fn constant_images_are_fixed_points_for_any_parameters(
        m in 1u32..=3,
        q in 1u32..=8,
        value in any::<u32>(),
        sub in any::<(u32, u32)>(),
    ) {
        let value = value & ((1 << q) - 1);
        let img = NeqrImage::constant(m, q, value).unwrap();
        let n = 1;
        let subpixel = (sub.0 & 1, sub.1 & 1);
        let down = oracle_scale_down(&img, n, subpixel).unwrap();
        prop_assert_eq!(down, NeqrImage::constant(m - n, q, value).unwrap());
        let up = oracle_scale_up(&img, n).unwrap();
        prop_assert_eq!(up, NeqrImage::constant(m + n, q, value).unwrap());
    }

    #[test]
    fn subtract_undoes_add_on_the_circuit(
        n in 1usize..=3,
        a_val in any::<u64>(),
        b_val in any::<u64>(),
    ) {
        let mut c = Circuit::new(0);
        let a = c.alloc_register("a", n, RegisterRole::Color).unwrap();
        let b = c.alloc_register("b", n, RegisterRole::Color).unwrap();
        build_adder(&mut c, &a, &b).unwrap();
        build_subtractor(&mut c, &a, &b).unwrap();
        let mask = (1u64 << n) - 1;
        let mut input = ClassicalState::zeros(c.qubit_count());
        input.set_register(&a, a_val & mask).unwrap();
        input.set_register(&b, b_val & mask).unwrap();
        let out = run_permutation(&c, &input).unwrap();
        prop_assert_eq!(out.read_register(&a), a_val & mask);
        prop_assert_eq!(out.read_register(&b), b_val & mask);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_measurement_free_circuits_preserve_norm(
        ops in prop::collection::vec((0u8..7, 0usize..5, 0usize..5), 1..40),
        input in any::<u8>(),
    ) {
        let mut c = Circuit::new(5);
        for (kind, p, r) in ops {
            let (p, r) = (QubitId(p), QubitId(r));
            match kind {
                0 => c.x(p).unwrap(),
                1 => c.h(p).unwrap(),
                2 => c.s(p).unwrap(),
                3 => c.t(p).unwrap(),
                4 => c.tdg(p).unwrap(),
                5 if p != r => c.cnot(p, r).unwrap(),
                6 if p != r => c.cz(p, r).unwrap(),
                _ => {}
            }
        }
        let mut state = ClassicalState::zeros(5);
        for i in 0..5 {
            state.set(QubitId(i), input >> i & 1 == 1);
        }
        let outcomes = run_statevector(&c, &state, &RunOptions::default()).unwrap();
        prop_assert_eq!(outcomes.len(), 1);
        prop_assert!((outcomes[0].probability - 1.0).abs() < 1e-9);
        let norm: f64 = outcomes[0].state.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expansion_preserves_adder_semantics(
        n in 1usize..=3,
        a_val in any::<u64>(),
        b_val in any::<u64>(),
    ) {
        let mut c = Circuit::new(0);
        let a = c.alloc_register("a", n, RegisterRole::Color).unwrap();
        let b = c.alloc_register("b", n, RegisterRole::Color).unwrap();
        build_adder(&mut c, &a, &b).unwrap();
        let mask = (1u64 << n) - 1;
        let mut input = ClassicalState::zeros(c.qubit_count());
        input.set_register(&a, a_val & mask).unwrap();
        input.set_register(&b, b_val & mask).unwrap();
        let classical = run_permutation(&c, &input).unwrap();
        let want = full_index(&classical, c.qubit_count());

        let expanded = c.expand_macros();
        prop_assert!(expanded.is_primitive());
        let outcomes = run_statevector(&expanded, &input, &RunOptions::default()).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for o in &outcomes {
            let amps = o.state.amplitudes();
            let (idx, peak) = amps
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
                .unwrap();
            prop_assert!((peak.norm() - 1.0).abs() < 1e-9);
            prop_assert_eq!(idx as u64, want);
        }
    }
}
