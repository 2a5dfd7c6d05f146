//! Frozen hand-computed blend values, kept as a plain-text fixture so the
//! expected numbers cannot drift with the code.

use qbilerp_core::neqr::PixelNeighborhood;
use qbilerp_core::oracle::{bilerp_color, FixedPointWeights};

const CASES: &str = include_str!("fixtures/blend_cases.txt");

#[test]
fn fixture_blends_match() {
    let mut checked = 0;
    for (lineno, line) in CASES.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<u32> = line
            .split_whitespace()
            .map(|f| f.parse().expect("numeric fixture field"))
            .collect();
        let [n, w_y, w_x, c_yx, c_y1x, c_yx1, c_y1x1, expected] = fields[..] else {
            panic!("line {}: expected 8 fields, got {}", lineno + 1, fields.len());
        };
        let nb = PixelNeighborhood { c_yx, c_y1x, c_yx1, c_y1x1 };
        let w = FixedPointWeights::new(n, w_y, w_x).unwrap();
        assert_eq!(
            bilerp_color(&nb, &w),
            expected,
            "fixture line {} disagrees",
            lineno + 1
        );
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} fixture cases");
}
