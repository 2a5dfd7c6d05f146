//! Whole-circuit generation for bilinear image rescaling.
//!
//! Both scale directions share one pipeline over NEQR registers:
//!
//! 1. copy the n weight bits (the fractional position) into `n+1`-wide
//!    scratch registers, one CNOT per bit;
//! 2. subtract each weight from a loaded constant `2^n` to form the
//!    complements (two subtractors);
//! 3. multiply weights and complements pairwise (four multipliers at width
//!    `n+1`);
//! 4. multiply each weight product by its neighbor color (four multipliers
//!    at width `max(2n+2, q)`);
//! 5. accumulate the four terms (three adders over `2n+q`-bit slices).
//!
//! The interpolated color is the accumulator's bit slice `[2n, 2n+q)`:
//! dropping the low `2n` bits is the floor division by `2^{2n}`, which is
//! why no divider block appears. Output positions are wire aliases: scale
//! down reads the position's high bits, scale up concatenates the new
//! sub-position wires below the coarse position.
//!
//! Intermediate registers stay in their garbage states, as the layout
//! records; nothing after step 5 uncomputes them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::arithmetic::{
    build_adder, build_multiplier, build_subtractor, ArithmeticBlock, ArithmeticError,
    BlockKind, Operand,
};
use crate::circuit::{Circuit, CircuitError, QubitId, Register, RegisterRole};
use crate::neqr::{NeqrError, NeqrImage, MAX_POSITION_BITS};
use crate::oracle::{oracle_scale_down, oracle_scale_up, FixedPointWeights, OracleError};
use crate::simulator::{run_permutation, ClassicalState, SimError};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Rescaling direction; the factor is `2^n` per side either way.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScaleMode {
    Down,
    Up,
}

impl ScaleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScaleMode::Down => "down",
            ScaleMode::Up => "up",
        }
    }
}

/// Parameters of one interpolation circuit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct InterpolationSpec {
    pub mode: ScaleMode,
    /// Input position bits per axis (image side `2^m`).
    pub m: u32,
    /// Scale exponent.
    pub n: u32,
    /// Color bits.
    pub q: u32,
}

impl InterpolationSpec {
    pub fn validate(&self) -> Result<(), BilerpError> {
        if self.n == 0 {
            return Err(BilerpError::InvalidSpec("scale exponent n must be at least 1"));
        }
        if self.q == 0 || self.q > crate::neqr::MAX_COLOR_BITS {
            return Err(BilerpError::InvalidSpec("color depth q must be in 1..=16"));
        }
        if self.m == 0 || self.m > MAX_POSITION_BITS {
            return Err(BilerpError::InvalidSpec("position width m must be in 1..=12"));
        }
        if self.mode == ScaleMode::Down && self.n > self.m {
            return Err(BilerpError::InvalidSpec("scale-down needs n <= m"));
        }
        Ok(())
    }
}

/// How many arithmetic blocks a circuit instantiated.
#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BlockCensus {
    pub adders: usize,
    pub subtractors: usize,
    pub multipliers: usize,
    pub dividers: usize,
}

/// Where everything lives in a generated interpolation circuit.
#[derive(Clone, Debug)]
pub struct InterpolationLayout {
    pub spec: InterpolationSpec,
    /// Coarse input position registers.
    pub pos_y: Register,
    pub pos_x: Register,
    /// Scale-up only: the new sub-position wires below the coarse position.
    pub sub_y: Option<Register>,
    pub sub_x: Option<Register>,
    /// Output position wires, least significant first. Aliases of existing
    /// wires, never arithmetic outputs.
    pub out_y: Vec<QubitId>,
    pub out_x: Vec<QubitId>,
    /// Neighbor colors in the order (y,x), (y+1,x), (y,x+1), (y+1,x+1).
    pub colors: [Register; 4],
    pub weight_y: Register,
    pub weight_x: Register,
    pub complement_y: Register,
    pub complement_x: Register,
    pub constant: Register,
    /// Pairwise weight products, matched to `colors` by index.
    pub weight_products: [Register; 4],
    /// Weight-product times color terms; index 0 doubles as the accumulator.
    pub color_products: [Register; 4],
    /// The interpolated color: accumulator wires `[2n, 2n+q)`.
    pub output: Vec<QubitId>,
    /// Registers left holding data-dependent intermediate values.
    pub garbage: Vec<String>,
    pub blocks: Vec<ArithmeticBlock>,
}

impl InterpolationLayout {
    /// Tallies the emitted blocks by kind.
    pub fn census(&self) -> BlockCensus {
        let mut census = BlockCensus::default();
        for b in &self.blocks {
            match b.kind {
                BlockKind::Adder => census.adders += 1,
                BlockKind::Subtractor => census.subtractors += 1,
                BlockKind::Multiplier => census.multipliers += 1,
                BlockKind::ConditionalAdder => {}
            }
        }
        census
    }
}

/// Errors raised by circuit generation or image-level interpolation.
#[derive(thiserror::Error, Clone, PartialEq, Debug)]
pub enum BilerpError {
    #[error("interpolation spec invalid: {0}")]
    InvalidSpec(&'static str),
    #[error("image has m={image_m}, q={image_q} but the spec says m={spec_m}, q={spec_q}")]
    SpecImageMismatch {
        image_m: u32,
        image_q: u32,
        spec_m: u32,
        spec_q: u32,
    },
    #[error("circuit output disagrees with the expected wire values at pixel ({y}, {x})")]
    PositionEcho { y: u32, x: u32 },
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Image(#[from] NeqrError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Builds the scale-down circuit: output position = high position bits,
/// weights = low position bits.
pub fn build_scale_down(
    spec: &InterpolationSpec,
) -> Result<(Circuit, InterpolationLayout), BilerpError> {
    if spec.mode != ScaleMode::Down {
        return Err(BilerpError::InvalidSpec("mode must be down"));
    }
    build(spec)
}

/// Builds the scale-up circuit: output position = fresh sub-position wires
/// concatenated below the coarse position, weights = those sub-position
/// bits.
pub fn build_scale_up(
    spec: &InterpolationSpec,
) -> Result<(Circuit, InterpolationLayout), BilerpError> {
    if spec.mode != ScaleMode::Up {
        return Err(BilerpError::InvalidSpec("mode must be up"));
    }
    build(spec)
}

/// Dispatches on `spec.mode`.
pub fn build_interpolation(
    spec: &InterpolationSpec,
) -> Result<(Circuit, InterpolationLayout), BilerpError> {
    match spec.mode {
        ScaleMode::Down => build_scale_down(spec),
        ScaleMode::Up => build_scale_up(spec),
    }
}

fn build(spec: &InterpolationSpec) -> Result<(Circuit, InterpolationLayout), BilerpError> {
    spec.validate()?;
    let m = spec.m as usize;
    let n = spec.n as usize;
    let q = spec.q as usize;
    let mut c = Circuit::new(0);
    let mut blocks: Vec<ArithmeticBlock> = Vec::with_capacity(13);

    let pos_y = c.alloc_register("y", m, RegisterRole::PositionY)?;
    let pos_x = c.alloc_register("x", m, RegisterRole::PositionX)?;
    let (sub_y, sub_x, wy_src, wx_src, out_y, out_x) = match spec.mode {
        ScaleMode::Down => {
            let out_y = pos_y.qubits[n..].to_vec();
            let out_x = pos_x.qubits[n..].to_vec();
            let wy = pos_y.qubits[..n].to_vec();
            let wx = pos_x.qubits[..n].to_vec();
            (None, None, wy, wx, out_y, out_x)
        }
        ScaleMode::Up => {
            let sy = c.alloc_register("sub_y", n, RegisterRole::PositionY)?;
            let sx = c.alloc_register("sub_x", n, RegisterRole::PositionX)?;
            let mut out_y = sy.qubits.clone();
            out_y.extend_from_slice(&pos_y.qubits);
            let mut out_x = sx.qubits.clone();
            out_x.extend_from_slice(&pos_x.qubits);
            let wy = sy.qubits.clone();
            let wx = sx.qubits.clone();
            (Some(sy), Some(sx), wy, wx, out_y, out_x)
        }
    };
    let color_names = ["c_yx", "c_y1x", "c_yx1", "c_y1x1"];
    let mut colors = Vec::with_capacity(4);
    for name in color_names {
        colors.push(c.alloc_register(name, q, RegisterRole::Color)?);
    }
    let colors: [Register; 4] = colors.try_into().expect("four color registers");

    // Step 1: weight copies. One wire wider than the weight so step 2's
    // complement (up to 2^n) and the multiplies stay in range.
    let weight_y = c.alloc_register("w_y", n + 1, RegisterRole::Garbage)?;
    let weight_x = c.alloc_register("w_x", n + 1, RegisterRole::Garbage)?;
    for (src, dst) in [(&wy_src, &weight_y), (&wx_src, &weight_x)] {
        for i in 0..n {
            c.cnot(src[i], dst.qubits[i])?;
        }
    }

    // Constant 2^n: a single X on the top wire.
    let constant = c.alloc_register("k", n + 1, RegisterRole::Constant)?;
    c.x(constant.qubits[n])?;

    // Step 2: complements. Seed each with the constant, subtract the weight.
    let complement_y = c.alloc_register("v_y", n + 1, RegisterRole::Garbage)?;
    let complement_x = c.alloc_register("v_x", n + 1, RegisterRole::Garbage)?;
    for (w, v) in [(&weight_y, &complement_y), (&weight_x, &complement_x)] {
        for i in 0..=n {
            c.cnot(constant.qubits[i], v.qubits[i])?;
        }
        blocks.push(build_subtractor(&mut c, w, v)?);
    }

    // Step 3: pairwise weight products, ordered to match the colors.
    let weight_pairs: [(&Register, &Register, &str); 4] = [
        (&complement_y, &complement_x, "p_yx"),
        (&weight_y, &complement_x, "p_y1x"),
        (&complement_y, &weight_x, "p_yx1"),
        (&weight_y, &weight_x, "p_y1x1"),
    ];
    let mut weight_products = Vec::with_capacity(4);
    for (a, b, name) in weight_pairs {
        let (block, product) = build_multiplier(&mut c, a, b, name)?;
        blocks.push(block);
        weight_products.push(product);
    }
    let weight_products: [Register; 4] =
        weight_products.try_into().expect("four weight products");

    // Step 4: weight product times neighbor color, both padded to a common
    // width. Pad wires stay 0 and only widen the operand.
    let k2 = (2 * n + 2).max(q);
    let mut color_products = Vec::with_capacity(4);
    for i in 0..4 {
        let a = widened(&mut c, &weight_products[i], k2)?;
        let b = widened(&mut c, &colors[i], k2)?;
        let (block, product) =
            build_multiplier(&mut c, a, b, &format!("t{}", &color_names[i][1..]))?;
        blocks.push(block);
        color_products.push(product);
    }
    let color_products: [Register; 4] =
        color_products.try_into().expect("four color products");

    // Step 5: accumulate the four terms over the exact sum width 2n+q. The
    // total is below 2^{2n+q}, so the in-place adds never wrap.
    let acc_width = 2 * n + q;
    let acc = Operand::new(
        format!("{}[0..{acc_width}]", color_products[0].name),
        color_products[0].qubits[..acc_width].to_vec(),
    );
    for term in &color_products[1..] {
        let a = Operand::new(
            format!("{}[0..{acc_width}]", term.name),
            term.qubits[..acc_width].to_vec(),
        );
        blocks.push(build_adder(&mut c, a, acc.clone())?);
    }

    let output = color_products[0].qubits[2 * n..2 * n + q].to_vec();
    let mut garbage: Vec<String> = vec![
        weight_y.name.clone(),
        weight_x.name.clone(),
        complement_y.name.clone(),
        complement_x.name.clone(),
    ];
    garbage.extend(weight_products.iter().map(|r| r.name.clone()));
    // the accumulator's wires outside the output slice are garbage too
    garbage.extend(color_products.iter().map(|r| r.name.clone()));

    let layout = InterpolationLayout {
        spec: *spec,
        pos_y,
        pos_x,
        sub_y,
        sub_x,
        out_y,
        out_x,
        colors,
        weight_y,
        weight_x,
        complement_y,
        complement_x,
        constant,
        weight_products,
        color_products,
        output,
        garbage,
        blocks,
    };
    Ok((c, layout))
}

/// Returns `reg` as an operand widened to `width` with fresh zero wires.
fn widened(
    c: &mut Circuit,
    reg: &Register,
    width: usize,
) -> Result<Operand, ArithmeticError> {
    if reg.width() >= width {
        return Ok(Operand::from(reg));
    }
    let pad = c.alloc_register(
        &format!("{}_pad", reg.name),
        width - reg.width(),
        RegisterRole::Garbage,
    )?;
    let mut qubits = reg.qubits.clone();
    qubits.extend_from_slice(&pad.qubits);
    Ok(Operand::new(format!("{}^", reg.name), qubits))
}

/// Which engine computes each output pixel.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Backend {
    Oracle,
    PermutationSim,
}

/// Rescales a whole image.
///
/// Scale down needs a sampling point per output block: `subpixel = (sy, sx)`
/// picks the source pixel `(y*2^n + sy, x*2^n + sx)` whose low position bits
/// become the interpolation weights; `(0, 0)` is plain decimation. Scale up
/// ignores `subpixel` (every sub-position is an output pixel).
///
/// With [`Backend::PermutationSim`] each output pixel loads its neighborhood
/// into the generated circuit's color registers, runs the permutation
/// backend, and reads the output slice; positions are checked to pass
/// through unchanged.
pub fn interpolate_image(
    image: &NeqrImage,
    spec: &InterpolationSpec,
    backend: Backend,
    subpixel: (u32, u32),
) -> Result<NeqrImage, BilerpError> {
    spec.validate()?;
    if spec.m != image.m() || spec.q != image.q() {
        return Err(BilerpError::SpecImageMismatch {
            image_m: image.m(),
            image_q: image.q(),
            spec_m: spec.m,
            spec_q: spec.q,
        });
    }
    match backend {
        Backend::Oracle => Ok(match spec.mode {
            ScaleMode::Down => oracle_scale_down(image, spec.n, subpixel)?,
            ScaleMode::Up => oracle_scale_up(image, spec.n)?,
        }),
        Backend::PermutationSim => interpolate_by_circuit(image, spec, subpixel),
    }
}

fn interpolate_by_circuit(
    image: &NeqrImage,
    spec: &InterpolationSpec,
    subpixel: (u32, u32),
) -> Result<NeqrImage, BilerpError> {
    let n = spec.n;
    let (sy, sx) = subpixel;
    if spec.mode == ScaleMode::Down {
        // surfaces subpixel range errors before any simulation
        FixedPointWeights::new(n, sy, sx)?;
    }
    let (circuit, layout) = build_interpolation(spec)?;
    let m_out = match spec.mode {
        ScaleMode::Down => spec.m - n,
        ScaleMode::Up => spec.m + n,
    };
    if m_out > MAX_POSITION_BITS {
        return Err(BilerpError::InvalidSpec("output image side exceeds 2^12"));
    }
    let side_out = 1u32 << m_out;
    let mut pixels = Vec::with_capacity(1usize << (2 * m_out));
    for y_out in 0..side_out {
        for x_out in 0..side_out {
            // anchor pixel in the source image and its weight bits
            let (y_src, x_src, wy, wx) = match spec.mode {
                ScaleMode::Down => ((y_out << n) + sy, (x_out << n) + sx, sy, sx),
                ScaleMode::Up => {
                    let mask = (1u32 << n) - 1;
                    (y_out >> n, x_out >> n, y_out & mask, x_out & mask)
                }
            };
            let nb = image.neighborhood(y_src, x_src);
            let mut input = ClassicalState::zeros(circuit.qubit_count());
            match spec.mode {
                ScaleMode::Down => {
                    input.set_register(&layout.pos_y, u64::from(y_src))?;
                    input.set_register(&layout.pos_x, u64::from(x_src))?;
                }
                ScaleMode::Up => {
                    input.set_register(&layout.pos_y, u64::from(y_src))?;
                    input.set_register(&layout.pos_x, u64::from(x_src))?;
                    input.set_register(layout.sub_y.as_ref().expect("up layout"), u64::from(wy))?;
                    input.set_register(layout.sub_x.as_ref().expect("up layout"), u64::from(wx))?;
                }
            }
            for (reg, color) in layout
                .colors
                .iter()
                .zip([nb.c_yx, nb.c_y1x, nb.c_yx1, nb.c_y1x1])
            {
                input.set_register(reg, u64::from(color))?;
            }
            let out = run_permutation(&circuit, &input)?;
            // positions and colors pass through; the output position wires
            // must spell this pixel's coordinates
            let echo_ok = read_wires(&out, &layout.out_y) == u64::from(y_out)
                && read_wires(&out, &layout.out_x) == u64::from(x_out)
                && layout
                    .colors
                    .iter()
                    .zip([nb.c_yx, nb.c_y1x, nb.c_yx1, nb.c_y1x1])
                    .all(|(reg, color)| out.read_register(reg) == u64::from(color));
            if !echo_ok {
                return Err(BilerpError::PositionEcho { y: y_out, x: x_out });
            }
            pixels.push(read_wires(&out, &layout.output) as u32);
        }
    }
    Ok(NeqrImage::new(m_out, spec.q, pixels)?)
}

fn read_wires(state: &ClassicalState, wires: &[QubitId]) -> u64 {
    let mut v = 0u64;
    for (i, &q) in wires.iter().enumerate() {
        if state.get(q) {
            v |= 1 << i;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::count_resources;

    fn down_spec() -> InterpolationSpec {
        InterpolationSpec { mode: ScaleMode::Down, m: 2, n: 1, q: 4 }
    }

    #[test]
    fn census_is_3_2_8_0_both_modes() {
        let (_, down) = build_scale_down(&down_spec()).unwrap();
        let (_, up) = build_scale_up(&InterpolationSpec {
            mode: ScaleMode::Up,
            m: 2,
            n: 1,
            q: 4,
        })
        .unwrap();
        for layout in [down, up] {
            assert_eq!(
                layout.census(),
                BlockCensus { adders: 3, subtractors: 2, multipliers: 8, dividers: 0 }
            );
        }
    }

    #[test]
    fn spec_validation_rejects_bad_shapes() {
        let bad = InterpolationSpec { mode: ScaleMode::Down, m: 1, n: 2, q: 4 };
        assert!(matches!(build_scale_down(&bad), Err(BilerpError::InvalidSpec(_))));
        let zero_q = InterpolationSpec { mode: ScaleMode::Up, m: 1, n: 1, q: 0 };
        assert!(matches!(build_scale_up(&zero_q), Err(BilerpError::InvalidSpec(_))));
    }

    #[test]
    fn single_pixel_blend_matches_hand_case() {
        // weights (1,0), colors (0,2,4,6), q=3 blend to 1
        let spec = InterpolationSpec { mode: ScaleMode::Up, m: 1, n: 1, q: 3 };
        let (c, layout) = build_scale_up(&spec).unwrap();
        let mut input = ClassicalState::zeros(c.qubit_count());
        input.set_register(layout.sub_y.as_ref().unwrap(), 1).unwrap();
        input.set_register(layout.sub_x.as_ref().unwrap(), 0).unwrap();
        for (reg, color) in layout.colors.iter().zip([0u64, 2, 4, 6]) {
            input.set_register(reg, color).unwrap();
        }
        let out = run_permutation(&c, &input).unwrap();
        assert_eq!(read_wires(&out, &layout.output), 1);
    }

    #[test]
    fn constant_image_is_a_fixed_point_on_both_backends() {
        let img = NeqrImage::constant(2, 4, 9).unwrap();
        let spec = down_spec();
        for subpixel in [(0, 0), (1, 1), (0, 1)] {
            let a = interpolate_image(&img, &spec, Backend::Oracle, subpixel).unwrap();
            let b = interpolate_image(&img, &spec, Backend::PermutationSim, subpixel).unwrap();
            assert_eq!(a, NeqrImage::constant(1, 4, 9).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn upscale_matches_oracle_on_a_small_image() {
        let img = NeqrImage::new(1, 4, vec![0, 8, 8, 8]).unwrap();
        let spec = InterpolationSpec { mode: ScaleMode::Up, m: 1, n: 1, q: 4 };
        let a = interpolate_image(&img, &spec, Backend::Oracle, (0, 0)).unwrap();
        let b = interpolate_image(&img, &spec, Backend::PermutationSim, (0, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.side(), 4);
    }

    #[test]
    fn measured_t_count_for_default_down_circuit() {
        let (c, _) = build_scale_down(&down_spec()).unwrap();
        let r = count_resources(&c);
        // exact composition at these widths: weight arithmetic at n+1 = 2,
        // color terms at max(2n+2, q) = 4, three adders at 2n+q = 6
        let expected = 2 * 4 // two subtractors width 2
            + 4 * 24 // four multipliers width 2
            + 4 * 112 // four multipliers width 4
            + 3 * 20; // three adders width 6
        assert_eq!(r.t_type_count(), expected);
    }
}
