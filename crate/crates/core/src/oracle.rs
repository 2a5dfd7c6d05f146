//! Classical reference for everything the circuits compute.
//!
//! The oracle works in plain integer arithmetic and defines the expected
//! output bit-for-bit: interpolation weights are n-bit fixed-point fractions
//! of `2^n`, the blend is an integer dot product against the four neighbors,
//! and the final color is the floor of that sum divided by `2^{2n}`.

use crate::neqr::{NeqrError, NeqrImage, PixelNeighborhood};

/// Errors raised by the resampling oracles.
#[derive(thiserror::Error, Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleError {
    #[error("scale precision must be at least 1 bit, got {0}")]
    ZeroPrecision(u32),
    #[error("cannot scale a side-2^{m} image down by 2^{n}")]
    ScaleTooLarge { m: u32, n: u32 },
    #[error("subpixel offset {got} must be below 2^{n}")]
    SubpixelOutOfRange { got: u32, n: u32 },
    #[error(transparent)]
    Image(#[from] NeqrError),
}

/// `(a + b) mod 2^bits`.
pub fn mod_add(a: u64, b: u64, bits: u32) -> u64 {
    a.wrapping_add(b) & mask(bits)
}

/// `(a - b) mod 2^bits`.
pub fn mod_sub(a: u64, b: u64, bits: u32) -> u64 {
    a.wrapping_sub(b) & mask(bits)
}

/// Exact product of two `bits`-wide operands; the result spans `2*bits`.
pub fn mod_mul(a: u64, b: u64, bits: u32) -> u64 {
    debug_assert!(a <= mask(bits) && b <= mask(bits));
    a * b
}

fn mask(bits: u32) -> u64 {
    debug_assert!(bits >= 1 && bits <= 63);
    (1u64 << bits) - 1
}

/// Interpolation weights: fractions `w/2^n` along each axis, `w < 2^n`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FixedPointWeights {
    pub n: u32,
    pub w_y: u32,
    pub w_x: u32,
}

impl FixedPointWeights {
    pub fn new(n: u32, w_y: u32, w_x: u32) -> Result<Self, OracleError> {
        if n == 0 {
            return Err(OracleError::ZeroPrecision(n));
        }
        for w in [w_y, w_x] {
            if w >= 1 << n {
                return Err(OracleError::SubpixelOutOfRange { got: w, n });
            }
        }
        Ok(FixedPointWeights { n, w_y, w_x })
    }

    /// `2^n - w_y`, the weight of the `y` row (an `n+1`-bit value).
    pub fn complement_y(&self) -> u64 {
        (1u64 << self.n) - u64::from(self.w_y)
    }

    /// `2^n - w_x`, the weight of the `x` column.
    pub fn complement_x(&self) -> u64 {
        (1u64 << self.n) - u64::from(self.w_x)
    }
}

/// Bilinear blend of a neighborhood at the given weights:
/// `floor(((2^n-wy)(2^n-wx) c_yx + wy (2^n-wx) c_y1x
///        + (2^n-wy) wx c_yx1 + wy wx c_y1x1) / 2^{2n})`.
///
/// The four coefficients sum to `2^{2n}`, so the result never exceeds the
/// largest input color.
pub fn bilerp_color(nb: &PixelNeighborhood, w: &FixedPointWeights) -> u32 {
    let wy = u64::from(w.w_y);
    let wx = u64::from(w.w_x);
    let vy = w.complement_y();
    let vx = w.complement_x();
    let sum = vy * vx * u64::from(nb.c_yx)
        + wy * vx * u64::from(nb.c_y1x)
        + vy * wx * u64::from(nb.c_yx1)
        + wy * wx * u64::from(nb.c_y1x1);
    (sum >> (2 * w.n)) as u32
}

/// Upscales by `2^n` per side. Output pixel `(y', x')` samples the input at
/// `(y' / 2^n, x' / 2^n)`: the integer parts pick the anchor pixel and the
/// low `n` bits become the interpolation weights.
pub fn oracle_scale_up(image: &NeqrImage, n: u32) -> Result<NeqrImage, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroPrecision(n));
    }
    let m_out = image.m() + n;
    let side_out = 1u32 << m_out;
    let mut pixels = alloc::vec::Vec::with_capacity(1 << (2 * m_out));
    for y_out in 0..side_out {
        for x_out in 0..side_out {
            let w = FixedPointWeights {
                n,
                w_y: y_out & ((1 << n) - 1),
                w_x: x_out & ((1 << n) - 1),
            };
            let nb = image.neighborhood(y_out >> n, x_out >> n);
            pixels.push(bilerp_color(&nb, &w));
        }
    }
    Ok(NeqrImage::new(m_out, image.q(), pixels)?)
}

/// Downscales by `2^n` per side. Output pixel `(y', x')` samples the input
/// at anchor `(y' * 2^n + sy, x' * 2^n + sx)` with weights `(sy, sx)`, where
/// `subpixel = (sy, sx)` selects the sampling point inside each block;
/// `(0, 0)` reduces to plain decimation.
pub fn oracle_scale_down(
    image: &NeqrImage,
    n: u32,
    subpixel: (u32, u32),
) -> Result<NeqrImage, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroPrecision(n));
    }
    if n > image.m() {
        return Err(OracleError::ScaleTooLarge { m: image.m(), n });
    }
    let (sy, sx) = subpixel;
    let w = FixedPointWeights::new(n, sy, sx)?;
    let m_out = image.m() - n;
    let side_out = 1u32 << m_out;
    let mut pixels = alloc::vec::Vec::with_capacity(1 << (2 * m_out));
    for y_out in 0..side_out {
        for x_out in 0..side_out {
            let nb = image.neighborhood((y_out << n) + sy, (x_out << n) + sx);
            pixels.push(bilerp_color(&nb, &w));
        }
    }
    Ok(NeqrImage::new(m_out, image.q(), pixels)?)
}
