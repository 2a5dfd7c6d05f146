//! NEQR-encoded grayscale images.
//!
//! A square image of side `2^m` with `q`-bit colors. In the NEQR state each
//! pixel contributes one basis term `|Y>|X>|C_YX>` packed into a single
//! basis index as `(Y << (m+q)) | (X << q) | C`; simulation works per basis
//! term, so the image type stores the classical pixel array and exposes the
//! packing.

use alloc::vec;
use alloc::vec::Vec;

/// Largest supported `m` (side `2^12`, 16M pixels).
pub const MAX_POSITION_BITS: u32 = 12;
/// Largest supported color depth in bits.
pub const MAX_COLOR_BITS: u32 = 16;

/// Errors raised when constructing or resampling images.
#[derive(thiserror::Error, Clone, Copy, PartialEq, Eq, Debug)]
pub enum NeqrError {
    #[error("color depth must be 1..={MAX_COLOR_BITS} bits, got {0}")]
    InvalidColorDepth(u32),
    #[error("position bits must be 0..={MAX_POSITION_BITS}, got {0}")]
    SideTooLarge(u32),
    #[error("expected {expected} pixels for side 2^{m}, got {got}")]
    WrongPixelCount { m: u32, expected: usize, got: usize },
    #[error("pixel {index} has value {value}, above the {q}-bit maximum")]
    PixelOutOfRange { index: usize, value: u32, q: u32 },
}

/// Four adjacent pixels around `(y, x)`: itself, the next row, the next
/// column, and the diagonal. At the bottom or right edge the out-of-image
/// neighbor is clamped to the nearest existing pixel.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PixelNeighborhood {
    pub c_yx: u32,
    pub c_y1x: u32,
    pub c_yx1: u32,
    pub c_y1x1: u32,
}

/// A `2^m` by `2^m` grayscale image with `q`-bit colors, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NeqrImage {
    m: u32,
    q: u32,
    pixels: Vec<u32>,
}

impl NeqrImage {
    pub fn new(m: u32, q: u32, pixels: Vec<u32>) -> Result<Self, NeqrError> {
        if q == 0 || q > MAX_COLOR_BITS {
            return Err(NeqrError::InvalidColorDepth(q));
        }
        if m > MAX_POSITION_BITS {
            return Err(NeqrError::SideTooLarge(m));
        }
        let expected = 1usize << (2 * m);
        if pixels.len() != expected {
            return Err(NeqrError::WrongPixelCount {
                m,
                expected,
                got: pixels.len(),
            });
        }
        let max = Self::max_color_for(q);
        for (index, &value) in pixels.iter().enumerate() {
            if value > max {
                return Err(NeqrError::PixelOutOfRange { index, value, q });
            }
        }
        Ok(NeqrImage { m, q, pixels })
    }

    /// Uniform image of one color.
    pub fn constant(m: u32, q: u32, value: u32) -> Result<Self, NeqrError> {
        Self::new(m, q, vec![value; 1usize << (2 * m)])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Pixels per side: `2^m`.
    pub fn side(&self) -> u32 {
        1 << self.m
    }

    fn max_color_for(q: u32) -> u32 {
        (1 << q) - 1
    }

    /// Largest representable color: `2^q - 1`.
    pub fn max_color(&self) -> u32 {
        Self::max_color_for(self.q)
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    /// Color at row `y`, column `x`. Panics when out of bounds.
    pub fn pixel(&self, y: u32, x: u32) -> u32 {
        assert!(y < self.side() && x < self.side(), "pixel ({y},{x}) out of bounds");
        self.pixels[((y as usize) << self.m) | x as usize]
    }

    /// Overwrites one pixel; the value must fit in `q` bits.
    pub fn set_pixel(&mut self, y: u32, x: u32, value: u32) -> Result<(), NeqrError> {
        assert!(y < self.side() && x < self.side(), "pixel ({y},{x}) out of bounds");
        if value > self.max_color() {
            return Err(NeqrError::PixelOutOfRange {
                index: ((y as usize) << self.m) | x as usize,
                value,
                q: self.q,
            });
        }
        self.pixels[((y as usize) << self.m) | x as usize] = value;
        Ok(())
    }

    /// The 2x2 neighborhood anchored at `(y, x)`, edge-clamped.
    pub fn neighborhood(&self, y: u32, x: u32) -> PixelNeighborhood {
        let last = self.side() - 1;
        let y1 = (y + 1).min(last);
        let x1 = (x + 1).min(last);
        PixelNeighborhood {
            c_yx: self.pixel(y, x),
            c_y1x: self.pixel(y1, x),
            c_yx1: self.pixel(y, x1),
            c_y1x1: self.pixel(y1, x1),
        }
    }

    /// Basis index of the NEQR term for pixel `(y, x)`:
    /// `(y << (m+q)) | (x << q) | color`.
    pub fn encode_pixel_basis_index(&self, y: u32, x: u32) -> u64 {
        let c = self.pixel(y, x) as u64;
        ((y as u64) << (self.m + self.q)) | ((x as u64) << self.q) | c
    }

    /// Splits a packed basis index into `(y, x, color)`.
    pub fn decode_basis_index(m: u32, q: u32, index: u64) -> (u32, u32, u32) {
        let color = (index & ((1 << q) - 1)) as u32;
        let x = (index >> q & ((1 << m) - 1)) as u32;
        let y = (index >> (m + q) & ((1 << m) - 1)) as u32;
        (y, x, color)
    }
}
