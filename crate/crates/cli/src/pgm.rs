//! Plain-text PGM (P2) images, restricted to the shapes the image model
//! accepts: square, power-of-two side, maxval `2^q - 1` with `q <= 16`.

use std::fmt::Write as _;

use qbilerp_core::neqr::{NeqrError, NeqrImage};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum PgmError {
    #[error("not a P2 (plain grayscale) file")]
    BadMagic,
    #[error("unexpected end of file, wanted {0}")]
    Truncated(&'static str),
    #[error("bad {what} token `{token}`")]
    BadToken { what: &'static str, token: String },
    #[error("image is {w}x{h}; need a square power-of-two side")]
    BadShape { w: u32, h: u32 },
    #[error("maxval {0} is not 2^q - 1 for some q in 1..=16")]
    BadMaxval(u32),
    #[error("{got} pixel values for a {want}-pixel image")]
    WrongPixelCount { want: usize, got: usize },
    #[error(transparent)]
    Image(#[from] NeqrError),
}

/// Parses a P2 file. `#` comments run to end of line, as in the format.
pub fn read_pgm(text: &str) -> Result<NeqrImage, PgmError> {
    let mut tokens = text
        .lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace());
    if tokens.next() != Some("P2") {
        return Err(PgmError::BadMagic);
    }
    let mut field = |what: &'static str| -> Result<u32, PgmError> {
        let tok = tokens.next().ok_or(PgmError::Truncated(what))?;
        tok.parse().map_err(|_| PgmError::BadToken { what, token: tok.to_string() })
    };
    let w = field("width")?;
    let h = field("height")?;
    let maxval = field("maxval")?;
    if w != h || w == 0 || !w.is_power_of_two() {
        return Err(PgmError::BadShape { w, h });
    }
    let m = w.trailing_zeros();
    let q = (maxval + 1).trailing_zeros();
    if maxval == 0 || maxval + 1 != 1 << q || q > 16 {
        return Err(PgmError::BadMaxval(maxval));
    }
    let want = (w as usize) * (w as usize);
    let mut pixels = Vec::with_capacity(want);
    for tok in tokens {
        pixels.push(
            tok.parse()
                .map_err(|_| PgmError::BadToken { what: "pixel", token: tok.to_string() })?,
        );
    }
    if pixels.len() != want {
        return Err(PgmError::WrongPixelCount { want, got: pixels.len() });
    }
    Ok(NeqrImage::new(m, q, pixels)?)
}

/// Serializes as P2, one image row per line.
pub fn write_pgm(img: &NeqrImage) -> String {
    let side = img.side();
    let mut out = format!("P2\n{side} {side}\n{}\n", img.max_color());
    for y in 0..side {
        for x in 0..side {
            if x > 0 {
                out.push(' ');
            }
            write!(out, "{}", img.pixel(y, x)).unwrap();
        }
        out.push('\n');
    }
    out
}
