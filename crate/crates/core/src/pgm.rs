//! Binary greymap (P5) reading and writing.
//!
//! Writes are always 16-bit big-endian with `maxval = 65535`. Reads accept
//! 8-bit and 16-bit rasters and any number of `#` comment lines in the header.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const MAXVAL_16: u16 = u16::MAX;

/// Offset added to signed difference images before they are stored.
pub const SIGNED_OFFSET: i64 = 32768;

#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub pixels: Grid<u16>,
    pub maxval: u16,
    pub comments: Vec<String>,
}

pub fn encode(pixels: &Grid<u16>, comments: &[String]) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 2 * pixels.len());
    out.extend_from_slice(b"P5\n");
    for c in comments {
        for line in c.lines() {
            out.extend_from_slice(b"# ");
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
    }
    out.extend_from_slice(format!("{} {}\n{}\n", pixels.cols(), pixels.rows(), MAXVAL_16).as_bytes());
    for v in pixels.iter() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn write(path: &Path, pixels: &Grid<u16>, comments: &[String]) -> Result<()> {
    let bytes = encode(pixels, comments);
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(wrap)?;
    f.write_all(&bytes).map_err(wrap)
}

/// Clamps unsigned counts into the 16-bit range.
pub fn clamp_counts(counts: &Grid<u32>) -> Grid<u16> {
    counts.map(|&v| v.min(u32::from(MAXVAL_16)) as u16)
}

/// Shifts signed values by [`SIGNED_OFFSET`] and clamps into 16 bits.
pub fn offset_signed(values: &Grid<i64>) -> Grid<u16> {
    values.map(|&v| (v + SIGNED_OFFSET).clamp(0, i64::from(MAXVAL_16)) as u16)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: Vec<String>,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                let start = self.pos + 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                let text = String::from_utf8_lossy(&self.bytes[start..self.pos]);
                self.comments.push(text.trim().to_string());
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("bad {what}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Pgm> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::Pgm("missing P5 magic".into()));
    }
    let mut h = Header {
        bytes,
        pos: 2,
        comments: Vec::new(),
    };
    let cols = h.number("width")?;
    let rows = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > usize::from(MAXVAL_16) {
        return Err(Error::Pgm(format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    if h.pos >= bytes.len() || !bytes[h.pos].is_ascii_whitespace() {
        return Err(Error::Pgm("missing raster separator".into()));
    }
    let raster = &bytes[h.pos + 1..];
    let wide = maxval > 255;
    let need = rows * cols * if wide { 2 } else { 1 };
    if raster.len() < need {
        return Err(Error::Pgm(format!("raster truncated: {} of {need} bytes", raster.len())));
    }
    let data: Vec<u16> = if wide {
        raster[..need]
            .chunks_exact(2)
            .map(|p| u16::from_be_bytes([p[0], p[1]]))
            .collect()
    } else {
        raster[..need].iter().map(|&b| u16::from(b)).collect()
    };
    Ok(Pgm {
        pixels: Grid::from_vec(rows, cols, data)?,
        maxval: maxval as u16,
        comments: h.comments,
    })
}

pub fn read(path: &Path) -> Result<Pgm> {
    let bytes = std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}
