//! EMB1: a minimal little-endian container for an N×D matrix of `f32`.
//!
//! Layout:
//!
//! | offset | size  | field                         |
//! |--------|-------|-------------------------------|
//! | 0      | 4     | magic `EMB1`                  |
//! | 4      | 4     | version, u32 (= 1)            |
//! | 8      | 4     | N (rows), u32                 |
//! | 12     | 4     | D (columns), u32              |
//! | 16     | 1     | dtype code (0 = f32)          |
//! | 17     | N·D·4 | row-major IEEE-754 binary32   |

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EMB1";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u8 = 0;
pub const HEADER_LEN: usize = 17;

/// Parsed header fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub rows: u32,
    pub cols: u32,
    pub dtype: u8,
}

impl Header {
    pub fn payload_len(&self) -> u64 {
        (self.rows as u64 * self.cols as u64).saturating_mul(4)
    }
}

/// Size in bytes of an EMB1 file holding an `n × d` matrix.
pub fn encoded_len(n: usize, d: usize) -> usize {
    HEADER_LEN + n * d * 4
}

pub fn decode_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let header = Header {
        rows: word(8),
        cols: word(12),
        dtype: bytes[16],
    };
    if header.rows == 0 || header.cols == 0 {
        return Err(Error::EmptyShape {
            n: header.rows,
            d: header.cols,
        });
    }
    if header.dtype != DTYPE_F32 {
        return Err(Error::UnsupportedDtype(header.dtype));
    }
    Ok(header)
}

/// Decodes a complete EMB1 buffer. Every failure mode maps to its own error
/// variant; the payload length is checked against the header before anything
/// is allocated.
pub fn decode(bytes: &[u8]) -> Result<Array2<f32>> {
    let header = decode_header(bytes)?;
    let expected = header.payload_len().saturating_add(HEADER_LEN as u64);
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(Error::TrailingBytes {
            extra: actual - expected,
        });
    }
    let (n, d) = (header.rows as usize, header.cols as usize);
    let mut values = Vec::with_capacity(n * d);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: i / d,
                col: i % d,
            });
        }
        values.push(v);
    }
    Ok(Array2::from_shape_vec((n, d), values).expect("length checked against header"))
}

/// Encodes a matrix, refusing empty shapes, dimensions beyond `u32` and
/// non-finite values.
pub fn encode(features: &Array2<f32>) -> Result<Vec<u8>> {
    let (n, d) = features.dim();
    let rows = u32::try_from(n).map_err(|_| Error::OutOfRange(format!("{n} rows")))?;
    let cols = u32::try_from(d).map_err(|_| Error::OutOfRange(format!("{d} columns")))?;
    if n == 0 || d == 0 {
        return Err(Error::EmptyShape { n: rows, d: cols });
    }
    let mut out = Vec::with_capacity(encoded_len(n, d));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.push(DTYPE_F32);
    for ((row, col), v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}
