//! Binary trace blobs: sequences of state tensors packed as bitplanes.
//!
//! A blob file is a concatenation of segments. Each segment is
//!
//! ```text
//! magic  b"KTB1"
//! rows   u16 LE
//! cols   u16 LE
//! chans  u16 LE
//! steps  u32 LE
//! steps * chans planes, each ceil(rows*cols/8) bytes, LSB-first, row-major
//! ```
//!
//! Segments are addressed by their byte offset in the file.

use std::fs::File;
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use thiserror::Error;

use crate::world::{StateTensor, CHANNELS};

pub const MAGIC: &[u8; 4] = b"KTB1";
pub const HEADER_LEN: usize = 14;

#[derive(Debug, Error)]
pub enum BlobError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic at offset {0}")]
    BadMagic(u64),
    #[error("segment is empty")]
    Empty,
    #[error("tensors in one segment must share a shape")]
    ShapeMismatch,
    #[error("grid too large for the blob header")]
    TooLarge,
    #[error("unsupported channel count {0}")]
    Channels(u16),
}

/// Location of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BlobRef {
    pub offset: u64,
    pub steps: u32,
}

fn plane_len(rows: usize, cols: usize) -> usize {
    (rows * cols).div_ceil(8)
}

/// Serializes one segment.
pub fn encode_segment(tensors: &[StateTensor]) -> Result<Vec<u8>, BlobError> {
    let first = tensors.first().ok_or(BlobError::Empty)?;
    let (rows, cols) = (first.rows, first.cols);
    if tensors.iter().any(|t| t.rows != rows || t.cols != cols) {
        return Err(BlobError::ShapeMismatch);
    }
    let r16 = u16::try_from(rows).map_err(|_| BlobError::TooLarge)?;
    let c16 = u16::try_from(cols).map_err(|_| BlobError::TooLarge)?;
    let steps = u32::try_from(tensors.len()).map_err(|_| BlobError::TooLarge)?;
    let plane = plane_len(rows, cols);
    let mut out = Vec::with_capacity(HEADER_LEN + tensors.len() * CHANNELS * plane);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&r16.to_le_bytes());
    out.extend_from_slice(&c16.to_le_bytes());
    out.extend_from_slice(&(CHANNELS as u16).to_le_bytes());
    out.extend_from_slice(&steps.to_le_bytes());
    for t in tensors {
        for ch in 0..CHANNELS {
            let start = out.len();
            out.resize(start + plane, 0);
            for cell in 0..rows * cols {
                if t.data[cell * CHANNELS + ch] != 0 {
                    out[start + cell / 8] |= 1 << (cell % 8);
                }
            }
        }
    }
    Ok(out)
}

/// Parses one segment from the start of `bytes`; returns the tensors and the
/// number of bytes consumed.
pub fn decode_segment(bytes: &[u8]) -> Result<(Vec<StateTensor>, usize), BlobError> {
    let eof = || BlobError::Io(io::Error::from(io::ErrorKind::UnexpectedEof));
    if bytes.len() < HEADER_LEN {
        return Err(eof());
    }
    if &bytes[..4] != MAGIC {
        return Err(BlobError::BadMagic(0));
    }
    let rows = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
    let cols = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let chans = u16::from_le_bytes([bytes[8], bytes[9]]);
    let steps = u32::from_le_bytes([bytes[10], bytes[11], bytes[12], bytes[13]]) as usize;
    if chans as usize != CHANNELS {
        return Err(BlobError::Channels(chans));
    }
    let plane = plane_len(rows, cols);
    let total = HEADER_LEN + steps * CHANNELS * plane;
    if bytes.len() < total {
        return Err(eof());
    }
    let mut tensors = Vec::with_capacity(steps);
    let mut pos = HEADER_LEN;
    for _ in 0..steps {
        let mut data = vec![0u8; rows * cols * CHANNELS];
        for ch in 0..CHANNELS {
            let bits = &bytes[pos..pos + plane];
            for cell in 0..rows * cols {
                data[cell * CHANNELS + ch] = (bits[cell / 8] >> (cell % 8)) & 1;
            }
            pos += plane;
        }
        tensors.push(StateTensor { rows, cols, data });
    }
    Ok((tensors, total))
}

/// Appends segments to a blob file.
pub struct BlobWriter {
    out: BufWriter<File>,
    offset: u64,
}

impl BlobWriter {
    pub fn create(path: &Path) -> Result<Self, BlobError> {
        Ok(BlobWriter {
            out: BufWriter::new(File::create(path)?),
            offset: 0,
        })
    }

    pub fn append(&mut self, tensors: &[StateTensor]) -> Result<BlobRef, BlobError> {
        let bytes = encode_segment(tensors)?;
        self.out.write_all(&bytes)?;
        let r = BlobRef {
            offset: self.offset,
            steps: tensors.len() as u32,
        };
        self.offset += bytes.len() as u64;
        Ok(r)
    }

    pub fn finish(mut self) -> Result<u64, BlobError> {
        self.out.flush()?;
        Ok(self.offset)
    }
}

/// Random access to segments of a blob file.
pub struct BlobReader {
    file: File,
}

impl BlobReader {
    pub fn open(path: &Path) -> Result<Self, BlobError> {
        Ok(BlobReader {
            file: File::open(path)?,
        })
    }

    pub fn read(&mut self, at: BlobRef) -> Result<Vec<StateTensor>, BlobError> {
        self.file.seek(SeekFrom::Start(at.offset))?;
        let mut header = [0u8; HEADER_LEN];
        self.file.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(BlobError::BadMagic(at.offset));
        }
        let rows = u16::from_le_bytes([header[4], header[5]]) as usize;
        let cols = u16::from_le_bytes([header[6], header[7]]) as usize;
        let steps = u32::from_le_bytes([header[10], header[11], header[12], header[13]]) as usize;
        let mut buf = header.to_vec();
        buf.resize(HEADER_LEN + steps * CHANNELS * plane_len(rows, cols), 0);
        self.file.read_exact(&mut buf[HEADER_LEN..])?;
        Ok(decode_segment(&buf)?.0)
    }
}
