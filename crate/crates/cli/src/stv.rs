//! The STV1 volume container.
//!
//! Layout (little-endian): `b"STV1"`, `u32 nx`, `u32 ny`, `u32 nt`,
//! `u32 dtype` (0 = f32, 1 = f64), then `nx * ny * nt` samples, x fastest.

use std::fs;
use std::path::{Path, PathBuf};

use gcm_core::SequenceVolume;

use crate::error::CliError;

pub const MAGIC: &[u8; 4] = b"STV1";
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Dtype {
    #[default]
    F32,
    F64,
}

impl Dtype {
    pub fn tag(self) -> u32 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Dtype::F32),
            1 => Some(Dtype::F64),
            _ => None,
        }
    }
}

/// A decoded STV volume. Dimensions of 1 are allowed (2D kernel dumps).
#[derive(Debug, Clone, PartialEq)]
pub struct StvFile {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub dtype: Dtype,
    pub data: Vec<f64>,
}

impl StvFile {
    pub fn new(nx: usize, ny: usize, nt: usize, dtype: Dtype, data: Vec<f64>) -> Result<Self, CliError> {
        if nx * ny * nt != data.len() || nx == 0 || ny == 0 || nt == 0 {
            return Err(CliError::Usage(format!(
                "{} samples do not fill a {nx}x{ny}x{nt} volume",
                data.len()
            )));
        }
        Ok(Self { nx, ny, nt, dtype, data })
    }

    pub fn from_sequence(seq: &SequenceVolume, dtype: Dtype) -> Self {
        let (nx, ny, nt) = seq.dims();
        Self {
            nx,
            ny,
            nt,
            dtype,
            data: seq.data().to_vec(),
        }
    }

    pub fn to_sequence(&self) -> Result<SequenceVolume, CliError> {
        Ok(SequenceVolume::new(self.nx, self.ny, self.nt, self.data.clone())?)
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.dtype.size() * self.data.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        for v in [self.nx as u32, self.ny as u32, self.nt as u32, self.dtype.tag()] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match self.dtype {
            Dtype::F32 => self
                .data
                .iter()
                .for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
            Dtype::F64 => self
                .data
                .iter()
                .for_each(|&v| out.extend_from_slice(&v.to_le_bytes())),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER_LEN {
            return Err(format!("{} bytes is shorter than the header", bytes.len()));
        }
        if &bytes[..4] != MAGIC {
            return Err("missing STV1 magic".to_string());
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        let (nx, ny, nt) = (word(0) as usize, word(1) as usize, word(2) as usize);
        let dtype = Dtype::from_tag(word(3)).ok_or_else(|| format!("unknown dtype tag {}", word(3)))?;
        let n = nx
            .checked_mul(ny)
            .and_then(|v| v.checked_mul(nt))
            .ok_or("dimensions overflow")?;
        if n == 0 {
            return Err(format!("empty volume {nx}x{ny}x{nt}"));
        }
        let expected = n
            .checked_mul(dtype.size())
            .and_then(|v| v.checked_add(HEADER_LEN))
            .ok_or("dimensions overflow")?;
        if bytes.len() != expected {
            return Err(format!("expected {expected} bytes, found {}", bytes.len()));
        }
        let body = &bytes[HEADER_LEN..];
        let data = match dtype {
            Dtype::F32 => body
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
            Dtype::F64 => body
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        };
        Ok(Self { nx, ny, nt, dtype, data })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.encode()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::decode(&bytes).map_err(|reason| CliError::Format {
            path: path.to_path_buf(),
            reason,
        })
    }
}

/// `<dir>/<stem>.json` next to a volume file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}
