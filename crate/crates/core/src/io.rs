//! On-disk formats for spectral states and sequences.
//!
//! Both formats store the coefficients `c_k` of [`SpectralField`] in its flat
//! layout (row-major, last axis fastest, slot `j` holds frequency `j` for
//! `j < N/2` and `j - N` otherwise).
//!
//! Binary, little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "NLSSPEC1"
//! 8       4     u32 dim
//! 12      4     u32 N (points per axis)
//! 16      4     u32 normalization tag (1 = c = DFT(u) / N^d)
//! 20      4     u32 reserved, 0
//! 24      16·N^d  f64 re, f64 im per coefficient
//! ```
//!
//! JSON: `{"format": "nls-spectral-v1", "dim", "n_per_axis", "normalization",
//! "coeffs": [[re, im], ...]}`. A sequence file is
//! `{"format": "nls-sequence-v1", "tau", "fields": [<spectral JSON>, ...]}`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::SequenceSample;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;

pub const BINARY_MAGIC: &[u8; 8] = b"NLSSPEC1";
pub const SPECTRAL_FORMAT: &str = "nls-spectral-v1";
pub const SEQUENCE_FORMAT: &str = "nls-sequence-v1";
pub const NORMALIZATION_TAG: u32 = 1;
pub const NORMALIZATION: &str = "u(x) = sum_k c_k exp(i k.x), c = DFT(u) / N^d";
const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectralFormat {
    #[default]
    Json,
    Binary,
}

impl FromStr for SpectralFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(SpectralFormat::Json),
            "bin" | "binary" => Ok(SpectralFormat::Binary),
            other => Err(Error::config(format!("unknown spectral format {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralDoc {
    format: String,
    dim: usize,
    n_per_axis: usize,
    normalization: String,
    coeffs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDoc {
    format: String,
    tau: f64,
    fields: Vec<SpectralDoc>,
}

impl From<&SpectralField> for SpectralDoc {
    fn from(f: &SpectralField) -> Self {
        SpectralDoc {
            format: SPECTRAL_FORMAT.into(),
            dim: f.grid().dim(),
            n_per_axis: f.grid().n_per_axis(),
            normalization: NORMALIZATION.into(),
            coeffs: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<SpectralDoc> for SpectralField {
    type Error = Error;
    fn try_from(doc: SpectralDoc) -> Result<Self> {
        if doc.format != SPECTRAL_FORMAT {
            return Err(Error::Parse(format!(
                "expected format {SPECTRAL_FORMAT:?}, got {:?}",
                doc.format
            )));
        }
        let grid = TorusGrid::new(doc.dim, doc.n_per_axis)?;
        let coeffs = doc.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        SpectralField::from_coeffs(grid, coeffs)
    }
}

pub fn spectral_to_json(f: &SpectralField) -> String {
    serde_json::to_string(&SpectralDoc::from(f)).expect("spectral fields serialize")
}

pub fn spectral_from_json(text: &str) -> Result<SpectralField> {
    let doc: SpectralDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.try_into()
}

pub fn spectral_to_bytes(f: &SpectralField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.coeffs().len());
    out.extend_from_slice(BINARY_MAGIC);
    for v in [
        f.grid().dim() as u32,
        f.grid().n_per_axis() as u32,
        NORMALIZATION_TAG,
        0,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for c in f.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn le_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn le_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn spectral_from_bytes(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != BINARY_MAGIC {
        return Err(Error::Parse("missing NLSSPEC1 header".into()));
    }
    let tag = le_u32(bytes, 16);
    if tag != NORMALIZATION_TAG {
        return Err(Error::Parse(format!("unknown normalization tag {tag}")));
    }
    let grid = TorusGrid::new(le_u32(bytes, 8) as usize, le_u32(bytes, 12) as usize)?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 16 * grid.len() {
        return Err(Error::Parse(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            16 * grid.len()
        )));
    }
    let coeffs = (0..grid.len())
        .map(|i| Complex64::new(le_f64(payload, 16 * i), le_f64(payload, 16 * i + 8)))
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

pub fn write_spectral(path: &Path, f: &SpectralField, format: SpectralFormat) -> Result<()> {
    match format {
        SpectralFormat::Json => fs::write(path, spectral_to_json(f))?,
        SpectralFormat::Binary => fs::write(path, spectral_to_bytes(f))?,
    }
    Ok(())
}

/// Reads either format, recognising the binary one by its magic.
pub fn read_spectral(path: &Path) -> Result<SpectralField> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        spectral_from_bytes(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::Parse(format!("{}: neither binary dump nor UTF-8 JSON", path.display())))?;
        spectral_from_json(text)
    }
}

pub fn sequence_to_json(seq: &SequenceSample) -> String {
    let doc = SequenceDoc {
        format: SEQUENCE_FORMAT.into(),
        tau: seq.tau(),
        fields: seq.fields().iter().map(SpectralDoc::from).collect(),
    };
    serde_json::to_string(&doc).expect("sequences serialize")
}

pub fn sequence_from_json(text: &str) -> Result<SequenceSample> {
    let doc: SequenceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.format != SEQUENCE_FORMAT {
        return Err(Error::Parse(format!(
            "expected format {SEQUENCE_FORMAT:?}, got {:?}",
            doc.format
        )));
    }
    let fields = doc
        .fields
        .into_iter()
        .map(SpectralField::try_from)
        .collect::<Result<Vec<_>>>()?;
    SequenceSample::new(doc.tau, fields)
}

pub fn read_sequence(path: &Path) -> Result<SequenceSample> {
    sequence_from_json(&fs::read_to_string(path)?)
}
