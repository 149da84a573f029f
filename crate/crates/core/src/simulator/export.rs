use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SampleKind, SampleSet, SurvivalPoint};
use crate::error::{Error, Result};

/// Sidecar record stored next to a binary sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleMetadata {
    pub seed: u64,
    pub n_paths: u64,
    pub model_digest: String,
    pub kind: SampleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resets: Option<u64>,
}

impl From<&SampleSet> for SampleMetadata {
    fn from(s: &SampleSet) -> Self {
        SampleMetadata {
            seed: s.seed,
            n_paths: s.n_paths,
            model_digest: s.model_digest.clone(),
            kind: s.kind,
            resets: s.resets,
        }
    }
}

/// u64 count then the values, all little-endian.
pub fn write_sample_file(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sample_file(path: &Path) -> Result<Vec<f64>> {
    let mut inp = BufReader::new(File::open(path)?);
    let mut buf = [0u8; 8];
    inp.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    let mut bytes = Vec::new();
    inp.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * n {
        return Err(Error::Parse(format!("sample file declares {n} values but holds {} bytes", bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_sidecar(path: &Path, samples: &SampleSet) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&SampleMetadata::from(samples))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_survival_csv(path: &Path, curve: &[SurvivalPoint]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "w,S(w),count")?;
    for p in curve {
        writeln!(out, "{},{},{}", p.w, p.survival, p.count)?;
    }
    out.flush()?;
    Ok(())
}
