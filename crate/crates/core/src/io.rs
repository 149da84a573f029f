//! Spec and report files, the matrix text format, and input digests.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{to_matrix, ContinuousModel, DiscreteModel, TailReport, ValidationReport};
use crate::pencil::{MetzlerPencil, PoleReport};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A pencil given by its coefficient matrices, A(z) = sum_k z^k C_k, with
/// the point at which to analyse it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitPencilSpec {
    pub coefficients: Vec<Vec<Vec<f64>>>,
    pub root: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

impl ExplicitPencilSpec {
    pub fn pencil(&self) -> Result<MetzlerPencil> {
        let c = self.coefficients.iter().map(|m| to_matrix(m)).collect::<Result<Vec<_>>>()?;
        MetzlerPencil::explicit(c)
    }

    pub fn weights(&self) -> Result<Option<(&[f64], &[f64])>> {
        match (&self.v, &self.w) {
            (Some(v), Some(w)) => Ok(Some((v, w))),
            (None, None) => Ok(None),
            _ => Err(Error::Dimension("v and w must be given together".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Continuous(ContinuousModel),
    Discrete(DiscreteModel),
    ExplicitPencil(ExplicitPencilSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub format_version: u32,
    pub model: ModelSpec,
}

impl SpecFile {
    pub fn new(model: ModelSpec) -> Self {
        SpecFile { format_version: FORMAT_VERSION, model }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match raw.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::FormatVersion(v as u32)),
            None => return Err(Error::Parse("missing or non-integer field `format_version`".into())),
        }
        let spec: SpecFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// sha256 of the compact serialization of the parsed spec, so that
    /// whitespace and key order in the file do not matter.
    pub fn digest(&self) -> Result<String> {
        Ok(sha256_hex(&serde_json::to_vec(self)?))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ReportBody {
    Tail(TailReport),
    Pole(PoleReport),
    Validation(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub tool_version: String,
    pub input_digest: String,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub report: ReportBody,
}

impl ReportFile {
    pub fn new(input_digest: String, seeds: Vec<u64>, report: ReportBody) -> Self {
        ReportFile { tool_version: TOOL_VERSION.to_string(), input_digest, seeds, report }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Whitespace-separated rows, one per line. `#` starts a comment; blank
/// lines are skipped.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let row = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number `{t}`", lineno + 1))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no matrix rows".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn format_matrix(a: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{}", a[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_matrix;

    const REED: &str = r#"{
      "format_version": 1,
      "model": {
        "type": "continuous",
        "pi": [[0.0]],
        "lambda": [1.0],
        "initial_law": [1.0],
        "levy": [{"exponent": {"kind": "gaussian", "parameters": {"mean": 0.0, "variance": 2.0}}}]
      }
    }"#;

    #[test]
    fn parses_continuous_spec() {
        let s = SpecFile::parse(REED).unwrap();
        assert!(matches!(s.model, ModelSpec::Continuous(_)));
        let again = SpecFile::parse(&s.to_json().unwrap()).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.digest().unwrap(), s.digest().unwrap());
        assert_eq!(s.digest().unwrap().len(), 64);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = REED.replace("\"lambda\"", "\"extra\": 1, \"lambda\"");
        assert!(matches!(SpecFile::parse(&bad), Err(Error::Parse(_))));
        let bad = REED.replace("\"format_version\": 1,", "\"format_version\": 1, \"x\": 0,");
        assert!(matches!(SpecFile::parse(&bad), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_other_versions() {
        let bad = REED.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(SpecFile::parse(&bad), Err(Error::FormatVersion(2))));
    }

    #[test]
    fn matrix_text_round_trip() {
        let a = example_matrix();
        let back = parse_matrix(&format_matrix(&a)).unwrap();
        assert_eq!(a, back);
        assert!(matches!(parse_matrix("1 2\n3\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("1 2\n"), Err(Error::NotSquare { .. })));
        assert_eq!(parse_matrix("# c\n1, 0 # x\n\n0 1\n").unwrap(), DMatrix::identity(2, 2));
    }
}
