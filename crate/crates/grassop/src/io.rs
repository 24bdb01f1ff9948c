//! JSON interchange for operators and paths.
//!
//! An operator is stored as its signature and one orthonormal frame per eigenspace:
//!
//! ```json
//! {"sigma": [1.0, 2.0], "d": [1, 1], "N": 2, "frames": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}
//! ```
//!
//! Frame entries are `[re, im]` pairs in column-major order. Floats are written in the
//! shortest form that parses back to the same binary64 value, so a round trip is exact.

use grassop_core::connectivity::OperatorPath;
use grassop_core::linalg::c64;
use grassop_core::{ClassSignature, ComplexMatrix, SpectralOperator, Subspace, Tolerance};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation error: {0}")]
    Validation(String),
}

pub type IoResult<T> = Result<T, IoError>;

fn invalid<T>(msg: impl Into<String>) -> IoResult<T> {
    Err(IoError::Validation(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub sigma: Vec<f64>,
    pub d: Vec<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    pub frames: Vec<Vec<[f64; 2]>>,
}

impl OperatorDoc {
    pub fn from_operator(a: &SpectralOperator) -> Self {
        let s = a.signature();
        let frames = a
            .eigenspaces()
            .iter()
            .map(|x| x.frame().iter().map(|z| [z.re, z.im]).collect())
            .collect();
        OperatorDoc {
            sigma: s.eigenvalues().to_vec(),
            d: s.multiplicities().to_vec(),
            n: s.ambient_dim(),
            frames,
        }
    }

    pub fn to_operator(&self) -> IoResult<SpectralOperator> {
        self.to_operator_with_tol(Tolerance::DEFAULT)
    }

    pub fn to_operator_with_tol(&self, tol: Tolerance) -> IoResult<SpectralOperator> {
        if self.sigma.len() != self.d.len() {
            return invalid(format!("{} eigenvalues but {} multiplicities", self.sigma.len(), self.d.len()));
        }
        let total: usize = self.d.iter().sum();
        if total != self.n {
            return invalid(format!("multiplicities sum to {total}, N = {}", self.n));
        }
        if self.frames.len() != self.d.len() {
            return invalid(format!("{} frames for {} eigenvalues", self.frames.len(), self.d.len()));
        }
        let sig = ClassSignature::new(self.sigma.clone(), self.d.clone())
            .or_else(|e| invalid(e.to_string()))?;
        let mut spaces = Vec::with_capacity(self.d.len());
        for (t, (entries, &dim)) in self.frames.iter().zip(&self.d).enumerate() {
            if entries.len() != self.n * dim {
                return invalid(format!(
                    "frame {t} has {} entries, expected N * d = {}",
                    entries.len(),
                    self.n * dim
                ));
            }
            if entries.iter().flatten().any(|x| !x.is_finite()) {
                return invalid(format!("frame {t} has a non-finite entry"));
            }
            let m = ComplexMatrix::from_iterator(self.n, dim, entries.iter().map(|&[re, im]| c64(re, im)));
            let x = Subspace::from_frame(m, tol).or_else(|e| invalid(format!("frame {t}: {e}")))?;
            spaces.push(x);
        }
        SpectralOperator::new(sig, spaces).or_else(|e| invalid(e.to_string()))
    }
}

pub fn serialize_operator(a: &SpectralOperator) -> String {
    serde_json::to_string(&OperatorDoc::from_operator(a)).expect("operator documents always serialize")
}

pub fn deserialize_operator(text: &str) -> IoResult<SpectralOperator> {
    let doc: OperatorDoc = serde_json::from_str(text)?;
    doc.to_operator()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDoc {
    pub vertices: Vec<OperatorDoc>,
    pub edge_types: Vec<[usize; 2]>,
}

impl PathDoc {
    pub fn from_path(p: &OperatorPath) -> Self {
        PathDoc {
            vertices: p.vertices.iter().map(OperatorDoc::from_operator).collect(),
            edge_types: p.edge_types.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }

    pub fn to_path(&self) -> IoResult<OperatorPath> {
        if self.vertices.len() != self.edge_types.len() + 1 {
            return invalid(format!(
                "{} vertices for {} edges",
                self.vertices.len(),
                self.edge_types.len()
            ));
        }
        let vertices = self.vertices.iter().map(OperatorDoc::to_operator).collect::<IoResult<Vec<_>>>()?;
        let edge_types = self.edge_types.iter().map(|&[i, j]| (i, j)).collect();
        Ok(OperatorPath { vertices, edge_types })
    }
}

pub fn serialize_path(p: &OperatorPath) -> String {
    serde_json::to_string(&PathDoc::from_path(p)).expect("path documents always serialize")
}

pub fn deserialize_path(text: &str) -> IoResult<OperatorPath> {
    let doc: PathDoc = serde_json::from_str(text)?;
    doc.to_path()
}
