//! JSON encodings.
//!
//! Complex numbers are `[re, im]` pairs. A frame is
//! `{"dim": d, "vectors": [[[re, im], ...], ...]}`, approximate-dual
//! parameters are `{"A": rows, "Theta": rows}` with row-major matrices, and a
//! Gabor system is `{"L": .., "a": .., "b": .., "window": [[re, im], ...]}`.
//! Floats are written in shortest round-trip form, so parsing an emitted
//! file gives back the same values bit for bit.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::approx_dual::ApproxDualParams;
use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::numeric::{CMatrix, C64};

pub mod complex_vec {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect())
    }
}

pub mod complex_rows {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        rows.iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        Ok(Vec::<Vec<[f64; 2]>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    pub dim: usize,
    #[serde(with = "complex_rows")]
    pub vectors: Vec<Vec<C64>>,
}

impl FrameFile {
    pub fn from_frame(f: &Frame) -> Self {
        FrameFile {
            dim: f.dim(),
            vectors: f.vectors(),
        }
    }

    pub fn to_frame(&self) -> Result<Frame> {
        Frame::new(self.dim, &self.vectors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    #[serde(rename = "A", with = "complex_rows")]
    pub a: Vec<Vec<C64>>,
    #[serde(rename = "Theta", with = "complex_rows")]
    pub theta: Vec<Vec<C64>>,
}

fn matrix_rows(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
        .collect()
}

impl ParamsFile {
    pub fn from_params(p: &ApproxDualParams) -> Self {
        ParamsFile {
            a: matrix_rows(&p.a),
            theta: matrix_rows(&p.theta),
        }
    }

    pub fn to_params(&self) -> Result<ApproxDualParams> {
        let a = CMatrix::try_from_rows(&self.a)?;
        let theta = CMatrix::try_from_rows(&self.theta)?;
        Ok(ApproxDualParams::new(a, theta))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FrameError::Input(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| FrameError::Input(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value))
        .map_err(|e| FrameError::Input(format!("{}: {e}", path.display())))
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    read_json::<FrameFile>(path)?.to_frame()
}

pub fn write_frame(path: &Path, f: &Frame) -> Result<()> {
    write_json(path, &FrameFile::from_frame(f))
}

pub fn read_params(path: &Path) -> Result<ApproxDualParams> {
    read_json::<ParamsFile>(path)?.to_params()
}
