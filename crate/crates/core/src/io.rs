//! JSON file formats for signals, spectra, frequency sets and recovery
//! problems.
//!
//! Complex values are written as `[re, im]` pairs in row-major order.
//! Unknown spectral entries in a problem file are `null`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{FreqSet, Signal, Spectrum};
use crate::inequalities::Exponent;
use crate::lattice::GridShape;
use crate::recovery::RecoveryProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Freq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionFile {
    pub modulus: usize,
    pub dim: usize,
    pub domain: Domain,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetFile {
    pub modulus: usize,
    pub dim: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub modulus: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub grid: GridSpec,
    pub p: Exponent,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_size: Option<f64>,
    pub hidden: Vec<usize>,
    pub observed: Vec<Option<[f64; 2]>>,
}

fn pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|v| [v.re, v.im]).collect()
}

fn complex(values: &[[f64; 2]]) -> Vec<Complex64> {
    values.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl GridFunctionFile {
    pub fn from_signal(f: &Signal) -> Self {
        let s = f.shape();
        GridFunctionFile { modulus: s.modulus(), dim: s.dim(), domain: Domain::Space, values: pairs(f.values()) }
    }

    pub fn from_spectrum(f: &Spectrum) -> Self {
        let s = f.shape();
        GridFunctionFile { modulus: s.modulus(), dim: s.dim(), domain: Domain::Freq, values: pairs(f.values()) }
    }

    pub fn shape(&self) -> Result<GridShape> {
        GridShape::new(self.modulus, self.dim)
    }

    pub fn to_signal(&self) -> Result<Signal> {
        if self.domain != Domain::Space {
            return Err(Error::Data("expected a space-domain file, found a frequency-domain one".into()));
        }
        Signal::new(self.shape()?, complex(&self.values))
    }

    pub fn to_spectrum(&self) -> Result<Spectrum> {
        if self.domain != Domain::Freq {
            return Err(Error::Data("expected a frequency-domain file, found a space-domain one".into()));
        }
        Spectrum::new(self.shape()?, complex(&self.values))
    }
}

impl SetFile {
    pub fn from_set(set: &FreqSet) -> Self {
        let s = set.shape();
        SetFile { modulus: s.modulus(), dim: s.dim(), members: set.members().to_vec() }
    }

    pub fn to_set(&self) -> Result<FreqSet> {
        FreqSet::new(GridShape::new(self.modulus, self.dim)?, self.members.clone())
    }
}

impl ProblemFile {
    pub fn from_problem(problem: &RecoveryProblem) -> Self {
        let s = problem.shape();
        let masked = problem.observed();
        ProblemFile {
            grid: GridSpec { modulus: s.modulus(), dim: s.dim() },
            p: problem.p(),
            delta: problem.delta(),
            c_size: Some(problem.c_size()),
            hidden: problem.hidden().members().to_vec(),
            observed: masked
                .spectrum()
                .values()
                .iter()
                .enumerate()
                .map(|(m, v)| masked.is_known(m).then_some([v.re, v.im]))
                .collect(),
        }
    }

    /// Entries listed in `hidden` may be `null`; any other `null` is an error.
    pub fn to_problem(&self) -> Result<RecoveryProblem> {
        let shape = GridShape::new(self.grid.modulus, self.grid.dim)?;
        let hidden = FreqSet::new(shape, self.hidden.clone())?;
        if self.observed.len() != shape.len() {
            return Err(Error::LengthMismatch { expected: shape.len(), found: self.observed.len() });
        }
        let mut values = Vec::with_capacity(shape.len());
        for (m, v) in self.observed.iter().enumerate() {
            match v {
                Some([re, im]) => values.push(Complex64::new(*re, *im)),
                None if hidden.contains(m) => values.push(Complex64::new(0.0, 0.0)),
                None => {
                    return Err(Error::Data(format!("observed entry {m} is null but not listed as hidden")));
                }
            }
        }
        let observed = Spectrum::new(shape, values)?;
        match self.c_size {
            Some(c) => RecoveryProblem::with_c_size(&observed, &hidden, self.p, self.delta, c),
            None => RecoveryProblem::new(&observed, &hidden, self.p, self.delta),
        }
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Data(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Reads a bare document, or the `result` field of a
/// `{"config": ..., "result": ...}` wrapper as printed by the CLI.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(obj) = value.as_object_mut() {
        if obj.len() == 2 && obj.contains_key("config") {
            if let Some(inner) = obj.remove("result") {
                value = inner;
            }
        }
    }
    Ok(serde_json::from_value(value)?)
}

pub fn load_signal(path: &Path) -> Result<Signal> {
    read_json::<GridFunctionFile>(path)?.to_signal()
}

pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    read_json::<GridFunctionFile>(path)?.to_spectrum()
}

pub fn load_set(path: &Path) -> Result<FreqSet> {
    read_json::<SetFile>(path)?.to_set()
}

pub fn load_problem(path: &Path) -> Result<RecoveryProblem> {
    read_json::<ProblemFile>(path)?.to_problem()
}
