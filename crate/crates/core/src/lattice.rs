//! Index arithmetic on the group Z_N^d.
//!
//! Points are d-tuples of residues modulo N. Every point also has a linear
//! index in `[0, N^d)`, obtained by mixed-radix encoding with the first
//! coordinate most significant (row-major). All signal and set storage in
//! this crate is laid out in that order.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ambient group Z_N^d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct GridShape {
    modulus: usize,
    dim: usize,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    modulus: usize,
    dim: usize,
}

impl TryFrom<RawShape> for GridShape {
    type Error = Error;

    fn try_from(raw: RawShape) -> Result<Self> {
        GridShape::new(raw.modulus, raw.dim)
    }
}

impl From<GridShape> for RawShape {
    fn from(shape: GridShape) -> Self {
        RawShape {
            modulus: shape.modulus,
            dim: shape.dim,
        }
    }
}

impl GridShape {
    /// Rejects `N < 2`, `d < 1`, and grids whose point count overflows `usize`.
    pub fn new(modulus: usize, dim: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidGrid(format!("modulus must be >= 2, got {modulus}")));
        }
        if dim < 1 {
            return Err(Error::InvalidGrid("dimension must be >= 1".into()));
        }
        let exp = u32::try_from(dim)
            .map_err(|_| Error::InvalidGrid(format!("dimension {dim} too large")))?;
        let len = modulus.checked_pow(exp).ok_or_else(|| {
            Error::InvalidGrid(format!("{modulus}^{dim} points exceed the addressable range"))
        })?;
        Ok(GridShape { modulus, dim, len })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points, N^d.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; a grid has at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance in linear index between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.modulus.pow((self.dim - 1 - axis) as u32)
    }

    /// Builds a point from arbitrary integers, reducing each modulo N.
    pub fn point(&self, coords: &[i64]) -> Result<GridPoint> {
        self.check_dim(coords.len())?;
        let n = self.modulus as i64;
        Ok(GridPoint {
            coords: coords.iter().map(|&c| c.rem_euclid(n) as usize).collect(),
        })
    }

    pub fn origin(&self) -> GridPoint {
        GridPoint {
            coords: vec![0; self.dim],
        }
    }

    /// Decodes a linear index.
    pub fn decode(&self, index: usize) -> Result<GridPoint> {
        self.check_index(index)?;
        let mut coords = vec![0; self.dim];
        self.decode_into(index, &mut coords);
        Ok(GridPoint { coords })
    }

    /// Encodes a point into its linear index.
    pub fn encode(&self, point: &GridPoint) -> Result<usize> {
        self.check_point(point)?;
        Ok(point
            .coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.modulus + c))
    }

    pub(crate) fn decode_into(&self, mut index: usize, coords: &mut [usize]) {
        for slot in coords.iter_mut().rev() {
            *slot = index % self.modulus;
            index /= self.modulus;
        }
    }

    /// Linear index of `-x`.
    pub fn negate_index(&self, index: usize) -> usize {
        let n = self.modulus;
        let mut rest = index;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            let c = rest % n;
            rest /= n;
            out += ((n - c) % n) * place;
            place *= n;
        }
        out
    }

    /// Linear index of `x + y`.
    pub fn add_indices(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + y) % n)
    }

    /// Linear index of `x - y`.
    pub fn sub_indices(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + n - y) % n)
    }

    fn combine(&self, mut a: usize, mut b: usize, op: impl Fn(usize, usize, usize) -> usize) -> usize {
        let n = self.modulus;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            out += op(a % n, b % n, n) * place;
            a /= n;
            b /= n;
            place *= n;
        }
        out
    }

    /// `x · m mod N` for two linear indices.
    pub fn dot_indices(&self, a: usize, b: usize) -> usize {
        let n = self.modulus as u128;
        let (mut a, mut b) = (a, b);
        let mut acc: u128 = 0;
        for _ in 0..self.dim {
            let x = (a % self.modulus) as u128;
            let y = (b % self.modulus) as u128;
            acc = (acc + x * y % n) % n;
            a /= self.modulus;
            b /= self.modulus;
        }
        acc as usize
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len,
            });
        }
        Ok(())
    }

    fn check_point(&self, point: &GridPoint) -> Result<()> {
        self.check_dim(point.coords.len())?;
        if let Some(&c) = point.coords.iter().find(|&&c| c >= self.modulus) {
            return Err(Error::Domain(format!(
                "coordinate {c} not reduced modulo {}",
                self.modulus
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.modulus, self.dim)
    }
}

/// A point of Z_N^d with every coordinate reduced modulo N.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    coords: Vec<usize>,
}

impl GridPoint {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

/// `(Σ_j a_j b_j) mod N`.
pub fn dot(a: &GridPoint, b: &GridPoint, shape: &GridShape) -> Result<usize> {
    shape.check_point(a)?;
    shape.check_point(b)?;
    let n = shape.modulus as u128;
    Ok(a.coords
        .iter()
        .zip(&b.coords)
        .fold(0u128, |acc, (&x, &y)| (acc + (x as u128) * (y as u128) % n) % n) as usize)
}

/// The character `e^{-2πi a·b / N}`.
pub fn character(a: &GridPoint, b: &GridPoint, shape: &GridShape) -> Result<Complex64> {
    let k = dot(a, b, shape)?;
    Ok(phase(k, shape.modulus))
}

/// `e^{-2πi k / N}` for a residue `k`.
pub(crate) fn phase(k: usize, modulus: usize) -> Complex64 {
    let theta = -2.0 * PI * (k as f64) / (modulus as f64);
    Complex64::from_polar(1.0, theta)
}
