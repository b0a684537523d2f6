//! Unitary Fourier transform on Z_N^d.
//!
//! The forward transform is
//!
//! ```text
//! F(m) = N^{-d/2} Σ_x e^{-2πi x·m/N} f(x)
//! ```
//!
//! and the inverse uses the conjugate kernel with the same `N^{-d/2}`
//! factor, so both directions are unitary and Plancherel holds with no
//! extra constants. Transforms run axis by axis with a 1-D FFT per line.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::GridShape;

/// Relative cutoff used when reading off the support of a numeric spectrum.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-9;

macro_rules! grid_function {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            shape: GridShape,
            values: Vec<Complex64>,
        }

        impl $name {
            /// Fails if the length is not `N^d` or any entry is NaN/Inf.
            pub fn new(shape: GridShape, values: Vec<Complex64>) -> Result<Self> {
                if values.len() != shape.len() {
                    return Err(Error::LengthMismatch {
                        expected: shape.len(),
                        found: values.len(),
                    });
                }
                if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(Error::NonFinite(i));
                }
                Ok($name { shape, values })
            }

            pub fn zeros(shape: GridShape) -> Self {
                $name {
                    shape,
                    values: vec![Complex64::new(0.0, 0.0); shape.len()],
                }
            }

            pub fn from_real(shape: GridShape, values: &[f64]) -> Result<Self> {
                Self::new(shape, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            }

            pub fn from_fn(shape: GridShape, f: impl FnMut(usize) -> Complex64) -> Self {
                let values = (0..shape.len()).map(f).collect();
                $name { shape, values }
            }

            /// Unit mass at linear index `index`.
            pub fn delta(shape: GridShape, index: usize) -> Result<Self> {
                shape.check_index(index)?;
                let mut out = Self::zeros(shape);
                out.values[index] = Complex64::new(1.0, 0.0);
                Ok(out)
            }

            pub fn shape(&self) -> GridShape {
                self.shape
            }

            pub fn values(&self) -> &[Complex64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<Complex64> {
                self.values
            }

            pub fn get(&self, index: usize) -> Complex64 {
                self.values[index]
            }

            /// Largest modulus over all entries.
            pub fn sup_norm(&self) -> f64 {
                self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }

            pub fn scaled(&self, factor: Complex64) -> Self {
                $name {
                    shape: self.shape,
                    values: self.values.iter().map(|v| v * factor).collect(),
                }
            }

            /// `α·self + β·other`.
            pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
                check_same_shape(self.shape, other.shape)?;
                Ok($name {
                    shape: self.shape,
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(a, b)| alpha * a + beta * b)
                        .collect(),
                })
            }
        }
    };
}

grid_function!(Signal, "A complex-valued function on Z_N^d in the space domain.");
grid_function!(Spectrum, "A complex-valued function on Z_N^d in the frequency domain.");

impl Signal {
    /// True when every imaginary part is below `tol` in magnitude.
    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() < tol)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

fn check_same_shape(left: GridShape, right: GridShape) -> Result<()> {
    if left != right {
        return Err(Error::ShapeMismatch { left, right });
    }
    Ok(())
}

/// A subset of Z_N^d, stored as sorted, duplicate-free linear indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqSet {
    shape: GridShape,
    members: Vec<usize>,
}

impl FreqSet {
    /// Sorts and deduplicates `members`; rejects out-of-range indices.
    pub fn new(shape: GridShape, mut members: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&m| m >= shape.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: shape.len(),
            });
        }
        members.sort_unstable();
        members.dedup();
        Ok(FreqSet { shape, members })
    }

    pub fn empty(shape: GridShape) -> Self {
        FreqSet {
            shape,
            members: Vec::new(),
        }
    }

    pub fn full(shape: GridShape) -> Self {
        FreqSet {
            shape,
            members: (0..shape.len()).collect(),
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.shape.len()];
        for &m in &self.members {
            mask[m] = true;
        }
        mask
    }

    pub fn complement(&self) -> FreqSet {
        let mask = self.mask();
        FreqSet {
            shape: self.shape,
            members: (0..self.shape.len()).filter(|&i| !mask[i]).collect(),
        }
    }

    /// `{ s + t : s ∈ S }`.
    pub fn translate(&self, t: usize) -> FreqSet {
        let members = self.members.iter().map(|&s| self.shape.add_indices(s, t)).collect();
        FreqSet::new(self.shape, members).expect("translation stays on the grid")
    }

    /// `S ∪ (−S)`.
    pub fn symmetrized(&self) -> FreqSet {
        let mut members = self.members.clone();
        members.extend(self.members.iter().map(|&s| self.shape.negate_index(s)));
        FreqSet::new(self.shape, members).expect("negation stays on the grid")
    }

    pub fn is_symmetric(&self) -> bool {
        self.members
            .iter()
            .all(|&s| self.contains(self.shape.negate_index(s)))
    }

    /// The indicator function `1_S` as a space-domain signal.
    pub fn indicator(&self) -> Signal {
        let mut out = Signal::zeros(self.shape);
        for &m in &self.members {
            out.values[m] = Complex64::new(1.0, 0.0);
        }
        out
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Unnormalized per-axis transform followed by the `N^{-d/2}` factor.
fn transform(shape: GridShape, values: &mut [Complex64], direction: FftDirection) {
    let n = shape.modulus();
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut lines = vec![Complex64::new(0.0, 0.0); values.len()];

    for axis in 0..shape.dim() {
        let stride = shape.stride(axis);
        if stride == 1 {
            fft.process_with_scratch(values, &mut scratch);
            continue;
        }
        let block = stride * n;
        let mut k = 0;
        for outer in (0..values.len()).step_by(block) {
            for inner in 0..stride {
                for j in 0..n {
                    lines[k] = values[outer + inner + j * stride];
                    k += 1;
                }
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut k = 0;
        for outer in (0..values.len()).step_by(block) {
            for inner in 0..stride {
                for j in 0..n {
                    values[outer + inner + j * stride] = lines[k];
                    k += 1;
                }
            }
        }
    }

    let scale = (shape.len() as f64).sqrt().recip();
    for v in values.iter_mut() {
        *v *= scale;
    }
}

/// `F(m) = N^{-d/2} Σ_x e^{-2πi x·m/N} f(x)`.
pub fn forward(f: &Signal) -> Spectrum {
    let mut values = f.values.clone();
    transform(f.shape, &mut values, FftDirection::Forward);
    Spectrum {
        shape: f.shape,
        values,
    }
}

/// `f(x) = N^{-d/2} Σ_m e^{+2πi x·m/N} F(m)`.
pub fn inverse(spectrum: &Spectrum) -> Signal {
    let mut values = spectrum.values.clone();
    transform(spectrum.shape, &mut values, FftDirection::Inverse);
    Signal {
        shape: spectrum.shape,
        values,
    }
}

/// The forward transform of `1_S`, viewed as a function on the grid.
pub fn indicator_spectrum(set: &FreqSet) -> Result<Signal> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let spectrum = forward(&set.indicator());
    Ok(Signal {
        shape: spectrum.shape,
        values: spectrum.values,
    })
}

/// Cyclic convolution `(f*g)(x) = Σ_y f(y) g(x−y)`, summed directly.
pub fn convolve(f: &Signal, g: &Signal) -> Result<Signal> {
    check_same_shape(f.shape, g.shape)?;
    let shape = f.shape;
    let mut out = Signal::zeros(shape);
    for (y, &fy) in f.values.iter().enumerate() {
        if fy == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (x, slot) in out.values.iter_mut().enumerate() {
            *slot += fy * g.values[shape.sub_indices(x, y)];
        }
    }
    Ok(out)
}

/// Frequencies whose coefficient exceeds `tol · max(1, ‖F‖_∞)` in modulus.
pub fn support(spectrum: &Spectrum, tol: f64) -> FreqSet {
    let cutoff = tol * spectrum.sup_norm().max(1.0);
    FreqSet {
        shape: spectrum.shape,
        members: spectrum
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > cutoff)
            .map(|(i, _)| i)
            .collect(),
    }
}

/// Checks `supp(forward(f)) ⊆ S`, returning the offending frequencies otherwise.
pub fn check_support(f: &Signal, set: &FreqSet, tol: f64) -> Result<()> {
    check_same_shape(f.shape, set.shape)?;
    let offending: Vec<usize> = support(&forward(f), tol)
        .members
        .into_iter()
        .filter(|&m| !set.contains(m))
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::SupportViolation { offending })
    }
}

/// Zeroes every coefficient of `spectrum` outside `set`.
pub fn restrict(spectrum: &Spectrum, set: &FreqSet) -> Result<Spectrum> {
    check_same_shape(spectrum.shape, set.shape)?;
    let mask = set.mask();
    Ok(Spectrum {
        shape: spectrum.shape,
        values: spectrum
            .values
            .iter()
            .zip(mask)
            .map(|(&v, keep)| if keep { v } else { Complex64::new(0.0, 0.0) })
            .collect(),
    })
}
