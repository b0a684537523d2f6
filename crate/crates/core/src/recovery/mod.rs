//! Recovery of a separated real signal whose spectrum is observed only off
//! a hidden set `S`.
//!
//! The reconstruction is the minimiser of `‖g‖_p` over real signals `g`
//! whose spectrum agrees with the observation off `S`. For a
//! `δ`-separated truth with `|S| = C_size N^k`, `p = 2d/k ≥ 2` and
//! `‖f‖_p < δ / (2 sqrt(C_size))`, any other `δ`-separated feasible signal
//! `g` has `‖g‖_p > ‖f‖_p`: the difference `h = f − g` has spectrum inside
//! `S` and `‖h‖_∞ ≥ δ`, and the support-size bound gives
//! `δ ≤ ‖h‖_∞ ≤ sqrt(C_size) (‖f‖_p + ‖g‖_p)`.
//!
//! Unknown coefficients are the only free variables, so every iterate is
//! feasible by construction. Real-valuedness is imposed through
//! `ĝ(−m) = conj(ĝ(m))`, which is why hidden sets are symmetrised.

mod instance;
mod oracle;
mod solver;

pub use instance::{alphabet_separation, choose_exponent, random_symmetric_set, InstanceSpec, RecoveryInstance};
pub use oracle::{brute_force_recover, BruteForceOutcome, DEFAULT_ENUMERATION_BUDGET};
pub use solver::{recover, FeasibleSet, RecoverOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{forward, FreqSet, Signal, Spectrum};
use crate::inequalities::Exponent;
use crate::lattice::GridShape;

/// A spectrum with a set of entries marked unknown and zeroed.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedSpectrum {
    spectrum: Spectrum,
    hidden: FreqSet,
}

pub fn mask_spectrum(spectrum: &Spectrum, hidden: &FreqSet) -> Result<MaskedSpectrum> {
    if spectrum.shape() != hidden.shape() {
        return Err(Error::ShapeMismatch {
            left: spectrum.shape(),
            right: hidden.shape(),
        });
    }
    let mut values = spectrum.values().to_vec();
    for &m in hidden.members() {
        values[m] = Complex64::new(0.0, 0.0);
    }
    Ok(MaskedSpectrum {
        spectrum: Spectrum::new(spectrum.shape(), values)?,
        hidden: hidden.clone(),
    })
}

impl MaskedSpectrum {
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn hidden(&self) -> &FreqSet {
        &self.hidden
    }

    pub fn is_known(&self, m: usize) -> bool {
        !self.hidden.contains(m)
    }

    /// Restores the hidden entries from `truth`.
    pub fn unmask(&self, truth: &Spectrum) -> Result<Spectrum> {
        if truth.shape() != self.spectrum.shape() {
            return Err(Error::ShapeMismatch {
                left: truth.shape(),
                right: self.spectrum.shape(),
            });
        }
        let mut values = self.spectrum.values().to_vec();
        for &m in self.hidden.members() {
            values[m] = truth.get(m);
        }
        Spectrum::new(truth.shape(), values)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryProblem {
    observed: MaskedSpectrum,
    p: Exponent,
    delta: f64,
    c_size: f64,
    /// Set when symmetrising the declared hidden set enlarged it.
    pub hidden_grew: bool,
}

impl RecoveryProblem {
    /// Builds a problem with `C_size = |S| / N^k`, `k = 2d/p`, after
    /// replacing `S` by `S ∪ −S`.
    pub fn new(observed: &Spectrum, hidden: &FreqSet, p: Exponent, delta: f64) -> Result<Self> {
        Self::build(observed, hidden, p, delta, None)
    }

    /// As [`RecoveryProblem::new`], checking a declared `C_size` against
    /// the symmetrised hidden set.
    pub fn with_c_size(observed: &Spectrum, hidden: &FreqSet, p: Exponent, delta: f64, c_size: f64) -> Result<Self> {
        Self::build(observed, hidden, p, delta, Some(c_size))
    }

    /// Masks `forward(truth)` on `hidden`.
    pub fn from_signal(truth: &Signal, hidden: &FreqSet, p: Exponent, delta: f64) -> Result<Self> {
        Self::new(&forward(truth), hidden, p, delta)
    }

    fn build(observed: &Spectrum, hidden: &FreqSet, p: Exponent, delta: f64, c_size: Option<f64>) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::Domain("recovery exponent must be finite".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("separation must be positive, got {delta}")));
        }
        if hidden.is_empty() {
            return Err(Error::EmptySet);
        }
        let symmetric = hidden.symmetrized();
        let hidden_grew = symmetric.len() != hidden.len();
        let shape = observed.shape();
        let derived = symmetric.len() as f64 / (shape.modulus() as f64).powf(2.0 * shape.dim() as f64 / p.value());
        if let Some(declared) = c_size {
            if declared.is_nan() || declared <= 0.0 || (declared - derived).abs() > 1e-9 * derived {
                return Err(Error::Data(format!(
                    "c_size {declared} inconsistent with |S| = {} and p = {p} (expected {derived})",
                    symmetric.len()
                )));
            }
        }
        Ok(RecoveryProblem {
            observed: mask_spectrum(observed, &symmetric)?,
            p,
            delta,
            c_size: derived,
            hidden_grew,
        })
    }

    pub fn shape(&self) -> GridShape {
        self.observed.spectrum.shape()
    }

    pub fn observed(&self) -> &MaskedSpectrum {
        &self.observed
    }

    pub fn hidden(&self) -> &FreqSet {
        &self.observed.hidden
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn c_size(&self) -> f64 {
        self.c_size
    }

    /// `k = 2d/p`, so that `|S| = C_size N^k`.
    pub fn k(&self) -> f64 {
        2.0 * self.shape().dim() as f64 / self.p.value()
    }

    /// `δ / (2 sqrt(C_size))`.
    pub fn threshold(&self) -> f64 {
        self.delta / (2.0 * self.c_size.sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub threshold: f64,
    pub norm_at_solution: f64,
    pub unique: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub signal: Signal,
    /// `‖signal‖_p`.
    pub objective: f64,
    pub certificate: Certificate,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the continuous minimiser was replaced by a feasible alphabet signal.
    pub snapped: bool,
}

/// `‖f‖_p < δ / (2 sqrt(C_size))`, strictly.
///
/// The implication to uniqueness goes through the support-size bound and
/// therefore needs `p ≥ 2`.
pub fn uniqueness_certificate(norm: f64, delta: f64, c_size: f64) -> bool {
    norm < delta / (2.0 * c_size.sqrt())
}

/// Distinct values differ by at least `δ`, and there are at least two of them.
pub fn separation_check(f: &Signal, delta: f64) -> Result<bool> {
    if !f.is_real(1e-9) {
        return Err(Error::Data("separation is only defined for real signals".into()));
    }
    let mut values = f.real_parts();
    values.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for v in values {
        match distinct.last() {
            Some(&last) if (v - last).abs() <= 1e-9 * last.abs().max(1.0) => {}
            _ => distinct.push(v),
        }
    }
    if distinct.len() < 2 {
        return Ok(false);
    }
    let slack = 1e-9 * delta;
    Ok(distinct.windows(2).all(|w| w[1] - w[0] >= delta - slack))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: usize) -> GridShape {
        GridShape::new(n, 1).unwrap()
    }

    #[test]
    fn masking_zeroes_and_unmasking_restores() {
        let s = shape(6);
        let spec = Spectrum::from_fn(s, |m| Complex64::new(m as f64 + 1.0, -(m as f64)));
        let single = FreqSet::new(s, vec![2]).unwrap();
        let masked = mask_spectrum(&spec, &single).unwrap();
        assert_eq!(masked.spectrum().get(2), Complex64::new(0.0, 0.0));
        for m in [0, 1, 3, 4, 5] {
            assert_eq!(masked.spectrum().get(m), spec.get(m));
            assert!(masked.is_known(m));
        }
        assert_eq!(masked.unmask(&spec).unwrap(), spec);

        let all = mask_spectrum(&spec, &FreqSet::full(s)).unwrap();
        assert!(all.spectrum().values().iter().all(|v| v.norm() == 0.0));
        assert_eq!(all.unmask(&spec).unwrap(), spec);
    }

    #[test]
    fn certificate_is_strict() {
        assert!(uniqueness_certificate(0.0, 1.0, 1.0));
        assert!(uniqueness_certificate(0.49, 1.0, 1.0));
        let c: f64 = 0.3;
        assert!(!uniqueness_certificate(0.7 / (2.0 * c.sqrt()), 0.7, c));
    }

    #[test]
    fn separation_examples() {
        let s = shape(8);
        let bits = Signal::from_real(s, &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(separation_check(&bits, 1.0).unwrap());
        let flat = Signal::from_real(s, &[3.0; 8]).unwrap();
        assert!(!separation_check(&flat, 1.0).unwrap());
        let close = Signal::from_real(s, &[0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(!separation_check(&close, 1.0).unwrap());
        let complex = Signal::new(s, vec![Complex64::new(0.0, 1.0); 8]).unwrap();
        assert!(separation_check(&complex, 1.0).is_err());
    }

    #[test]
    fn problem_symmetrizes_and_checks_c_size() {
        let s = shape(16);
        let truth = Signal::delta(s, 3).unwrap();
        let hidden = FreqSet::new(s, vec![1]).unwrap();
        let p = Exponent::TWO;
        let problem = RecoveryProblem::from_signal(&truth, &hidden, p, 1.0).unwrap();
        assert!(problem.hidden_grew);
        assert_eq!(problem.hidden().members(), &[1, 15]);
        assert!((problem.c_size() - 2.0 / 16.0).abs() < 1e-15);
        assert!((problem.k() - 1.0).abs() < 1e-15);

        let spec = forward(&truth);
        assert!(RecoveryProblem::with_c_size(&spec, &hidden, p, 1.0, 0.125).is_ok());
        assert!(matches!(
            RecoveryProblem::with_c_size(&spec, &hidden, p, 1.0, 0.0625),
            Err(Error::Data(_))
        ));
        assert!(RecoveryProblem::new(&spec, &hidden, p, 0.0).is_err());
        assert!(RecoveryProblem::new(&spec, &FreqSet::empty(s), p, 1.0).is_err());
        assert!(RecoveryProblem::new(&spec, &hidden, Exponent::INFINITY, 1.0).is_err());
    }
}
