//! Exhaustive search over alphabet-valued signals.
//!
//! Feasibility is decided by transforming each candidate and comparing its
//! spectrum with the observation, independently of the solver's
//! parameterisation.

use super::RecoveryProblem;
use crate::error::{Error, Result};
use crate::fourier::{forward, Signal};
use crate::inequalities::lp_norm;

/// Largest number of candidates the oracle will enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e7;

const AGREEMENT_TOL: f64 = 1e-8;
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceOutcome {
    /// Feasible alphabet signals with their `p`-norms, smallest norm first.
    pub feasible: Vec<(Signal, f64)>,
    /// Two feasible signals share the smallest norm.
    pub ambiguous: bool,
}

impl BruteForceOutcome {
    pub fn best(&self) -> Option<&(Signal, f64)> {
        self.feasible.first()
    }

    /// Feasible signals other than `reference` whose norm does not exceed
    /// its norm. A non-empty answer means `reference` is not the unique
    /// minimiser.
    pub fn competitors(&self, reference: &Signal) -> Vec<&(Signal, f64)> {
        let own = self
            .feasible
            .iter()
            .find(|(g, _)| same_values(g, reference))
            .map(|(_, n)| *n);
        let Some(own) = own else {
            return self.feasible.iter().collect();
        };
        self.feasible
            .iter()
            .filter(|(g, n)| !same_values(g, reference) && *n <= own + TIE_TOL * own.max(1.0))
            .collect()
    }
}

fn same_values(a: &Signal, b: &Signal) -> bool {
    a.values().iter().zip(b.values()).all(|(x, y)| (x - y).norm() <= 1e-9)
}

/// Enumerates `alphabet^{N^d}` and keeps every signal whose spectrum agrees
/// with the observation off the hidden set.
pub fn brute_force_recover(problem: &RecoveryProblem, alphabet: &[f64]) -> Result<BruteForceOutcome> {
    let mut symbols = alphabet.to_vec();
    symbols.sort_by(f64::total_cmp);
    symbols.dedup();
    if symbols.is_empty() {
        return Err(Error::Domain("alphabet is empty".into()));
    }
    let shape = problem.shape();
    let count = (symbols.len() as f64).powi(shape.len() as i32);
    if count > DEFAULT_ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { needed: count, budget: DEFAULT_ENUMERATION_BUDGET });
    }

    let observed = problem.observed();
    let known: Vec<usize> = (0..shape.len()).filter(|&m| observed.is_known(m)).collect();
    let scale = observed.spectrum().sup_norm().max(1.0);
    let p = problem.p();

    let mut digits = vec![0usize; shape.len()];
    let mut feasible = Vec::new();
    loop {
        let values: Vec<f64> = digits.iter().map(|&i| symbols[i]).collect();
        let candidate = Signal::from_real(shape, &values)?;
        let spectrum = forward(&candidate);
        let agrees = known
            .iter()
            .all(|&m| (spectrum.get(m) - observed.spectrum().get(m)).norm() <= AGREEMENT_TOL * scale);
        if agrees {
            let norm = lp_norm(&candidate, p);
            feasible.push((candidate, norm));
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                feasible.sort_by(|a: &(Signal, f64), b| a.1.total_cmp(&b.1));
                let ambiguous = feasible.len() >= 2 && feasible[1].1 - feasible[0].1 <= TIE_TOL * feasible[0].1.max(1.0);
                return Ok(BruteForceOutcome { feasible, ambiguous });
            }
            digits[pos] += 1;
            if digits[pos] < symbols.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
