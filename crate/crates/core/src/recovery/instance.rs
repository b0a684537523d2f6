//! Random recovery instances: a separated signal on a finite alphabet and a
//! symmetric hidden set of prescribed size.

use rand::seq::SliceRandom;
use rand::Rng;

use super::RecoveryProblem;
use crate::error::{Error, Result};
use crate::fourier::{FreqSet, Signal};
use crate::inequalities::{lp_norm, Exponent};
use crate::lattice::GridShape;
use crate::rng::{stream, Stream};

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub shape: GridShape,
    pub alphabet: Vec<f64>,
    pub hidden_size: usize,
    /// Fixed exponent; when absent one is chosen per instance with
    /// [`choose_exponent`] and instances that admit none are redrawn.
    pub p: Option<Exponent>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryInstance {
    pub seed: u64,
    pub truth: Signal,
    pub problem: RecoveryProblem,
}

/// Smallest gap between distinct alphabet values.
pub fn alphabet_separation(alphabet: &[f64]) -> Result<f64> {
    let mut sorted = alphabet.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < 2 || sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("alphabet needs at least two distinct finite values".into()));
    }
    Ok(sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

/// An exponent `p ∈ [1, 2]` at which the uniqueness threshold holds for
/// `f` and a hidden set of `hidden_size` frequencies, or `None`.
///
/// Returns `p = 2` when the threshold already holds there. Otherwise it
/// finds the smallest admissible `k = 2d/p` on `[d, 2d]` and returns the
/// exponent at the midpoint between it and `2d`, keeping a margin on both
/// sides.
pub fn choose_exponent(f: &Signal, hidden_size: usize, delta: f64) -> Option<Exponent> {
    let shape = f.shape();
    let d = shape.dim() as f64;
    let n = shape.modulus() as f64;
    let margin = |k: f64| {
        let p = Exponent::new(2.0 * d / k).expect("k in [d, 2d] gives p in [1, 2]");
        lp_norm(f, p) * 2.0 * (hidden_size as f64 / n.powf(k)).sqrt() - delta
    };
    if margin(d) < 0.0 {
        return Some(Exponent::TWO);
    }
    if margin(2.0 * d) >= 0.0 {
        return None;
    }
    const STEPS: usize = 400;
    let mut hi = 2.0 * d;
    let mut lo = d;
    for i in 1..=STEPS {
        let k = d + d * i as f64 / STEPS as f64;
        if margin(k) < 0.0 {
            hi = k;
            lo = k - d / STEPS as f64;
            break;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k = 0.5 * (hi + 2.0 * d);
    Exponent::new(2.0 * d / k).ok()
}

/// A random set closed under negation with exactly `size` members.
pub fn random_symmetric_set(shape: GridShape, size: usize, rng: &mut Stream) -> Result<FreqSet> {
    if size == 0 || size >= shape.len() {
        return Err(Error::Domain(format!(
            "hidden set size must lie in 1..{}, got {size}",
            shape.len()
        )));
    }
    let mut orbits: Vec<Vec<usize>> = (0..shape.len())
        .filter_map(|m| {
            let neg = shape.negate_index(m);
            match m.cmp(&neg) {
                std::cmp::Ordering::Less => Some(vec![m, neg]),
                std::cmp::Ordering::Equal => Some(vec![m]),
                std::cmp::Ordering::Greater => None,
            }
        })
        .collect();
    for _ in 0..64 {
        orbits.shuffle(rng);
        let mut members = Vec::with_capacity(size);
        for orbit in &orbits {
            if members.len() + orbit.len() <= size {
                members.extend_from_slice(orbit);
            }
            if members.len() == size {
                return FreqSet::new(shape, members);
            }
        }
    }
    Err(Error::Domain(format!(
        "no symmetric set of size {size} exists on {shape}"
    )))
}

impl RecoveryInstance {
    /// Draws a nonconstant alphabet-valued signal whose entries are mostly
    /// the smallest-magnitude symbol, and a symmetric hidden set.
    pub fn generate(spec: &InstanceSpec, seed: u64) -> Result<Self> {
        let delta = alphabet_separation(&spec.alphabet)?;
        let mut symbols = spec.alphabet.clone();
        symbols.sort_by(f64::total_cmp);
        symbols.dedup();
        let background_pos = symbols
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .expect("alphabet has at least two symbols");
        let background = symbols.remove(background_pos);

        let shape = spec.shape;
        let mut rng = stream(seed, 0);
        for _ in 0..MAX_ATTEMPTS {
            let count = rng.random_range(1..shape.len());
            let positions = rand::seq::index::sample(&mut rng, shape.len(), count);
            let mut values = vec![background; shape.len()];
            for x in positions.iter() {
                values[x] = symbols[rng.random_range(0..symbols.len())];
            }
            let truth = Signal::from_real(shape, &values)?;
            let hidden = random_symmetric_set(shape, spec.hidden_size, &mut rng)?;
            let p = match spec.p {
                Some(p) => p,
                None => match choose_exponent(&truth, hidden.len(), delta) {
                    Some(p) => p,
                    None => continue,
                },
            };
            let problem = RecoveryProblem::from_signal(&truth, &hidden, p, delta)?;
            return Ok(RecoveryInstance { seed, truth, problem });
        }
        Err(Error::Domain(format!(
            "no instance admitting a uniqueness exponent found in {MAX_ATTEMPTS} draws"
        )))
    }
}
