//! Uniform random sets and their largest nontrivial exponential sum.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{indicator_spectrum, FreqSet, Signal};
use crate::inequalities::{lp_norm, BoundCheck, Exponent};
use crate::lattice::{GridPoint, GridShape};
use crate::rng::{self, Stream};

/// A uniformly distributed `size`-subset of the grid, determined by `seed`.
pub fn random_set(shape: GridShape, size: usize, seed: u64) -> Result<FreqSet> {
    random_set_with(shape, size, &mut rng::stream(seed, 0))
}

pub fn random_set_with(shape: GridShape, size: usize, rng: &mut Stream) -> Result<FreqSet> {
    if size == 0 || size > shape.len() {
        return Err(Error::Domain(format!(
            "set size {size} outside [1, {}]",
            shape.len()
        )));
    }
    FreqSet::new(shape, index::sample(rng, shape.len(), size).into_vec())
}

/// `Φ(S) = max_{m ≠ 0} |Σ_{x∈S} e^{-2πi x·m/N}|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiStat {
    pub phi: f64,
    pub arg_max: GridPoint,
    pub arg_max_index: usize,
    pub set_size: usize,
}

/// Exact maximum over all nonzero frequencies. Ties (within 1e-9 relative)
/// resolve to the smallest linear index.
pub fn phi(set: &FreqSet) -> Result<PhiStat> {
    let shape = set.shape();
    let hat = indicator_spectrum(set)?;
    let root = (shape.len() as f64).sqrt();
    let sums: Vec<f64> = hat.values()[1..].iter().map(|v| v.norm() * root).collect();
    let top = sums.iter().copied().fold(0.0, f64::max);
    let tol = 1e-9 * top.max(1.0);
    let offset = sums
        .iter()
        .position(|&v| v >= top - tol)
        .expect("grid has a nonzero frequency");
    let arg_max_index = offset + 1;
    Ok(PhiStat {
        phi: top,
        arg_max: shape.decode(arg_max_index)?,
        arg_max_index,
        set_size: set.len(),
    })
}

/// Upper tail bound `min(1, 2·N^d·e²·e^{−a²/|S|})` for Φ of a random set.
pub fn tail_bound(shape: GridShape, size: usize, threshold: f64) -> f64 {
    let n = shape.len() as f64;
    let log_bound = (2.0 * n).ln() + 2.0 - threshold * threshold / size as f64;
    log_bound.exp().min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub grid: GridShape,
    pub set_size: usize,
    pub threshold: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical: f64,
    pub bound: f64,
    /// Three binomial standard deviations at the bound.
    pub slack: f64,
    pub holds: bool,
}

/// Estimates `P(Φ(S) ≥ a)` over `trials` independent uniform sets and
/// compares it with [`tail_bound`].
pub fn phi_tail_experiment(
    shape: GridShape,
    size: usize,
    threshold: f64,
    trials: usize,
    seed: u64,
) -> Result<TailReport> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let set = random_set_with(shape, size, &mut rng::stream(seed, t))?;
            Ok(phi(&set)?.phi >= threshold)
        })
        .collect::<Result<_>>()?;
    let exceedances = hits.iter().filter(|&&h| h).count();
    let empirical = exceedances as f64 / trials as f64;
    let bound = tail_bound(shape, size, threshold);
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(TailReport {
        grid: shape,
        set_size: size,
        threshold,
        trials,
        exceedances,
        empirical,
        bound,
        slack,
        holds: empirical <= bound + slack,
    })
}

/// `f = (N^{d/2}/|S|) · 1̂_S`, so that `f(0) = 1` and `f̂ = (N^{d/2}/|S|)·1_{−S}`.
pub fn normalized_indicator_signal(set: &FreqSet) -> Result<Signal> {
    let hat = indicator_spectrum(set)?;
    let factor = (set.shape().len() as f64).sqrt() / set.len() as f64;
    Ok(hat.scaled(factor.into()))
}

/// `‖f‖_p ≤ (N^d (Φ(S)/|S|)^p + 1)^{1/p}` for the normalized indicator signal.
pub fn sharpness_norm_bound(set: &FreqSet, p: Exponent) -> Result<BoundCheck> {
    if !p.is_finite() {
        return Err(Error::Domain("norm bound needs a finite exponent".into()));
    }
    let stat = phi(set)?;
    let n = set.shape().len() as f64;
    let ratio = stat.phi / set.len() as f64;
    let bound = (n * ratio.powf(p.value()) + 1.0).powf(p.reciprocal());
    let measured = lp_norm(&normalized_indicator_signal(set)?, p);
    Ok(BoundCheck::new(measured, bound))
}

/// Which draws the rejection sampler keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessRule {
    /// Keep the first draw whose normalized indicator has `‖f‖_p ≤ 2^{1/p}`.
    MeasuredNorm,
    /// Keep the first draw with `Φ(S) ≤ |S|^{1/2+ε}` that also meets the norm target.
    PhiCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessOutcome {
    pub grid: GridShape,
    pub set_size: usize,
    pub p: Exponent,
    pub epsilon: f64,
    pub rule: SharpnessRule,
    /// Draws examined before stopping.
    pub draws: usize,
    /// Draws among those that met `Φ(S) ≤ |S|^{1/2+ε}`.
    pub phi_certified_draws: usize,
    pub target: f64,
    pub found: Option<SharpnessWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessWitness {
    pub draw: usize,
    pub members: Vec<usize>,
    pub phi: f64,
    pub phi_certified: bool,
    pub lp_norm: f64,
    pub sup_norm: f64,
    pub value_at_origin: f64,
}

struct Draw {
    set: FreqSet,
    phi: f64,
    norm: f64,
    sup: f64,
    origin: f64,
}

fn evaluate_draw(shape: GridShape, size: usize, p: Exponent, seed: u64, index: u64) -> Result<Draw> {
    let set = random_set_with(shape, size, &mut rng::stream(seed, index))?;
    let stat = phi(&set)?;
    let f = normalized_indicator_signal(&set)?;
    Ok(Draw {
        phi: stat.phi,
        norm: lp_norm(&f, p),
        sup: f.sup_norm(),
        origin: f.get(0).re,
        set,
    })
}

/// Rejection sampling for a random set whose normalized indicator signal
/// stays bounded in L^p while equal to 1 at the origin.
///
/// Draws are evaluated in parallel batches but accepted in draw order, so
/// the outcome only depends on the seed.
pub fn sharpness_search(
    shape: GridShape,
    size: usize,
    p: Exponent,
    epsilon: f64,
    rule: SharpnessRule,
    max_draws: usize,
    seed: u64,
) -> Result<SharpnessOutcome> {
    if !p.is_finite() {
        return Err(Error::Domain("sharpness search needs a finite exponent".into()));
    }
    const BATCH: usize = 64;
    let target = 2f64.powf(p.reciprocal());
    let phi_cap = (size as f64).powf(0.5 + epsilon);
    let mut outcome = SharpnessOutcome {
        grid: shape,
        set_size: size,
        p,
        epsilon,
        rule,
        draws: 0,
        phi_certified_draws: 0,
        target,
        found: None,
    };

    let mut start = 0;
    while start < max_draws && outcome.found.is_none() {
        let end = (start + BATCH).min(max_draws);
        let batch: Vec<Draw> = (start as u64..end as u64)
            .into_par_iter()
            .map(|i| evaluate_draw(shape, size, p, seed, i))
            .collect::<Result<_>>()?;
        for (offset, draw) in batch.into_iter().enumerate() {
            outcome.draws += 1;
            let certified = draw.phi <= phi_cap;
            outcome.phi_certified_draws += certified as usize;
            let meets_target = draw.norm <= target;
            let accept = match rule {
                SharpnessRule::MeasuredNorm => meets_target,
                SharpnessRule::PhiCertified => certified && meets_target,
            };
            if accept {
                outcome.found = Some(SharpnessWitness {
                    draw: start + offset,
                    members: draw.set.members().to_vec(),
                    phi: draw.phi,
                    phi_certified: certified,
                    lp_norm: draw.norm,
                    sup_norm: draw.sup,
                    value_at_origin: draw.origin,
                });
                break;
            }
        }
        start = end;
    }
    Ok(outcome)
}
