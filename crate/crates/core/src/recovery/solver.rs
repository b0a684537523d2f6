use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use num_complex::Complex64;

use super::{uniqueness_certificate, Certificate, RecoveryProblem, RecoveryResult};
use crate::error::{Error, Result};
use crate::fourier::{inverse, FreqSet, Signal, Spectrum};
use crate::inequalities::{lp_norm, Exponent};
use crate::lattice::{phase, GridShape};

/// Imaginary parts above this are treated as a non-real reconstruction.
const REALITY_TOL: f64 = 1e-8;
/// Relative tolerance on spectral agreement off the hidden set.
pub(crate) const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoverOptions {
    /// Stationarity tolerance, relative to `max(1, objective)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Snap the continuous minimiser onto this alphabet when a feasible
    /// candidate exists within `δ` of it.
    pub alphabet: Option<Vec<f64>>,
    /// Number of alphabet candidates examined while snapping.
    pub snap_budget: usize,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions {
            tol: 1e-8,
            max_iters: 50_000,
            alphabet: None,
            snap_budget: 1 << 16,
        }
    }
}

impl RecoverOptions {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        RecoverOptions {
            tol,
            max_iters,
            ..Self::default()
        }
    }

    pub fn with_alphabet(mut self, alphabet: Vec<f64>) -> Self {
        self.alphabet = Some(alphabet);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Coordinate {
    Re(usize, usize),
    Im(usize, usize),
    SelfConjugate(usize),
}

/// Real signals whose spectrum matches the observation off the hidden set,
/// written as `g = g0 + B θ` with one real column per free real parameter.
///
/// The columns are mutually orthogonal: cosines and sines of distinct
/// frequency pairs.
#[derive(Clone, Debug)]
pub struct FeasibleSet {
    shape: GridShape,
    observed: Spectrum,
    base: Vec<f64>,
    coords: Vec<Coordinate>,
    columns: Vec<Vec<f64>>,
    column_norms_sq: Vec<f64>,
}

fn check_symmetric_observation(observed: &Spectrum, hidden: &FreqSet) -> Result<()> {
    let shape = observed.shape();
    let scale = observed.sup_norm().max(1.0);
    for m in 0..shape.len() {
        if hidden.contains(m) {
            continue;
        }
        let neg = shape.negate_index(m);
        if (observed.get(m) - observed.get(neg).conj()).norm() > FEASIBILITY_TOL * scale {
            return Err(Error::Data(format!(
                "observed spectrum is not conjugate-symmetric at frequency {m}, so no real signal matches it"
            )));
        }
    }
    Ok(())
}

impl FeasibleSet {
    pub fn new(problem: &RecoveryProblem) -> Result<Self> {
        let shape = problem.shape();
        let hidden = problem.hidden();
        if hidden.len() == shape.len() {
            return Err(Error::Unrecoverable("every frequency is hidden, so the observation constrains nothing".into()));
        }
        let observed = problem.observed().spectrum().clone();
        check_symmetric_observation(&observed, hidden)?;

        let g0 = inverse(&observed);
        let base = g0.real_parts();

        let mut coords = Vec::new();
        for &m in hidden.members() {
            let neg = shape.negate_index(m);
            match m.cmp(&neg) {
                Ordering::Less => {
                    coords.push(Coordinate::Re(m, neg));
                    coords.push(Coordinate::Im(m, neg));
                }
                Ordering::Equal => coords.push(Coordinate::SelfConjugate(m)),
                Ordering::Greater => {}
            }
        }

        let n = shape.modulus();
        let norm = (shape.len() as f64).sqrt().recip();
        let columns: Vec<Vec<f64>> = coords
            .iter()
            .map(|c| {
                (0..shape.len())
                    .map(|x| match *c {
                        // Unitary inverse uses conj(e^{-2πi x·m/N}).
                        Coordinate::Re(m, _) => 2.0 * norm * phase(shape.dot_indices(x, m), n).re,
                        Coordinate::Im(m, _) => 2.0 * norm * phase(shape.dot_indices(x, m), n).im,
                        Coordinate::SelfConjugate(m) => norm * phase(shape.dot_indices(x, m), n).re,
                    })
                    .collect()
            })
            .collect();
        let column_norms_sq = columns.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
        Ok(FeasibleSet {
            shape,
            observed,
            base,
            coords,
            columns,
            column_norms_sq,
        })
    }

    /// Number of free real parameters.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values_at(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = self.base.clone();
        for (t, col) in theta.iter().zip(&self.columns) {
            if *t != 0.0 {
                for (gi, ci) in g.iter_mut().zip(col) {
                    *gi += t * ci;
                }
            }
        }
        g
    }

    pub fn signal_at(&self, theta: &[f64]) -> Signal {
        Signal::from_real(self.shape, &self.values_at(theta)).expect("finite parameters give finite values")
    }

    /// The full spectrum of `signal_at(theta)`.
    pub fn spectrum_at(&self, theta: &[f64]) -> Spectrum {
        let mut values = self.observed.values().to_vec();
        for (t, c) in theta.iter().zip(&self.coords) {
            match *c {
                Coordinate::Re(m, neg) => {
                    values[m] += Complex64::new(*t, 0.0);
                    values[neg] += Complex64::new(*t, 0.0);
                }
                Coordinate::Im(m, neg) => {
                    values[m] += Complex64::new(0.0, *t);
                    values[neg] -= Complex64::new(0.0, *t);
                }
                Coordinate::SelfConjugate(m) => values[m] += Complex64::new(*t, 0.0),
            }
        }
        Spectrum::new(self.shape, values).expect("finite parameters give a finite spectrum")
    }

    /// `Σ |g(x)|^p` at `g = g0 + Bθ`.
    pub fn eval(&self, theta: &[f64], p: f64) -> f64 {
        power_sum(&self.values_at(theta), p)
    }

    /// Gradient of [`FeasibleSet::eval`]; a subgradient where `p = 1`.
    pub fn grad(&self, theta: &[f64], p: f64) -> Vec<f64> {
        let g = self.values_at(theta);
        self.grad_from_values(&g, p)
    }

    fn grad_from_values(&self, g: &[f64], p: f64) -> Vec<f64> {
        let w: Vec<f64> = g.iter().map(|&v| p * v.abs().powf(p - 1.0) * sign(v)).collect();
        self.columns
            .iter()
            .map(|col| col.iter().zip(&w).map(|(c, wi)| c * wi).sum())
            .collect()
    }

    /// Whether a real signal lies in the feasible set, up to a relative
    /// residual of `tol` after projecting onto the hidden directions.
    pub fn contains_values(&self, values: &[f64], tol: f64) -> bool {
        if values.len() != self.base.len() {
            return false;
        }
        let mut r: Vec<f64> = values.iter().zip(&self.base).map(|(v, b)| v - b).collect();
        for (col, nsq) in self.columns.iter().zip(&self.column_norms_sq) {
            let coef = col.iter().zip(&r).map(|(c, ri)| c * ri).sum::<f64>() / nsq;
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri -= coef * ci;
            }
        }
        let residual = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = values.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        residual <= tol * scale
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn power_sum(values: &[f64], p: f64) -> f64 {
    values.iter().map(|v| v.abs().powf(p)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Descent {
    theta: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Gradient descent with Armijo backtracking; the step doubles after each
/// accepted move and halves on rejection.
fn smooth_descent(set: &FeasibleSet, p: f64, tol: f64, max_iters: usize) -> Descent {
    let mut theta = vec![0.0; set.dim()];
    let mut g = set.values_at(&theta);
    let mut value = power_sum(&g, p);
    let mut step = 1.0;
    for iter in 0..max_iters {
        let grad = set.grad_from_values(&g, p);
        let gnorm_sq = dot(&grad, &grad);
        if gnorm_sq.sqrt() <= tol * value.max(1.0) {
            return Descent { theta, iterations: iter, converged: true };
        }
        let mut t = step * 2.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(x, d)| x - t * d).collect();
            let tg = set.values_at(&trial);
            let tv = power_sum(&tg, p);
            if tv <= value - 1e-4 * t * gnorm_sq {
                theta = trial;
                g = tg;
                value = tv;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No representable decrease remains along the gradient.
            return Descent { theta, iterations: iter + 1, converged: gnorm_sq.sqrt() <= 1e-6 * value.max(1.0) };
        }
        step = t;
    }
    Descent { theta, iterations: max_iters, converged: false }
}

/// Normalised subgradient steps `α0 / sqrt(t + 1)` keeping the best iterate.
/// Declared converged once the best value improves by less than
/// `tol · max(1, best)` over a window of iterations.
fn subgradient_descent(set: &FeasibleSet, p: f64, tol: f64, max_iters: usize, scale: f64) -> Descent {
    const WINDOW: usize = 2000;
    let mut theta = vec![0.0; set.dim()];
    let mut best_theta = theta.clone();
    let mut best = set.eval(&theta, p);
    let mut window_start = best;
    let alpha0 = 0.5 * scale;
    for iter in 0..max_iters {
        let g = set.values_at(&theta);
        let sub = set.grad_from_values(&g, p);
        let norm = dot(&sub, &sub).sqrt();
        if norm == 0.0 {
            return Descent { theta: best_theta, iterations: iter, converged: true };
        }
        let alpha = alpha0 / ((iter + 1) as f64).sqrt();
        for (x, s) in theta.iter_mut().zip(&sub) {
            *x -= alpha * s / norm;
        }
        let value = set.eval(&theta, p);
        if value < best {
            best = value;
            best_theta.clone_from(&theta);
        }
        if (iter + 1) % WINDOW == 0 {
            if window_start - best <= tol * best.max(1.0) {
                return Descent { theta: best_theta, iterations: iter + 1, converged: true };
            }
            window_start = best;
        }
    }
    Descent { theta: best_theta, iterations: max_iters, converged: false }
}

#[derive(PartialEq)]
struct Candidate {
    cost: f64,
    last: usize,
    flips: Vec<usize>,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; cheapest first, then lexicographic.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.flips.cmp(&self.flips))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Rounds each entry to the nearest alphabet value, then examines
/// alternatives that move entries to their second-nearest value (when that
/// lies within `δ`) in order of increasing total distance. Returns the
/// first feasible candidate.
fn snap(set: &FeasibleSet, values: &[f64], alphabet: &[f64], delta: f64, budget: usize) -> Option<Vec<f64>> {
    let mut sorted = alphabet.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.is_empty() {
        return None;
    }
    let mut nearest = Vec::with_capacity(values.len());
    let mut alternatives: Vec<(f64, usize, f64)> = Vec::new();
    for (x, &v) in values.iter().enumerate() {
        let mut ranked: Vec<f64> = sorted.clone();
        ranked.sort_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()).then(a.total_cmp(b)));
        nearest.push(ranked[0]);
        if let Some(&second) = ranked.get(1) {
            if (second - v).abs() < delta {
                alternatives.push(((second - v).abs() - (ranked[0] - v).abs(), x, second));
            }
        }
    }
    alternatives.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let build = |flips: &[usize]| {
        let mut c = nearest.clone();
        for &j in flips {
            let (_, x, value) = alternatives[j];
            c[x] = value;
        }
        c
    };

    let mut heap = BinaryHeap::new();
    heap.push(Candidate { cost: 0.0, last: usize::MAX, flips: Vec::new() });
    let mut seen = HashSet::new();
    let mut examined = 0;
    while let Some(cand) = heap.pop() {
        if examined >= budget {
            break;
        }
        examined += 1;
        let values = build(&cand.flips);
        if set.contains_values(&values, FEASIBILITY_TOL) {
            return Some(values);
        }
        let next = if cand.last == usize::MAX { 0 } else { cand.last + 1 };
        if next < alternatives.len() {
            // Extend with the next alternative.
            let mut extended = cand.flips.clone();
            extended.push(next);
            if seen.insert(extended.clone()) {
                heap.push(Candidate { cost: cand.cost + alternatives[next].0, last: next, flips: extended });
            }
            // Replace the last alternative by the next one.
            if cand.last != usize::MAX {
                let mut replaced = cand.flips.clone();
                *replaced.last_mut().expect("non-empty") = next;
                if seen.insert(replaced.clone()) {
                    heap.push(Candidate {
                        cost: cand.cost - alternatives[cand.last].0 + alternatives[next].0,
                        last: next,
                        flips: replaced,
                    });
                }
            }
        }
    }
    None
}

/// Minimises `‖g‖_p` over real signals matching the observed spectrum off
/// the hidden set.
///
/// For `p ≥ 2` the objective `Σ|g|^p` is smooth and is minimised by gradient
/// descent to a relative stationarity tolerance. For `1 ≤ p < 2` it is
/// minimised by subgradient steps; the result is then only approximately
/// optimal.
pub fn recover(problem: &RecoveryProblem, options: &RecoverOptions) -> Result<RecoveryResult> {
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let set = FeasibleSet::new(problem)?;
    let p = problem.p().value();

    let descent = if set.dim() == 0 {
        Descent { theta: Vec::new(), iterations: 0, converged: true }
    } else if p >= 2.0 {
        smooth_descent(&set, p, options.tol, options.max_iters)
    } else {
        let base_norm = set.base.iter().map(|v| v * v).sum::<f64>().sqrt();
        subgradient_descent(&set, p, options.tol, options.max_iters, base_norm.max(problem.delta()))
    };

    let mut values = set.values_at(&descent.theta);
    let mut snapped = false;
    if let Some(alphabet) = &options.alphabet {
        if let Some(v) = snap(&set, &values, alphabet, problem.delta(), options.snap_budget) {
            values = v;
            snapped = true;
        }
    }
    let signal = Signal::from_real(set.shape(), &values)?;
    debug_assert!(signal.is_real(REALITY_TOL));
    let objective = lp_norm(&signal, Exponent::new(p)?);
    Ok(RecoveryResult {
        signal,
        objective,
        certificate: Certificate {
            threshold: problem.threshold(),
            norm_at_solution: objective,
            unique: uniqueness_certificate(objective, problem.delta(), problem.c_size()),
        },
        iterations: descent.iterations,
        converged: descent.converged,
        snapped,
    })
}
