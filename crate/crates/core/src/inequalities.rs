//! L^p machinery and the two sup-norm bounds for band-limited signals.
//!
//! All norms use the counting measure: `‖f‖_p = (Σ_x |f(x)|^p)^{1/p}`.
//!
//! For `supp(F) ⊆ S` the support-size bound reads
//!
//! ```text
//! ‖f‖_∞ ≤ sqrt(|S| / N^{2d/p}) · ‖f‖_p
//! ```
//!
//! and the indicator-norm bound reads
//!
//! ```text
//! ‖f‖_∞ ≤ N^{-d/2} · ‖f‖_p · ‖1̂_S‖_{p'}
//! ```
//!
//! The indicator-norm bound is Hölder applied to `f = N^{-d/2} f * 1̂_S` and
//! holds for every `p ∈ [1, ∞]`. The support-size bound goes through
//! `‖f‖_2 ≤ N^{d(1/2 − 1/p)} ‖f‖_p`, which needs `p ≥ 2`; below 2 it can
//! fail (a point mass with `S` the whole grid and `p = 1` has `lhs = 1`,
//! `rhs = N^{-d/2}`). [`verify_support_bound`] still evaluates it for any
//! finite `p ≥ 1` and reports the outcome in [`InequalityReport::holds`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fourier::{check_support, indicator_spectrum, FreqSet, Signal, DEFAULT_SUPPORT_TOL};
use crate::lattice::GridShape;

/// An exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("exponent must lie in [1, inf], got {p}")));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Hölder conjugate `p/(p−1)`, with `1 ↔ ∞`.
    pub fn dual(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.0.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    /// `1/p`, zero at infinity.
    pub fn reciprocal(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Domain(format!("cannot parse exponent {s:?}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Serializes an `f64` as a JSON number, or `"inf"` when infinite.
pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad number {t:?}"))),
        }
    }
}

/// `lhs ≤ rhs` up to 1e-9 relative, or 1e-12 absolute once `rhs < 1e-9`.
pub fn within_bound(lhs: f64, rhs: f64) -> bool {
    let slack = if rhs < 1e-9 { 1e-12 } else { 1e-9 * rhs };
    lhs <= rhs + slack
}

/// Counting-measure L^p norm of raw values.
pub fn lp_norm_values(values: &[Complex64], p: Exponent) -> f64 {
    if p.0.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    if p.0 == 2.0 {
        return values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    }
    // Scale by the max modulus so large p does not overflow.
    let top = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| (v.norm() / top).powf(p.0)).sum();
    top * sum.powf(1.0 / p.0)
}

pub fn lp_norm(f: &Signal, p: Exponent) -> f64 {
    lp_norm_values(f.values(), p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `‖f‖_∞ ≤ sqrt(|S|/N^{2d/p}) ‖f‖_p`
    SupportSize,
    /// `‖f‖_∞ ≤ N^{-d/2} ‖f‖_p ‖1̂_S‖_{p'}`
    IndicatorNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub which: BoundKind,
    pub p: Exponent,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs / lhs`; infinite when `lhs = 0`.
    #[serde(with = "extended_f64")]
    pub slack_ratio: f64,
    pub grid: GridShape,
    pub set_size: usize,
}

impl InequalityReport {
    fn new(which: BoundKind, p: Exponent, lhs: f64, rhs: f64, set: &FreqSet) -> Self {
        let slack_ratio = if lhs == 0.0 { f64::INFINITY } else { rhs / lhs };
        InequalityReport {
            which,
            p,
            lhs,
            rhs,
            slack_ratio,
            grid: set.shape(),
            set_size: set.len(),
        }
    }

    /// Whether the measured sup-norm respects the bound at the library tolerance.
    pub fn holds(&self) -> bool {
        within_bound(self.lhs, self.rhs)
    }
}

/// Measures the support-size bound for `f` with `supp(F) ⊆ S`.
///
/// Requires a finite `p`. The bound is only a theorem for `p ≥ 2`; for
/// `1 ≤ p < 2` the report may come back with `holds() == false`.
pub fn verify_support_bound(f: &Signal, set: &FreqSet, p: Exponent) -> Result<InequalityReport> {
    if !p.is_finite() {
        return Err(Error::Domain("support-size bound needs a finite exponent".into()));
    }
    check_support(f, set, DEFAULT_SUPPORT_TOL)?;
    let shape = f.shape();
    let n = shape.modulus() as f64;
    let d = shape.dim() as f64;
    let coefficient = (set.len() as f64 / n.powf(2.0 * d / p.0)).sqrt();
    let rhs = coefficient * lp_norm(f, p);
    Ok(InequalityReport::new(BoundKind::SupportSize, p, f.sup_norm(), rhs, set))
}

/// Measures the indicator-norm bound for `f` with `supp(F) ⊆ S`, any `p ∈ [1, ∞]`.
pub fn verify_indicator_bound(f: &Signal, set: &FreqSet, p: Exponent) -> Result<InequalityReport> {
    check_support(f, set, DEFAULT_SUPPORT_TOL)?;
    let shape = f.shape();
    let indicator_norm = if set.is_empty() {
        0.0
    } else {
        lp_norm(&indicator_spectrum(set)?, p.dual())
    };
    let rhs = (shape.len() as f64).sqrt().recip() * lp_norm(f, p) * indicator_norm;
    Ok(InequalityReport::new(BoundKind::IndicatorNorm, p, f.sup_norm(), rhs, set))
}

/// `|S|^{1/2} N^{-d/p}`: multiplied by a uniform bound on `‖f_N‖_p` it bounds
/// `‖f_N‖_∞`. It tends to zero as N grows exactly when `|S| ≪ N^{2d/p}`.
pub fn vanishing_threshold(set_size: usize, shape: GridShape, p: Exponent) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::Domain("vanishing threshold needs a finite exponent".into()));
    }
    let n = shape.modulus() as f64;
    let d = shape.dim() as f64;
    Ok((set_size as f64).sqrt() * n.powf(-d / p.0))
}

/// A bound value next to the quantity it bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(measured: f64, bound: f64) -> Self {
        BoundCheck {
            measured,
            bound,
            holds: within_bound(measured, bound),
        }
    }
}

/// `‖1̂_S‖_{p'} ≤ |S|^{1/2} N^{d/p' − d/2}`, valid when `p' ≤ 2` (so `p ≥ 2`).
pub fn indicator_lp_bound(set: &FreqSet, p: Exponent) -> Result<BoundCheck> {
    let dual = p.dual();
    if dual.0 > 2.0 {
        return Err(Error::Domain(format!(
            "dual exponent {dual} exceeds 2; the Hölder step runs the other way"
        )));
    }
    let shape = set.shape();
    let n = shape.modulus() as f64;
    let d = shape.dim() as f64;
    let bound = (set.len() as f64).sqrt() * n.powf(d * dual.reciprocal() - d / 2.0);
    let measured = lp_norm(&indicator_spectrum(set)?, dual);
    Ok(BoundCheck::new(measured, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{forward, inverse, restrict, Spectrum};
    use crate::lattice::GridShape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape(n: usize, d: usize) -> GridShape {
        GridShape::new(n, d).unwrap()
    }

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn dual_is_an_involution() {
        for v in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let e = p(v);
            let back = e.dual().dual();
            assert!(back == e || (back.0 - e.0).abs() < 1e-12, "{v}");
        }
        assert_eq!(p(1.0).dual(), Exponent::INFINITY);
        assert_eq!(Exponent::INFINITY.dual(), Exponent::ONE);
        assert!((p(3.0).dual().0 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn exponent_parsing_and_serde() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), p(2.5));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!(serde_json::to_string(&Exponent::INFINITY).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<Exponent>("4").unwrap(), p(4.0));
    }

    #[test]
    fn lp_norm_examples() {
        let s = shape(6, 2);
        let delta = Signal::delta(s, 0).unwrap();
        for v in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((lp_norm(&delta, p(v)) - 1.0).abs() < 1e-15);
        }
        let ones = Signal::from_real(s, &vec![1.0; 36]).unwrap();
        for v in [1.0, 3.0, 4.5] {
            assert!((lp_norm(&ones, p(v)) - 36f64.powf(1.0 / v)).abs() < 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = shape(9, 1);
        let f = Signal::from_fn(s, |_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
        let direct: f64 = f.values().iter().map(|v| v.norm().powi(3)).sum::<f64>().cbrt();
        assert!((lp_norm(&f, p(3.0)) - direct).abs() < 1e-12);
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let s = shape(4, 1);
        let f = Signal::from_real(s, &[1e200, 1e200, 0.0, 0.0]).unwrap();
        let n = lp_norm(&f, p(8.0));
        assert!((n / 1e200 - 2f64.powf(1.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn support_bound_tight_for_point_mass() {
        let s = shape(5, 2);
        let r = verify_support_bound(&Signal::delta(s, 0).unwrap(), &FreqSet::full(s), p(2.0)).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs - 1.0).abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn support_bound_can_fail_below_two() {
        // p = 1, S = whole grid: rhs = N^{-d/2} < 1 = lhs.
        let s = shape(4, 1);
        let r = verify_support_bound(&Signal::delta(s, 0).unwrap(), &FreqSet::full(s), p(1.0)).unwrap();
        assert!((r.rhs - 0.5).abs() < 1e-12);
        assert!(!r.holds());
    }

    #[test]
    fn support_bound_on_subspace_spectrum() {
        // f = 1̂_H with H = {(x, 0)} in Z_4^2: f = 1 on {(0, m)}, f̂ = 1_H.
        let s = shape(4, 2);
        let h = FreqSet::new(s, vec![0, 4, 8, 12]).unwrap();
        let f = indicator_spectrum(&h).unwrap();
        let r = verify_support_bound(&f, &h, p(2.0)).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        // sqrt(4 / 4^2) * ‖f‖_2 = 0.5 * 2
        assert!((r.rhs - 1.0).abs() < 1e-12);
        assert!((r.slack_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_precondition_is_enforced() {
        let s = shape(8, 1);
        let f = Signal::delta(s, 3).unwrap();
        let set = FreqSet::new(s, vec![0, 1]).unwrap();
        assert!(matches!(verify_support_bound(&f, &set, p(2.0)), Err(Error::SupportViolation { .. })));
        assert!(matches!(verify_indicator_bound(&f, &set, p(2.0)), Err(Error::SupportViolation { .. })));
        assert!(verify_support_bound(&f, &FreqSet::full(s), Exponent::INFINITY).is_err());
    }

    #[test]
    fn zero_signal_has_infinite_slack() {
        let s = shape(4, 1);
        let set = FreqSet::new(s, vec![1]).unwrap();
        let r = verify_support_bound(&Signal::zeros(s), &set, p(3.0)).unwrap();
        assert!(r.slack_ratio.is_infinite() && r.holds());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"slack_ratio\":\"inf\""));
        let back: InequalityReport = serde_json::from_str(&json).unwrap();
        assert!(back.slack_ratio.is_infinite());
    }

    #[test]
    fn indicator_bound_single_frequency() {
        // f̂ = δ_0 gives f = N^{-d/2}; both sides equal N^{-d/2} at p = 2.
        let s = shape(3, 2);
        let f = inverse(&Spectrum::delta(s, 0).unwrap());
        let set = FreqSet::new(s, vec![0]).unwrap();
        let r = verify_indicator_bound(&f, &set, p(2.0)).unwrap();
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.rhs - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn indicator_bound_equality_on_subspaces() {
        let s = shape(4, 2);
        let h = FreqSet::new(s, vec![0, 4, 8, 12]).unwrap();
        let f = indicator_spectrum(&h).unwrap();
        for v in [1.0, 4.0 / 3.0, 2.0, 4.0, f64::INFINITY] {
            let r = verify_indicator_bound(&f, &h, p(v)).unwrap();
            assert!((r.lhs - r.rhs).abs() <= 1e-9 * r.rhs, "p = {v}: {r:?}");
        }
    }

    #[test]
    fn vanishing_threshold_examples() {
        let s = shape(16, 1);
        assert!((vanishing_threshold(4, s, p(2.0)).unwrap() - 0.5).abs() < 1e-15);
        // |S| = N^{2d/p} gives exactly 1.
        let s = shape(9, 2);
        assert!((vanishing_threshold(81, s, p(2.0)).unwrap() - 1.0).abs() < 1e-12);

        let alpha = 0.5;
        let exp = p(3.0);
        let values: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| {
                let size = (n as f64).powf(alpha).ceil() as usize;
                vanishing_threshold(size, shape(n, 1), exp).unwrap()
            })
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }

    #[test]
    fn indicator_lp_bound_examples() {
        let s = shape(5, 2);
        let c = indicator_lp_bound(&FreqSet::new(s, vec![0]).unwrap(), p(2.0)).unwrap();
        assert!((c.bound - 1.0).abs() < 1e-12 && (c.measured - 1.0).abs() < 1e-12 && c.holds);

        let s = shape(8, 1);
        let c = indicator_lp_bound(&FreqSet::full(s), Exponent::INFINITY).unwrap();
        assert!((c.bound - 8.0).abs() < 1e-12);
        assert!((c.measured - 8f64.sqrt()).abs() < 1e-12);
        assert!(c.holds);

        assert!(indicator_lp_bound(&FreqSet::full(s), p(1.5)).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = shape(4, 2);
        for _ in 0..200 {
            let mut members: Vec<usize> = (0..16).collect();
            for i in 0..4 {
                let j = rng.random_range(i..16);
                members.swap(i, j);
            }
            members.truncate(4);
            let c = indicator_lp_bound(&FreqSet::new(s, members).unwrap(), p(4.0)).unwrap();
            assert!(c.holds, "{c:?}");
        }
    }

    #[test]
    fn norm_nesting_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = shape(7, 2);
        let scale = s.len() as f64;
        for _ in 0..50 {
            let f = Signal::from_fn(s, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let two = lp_norm(&f, Exponent::TWO);
            for v in [2.5, 3.0, 6.0] {
                let bound = scale.powf(0.5 - 1.0 / v) * lp_norm(&f, p(v));
                assert!(two <= bound * (1.0 + 1e-10));
            }
            for v in [1.0, 1.25, 2.0] {
                assert!(two <= lp_norm(&f, p(v)) * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn bounds_hold_on_random_band_limited_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..500 {
            let s = if trial % 2 == 0 { shape(rng.random_range(2..20), 1) } else { shape(rng.random_range(2..7), 2) };
            let size = rng.random_range(1..=s.len());
            let mut all: Vec<usize> = (0..s.len()).collect();
            for i in 0..size {
                let j = rng.random_range(i..s.len());
                all.swap(i, j);
            }
            all.truncate(size);
            let set = FreqSet::new(s, all).unwrap();
            let raw = Spectrum::from_fn(s, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let f = inverse(&restrict(&raw, &set).unwrap());
            for v in [2.0, 3.0, 6.0] {
                let r = verify_support_bound(&f, &set, p(v)).unwrap();
                assert!(r.slack_ratio >= 1.0 - 1e-9, "{r:?}");
            }
            for v in [1.0, 1.5, 2.0, 3.0, 6.0, f64::INFINITY] {
                let r = verify_indicator_bound(&f, &set, p(v)).unwrap();
                assert!(r.slack_ratio >= 1.0 - 1e-9, "{r:?}");
            }
            assert!(forward(&f).values().iter().enumerate().all(|(m, v)| set.contains(m) || v.norm() < 1e-9));
        }
    }
}
