//! Coordinate subgroups of Z_N^d and their annihilators.
//!
//! For `H = {x : x_j = 0 for j ∉ axes}` the annihilator is
//! `H^⊥ = {m : m_j = 0 for j ∈ axes}`, and `1̂_H` equals the constant
//! `N^{K − d/2}` on `H^⊥` and vanishes elsewhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FreqSet;
use crate::lattice::GridShape;

/// The free axes of a coordinate subgroup, zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    axes: Vec<usize>,
}

impl SubspaceSpec {
    pub fn new(mut axes: Vec<usize>) -> Self {
        axes.sort_unstable();
        axes.dedup();
        SubspaceSpec { axes }
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspacePair {
    pub subspace: FreqSet,
    pub annihilator: FreqSet,
    /// Set when `K = 0` or `K = d`, i.e. `{0}` and the whole grid.
    pub degenerate: bool,
}

pub fn subspace_pair(shape: GridShape, spec: &SubspaceSpec) -> Result<SubspacePair> {
    if let Some(&bad) = spec.axes.iter().find(|&&a| a >= shape.dim()) {
        return Err(Error::Domain(format!(
            "axis {bad} out of range for dimension {}",
            shape.dim()
        )));
    }
    let mut free = vec![false; shape.dim()];
    for &a in &spec.axes {
        free[a] = true;
    }
    let mut coords = vec![0; shape.dim()];
    let mut subspace = Vec::new();
    let mut annihilator = Vec::new();
    for i in 0..shape.len() {
        shape.decode_into(i, &mut coords);
        let mut in_h = true;
        let mut in_perp = true;
        for (c, &is_free) in coords.iter().zip(&free) {
            if *c != 0 {
                if is_free {
                    in_perp = false;
                } else {
                    in_h = false;
                }
            }
        }
        if in_h {
            subspace.push(i);
        }
        if in_perp {
            annihilator.push(i);
        }
    }
    Ok(SubspacePair {
        subspace: FreqSet::new(shape, subspace)?,
        annihilator: FreqSet::new(shape, annihilator)?,
        degenerate: spec.rank() == 0 || spec.rank() == shape.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{indicator_spectrum, support, forward, DEFAULT_SUPPORT_TOL};
    use crate::inequalities::{verify_indicator_bound, Exponent};

    #[test]
    fn pair_in_z4_squared() {
        let s = GridShape::new(4, 2).unwrap();
        let pair = subspace_pair(s, &SubspaceSpec::new(vec![0])).unwrap();
        assert_eq!(pair.subspace.members(), &[0, 4, 8, 12]);
        assert_eq!(pair.annihilator.members(), &[0, 1, 2, 3]);
        assert!(!pair.degenerate);
        let hat = indicator_spectrum(&pair.subspace).unwrap();
        for i in 0..16 {
            let expected = if pair.annihilator.contains(i) { 1.0 } else { 0.0 };
            assert!((hat.get(i) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn counting_and_transform_identities() {
        for n in 2..=8usize {
            for d in 1..=4usize {
                let s = match GridShape::new(n, d) {
                    Ok(s) if s.len() <= 4096 => s,
                    _ => continue,
                };
                for mask in 0u32..(1 << d) {
                    let axes: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
                    let k = axes.len();
                    let pair = subspace_pair(s, &SubspaceSpec::new(axes)).unwrap();
                    assert_eq!(pair.subspace.len(), n.pow(k as u32));
                    assert_eq!(pair.subspace.len() * pair.annihilator.len(), s.len());
                    assert_eq!(pair.degenerate, k == 0 || k == d);

                    let hat = indicator_spectrum(&pair.subspace).unwrap();
                    let level = (n as f64).powf(k as f64 - d as f64 / 2.0);
                    for (i, v) in hat.values().iter().enumerate() {
                        let expected = if pair.annihilator.contains(i) { level } else { 0.0 };
                        assert!((v - expected).norm() < 1e-9 * level.max(1.0));
                    }
                    // Equality case of the uncertainty principle.
                    let supp = support(&forward(&pair.subspace.indicator()), DEFAULT_SUPPORT_TOL);
                    assert_eq!(supp.len() * pair.subspace.len(), s.len());
                }
            }
        }
    }

    #[test]
    fn indicator_bound_is_attained() {
        let s = GridShape::new(5, 3).unwrap();
        let pair = subspace_pair(s, &SubspaceSpec::new(vec![0, 2])).unwrap();
        let f = indicator_spectrum(&pair.subspace).unwrap();
        let r = verify_indicator_bound(&f, &pair.subspace, Exponent::TWO).unwrap();
        assert!((r.slack_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range_axes() {
        let s = GridShape::new(4, 2).unwrap();
        assert!(subspace_pair(s, &SubspaceSpec::new(vec![2])).is_err());
    }
}
