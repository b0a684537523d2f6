//! Extremal sets: uniform random sets, coordinate subgroups and Λ(p)-type sets.

pub mod lambda;
pub mod random;
pub mod subspace;

pub use lambda::{lambda_norm_check, lambda_p_search, LambdaCandidate, ProbeSet, SearchParams};
pub use random::{
    normalized_indicator_signal, phi, phi_tail_experiment, random_set, random_set_with, sharpness_norm_bound,
    sharpness_search, tail_bound, PhiStat, SharpnessOutcome, SharpnessRule, TailReport,
};
pub use subspace::{subspace_pair, SubspacePair, SubspaceSpec};
