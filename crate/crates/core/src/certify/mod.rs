//! Exact certification of the explicit probability bounds and of the
//! resulting convergence rate.

pub mod bounds;
pub mod claims;
pub mod rate;
pub mod volume;

pub use bounds::{
    chain_bound, min_one_step_prob, three_step_cuts, three_step_extremes, three_step_interval_prob, Bound, Extremes,
};
pub use claims::{verify_all, verify_all_with, BoundClaim, Computed, Method, Relation, Verdict};
pub use rate::{certified_params, CertifiedRate};
pub use volume::{box_simplex_prob, omega_sum_cdf, PolytopeSpec};
