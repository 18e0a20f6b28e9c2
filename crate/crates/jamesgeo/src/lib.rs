//! Desk-scale geometry of the James sequence spaces `J_p`.
//!
//! Everything here operates on finitely supported real sequences, where the
//! `J_p` norm (the supremum of p-variation over increasing index sequences)
//! is computable exactly by dynamic programming. On top of that sit:
//!
//! - [`pvar`]: the norm itself, a brute-force oracle, norming subgradients,
//!   and the consecutive-blocks inequality checker;
//! - [`dual`]: certified intervals for the dual norm, the equivalent
//!   block-decomposition norms, and their super/subadditivity checkers;
//! - [`midpoint`]: approximate metric midpoint sets and sampling certificates
//!   for their inner-ball / outer-compact descriptions;
//! - [`graphs`]: metric graphs of increasing k-tuples, interlaced pairs, the
//!   spike-sum embedding, and distortion-growth experiments;
//! - [`acceptance`]: the reproduction driver behind `jamesgeo reproduce`.
//!
//! Dual-type norms have no closed form, so they are always reported as
//! certified intervals `[lower, upper]`: the lower bound comes with an
//! explicit witness on the unit sphere, the upper bound from an explicit
//! chain decomposition. Inequality checks are arranged so that a pass is
//! implied by mathematics plus the certificates, never by solver luck.

pub mod acceptance;
pub mod dual;
pub mod graphs;
pub mod json;
pub mod midpoint;
pub mod model;
pub mod pvar;
pub mod sampling;

pub use dual::{
    direct_sum_norm, dual_norm, dual_norm_upper, equivalent_dual_norm, equivalent_dual_norm_upper,
    equivalent_primal_norm, equivalent_primal_upper, psubadditivity_check, sandwich_factor,
    superadditivity_check, DualNormResult, PartitionResult, PrimalNormResult, SolveError,
    SolverOptions,
};
pub use graphs::{
    direct_sum_obstruction_demo, distortion_growth_demo, graph_distance, interlaced_min_displacement,
    is_interlaced, lipschitz_constant, phi, phi_unscaled, ramsey_extract, GraphError, GraphImage,
    GraphMap, PairGuard, TargetSpace,
};
pub use midpoint::{
    inner_ball_certificate, midpoint_image_probe, midpoint_membership, outer_compact_certificate,
    MidpointError, MidpointQuery, MidpointReport, NormKind,
};
pub use model::{
    block_split, precedes, DirectSumVector, DualFunctional, Exponent, GraphVertex, ModelError,
    SeqVector,
};
pub use pvar::{
    consecutive_blocks_check, james_norm, james_norm_bruteforce, norm_subgradient, pow_abs,
    variation_along, BlocksReport, NormResult, PvarError, DEFAULT_WINDOW_CAP,
};
