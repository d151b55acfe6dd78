//! Numerical tolerances shared by every module.
//!
//! Tests and runtime contract checks read their thresholds from here so that
//! calibration happens in exactly one place.

/// Conjugate-symmetry tolerance for [`HermitianOperator`](crate::qmath::HermitianOperator)
/// and the normalization tolerance for flagged state vectors.
pub const EPS_HERM: f64 = 1e-12;

/// Jacobi convergence threshold on the largest off-diagonal magnitude.
pub const EPS_EIG: f64 = 1e-13;

/// Tolerance for probability bookkeeping (completeness sums, projector sets).
pub const EPS_PROB: f64 = 1e-10;

/// Below this, a conditional-probability denominator is treated as zero and
/// the conditional is reported as undefined.
pub const EPS_DENOM: f64 = 1e-14;

/// Below this, the fidelity inversion `(1 + cos b) / (2 + cos b - cos a)`
/// is treated as the degenerate 0/0 corner.
pub const EPS_FIDELITY_DENOM: f64 = 1e-12;

/// Hard cap on cyclic Jacobi sweeps.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Named Monte-Carlo cells must sit within this many standard deviations.
pub const MC_SIGMA_LIMIT: f64 = 4.0;
