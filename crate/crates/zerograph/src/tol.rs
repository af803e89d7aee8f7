//! Fixed numerical tolerances.
//!
//! Dimensions in this crate stay below a few hundred and the conditioning of
//! every construction is benign, so fixed constants keep reports reproducible.

/// Tolerance for algebraic identities (trace preservation, Gram residuals,
/// reconstruction errors).
pub const EXACT: f64 = 1e-10;

/// Numerical rank cutoff for spectra and singular values.
pub const RANK: f64 = 1e-8;

/// Membership residual threshold for operator-space containment.
pub const MEMBER: f64 = 1e-8;

/// Residual threshold for zero-error code certificates.
pub const CODE: f64 = 1e-9;

/// Round-trip fidelity slack for recovery channels.
pub const RECOVER: f64 = 1e-8;

/// Evidence threshold: a violation search that stays above this value across
/// all starts counts as "no witness found".
pub const GAP: f64 = 1e-4;
