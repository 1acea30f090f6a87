//! Centralized numerical thresholds with their justification.
//!
//! Anything asserted by the acceptance suite is pinned here rather than
//! scattered through call sites.

/// Exact-rational checks (series residuals, ring identities) tolerate
/// nothing; floating-point transcriptions of exact values allow a few
/// ulps.
pub const EXACT_F64: f64 = 1e-14;

/// Table reproduction: within one unit in the last printed digit; the
/// per-entry unit is derived from the printed string.
pub const TABLE_LAST_DIGIT_UNITS: f64 = 1.0;

/// Relative accuracy demanded of the variational energies against the
/// mesh oracle for the 30-case one-dimensional grid and for the radial
/// ground states.
pub const VARIATIONAL_REL: f64 = 1e-8;

/// Energy deviation of the printed ground-state interpolants (no
/// optimization): widened from the quoted ~1e-9 to absorb the 4-digit
/// rounding of the printed coefficients.
pub const PRINTED_INTERPOLANT_REL: f64 = 1e-7;

/// First multiplicative correction bound checked by the acceptance
/// suite.
pub const PHI1_SUP: f64 = 2e-6;

/// Per-interval solvability residual above which the first correction is
/// declared irregular at a node (signals a badly optimized state). At a
/// converged optimum the residual is set by the trial node-position
/// error: measured 0.005..0.05 normalized for the optimized excited
/// states (node shifts of a few 1e-5), while unoptimized inputs sit at
/// order one.
pub const NODE_REGULARITY_RESIDUAL: f64 = 0.5;

/// Normalized residual overlaps after the orthogonality solve.
pub const ORTHO_RESIDUAL: f64 = 1e-10;

/// Mesh oracle: relative drift between the N and N-10 runs at the
/// operating point (the paper-scale claim for 50 mesh points).
pub const MESH_CONVERGENCE_REL: f64 = 1e-13;

/// Fitted slope windows for the series/oracle and RB/GB scaling checks.
pub const SERIES_SLOPE: (f64, f64) = (13.0, 15.0);
pub const REEXPANSION_SLOPE: (f64, f64) = (7.5, 8.5);

/// Strong-coupling scaling of the mesh energy against the pure-quartic
/// constant.
pub const STRONG_COUPLING_ABS: f64 = 1e-4;

/// Harmonic-limit sup-norm of the log-difference against the Laguerre
/// form on x in [-4, 4] at g^2 = 1e-6.
pub const HARMONIC_LIMIT_SUP: f64 = 1e-4;

/// Strong-coupling fit agreement at g^2 = 100 (acceptance wording:
/// widened to 5e-3 for the finite-coupling crossover).
pub const FIT_AGREEMENT_REL: f64 = 5e-3;

/// Cross-validation of the second perturbative coefficient from mesh
/// energies.
pub const EPS2_FIT_ABS: f64 = 1e-5;
