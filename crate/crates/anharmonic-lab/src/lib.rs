//! Solver toolkit for the one-dimensional quartic anharmonic oscillator
//! `V(x) = x^2 + g^2 x^4` and its D-dimensional radial generalization
//! (units `m = 1/2`, `hbar = 1`, so `H = -d^2/dx^2 + V`).
//!
//! The crate implements two exact expansion engines and the numerical
//! machinery that connects them:
//!
//! * [`series`] — weak-coupling perturbation theory for the Riccati-Bloch
//!   equation: exact rational energy coefficients and odd polynomial
//!   corrections to the logarithmic derivative of the ground state.
//! * [`bloch`] — the semiclassical hierarchy of the generalized Bloch
//!   equation in the classical coordinate `u = g x`, carried out exactly
//!   in the quotient ring `Q[u,w]/(w^2 - 1 - u^2)`.
//! * [`approximant`] — the two-parameter matched wavefunction that
//!   interpolates between the small-distance Taylor behavior and the
//!   large-distance semiclassical phase.
//! * [`variational`] — quadrature-based Rayleigh quotients, orthogonality
//!   constraints for excited states, Nelder-Mead optimization of the
//!   approximant parameters, and the nonlinearization corrections
//!   `y1, phi1, E2, E3`.
//! * [`mesh`] — an independent Lagrange-mesh eigenvalue oracle (Hermite
//!   mesh on the line, generalized-Laguerre mesh in `s = r^2` for radial
//!   problems) used as ground truth for every energy produced elsewhere.
//! * [`radial`] — the radial approximant and its optimization for the
//!   D-dimensional quartic oscillator.
//! * [`verify`] — the acceptance suite run by the `verify` CLI subcommand
//!   and by the integration tests.

pub mod approximant;
pub mod bloch;
pub mod dd;
pub mod dual;
pub mod mesh;
pub mod optim;
pub mod quadrature;
pub mod radial;
pub mod series;
pub mod tolerances;
pub mod variational;
pub mod verify;

pub use approximant::{Approximant, ApproximantParams, FitTables, Parity};
pub use mesh::{MeshConfig, MeshProblem, MeshResult};
pub use quadrature::QuadratureSpec;
pub use radial::RadialParams;
pub use series::{OddPolynomial, PtSeries};
pub use variational::{StateCache, VariationalResult};
