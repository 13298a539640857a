//! Exact and numerical analysis of the randomly perturbed circle map
//! `x -> x/2 + b + ξ (mod 1)` with uniform noise `ξ ~ U[0, w]`.
//!
//! * [`exact_map`]: piecewise-affine map algebra over exact rationals.
//! * [`kernel`]: the one-step transition kernel, Monte Carlo sampling,
//!   exact densities and the Ulam discretization.
//! * [`coupling`]: an explicit Markovian coupling of two copies of the chain.
//! * [`certify`]: exact verification of the explicit probability bounds that
//!   make the chain uniformly ergodic, and the resulting rate constants.
//! * [`spectral`]: stationary law, mixing curves and band diagnostics on the
//!   Ulam chain.

pub mod certify;
pub mod coupling;
pub mod error;
pub mod exact_map;
pub mod kernel;
pub mod rat;
pub mod spectral;

pub use error::{Error, Result};
pub use exact_map::{compose, fixed_points, iterate, mod1_affine, Branch, PwAffineMap};
pub use kernel::density::PwConstDensity;
pub use kernel::mc::{ProbEstimate, Seed};
pub use kernel::ulam::UlamChain;
pub use kernel::{Kernel, NoiseModel};
pub use rat::{rat, Interval, Rat};
