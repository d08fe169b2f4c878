//! Preintegration combined with randomly shifted rank-1 lattice rules for
//! the arithmetic-average Asian put: price, distribution function and
//! density of the discrete average under Black–Scholes dynamics.
//!
//! The first Gaussian coordinate (the leading PCA direction of the
//! Brownian path) is integrated out in closed form, which turns the kinked
//! or discontinuous integrands into smooth functions of the remaining
//! coordinates. Those are then integrated with a lattice rule built by the
//! component-by-component algorithm.
//!
//! * [`model`]: PCA factor of the Brownian covariance and the average map φ.
//! * [`preintegrate`]: the boundary ξ(x, y) and the closed forms P₀g.
//! * [`lattice`]: CBC construction, shifted point sets, random streams.
//! * [`weights`]: product and POD weights and their constants.
//! * [`estimate`]: the four estimators, the convergence study and the
//!   Chebyshev density curve.

pub mod error;
pub mod estimate;
pub mod lattice;
pub mod model;
pub mod normal;
pub mod preintegrate;
pub mod quadrature;
pub mod summation;
pub mod weights;

pub use error::{Error, Result};
pub use estimate::{Estimate, Method};
pub use lattice::LatticeRule;
pub use model::{pca_factor, BrownianFactor, MarketParams};
pub use preintegrate::{RootResult, Target, TargetKind};
pub use weights::WeightSpec;
