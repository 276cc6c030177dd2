//! Three-species Lotka–Volterra intraguild-predation model with top-predator
//! feeding switching.
//!
//! The crate covers the vector field and its Jacobian ([`model`]), the
//! equilibria and their stability ([`equilibria`]), Cardano analysis of the
//! characteristic cubic with the Sil'nikov saddle-focus test ([`spectral`]),
//! adaptive integration with tangent dynamics ([`integrate`]) and
//! bifurcation sweeps with Lyapunov exponents ([`analysis`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases below
//! fix the scalar to `f64`, which is what the sweeps and the CLI use.
//!
//! ```
//! use igp_core::{equilibria, Params64};
//!
//! let p = Params64::reference();
//! let (e4, rh) = equilibria::classified_coexistence(&p, None).unwrap().unwrap();
//! assert!(rh.hurwitz);
//! assert!(e4.point.unwrap().is_strictly_positive());
//! ```

// negated comparisons are how NaN inputs fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod output;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Params64 = model::Params<f64>;
pub type State64 = model::State<f64>;
pub type Derivative64 = model::Derivative<f64>;
pub type Equilibrium64 = equilibria::Equilibrium<f64>;
pub type RouthHurwitzReport64 = equilibria::RouthHurwitzReport<f64>;
pub type CubicAnalysis64 = spectral::CubicAnalysis<f64>;
pub type SilnikovVerdict64 = spectral::SilnikovVerdict<f64>;
pub type SolverOptions64 = integrate::SolverOptions<f64>;
pub type Trajectory64 = integrate::Trajectory<f64>;
pub type SweepSpec64 = analysis::SweepSpec<f64>;
pub type SweepRecord64 = analysis::SweepRecord<f64>;

pub type Params32 = model::Params<f32>;
pub type State32 = model::State<f32>;
pub type SolverOptions32 = integrate::SolverOptions<f32>;
