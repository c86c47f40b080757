//! Energy-efficient power control for SINR interference networks.
//!
//! The crate maximizes the weighted sum of per-user energy efficiencies
//! (rate over consumed power) subject to per-user power budgets, with two
//! solvers:
//!
//! - [`sca`]: successive convex approximation with closed-form per-user
//!   best responses and Armijo steps. Fast, returns a stationary point.
//! - [`global`]: Dinkelbach's method on a single-ratio reformulation, with
//!   each parametric problem solved by polyblock outer approximation.
//!   Globally optimal within tolerance, exponential in the user count.
//!
//! [`mwrc`] maps an amplify-and-forward multi-way relay channel onto the
//! interference model and draws Rayleigh channels, and [`bench`] runs
//! power sweeps over random channels and writes CSV results.
//!
//! ```
//! use wsee::network::{InterferenceNetwork, PowerModel, WseeProblem};
//! use wsee::sca::{sca_solve, ScaConfig};
//!
//! let net = InterferenceNetwork::new(
//!     vec![1.0, 0.8],
//!     vec![vec![0.0, 0.1], vec![0.2, 0.0]],
//!     vec![0.01, 0.01],
//! )?;
//! let prob = WseeProblem::new(net, PowerModel::uniform(2, 2.5, 1.0)?, vec![1.0, 1.0], vec![1.0, 1.0])?;
//! let res = sca_solve(&prob, &ScaConfig::default())?;
//! assert!(res.f_star >= prob.wsee(&[1.0, 1.0])?);
//! # Ok::<(), wsee::Error>(())
//! ```

pub mod bench;
mod error;
pub mod global;
pub mod mwrc;
pub mod network;
pub mod sca;

pub use error::{Error, Result};
pub use network::{DcSplit, InterferenceNetwork, PowerModel, WseeProblem};
