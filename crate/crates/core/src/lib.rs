//! Risk profiles of stock options under a lognormal model.
//!
//! Beyond the usual price (the expected discounted payoff) this crate
//! computes the second and higher moments, the variance and the probability
//! of expiring worthless (PEW) for
//!
//! * vanilla European calls and puts ([`european`]), in closed form;
//! * down-and-out European puts ([`barrier`]), in closed form;
//! * American puts ([`american`]), by a front-fixed Crank-Nicolson solver.
//!
//! [`monte_carlo`] holds independent simulation and lattice oracles, and
//! [`risk`] turns the moments into investment metrics and risk-adjusted
//! prices with their effective volatilities.

pub mod american;
pub mod barrier;
pub mod cli;
pub mod error;
pub mod european;
pub mod market;
pub mod monte_carlo;
pub mod normal;
pub mod output;
pub mod pde_check;
pub mod risk;
pub mod verify;

pub use error::{Error, Result, Warning};
pub use market::{validate_market, validate_spec, ExerciseStyle, MarketParams, MomentSet, OptionKind, OptionSpec};
pub use pde_check::{MomentField, StepSizes};
