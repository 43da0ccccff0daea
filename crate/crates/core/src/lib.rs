//! Online linear optimization with variable-parameter mirror-descent strategies.
//!
//! The library is organized around the score-and-choose recursion
//!
//! ```text
//! U_n = U_{n-1} + u_n,        x_{n+1} = Q_h(η_n U_n),
//! ```
//!
//! where `Q_h` is the choice map of a regularizer `h` on a compact convex
//! action set and `η_n` is a positive nonincreasing parameter sequence.
//! Specializing the regularizer and the parameter schedule recovers
//! exponential weights, smooth fictitious play and its vanishing variant,
//! lazy online gradient descent, and lazy online mirror descent.
//!
//! Modules:
//! - [`geometry`]: action sets, regularizers, choice maps, conjugates,
//!   Bregman divergences, smallest enclosing balls.
//! - [`schedules`]: parameter sequences `η_n` and their partial sums.
//! - [`strategies`]: the strategy state machine and named instantiations.
//! - [`environments`]: payoff streams, loss oracles, noise wrappers,
//!   mixed-action sampling.
//! - [`regret`]: empirical regret ledgers and every regret bound as an
//!   executable formula.
//! - [`continuous`]: piecewise-constant continuous-time interpolation,
//!   quadrature of the continuous trajectory, and numerical certification
//!   of the discrete/continuous decomposition.
//! - [`optimize`]: lazy/greedy mirror descent, projected subgradient, and
//!   their stochastic variants for offline convex programs.
//!
//! ```
//! use noregret::geometry::{ConvexBody, Regularizer};
//! use noregret::regret::{BoundTracker, RegretLedger};
//! use noregret::schedules::Schedule;
//! use noregret::strategies::Strategy;
//!
//! let regularizer = Regularizer::entropy(3)?;
//! let schedule = Schedule::inv_sqrt(1.0)?;
//! let mut strategy = Strategy::new(regularizer.clone(), schedule.clone())?;
//! let mut ledger = RegretLedger::new(3);
//! let mut tracker = BoundTracker::new(regularizer, schedule);
//!
//! for payoff in [[1.0, 0.0, -0.5], [0.0, 1.0, 0.2]] {
//!     ledger.record(&payoff, strategy.action())?;
//!     tracker.record(&payoff)?;
//!     strategy.step(&payoff)?;
//! }
//! let body = ConvexBody::simplex(3)?;
//! assert!(ledger.max_regret(&body)? <= tracker.thm3() + 1e-12);
//! # Ok::<(), noregret::Error>(())
//! ```

pub mod continuous;
pub mod environments;
mod error;
pub mod geometry;
pub mod linalg;
pub mod optimize;
pub mod regret;
mod rng;
pub mod schedules;
pub mod strategies;

pub use error::{Error, Result};
pub use rng::SplitMix64;
