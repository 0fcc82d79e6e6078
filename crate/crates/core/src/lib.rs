//! Solvers for window mean-payoff objectives on weighted game arenas with
//! partial observation.
//!
//! The crate is organised around the arena data model ([`arena`]) and a
//! brute-force semantic oracle ([`oracle`]). On top of those sit three
//! solving routes:
//!
//! - [`dirfix`]: the explicit safety game over window functions for the
//!   direct fixed window objective,
//! - [`antichain`]: the symbolic antichain fixpoint for the same objective,
//! - [`observers`] + [`parity`]: Büchi observers for the complements of the
//!   prefix-independent objectives, determinized into parity automata and
//!   solved as perfect-information parity games.
//!
//! [`reductions`] holds constructors for hardness gadgets, and [`random`]
//! the seeded instance generator used for differential testing.

pub mod antichain;
pub mod arena;
pub mod dirfix;
pub mod fixtures;
pub mod observers;
pub mod oracle;
pub mod parity;
pub mod random;
pub mod reductions;

mod error;

pub use error::{Error, Result};

use std::fmt;

/// The two players. Eve is the observation-based player choosing actions,
/// Adam resolves non-determinism and reveals observations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    /// Index used for per-player arrays: Eve = 0, Adam = 1.
    pub fn index(self) -> usize {
        match self {
            Player::Eve => 0,
            Player::Adam => 1,
        }
    }

    /// The player favoured by a priority under the even-is-Eve convention.
    pub fn of_priority(priority: u32) -> Player {
        if priority.is_multiple_of(2) {
            Player::Eve
        } else {
            Player::Adam
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Eve => write!(f, "Eve"),
            Player::Adam => write!(f, "Adam"),
        }
    }
}

/// Resource guard shared by every construction that materializes an
/// exponential state space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
}

impl Limits {
    pub const DEFAULT_MAX_STATES: usize = 2_000_000;

    pub fn new(max_states: usize) -> Self {
        Limits { max_states }
    }

    pub(crate) fn check(&self, what: &'static str, count: usize) -> Result<()> {
        if count > self.max_states {
            Err(Error::ResourceLimit {
                what,
                limit: self.max_states,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: Self::DEFAULT_MAX_STATES,
        }
    }
}
