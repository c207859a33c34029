//! Exact auditability analysis for allocation, auction, voting and
//! reserves mechanisms on finite canonical type spaces.

pub mod auction;
pub mod audit;
pub mod characterize;
pub mod error;
pub mod fixtures;
pub mod house;
pub mod io;
pub mod mechanism;
pub mod model;
pub mod perm;
pub mod priority;
pub mod reserves;
pub mod suite;
pub mod vote;

pub use error::{Error, Result};
pub use mechanism::{parse_mechanism, Mechanism, MechanismHandle};
pub use model::{Group, Outcome, Problem, Setting, SettingKind, TypeReport};
