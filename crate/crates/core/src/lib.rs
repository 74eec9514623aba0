//! Subseries of rational series: exact arithmetic, index sets, finite-horizon
//! classification, the standard constructions and a relational-system harness.

pub mod bounds;
pub mod classify;
pub mod combinatorics;
pub mod constructions;
pub mod index_set;
pub mod partition;
pub mod rational;
pub mod relsys;
pub mod series;
pub mod truth;

pub use index_set::IndexSet;
pub use partition::{IntervalPartition, NatMap};
pub use rational::Rational;
pub use series::Series;
pub use truth::Truth;
