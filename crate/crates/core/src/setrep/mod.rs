//! Representations of sets and measures.

pub mod discrete;
pub mod intervals;
pub mod measure;
pub mod points;

pub use discrete::{ChainSet, DiscreteSet, FiniteSet, PeriodicSet};
pub use intervals::{IntervalUnion, PeriodicPattern};
pub use measure::{window_mass, Atom, HaarValue, Mass, MeasureSpec, SetSpec, Window};
pub use points::{Lattice, PointConfig, Tail};
