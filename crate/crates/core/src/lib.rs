//! Attractors, statistics and generic witnesses for piecewise-smooth maps of
//! the unit interval with finitely many critical points and discontinuities.

pub mod catalog;
pub mod cells;
pub mod error;
pub mod expr;
pub mod interval;
pub mod map;
pub mod observable;
pub mod sampling;
pub mod stats;
pub mod mapfile;
pub mod structure;
pub mod attractors;
pub mod decomposition;
pub mod witness;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalUnion};
pub use cells::CellSet;
pub use map::{Branch, PiecewiseMap, Side};
pub use mapfile::parse_map;
