//! Simultaneous Diophantine approximation and the walk toward `qx`.

pub mod approx;
pub mod surd;
pub mod walk;

pub use approx::{
    build_u_system, find_approximant, nearest_integer_distance, Approximant, ApproximantOptions,
    Enclosure, TargetPoint, USystem,
};
pub use surd::{Interval, Surd};
pub use walk::{replay, walk, WalkOptions, WalkReport, WalkState, Walker};
