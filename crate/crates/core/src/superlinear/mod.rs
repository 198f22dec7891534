//! Superadditive functions on monoids, straightening, and piecewise-linear
//! structure.

pub mod additivity;
pub mod example;
pub mod function;
pub mod lipschitz;
pub mod pl;
pub mod straighten;

pub use additivity::{one_point_additivity, OnePointVerdict};
pub use example::build_example_3_3;
pub use function::{check_superadditive, MonoidFunction, SuperadditivityVerdict};
pub use lipschitz::{lipschitz_estimate, LipschitzReport};
pub use pl::{pl_detect, LinearPiece, PlDecomposition, PlOptions, PlOutcome};
pub use straighten::{compute_index, straighten, IndexOptions, StraightenedFunction};
