//! Monoids in N^r, rational cones, and the Hilbert basis of their
//! intersection.

pub mod cone;
pub mod hilbert;
pub mod monoid;
pub mod point;

pub use cone::{ConePosition, RationalCone, RationalHyperplane};
pub use hilbert::{hilbert_basis_intersection, hilbert_basis_intersection_with, HilbertOptions};
pub use monoid::{combine, FgMonoid};
pub use point::{LatticePoint, RationalPoint};
