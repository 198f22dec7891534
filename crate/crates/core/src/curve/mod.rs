//! Divisorial systems on an affine curve: checks, the finite generation
//! pipeline, and the boundary counterexample.

pub mod certificate;
pub mod checks;
pub mod counterexample;
pub mod divisor;
pub mod generation;
pub mod pipeline;
pub mod system;

pub use certificate::{Certificate, Verdict};
pub use checks::{
    check_saturation, compute_b, dichotomy_check, index_bound_check, truncation_integral_check,
    validate_system, BConstant, SaturationDatum,
};
pub use counterexample::{boundary_counterexample, CounterexampleOptions, CounterexampleReport};
pub use divisor::{CurveDivisor, RCurveDivisor};
pub use pipeline::{
    finite_generation_pipeline, graded_piece_oracle, oracle_minimal_generators, GeneratorSet,
    PipelineOptions, PipelineReport,
};
pub use system::MobileSystem;
