//! Distribution of the number of cycle components with lengths in a
//! prescribed set, in the uniform random graph G(n, M): Monte Carlo
//! simulation, exact series enumeration, saddle-point contour evaluation,
//! and the Poisson / Gaussian limit laws they converge to.

pub mod analytic;
pub mod components;
pub mod error;
pub mod exact;
pub mod lengthset;
pub mod predictor;
pub mod saddle;
pub mod sampler;
pub mod series;
pub mod stats;

pub use components::{census, decompose, ComponentClass, ComponentSummary, Scratch, TrialStats};
pub use error::{Error, Result};
pub use lengthset::LengthSet;
pub use predictor::{predict, regime_of, Prediction, Regime, RegimeTag};
pub use saddle::{
    contour_dist_critical, contour_dist_subcritical, contour_prob_critical,
    contour_prob_subcritical, contour_table, ContourSpec, SaddleResult, DEFAULT_BITS,
    DEFAULT_NODES,
};
pub use sampler::{dump, parse_dump, sample_gnm, sample_gnm_stream, GraphSample};
pub use series::{FloatSeries, RationalSeries, MAX_ORDER};
pub use stats::{chi_square, ks_normalized, run_trials, tv_distance, Chi2, Histogram, RunReport};

/// Every Rust snippet in the guide (and the README) compiles and runs as a
/// doc-test — one module per chapter, so a failure names its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/length-sets.md")]
    mod length_sets {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    mod regimes {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/saddle.md")]
    mod saddle {}
    #[doc = include_str!("../../../book/src/excess.md")]
    mod excess {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
