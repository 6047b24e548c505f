//! Renewal, quasi-renewal and piecewise-linear Markov process simulation,
//! with coupling constructions that turn moment bounds into computable
//! total-variation convergence rates.
//!
//! Lifetimes are described by their intensity (hazard) functions, see
//! [`intensity`]. Everything else builds on [`DistributionView`].

pub mod coupling;
pub mod error;
pub mod intensity;
pub mod models;
pub mod plmp;
pub mod quadrature;
pub mod renewal;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use intensity::{
    common_part, common_part_inf, common_part_n, ClosedForm, CommonPartInf, CustomHazard, DistributionSpec,
    DistributionView, Hazard, HazardSpec, IntensitySpec,
};

/// The guide under `book/`, compiled here so its snippets run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/intensities.md")]
    pub mod intensities {}
    #[doc = include_str!("../../../book/src/renewal.md")]
    pub mod renewal {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    pub mod coupling {}
    #[doc = include_str!("../../../book/src/plmp.md")]
    pub mod plmp {}
    #[doc = include_str!("../../../book/src/models.md")]
    pub mod models {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
