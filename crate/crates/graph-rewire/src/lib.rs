//! Graph rewiring toolkit and stochastic block model laboratory.

pub mod community;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod report;
pub mod rewiring;
pub mod sbm;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{apply_delta, EdgeDelta, FeatureMatrix, Graph, LabelVector, Partition, Provenance};

/// The guide's chapters, included verbatim so their code blocks compile
/// and run as doc-tests. Rendered standalone from `book/` with mdbook.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/getting-started.md")]
    pub mod getting_started {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    pub mod graphs {}
    #[doc = include_str!("../../../book/src/spectral-gap.md")]
    pub mod spectral_gap {}
    #[doc = include_str!("../../../book/src/communities.md")]
    pub mod communities {}
    #[doc = include_str!("../../../book/src/rewiring.md")]
    pub mod rewiring_methods {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/sbm-lab.md")]
    pub mod sbm_lab {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
