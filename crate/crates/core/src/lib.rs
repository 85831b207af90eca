//! Estimating the number of labeled simple graphs that share a property
//! value (the fiber of that value) by multiplying step ratios along a path
//! of graphs that grows one edge at a time from the empty graph.
//!
//! Supported properties are the edge count, degree sequence, degree
//! distribution, covariate mixing matrix and degree mixing matrix. Small
//! instances can be checked against exhaustive enumeration in [`oracle`].

pub mod error;
pub mod experiments;
pub mod fiber;
pub mod generators;
pub mod graph;
pub mod io;
pub mod logspace;
pub mod oracle;
pub mod paths;
pub mod property;
pub mod ratios;

pub use error::{FiberError, Result};
pub use fiber::{
    closed_form_edges, closed_form_mixing, count_degdist_fiber, count_degmix_fiber,
    count_degseq_fiber, count_edges_fiber, count_mixing_fiber, estimate_distinct_dmm,
    liebenau_regular_reference, FiberEstimate, FiberRecord,
};
pub use graph::{
    CovariateAssignment, DegreeDistribution, DegreeMixingMatrix, DegreeSequence, Edge, Graph,
    MixingMatrix,
};
pub use logspace::LogCount;
pub use property::{PropertyKind, PropertyValue};
pub use ratios::NewmanMode;
