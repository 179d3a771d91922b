//! Weighted pure simplicial complexes, their up/down random walks, and
//! numerical verification of local-to-global contraction bounds.
//!
//! The crate is organized bottom-up:
//!
//! * [`complex`]: faces, levels, weights, links, and instance generators;
//! * [`walks`]: the up/down step operators, their compositions, local walks,
//!   Dirichlet forms, and the variance decomposition;
//! * [`spectral`]: a Jacobi eigensolver for reversible operators, spectral
//!   profiles, and the trickling-down checks;
//! * [`contraction`]: the contraction-factor recursion, its closed form, and
//!   the bound comparisons;
//! * [`entropy`]: entropy functionals and one-sided estimates of entropy
//!   contraction and modified log-Sobolev constants;
//! * [`instance`]: JSON instance ingestion and generator specs;
//! * [`report`]: the check suites behind the `hdx` command-line tool.

pub mod complex;
pub mod contraction;
pub mod entropy;
pub mod error;
pub mod instance;
pub mod report;
pub mod spectral;
pub mod walks;

pub use complex::{Face, Level, LevelDistribution, Link, PureSimplicialComplex};
pub use contraction::{ContractionFactors, ContractionSolution};
pub use entropy::{EntropyEstimate, OptimizerSettings};
pub use error::{Error, Result};
pub use instance::{GenerateSpec, InstanceFile, InstanceSource};
pub use report::{AnalyzeOptions, CheckRecord, CheckStatus, Suite, VerificationReport};
pub use spectral::{ProfileMeasurement, SpectralProfile};
pub use walks::{LevelFunction, WalkOperator};
