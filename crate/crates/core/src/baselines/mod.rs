//! Reference estimators to compare the regression method against:
//! rejection and MCMC ABC, simulated minimum distance, and nearest-centroid
//! model selection, plus the curvature diagnostic.

mod abc;
mod curvature;
mod distance;
mod selection;
mod smd;

pub use abc::{mcmc_abc, reflect, rejection_abc, rejection_abc_with, AbcConfig, AbcMethod, McmcResult, RejectionResult};
pub use curvature::{curvature_profile, spearman, CurvaturePoint};
pub use distance::{distance, DistanceSpec, WeightedDistance, Weighting};
pub use selection::MinDistanceSelector;
pub use smd::{distance_profile, noise_to_signal, smd_estimate, ProfilePoint, SmdResult, SMD_REPLICATES};
