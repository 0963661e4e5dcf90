//! Example simulators and time-series summary statistics.

pub mod line;
pub mod stats;
pub mod surrogate;

pub use line::{simulate_line, LineKind, LineModelConfig, LineSimulator};
pub use stats::{
    auxiliary_ols, covariance_lower_triangle, cross_correlations, AuxRegression, Extraction,
    LagTerm, StatPreset, TimeSeriesPanel,
};
pub use surrogate::{macro_space, simulate_surrogate_macro, SurrogateMacroSimulator};
