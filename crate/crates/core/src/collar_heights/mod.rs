//! Heights of hyperbolic collars and half collars, the degeneration sweeps
//! over short geodesics, and the insertion experiment.

mod heights;
mod insertion;
mod sweep;

pub use heights::{
    collar_height, collar_mode_family, collar_mode_gap, collar_report, conformal_collar_height,
    direct_collar_height, half_collar_height, zero_mode_height, zero_mode_zeta_prime, CollarHeightResult, HalfRoute, ReportRoutes,
    Route,
};
pub use insertion::{insertion_gap, InsertionGap};
pub use sweep::{asymptotic_sweep, subcollar_height, LeadingTerm, SweepOptions, SweepRow, SweepSummary, SweepTable};
