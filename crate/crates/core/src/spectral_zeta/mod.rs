//! Heat traces and zeta-regularized determinants.

mod closed_form;
mod mellin;
mod product;
mod spectral;
mod trace;

pub use closed_form::{
    circle_trace, flat_cylinder_trace, flat_cylinder_zeta_prime, flat_interval_trace, interval_zeta_prime,
    interval_zeta_prime_riemann, one_d_polyakov, scaled_height,
};
pub use mellin::{
    fit_small_t_coefficients, zeta_prime_at_zero, zeta_prime_parts, Height, MellinOptions, MellinParts,
    SmallTimeFit,
};
pub use product::{eigenvalue_cutoff, heat_trace_of_product, ModeFamily, ModeSumOptions, Multiplicity};
pub use spectral::{
    flat_cylinder_height, flat_cylinder_sampled_trace, interval_height, interval_trace, mode_trace, one_d_polyakov_spectral,
    HeightOptions,
};
pub use trace::{read_trace_csv, HeatTrace, LogGrid, TraceSample};
