//! Discrete uniformization: the functionals F1 and F2, the
//! Dirichlet-to-Neumann operator, the maps Ψ and Φ between uniform metrics,
//! and the Polyakov–Alvarez formula.

mod functionals;
mod laplace;
mod maps;
mod normalize;
mod polyakov;
mod sparse;

pub use functionals::{
    evaluate_f1, evaluate_f2, minimize_f1, minimize_f1_from, minimize_f2, minimize_f2_from, NewtonOptions,
    UniformizationResult,
};
pub use laplace::{uniformity, DirichletNeumannOperator, DiscreteLaplace, NeumannSolver, Uniformity};
pub use maps::{
    flattening_factor, height_inequality_check, log_scale_discrepancy, map_phi, map_psi, round_trip, uniformize,
    HeightInequality, MapOptions, RoundTrip, UniformMap, UniformType,
};
pub use normalize::{flatten, normalize_flat, normalize_geodesic_boundary};
pub use polyakov::{cylinder_polyakov_terms, mesh_polyakov_terms, polyakov_alvarez_shift, PolyakovAlvarezTerms};
pub use sparse::{reverse_cuthill_mckee, LowRankUpdated, SpdSolver};
