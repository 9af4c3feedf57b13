//! Dirichlet eigenproblems `−(p f′)′ + q f = λ w f` for the single-mode
//! operators `Q_φ`, `Δ_l(m)` and their flat-with-factor analogue.

mod problem;
mod solver;
mod traces;
mod tridiag;

pub use problem::{Coordinate, ModeKind, ModeProblem, SturmLiouville};
pub use solver::{
    discretize, eigenpairs, grid_nodes, lowest_eigenvalues, richardson, solve_mode, solve_mode_below,
    solve_sturm_liouville, BracketPiece, Eigenpairs, Extrapolation, GridOptions, Spectrum, TailBound,
};
pub use traces::{kernel_diagonal, mode_heat_trace, modified_mode_trace, Measure, TraceValue};
pub use tridiag::TridiagonalPencil;
