//! Geometry of boxes in Z^d, the toppling matrix and its inverse, and simple
//! random walk.

mod exact;
mod geometry;
mod green;
mod harmonic;
mod matrix;
mod walk;

pub use exact::{solve_integral, toppling_determinant, ExactFactor, EXACT_SITE_CAP};
pub use geometry::{neighbors, Site, Stencil, Volume, MAX_DIM, SINK};
pub use green::{green_function, green_row_exact, GreenJson, GreenJsonEntries, GreenMatrix, GreenMode, FLOAT_SITE_CAP};
pub use harmonic::{discrete_laplacian, discrete_laplacian_f64, martingale_mean};
pub use matrix::TopplingMatrix;
pub use walk::{rw_visits_estimate, walk_path, Estimate, WalkPath};

pub(crate) use matrix::apply as apply_toppling;
