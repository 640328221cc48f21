//! Geometric and numerical primitives shared by every other module.

pub mod kernel;
pub mod matrix;
pub mod quad;
pub mod special;

pub use kernel::{heat_kernel_c, heat_kernel_h, heat_kernel_h_at_distance};
pub use matrix::{
    classify_trace, geodesic_length_of_matrix, hyp_distance, length_from_trace, HPoint, MatrixType, MoebiusMatrix,
    PARABOLIC_TOL,
};
pub use quad::{
    integrate, integrate_pieces, integrate_to_infinity, pairwise_sum, CompensatedSum, Estimate, QuadratureSpec,
};
pub use special::{erf, erfc, li, li_tilde, EULER_GAMMA};
