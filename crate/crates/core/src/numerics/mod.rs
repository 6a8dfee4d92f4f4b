//! Special functions and quadrature rules.

pub mod quadrature;
pub mod special;

pub use quadrature::{
    gauss_interval, gauss_interval_for_degree, oscillatory_degree, quad_triangle, IntervalRule, QuadratureRule,
    TriangleRule,
};
pub use special::{bessel_j, bessel_j_derivative, bessel_j_integer_orders, bessel_j_sequence, gamma};
