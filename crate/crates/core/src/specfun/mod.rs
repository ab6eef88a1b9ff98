//! Special functions: real and complex log-gamma, modified Bessel functions,
//! Meijer G by Mellin–Barnes quadrature, and the quadrature rules used elsewhere.

mod bessel;
mod gamma;
mod meijer;
pub mod quad;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_ik, bessel_ik_scaled, bessel_k, bessel_k_scaled, BesselIK,
};
pub use gamma::{digamma, gamma, ln_gamma, ln_gamma_complex, ln_gamma_sign};
pub use meijer::{
    asymptotic_g, ln_asymptotic_g, meijer_g, plan_contour, ContourPlan, MeijerG, MeijerGParams,
    Scaled, DEFAULT_TOL,
};
