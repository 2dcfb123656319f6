//! Numerical solution of the multistate Landau-Zener problem
//! `i dpsi/dt = (A + B t) psi`, assembly of transition probability matrices,
//! and closed-form predictions to compare them against.

mod dop853;
pub mod model;
pub mod modelfile;
pub mod propagator;
pub mod output;
pub mod presets;
pub mod scattering;
pub mod sweep;
pub mod theory;
