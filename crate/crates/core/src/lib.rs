//! Exponent calculus, radial stretches and fractional-norm estimators for
//! composition operators induced by quasiconformal maps.

pub mod exec;
pub mod exponents;
pub mod norms;
pub mod profiles;
pub mod quadrature;
pub mod radial_maps;
pub mod real;
pub mod sharpness;

pub use exec::Execution;
pub use exponents::{Exponent, ExponentPoint, Outcome, QcRegularity, Regime};
pub use profiles::{Membership, RadialProfile};
pub use radial_maps::{Ball, RadialStretch};
pub use real::Real;
