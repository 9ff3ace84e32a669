pub mod asymptotics;
pub mod eigensolve;
pub mod error;
pub mod fit;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod real;
pub mod scenarios;
pub mod specfun;
pub mod volterra;

pub use error::{Error, Result};
pub use real::Real;

pub type PotentialSpec64 = potential::PotentialSpec<f64>;
pub type PotentialSpec32 = potential::PotentialSpec<f32>;
pub type Perturbation64 = potential::Perturbation<f64>;
pub type BoundaryProblem64 = eigensolve::BoundaryProblem<f64>;
pub type Spectrum64 = eigensolve::Spectrum<f64>;
pub type ExpansionReport64 = asymptotics::ExpansionReport<f64>;
pub type QuantizationContext64 = asymptotics::QuantizationContext<f64>;
pub type InteriorSolution64 = volterra::InteriorSolution<f64>;
