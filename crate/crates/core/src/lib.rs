//! Exact computations on `Q^n` with a weighted conditional expectation:
//! Hahn-Jordan decomposition of component-valued charges, partial inverses
//! by spectral ladders, and Riesz-Frechet representation of T-linear
//! functionals.

pub mod certificate;
pub mod commands;
pub mod error;
pub mod expectation;
pub mod hahn_jordan;
pub mod instance;
pub mod lattice;
pub mod oracle;
pub mod partial_inverse;
pub mod random;
pub mod rational;
pub mod representation;
pub mod selftest;

pub use certificate::{Certificate, Check};
pub use error::{Error, Result};
pub use expectation::ExpectationOperator;
pub use hahn_jordan::ComponentCharge;
pub use instance::{parse_instance, InputError, Instance};
pub use lattice::{ComponentMask, PartitionAlgebra, RieszElement};
pub use rational::Rational;
pub use representation::StrongFunctional;
