//! Numerical objects of anisotropic Hardy spaces over ball quasi-Banach
//! function spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`dilation`] validates expansive matrices and evaluates the step
//!   homogeneous quasi-norm.
//! * [`grid`] carries compactly supported functions on tensor grids.
//! * [`spaces`] implements the concrete ball quasi-Banach function spaces.
//! * [`atoms`] builds and validates atoms and finite decompositions.
//! * [`fourier_bounds`] checks the Fourier-side inequalities by quadrature.
//! * [`maximal`] holds grid maximal operators.

pub mod atoms;
pub mod dilation;
pub mod error;
pub mod fourier_bounds;
pub mod grid;
mod linalg;
pub mod maximal;
pub mod spaces;

pub use error::{Error, Result};
pub use linalg::unit_ball_volume;
