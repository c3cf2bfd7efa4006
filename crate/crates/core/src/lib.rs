//! Forward and partial inverse spectral problems for the quadratic pencil
//! `-y'' + q y + 2λ p y = λ² y` on a star graph whose last edge is a loop.

pub mod assign;
pub mod basis;
pub mod characteristic;
pub mod cheb;
pub mod contour;
pub mod error;
pub mod fit;
pub mod inverse_edge;
pub mod inverse_loop;
pub mod jet;
pub mod legendre;
pub mod lsq;
pub mod pencil;
pub mod quadrature;
pub mod rk;
pub mod shooting;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
