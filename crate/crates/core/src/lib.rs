//! p-adic multidimensional wavelet bases, pseudo-differential operators
//! diagonal in them, and Cauchy problems solved mode by mode.

pub mod cauchy;
pub mod error;
pub mod io;
pub mod padic;
pub mod pseudodiff;
pub mod schwartz;
pub mod wavelets;

pub use error::{Error, Result};
pub use padic::{Ball, PadicRational, PadicVector, UnitPhase, Valuation};
pub use schwartz::SchwartzFunction;
