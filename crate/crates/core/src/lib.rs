//! Reconstruction of a Sturm–Liouville operator `−ψ'' + qψ` on `[0, π]` with
//! Robin conditions from finitely many eigenvalues and norming constants,
//! via the Gel'fand–Levitan–Marchenko integral equation.

pub mod certify;
pub mod error;
pub mod forward_oracle;
pub mod glm_solver;
pub mod io;
pub mod ode;
pub mod reconstruction;
pub mod spectral_data;
pub mod trig_kernel;

pub use error::{Error, ErrorKind, Result};
