//! Local hidden-variable models of EPR-type correlation experiments.
//!
//! * [`geometry`]: angles and the target openings (slit, circle,
//!   figure-eight, four-petal rose) with their clearance functions.
//! * [`models`]: the knife-throwing aperture model, the eight-program model,
//!   the restaurant-menu model, and analytic reference curves.
//! * [`inequalities`]: Bell's counting inequality on finite sets and CHSH.
//! * [`engine`]: the seeded, sharded Monte Carlo runner.
//! * [`oracle`]: deterministic quadrature of the aperture model and the
//!   model-versus-quantum comparison report.
//! * [`io`] and [`cli`]: result files and the `bellsim` command line.

pub mod cli;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod io;
pub mod models;
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{normalize_angle, Angle, Aperture};
pub use models::{ApertureModel, Pairing};
