//! Collar geometry, quasiconformal building blocks and certified propagation
//! of geodesic lengths under iterated grafting on hyperbolic surfaces.
//!
//! Lengths are tracked as certified intervals; dilatation bounds are tracked
//! as additive log-dilatation ledgers; universal constants that are only known
//! to exist live in [`Constants`] and are echoed by every report.

pub mod annuli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod grafting;
pub mod hypgeom;
pub mod numfmt;
pub mod qcmaps;
pub mod stats;

pub use constants::Constants;
pub use error::{Error, Result};
