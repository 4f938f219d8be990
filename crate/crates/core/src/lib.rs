//! Diffusion of irreversible binary actions over large networks, the
//! average diffusion at the margin (ADM), and inference on the part of a
//! covariate-omitted diffusion measure that is spurious.

pub mod error;
pub mod estimate;
pub mod graph;
pub mod io;
pub mod mc;
pub mod multitest;
pub mod numkit;
pub mod simulate;

pub use error::{Error, Result};
