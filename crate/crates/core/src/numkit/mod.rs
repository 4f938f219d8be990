//! Numeric kernels shared by the rest of the crate: standard normal
//! functions, small dense symmetric linear algebra, order statistics and
//! keyed random streams.

mod linalg;
mod normal;
mod rng;
mod stats;

pub use linalg::{psd_sqrt, solve_spd, sym_eig, Matrix, PsdSqrt, SymEig, SymMatrix};
pub use normal::{norm_cdf, norm_pdf, norm_quantile, norm_sf};
pub use rng::RngStream;
pub use stats::{empirical_percentile, lower_median, mean_and_se};
