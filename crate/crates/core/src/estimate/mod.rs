//! Probit fit, the Ĉ/Δ̂ statistics, influence functions and the network
//! variance estimator.

mod decomp;
mod probit;

pub use decomp::{
    c_stat, confidence_interval, decompose, delta_hat, delta_j, influence, omega_hat,
    omega_with_pairs, project, variance, variance_with_pairs, Analysis, DecompResult, InfluenceSet,
    Variance,
};

pub use probit::{
    overlap_diagnostic, probit_fit, probit_fit_omitting, probit_hessian, probit_loglik,
    probit_newton, probit_score, NewtonOptions, OverlapReport, ProbitFit,
};
