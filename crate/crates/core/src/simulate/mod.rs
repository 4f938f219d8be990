//! The simulation design: village networks, mixed covariates, initial
//! actions, threshold diffusion, and simulation oracles for the true ADM
//! and the decomposition terms.

mod dgp;
mod diffuse;
mod oracle;

pub use dgp::{
    build_design, gen_contact, gen_covariates, gen_initial, simulate_panel, Design, DgpConfig,
    PanelData,
};
pub use diffuse::{
    diffuse, diffuse_with_rule, diffuse_with_shocks, draw_shocks, AdoptedShareExposure,
    DiffusionPath, Exposure, ExposureRule, MeanExposure,
};
pub use oracle::{
    adm_oracle, delta_oracle, forward_reach, pseudo_true_gamma, DeltaTruth, DiffusionModel,
    LocalResim, McEstimate,
};
