//! The certificate process `ξ`, its product supermartingales, the net sampler
//! and concentration bookkeeping.

pub mod assoc;
pub mod concentration;
pub mod net;
pub mod params;
pub mod xi;

pub use assoc::{assoc_bound, AssocReport};
pub use concentration::{
    alltime_bound, azuma_bound, concentration_report, mbound, tech_inequality, ConcentrationReport,
    TechReport,
};
pub use net::{net_family_size, phi_delta, sample_net, NetFamilySize, NetOutcome};
pub use params::{asymptotic_params, params_with_k, MartingaleParams};
pub use xi::{
    build_xi, check_martingale_step, lambda_of, martingale_step, super_martingale_s, MartingaleTrace, StepCheck,
    SuperMartingaleReport, XiSpec, XiState,
};
