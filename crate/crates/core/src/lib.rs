//! Large-deviations statistics of the SINR at the output of linear MMSE and
//! zero-forcing MIMO receivers with per-transmitter receive correlation.
//!
//! The analytic path goes scenario → fixed point → [`LdPoint`] → saddle point
//! → pdf / cdf / BER. The [`montecarlo`] module samples the exact channel
//! model and serves as ground truth.
//!
//! ```
//! use sinrld_core::{Scenario, ReceiverMode, LdModel};
//!
//! let sc = Scenario::iid(2, 2.0, &[(1, 1.0)], ReceiverMode::Mmse).unwrap();
//! let model = LdModel::new(&sc).unwrap();
//! let g = model.ergodic_sinr();
//! assert!((model.cdf(g).unwrap() - 0.5).abs() < 1e-12);
//! ```

pub mod distribution;
pub mod error;
pub mod fixed_point;
pub mod ld_stats;
pub mod linalg;
pub mod montecarlo;
pub mod scenario;
pub mod special;
pub mod validation;

pub use distribution::{
    ber, cdf, closed_form_iid_normalized, gaussian_baseline, pdf, pdf_closed_form_iid,
    solve_saddle, solve_special_case, ClosedFormDensity, GaussianBaseline, Modulation,
    SaddleDensity, SaddleResult, SpecialCaseSolution,
};
pub use error::{Error, Result};
pub use fixed_point::{solve_fixed_point, FixedPointSolution};
pub use ld_stats::{
    ergodic_info, ergodic_info_deriv, ergodic_sinr, log_mgf, pi_sigma, second_deriv_v2,
    variance_v1, LdModel, LdPoint, PiSigma,
};
pub use linalg::{C64, CMatrix, CVector};
pub use montecarlo::{
    fit_generalized_gamma, mmse_sinr, run_mc, sample_channel, sample_delta_i, zf_sinr,
    BerEstimate, ChannelSampler, GenGammaFit, Histogram, McConfig, McSummary,
};
pub use scenario::{
    build_correlation, validate_scenario, CorrelationSpec, InterfererBlock, ReceiverMode,
    Scenario, ValidationOptions,
};
