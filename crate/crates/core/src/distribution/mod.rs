//! Saddle-point inversion and the distribution functions built on it.

mod baseline;
mod ber;
mod density;
mod normalized;
mod saddle;
mod special_case;

pub use baseline::{gaussian_baseline, GaussianBaseline};
pub use ber::{ber, Modulation};
pub use density::{cdf, pdf, pdf_db_from_linear};
pub use normalized::SaddleDensity;
pub use saddle::{solve_saddle, SaddleResult, MAX_ITER, REL_TOLERANCE, S_MAX};
pub use special_case::{
    closed_form_iid_normalized, pdf_closed_form_iid, solve_special_case, ClosedFormDensity,
    SpecialCaseSolution,
};
