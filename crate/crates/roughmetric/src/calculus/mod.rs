//! First-order calculus over the rough fields: curves and test plans,
//! metric speeds and slopes as certified brackets, the channel-riding
//! cost profile, band truncation, and weak upper gradients.

pub mod band;
pub mod fb;
pub mod functions;
pub mod plan;
pub mod speed;
pub mod wug;

pub use band::{band_derivative_integral, truncate_band, PiecewiseLinear};
pub use fb::{fb_minimize, fb_minimize_numeric, fb_value, two_segment_cost};
pub use functions::{
    chi_ex3, chi_ex3_deriv, eta_cut, eta_cut_deriv, eta_n, eta_n_deriv, psi_ex2, psi_ex2_deriv,
    TestFunction,
};
pub use plan::{
    make_test_plan, transversal_fraction, ColumnPlanParams, Curve, PlanKind, PlanParams,
    SlabPlanParams, TestPlan,
};
pub use speed::{metric_speed, slope, BracketRow, SlopeBracket, SlopeDirection, SpeedBracket};
pub use wug::{
    beta_ex1, beta_ex3, check_weak_upper_gradient, directional_ratio, minimal_wug_ex2,
    minimal_wug_ex3, RatioFamily, SpeedSource, WugCheck, WugVerdict, WUG_CSV_HEADER,
};
