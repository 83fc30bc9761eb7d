//! Cheeger energies over labeled regions, the parallelogram deficit, and
//! the verdicts and reports built on them.
//!
//! The deficit `Ch(f₃) + Ch(f₄) - 2Ch(f₁) - 2Ch(f₂)` of a quadruple with
//! `f₃ = f₁ + f₂`, `f₄ = f₁ - f₂` vanishes whenever the energy is
//! quadratic. Over the channel and hierarchy fields the minimal weak upper
//! gradients break the parallelogram law on a set of positive measure, and
//! the deficit computed from exact region decompositions certifies it.

pub mod energy;
pub mod ex3;
pub mod region;
pub mod report;

pub use energy::{
    cheeger_energy, energy_over, ex2_decomposition, ex3_decomposition, hilbertian_verdict,
    parallelogram_deficit, Energy, Verdict, WugEvaluator,
};
pub use ex3::Ex3Parts;
pub use region::{volume, Measured, Region};
pub use report::{
    ex2_report, ex3_deficit_series, ex3_report, CheegerReport, ReportNumber, CHEEGER_CSV_HEADER,
    REPORT_SCHEMA,
};
