//! Construction of the low-regularity conformal factors: rational interval
//! covers on the line, dyadic ball hierarchies on the cube, and the metric
//! fields they induce.

pub mod cover;
pub mod hierarchy;
pub mod metric;

pub use cover::{
    build_rational_cover, measure_large_theta, rationals, theta1_field, CalkinWilf, CoverScope,
    Interval, RationalCover, ThetaField1D,
};
pub use hierarchy::{
    build_hierarchy, radius_schedule, seminorm_profile_constant, verify_geometric_schedule,
    BallRef, ConditionCheck, EtaProfile, GridKey, LevelSet, RadiusSchedule, SCertificate,
    ScheduleCertificate, SobolevHierarchy, MAX_CENTERS, MAX_DIM,
};
pub use metric::MetricField;
