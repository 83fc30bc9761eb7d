//! Distances induced by the rough metrics: anisotropic lattice shortest
//! paths under mollified weights, direction laws, density moduli, dual
//! lower-bound certificates, and channel-detour upper bounds.

pub mod certificate;
pub mod closed_forms;
pub mod lattice;
pub mod query;
pub mod staircase;
pub mod stencil;

pub use certificate::{best_lower_bound, constant_closed_form, dual_certificate_bound, DualWitness};
pub use closed_forms::{alpha_ex1, alpha_ex3, sigma_ex1, sigma_ex3};
pub use lattice::{edge_weight, segment_weight, shortest_path, Lattice, PathResult};
pub use query::{certified_bracket, distance_estimate, DistanceQuery, Stage, StageResult};
pub use staircase::{staircase_upper_path, ChannelSpec, StaircaseResult};
pub use stencil::{build_stencil, Stencil};
