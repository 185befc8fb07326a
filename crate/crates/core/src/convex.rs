//! Convex subproblem solvers: a linear SDP interior-point method with a small
//! modeling layer, and projected gradient ascent for log-det objectives.

pub mod ipm;
pub mod logdet;
pub mod sdp;

pub use logdet::{solve_logdet_max, LogDetProblem, LogDetSettings, LogDetSolution, LogDetTerm};
pub use sdp::{solve_sdp, HermExpr, HermVar, LinExpr, ScalarVar, SdpProblem, SdpSolution, SdpStatus};
