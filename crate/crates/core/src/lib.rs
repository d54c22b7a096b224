//! Geometry of metrical multi-time Lagrange spaces on the 1-jet bundle `J¹(T,M)`.

pub mod expr;
pub mod jet;
pub mod linalg;
pub mod scenario;
pub mod table;
pub mod cli;
pub mod connection;
pub mod frame;
pub mod curvature;
pub mod fieldtheory;
pub mod lagrangian;
pub mod report;
pub mod sampling;
