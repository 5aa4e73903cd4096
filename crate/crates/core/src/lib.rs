//! Simulation of a collision-based mass-measurement oracle and the
//! measurement procedures that drive it.

pub mod advice;
pub mod dyadic;
pub mod expr;
pub mod harness;
pub mod mass;
pub mod notation;
pub mod oracle;
pub mod physics;
pub mod procedures;
pub mod report;
pub mod schedule;
pub mod time;
