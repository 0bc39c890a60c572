//! Simulation of networks of threshold-type memristive devices that solve
//! shortest-path problems by self-organization, repair damaged solutions,
//! and run a random-pulse traveling salesman procedure.
//!
//! The crate is organized bottom-up:
//!
//! * [`device`]: single devices and the anti-parallel basic unit,
//! * [`topology`]: grid and random networks, damage, reduced networks,
//! * [`circuit`]: Kirchhoff solve for fixed source potentials,
//! * [`dynamics`]: pulse integration and steady-state detection,
//! * [`algorithms`]: shortest path, healing, post-processing and TSP,
//! * [`analysis`]: network entropy and switching-rate traces,
//! * [`oracle`]: classical reference solvers,
//! * [`scenario`]: scenario config files and artifact export,
//! * [`render`]: SVG drawings of states and current maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod analysis;
pub mod circuit;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod render;
pub mod scenario;
pub mod topology;

pub use error::{Error, Result};
