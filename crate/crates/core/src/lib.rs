//! Simulation, training and verification of equivariant quantum graph
//! circuits.

pub mod complexla;
pub mod graphs;
pub mod simulator;
pub mod layers;
pub mod zxparity;
pub mod eqspace;
pub mod mpnnsim;
pub mod training;
pub mod report;
pub mod sampling;
