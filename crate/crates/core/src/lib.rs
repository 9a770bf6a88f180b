//! Simulation core for a wave and solar powered tethered surface vehicle.

pub mod comms;
pub mod foil;
pub mod geo;
pub mod guidance;
pub mod harness;
pub mod power;
pub mod scenario;
pub mod sensors;
pub mod station;
pub mod vehicle;
pub mod wave;
