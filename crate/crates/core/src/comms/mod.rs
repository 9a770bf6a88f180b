//! Wire codec, links, uplink policy and the onboard logbook.

pub mod codec;
pub mod logbook;
pub mod rf;
pub mod sat;
pub mod uplink;
