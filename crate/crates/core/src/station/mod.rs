//! Ground-station store and request handling.

pub mod api;
pub mod store;
