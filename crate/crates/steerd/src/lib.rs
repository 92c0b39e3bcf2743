//! Live steering service: one simulation per process, driven over a
//! WebSocket.

pub mod protocol;
pub mod server;
pub mod session;
