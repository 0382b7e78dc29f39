//! Session protocol, server and acceptance checks over the sequential
//! algorithms engine and the Böhm-tree lab.

pub mod config;
pub mod server;
pub mod session;
pub mod verify;
