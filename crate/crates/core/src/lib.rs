//! Explicit families of vortex-type metrics on a cylinder and their evolution.

pub mod cli;
pub mod error;
pub mod families;
pub mod flow;
pub mod geometry;
pub mod params;
pub mod verify;

pub use error::{Error, Result};
