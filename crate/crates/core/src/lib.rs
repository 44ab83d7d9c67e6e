//! Monolithic ALE fluid-structure interaction with resistive immersed
//! valves and the valve attachment force that restores momentum balance.

pub mod bench;
pub mod coupled;
pub mod error;
pub mod fem;
pub mod fluid;
pub mod mesh;
pub mod riis;
pub mod solid;

pub use error::{Error, Result};
