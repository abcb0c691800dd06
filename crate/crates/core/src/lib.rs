//! Voxel-based soft robots with parameter-shared, communication-less local
//! self-attention controllers, evolved for locomotion on hilly terrain.

pub mod controller;
pub mod episode;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod morphology;
pub mod physics;
pub mod plan;
pub mod record;
pub mod rng;
pub mod sensing;
pub mod stats;
pub mod terrain;

pub use error::{Error, Result};
