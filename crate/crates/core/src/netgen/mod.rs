//! Test domains with known topology (jittered grids with holes, museum floor
//! plans, multi-floor museums, tori) and synthetic trajectories on them.

mod grid;
mod museum;
mod paths;

use thiserror::Error;

use crate::surface::SurfaceError;

pub use grid::{grid_domain, torus, Domain, DomainSpec, GroundTruth, HoleShape, Rect};
pub use museum::{museum_domain, museum_trajectories, Museum, MuseumSpec, RoomGraph, RoomWalk};
pub use paths::{classed_paths, side_signature, waypoint_cycle, waypoint_path, ClassedPath, SideSignature};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetgenError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("hole {index} is too small to remove any face")]
    HoleTooSmall { index: usize },
    #[error("hole {index} reaches the outer border")]
    HoleTouchesBorder { index: usize },
    #[error("holes {a} and {b} overlap or touch")]
    HolesTooClose { a: usize, b: usize },
    #[error("room {room} has no door")]
    NoDoor { room: usize },
    #[error("no room path from the entrance to the exit")]
    Unreachable,
    #[error("no nodes available for {0}")]
    NoCandidates(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("geometry: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, NetgenError>;

impl From<crate::oracle::OracleError> for NetgenError {
    fn from(e: crate::oracle::OracleError) -> Self {
        NetgenError::Geometry(e.to_string())
    }
}

#[cfg(test)]
mod tests;
