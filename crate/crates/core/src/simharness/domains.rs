use serde::{Deserialize, Serialize};

use super::Result;
use crate::netgen::{grid_domain, museum_domain, torus, Domain, DomainSpec, GroundTruth, Museum, MuseumSpec};
use crate::surface::CombinatorialSurface;

/// Where a mesh comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSource {
    /// Rectangular holes on a near-square grid of cells.
    Scattered {
        holes: usize,
        nodes: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Holes side by side in a 2:1 domain.
    HolesInRow {
        holes: usize,
        nodes: usize,
        #[serde(default)]
        seed: u64,
    },
    Grid { spec: DomainSpec },
    Museum {
        #[serde(default)]
        spec: MuseumSpec,
    },
    Torus {
        nx: usize,
        ny: usize,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub enum Generated {
    Grid(Domain),
    Museum(Box<Museum>),
    Torus(CombinatorialSurface),
}

impl Generated {
    pub fn surface(&self) -> &CombinatorialSurface {
        match self {
            Generated::Grid(d) => &d.surface,
            Generated::Museum(m) => &m.surface,
            Generated::Torus(s) => s,
        }
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        match self {
            Generated::Grid(d) => Some(&d.truth),
            Generated::Museum(m) => Some(&m.truth),
            Generated::Torus(_) => None,
        }
    }
}

impl DomainSource {
    pub fn build(&self) -> Result<Generated> {
        Ok(match self {
            DomainSource::Scattered { holes, nodes, seed } => {
                Generated::Grid(grid_domain(&DomainSpec::scattered(*holes, *nodes, *seed))?)
            }
            DomainSource::HolesInRow { holes, nodes, seed } => {
                Generated::Grid(grid_domain(&DomainSpec::holes_in_row(*holes, *nodes, *seed))?)
            }
            DomainSource::Grid { spec } => Generated::Grid(grid_domain(spec)?),
            DomainSource::Museum { spec } => Generated::Museum(Box::new(museum_domain(spec)?)),
            DomainSource::Torus { nx, ny, seed } => Generated::Torus(torus(*nx, *ny, *seed)?),
        })
    }
}
