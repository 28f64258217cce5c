//! Initial meshes with compatible refinement-edge flags.
//!
//! Every preset is a union of axis-aligned squares, each split along a
//! diagonal that is the common refinement edge of its two halves.

use serde::{Deserialize, Serialize};

use super::{Mesh, Vertex};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainPreset {
    /// `(0,1)²`, two triangles.
    Square,
    /// `(-1,1)² \ [0,1)×(-1,0]`, six triangles, reentrant corner at the origin.
    LShape,
    /// `(-1,1)²` cut along `[0,1)×{0}`, eight triangles; the slit carries
    /// two copies of the vertex `(1,0)`.
    Slit,
    /// `(-1,1)²`, eight triangles, all quadrant boundaries are mesh edges.
    CenteredSquare,
    Custom {
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
    },
}

#[rustfmt::skip]
pub fn initial_mesh(preset: &DomainPreset) -> Result<Mesh> {
    let (vertices, triangles): (Vec<[f64; 2]>, Vec<[usize; 3]>) = match preset {
        DomainPreset::Square => (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[2, 0, 1], [0, 2, 3]],
        ),
        DomainPreset::LShape => (
            //     O          E           NE          N           NW
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0],
            //     W            SW            S
                 [-1.0, 0.0], [-1.0, -1.0], [0.0, -1.0]],
            vec![[2, 0, 1], [0, 2, 3], [0, 4, 5], [4, 0, 3], [0, 6, 7], [6, 0, 5]],
        ),
        DomainPreset::Slit => (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0],
                 [-1.0, 0.0], [-1.0, -1.0], [0.0, -1.0], [1.0, -1.0], [1.0, 0.0]],
            vec![
                [2, 0, 1], [0, 2, 3], [0, 4, 5], [4, 0, 3],
                [0, 6, 7], [6, 0, 5], [8, 0, 7], [0, 8, 9],
            ],
        ),
        DomainPreset::CenteredSquare => (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0],
                 [-1.0, 0.0], [-1.0, -1.0], [0.0, -1.0], [1.0, -1.0]],
            vec![
                [2, 0, 1], [0, 2, 3], [0, 4, 5], [4, 0, 3],
                [0, 6, 7], [6, 0, 5], [8, 0, 7], [0, 8, 1],
            ],
        ),
        DomainPreset::Custom {
            vertices,
            triangles,
        } => (vertices.clone(), triangles.clone()),
    };
    Mesh::new(
        vertices.into_iter().map(|[x, y]| Vertex::new(x, y)).collect(),
        triangles,
    )
}
