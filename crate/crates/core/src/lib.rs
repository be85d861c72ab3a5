//! Monte Carlo laboratory for bond percolation on the square lattice with
//! randomly enhanced vertical columns.
//!
//! Edges of `Z^2` are open independently, with probability `p` on vertical
//! edges whose column lies in a random set `Lambda` and `q` everywhere else;
//! `Lambda` contains each column independently with probability `rho`.
//! The crate provides the samplers, connectivity engine and event detectors
//! for this model, near-critical estimators, the block renormalization onto
//! oriented site percolation, and a simulator of oriented percolation with
//! good and bad columns.

pub mod connectivity;
pub mod error;
pub mod events;
pub mod lattice;
pub mod nearcritical;
pub mod oracles;
pub mod oriented;
pub mod renorm;
pub mod sampling;

pub use connectivity::{build_clusters, two_vertex_disjoint_paths, ClusterLabeling, DisjointSet};
pub use error::{Error, Result};
pub use events::{Axis, EventSpec};
pub use lattice::{ColumnSet, Edge, EdgeClass, Rect, Site};
pub use nearcritical::{ColumnSource, EstimateRecord, Proportion};
pub use oriented::{OrientedConfig, OrientedParams, OrientedWindow};
pub use renorm::{BlockField, BlockWindow};
pub use sampling::{BondConfig, RandomStream, SamplerParams};
