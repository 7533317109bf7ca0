//! Exact calculus of hoops, faces and flux operators over a combinatorial
//! segment complex.
//!
//! The crate models the configuration side of an abelian connection theory
//! by integer chains of oriented segments, and the momentum side by faces
//! known only through their crossing tables. On top of that it builds
//! cylindrical functions (exact polynomials on reduced configuration
//! spaces), finite physical systems with their directing relation, and the
//! maximal-tree gauge reduction that turns graph systems into loop systems.
//!
//! Every quantity is an exact rational; nothing here uses floating point
//! except explicit numeric sanity helpers.

pub mod cyl;
pub mod fixtures;
pub mod flux;
pub mod gauge;
pub mod hoop;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod scene_file;
pub mod substrate;
pub mod systems;

pub use hoop::{chain_of, Chain, Hoop, HoopSet};
pub use rational::{HalfInt, Rational};
pub use substrate::{Face, FaceId, Loop, Path, Scene, SegmentId, VertexId};
