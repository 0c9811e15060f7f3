//! Minimal factorizations of the long cycle `(1 2 ... n)`: exhaustive
//! enumeration, the bijections with labelled laminations and labelled
//! bi-type trees, Boltzmann sampling through two-type Galton-Watson trees,
//! and the lamination-valued processes they drive.

pub mod bijection;
pub mod lamination;
pub mod perm;
pub mod processes;
pub mod sampling;
pub mod stats;
pub mod svg;
pub mod trees;

pub const SCHEMA_FACTORIZATION: &str = "minfact/factorization/v1";
pub const SCHEMA_TREE: &str = "minfact/tree/v1";
pub const SCHEMA_LAMINATION: &str = "minfact/lamination/v1";
pub const SCHEMA_FRAMES: &str = "minfact/frames/v1";
