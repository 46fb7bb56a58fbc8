//! Online hitting sets for unit balls and unit hypercubes using integer
//! points: exact geometry, filter lattices, the online algorithms, adaptive
//! lower-bound games, an exact offline optimum and the hypercube
//! equivalence-class machinery.

pub mod adversary;
pub mod filters;
pub mod geometry;
pub mod harness;
pub mod online;
pub mod par;
pub mod sampling;
pub mod equivalence;
pub mod oracle;
