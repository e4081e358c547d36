//! Exact finite-volume laboratory for quantum double lattice models.
//!
//! The crate builds, for an arbitrary finite gauge group, the full operator
//! calculus of the quantum double model on a finite patch of the oriented
//! triangular lattice: ribbon operators, gauge and flux projectors, Wigner
//! projectors, charge detectors, and amplimorphism maps, together with the
//! constrained string-net bases they act on. Everything is certified
//! numerically: each algebraic identity the constructions rely on ships as a
//! runnable check.

pub mod anyon;
pub mod lab;
pub mod config;
pub mod group;
pub mod lattice;
pub mod ops;
pub mod rep;
pub mod report;
pub mod stringnet;
pub mod suite;

pub use config::{EdgeSpace, GaugeConfig, SparseState};
pub use group::{conjugacy_classes, decompose_qn, Elem, FiniteGroup, Subgroup};
pub use lattice::{Edge, Face, Region, Ribbon, Site, Triangle, Vertex};
pub use lab::Lab;
pub use ops::LinearOp;
pub use rep::{irreps_of, schur_verify, Irrep, QuantumDouble, Sector};
