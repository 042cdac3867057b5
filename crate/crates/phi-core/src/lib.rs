pub mod depletion;
pub mod fixpoint;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod oml;
pub mod samples;
pub mod spectral;
