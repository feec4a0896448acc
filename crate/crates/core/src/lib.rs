pub mod error;
pub mod krein;
pub mod linalg;
pub mod schur;
pub mod subspace;
pub mod lsq;
pub mod jtrace;
pub mod harness;
