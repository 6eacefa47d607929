pub mod algebra;
pub mod bell;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod formats;
pub mod harness;
pub mod linalg;
pub mod states;
