pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod pauli;
pub mod problems;
pub mod tensor;
pub mod trainer;
