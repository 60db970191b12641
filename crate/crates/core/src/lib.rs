pub mod cli;
pub mod clifford;
pub mod codes;
pub mod dense;
pub mod estimator;
pub mod experiments;
pub mod gf2;
pub mod noise;
pub mod pauli;
pub mod shadow;
pub mod tableau;
pub mod trace;
