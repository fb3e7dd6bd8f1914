pub mod agents;
pub mod eval;
pub mod experiment;
pub mod market;
pub mod mdp;
pub mod neural;
pub mod rng;
