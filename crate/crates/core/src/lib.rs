pub mod baselines;
pub mod cli;
pub mod colexifier;
pub mod combine;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod node2vec;
pub mod numerics;
pub mod prone;
pub mod tsv;
pub mod viz;
