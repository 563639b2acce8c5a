pub mod exec;
pub mod netlist;
pub mod poly;
pub mod aig;
pub mod atree;
pub mod spectrum;
pub mod rewrite;
pub mod pipeline;
pub mod genbench;
