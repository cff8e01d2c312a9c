pub mod cli;
pub mod features;
pub mod graph_ir;
pub mod instances;
pub mod mcts;
pub mod rewrite;
pub mod solve;
pub mod spec_lang;
