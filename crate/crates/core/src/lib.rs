pub mod cfg;
pub mod constraints;
pub mod dataflow;
pub mod checkers;
pub mod cli;
pub mod frontend;
pub mod matcher;
pub mod report;
pub mod symexec;
pub mod unit;
