pub mod exact;
pub mod harness;
pub mod io;
pub mod fuzz;
pub mod cli;
