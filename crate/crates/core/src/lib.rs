pub mod cli;
pub mod control;
pub mod dynamic;
pub mod execute;
pub mod fixtures;
pub mod gen;
pub mod io;
pub mod oracle;
pub mod preference;
pub mod stp;
pub mod stpu;
