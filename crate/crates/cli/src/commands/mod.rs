pub mod bell;
pub mod ensemble;
pub mod eraser;
pub mod inequality;
pub mod wigner;
