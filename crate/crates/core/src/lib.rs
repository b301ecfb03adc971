pub mod error;
pub mod qcore;
pub mod convex;
pub mod channels;
pub mod inference;
pub mod harness;
pub mod schemes;
