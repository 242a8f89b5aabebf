pub mod cli;
pub mod error;
pub mod geometric;
pub mod linalg;
pub mod partovi;
pub mod schmidt;
pub mod state;
