//! Photon-counting model of an entanglement-assisted telescope network and
//! the Fisher-information analysis of its phase estimate.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod optimize;
pub mod protocol;
pub mod verify;

pub use error::{Error, Result};
