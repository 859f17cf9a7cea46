//! Searching for, verifying and classifying fiducial vectors of
//! Weyl-Heisenberg covariant SIC-POVMs.
//!
//! The library is organised around a [`whgroup::DimensionContext`] that fixes
//! the dimension and the associated phase conventions. On top of it sit the
//! displacement operators ([`whgroup`]), the extended Clifford group and its
//! symmetries ([`clifford`]), numerical fiducial search ([`search`]),
//! verification and orbit classification ([`analysis`]), entanglement
//! structure in composite dimensions ([`schmidt`]) and plain-text persistence
//! ([`store`]).

pub mod analysis;
pub mod clifford;
pub mod error;
pub mod linalg;
pub mod schmidt;
pub mod search;
pub mod store;
pub mod whgroup;

pub use error::{Result, SicError};
