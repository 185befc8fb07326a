#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![doc = include_str!("../README.md")]

extern crate alloc;

pub mod channel;
pub mod convex;
pub mod error;
pub mod linalg;
pub mod mimome;
pub mod misome;
pub mod sdof;

pub use channel::{
    rate_eavesdropper, rate_legitimate, sample_channel, secrecy_rate, AntennaConfig, CovariancePair, Diagnostics,
    SecrecyResult, WiretapChannel,
};
pub use error::{Error, Result};
