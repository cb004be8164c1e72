//! Noise-induced exit from a stable periodic orbit through an unstable one.
//!
//! The crate pairs closed-form cycling theory ([`theory`]), the large-deviation
//! minimiser ([`ldp`]), Euler-Maruyama and splitting simulation ([`sim`]) and
//! Poincaré-kernel spectra ([`kernel`]) for planar models written in polar
//! coordinates ([`model`]). [`experiments`] wires them into reproducible runs
//! driven by TOML configurations.

pub mod error;
pub mod experiments;
pub mod kernel;
pub mod ldp;
pub mod model;
pub mod numerics;
pub mod sim;
pub mod theory;

pub use error::{Error, Result};
