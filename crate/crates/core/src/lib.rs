//! Quantum Fisher information of passive non-Hermitian scattering sensors.
//!
//! [`model`] builds the effective Hamiltonian, [`spectral`] splits it into
//! Kato clusters and bounds the response, and [`qfi`] evaluates the Fisher
//! information of the scattered light.

pub mod model;
pub mod numerics;
pub mod spectral;
pub mod qfi;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/qfi.md")]
    mod qfi {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
