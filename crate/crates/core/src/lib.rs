//! Simulation and measurement of spatial out-of-band radiation from large
//! antenna arrays whose per-antenna front ends are nonlinear.
//!
//! The signal chain is: [`waveform`] symbols and pulse shaping, [`precode`]
//! maximum-ratio precoding over a [`channel`] model, the [`frontend`]
//! nonlinearity, and [`analysis`] of the radiated or received spectrum.
//! [`experiments`] binds these into the runners behind the `oobsim` CLI.

pub mod analysis;
pub mod channel;
pub mod dsp;
pub mod error;
pub mod experiments;
pub mod frontend;
pub mod geometry;
pub mod precode;
pub mod seed;
pub mod waveform;

pub use error::{Error, Result};
pub use seed::RngSeed;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signals.md")]
    mod signals {}
    #[doc = include_str!("../../../book/src/frontend.md")]
    mod frontend {}
    #[doc = include_str!("../../../book/src/precoding.md")]
    mod precoding {}
    #[doc = include_str!("../../../book/src/radiation.md")]
    mod radiation {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
