//! Simulation core for a hybrid LTE-satellite public-safety network.
//!
//! Two engines share this crate:
//!
//! * a link-level Monte Carlo engine that estimates bit error rate versus
//!   Eb/N0 for a three-slot two-way relay exchange (direct path,
//!   amplify-and-forward, decode-and-forward with network coding) over
//!   AWGN, Rayleigh block-fading and Rician channels, and
//! * a time-stepped scenario engine that tracks user connectivity and
//!   bearer allocation around a deployable base station (MEOC) while the
//!   terrestrial network degrades or fails.
//!
//! Everything is deterministic for a fixed seed. Monte Carlo work is
//! chunked and each chunk derives its own random stream, so sweep output
//! does not depend on how many workers run the chunks. The `parallel`
//! feature (default on) fans chunks out with rayon; without it the same
//! chunks run sequentially and produce identical results.

pub mod channel;
pub mod error;
pub mod phy;
pub mod relay;
pub mod scenario;
pub mod stream;
pub mod sweep;

pub use error::{Result, SimError};
