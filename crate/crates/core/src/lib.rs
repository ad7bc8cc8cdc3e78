//! Link-level simulation of pseudo-random phase precoded spatial modulation
//! (PRPP-SM) over block-fading MIMO channels.
//!
//! The library covers the whole chain: bit mapping ([`modem`], [`sm`]),
//! phase precoding ([`precoder`]), channel and noise ([`channel`]),
//! detection ([`detect`]) and the Monte Carlo BER harness ([`sim`]).
//! Everything numeric is generic over the scalar type through [`Real`];
//! the harness and the `prppsm` binary pin `f64`.
//!
//! Reproducibility contract: every random draw derives from explicit seeds
//! (see [`streams`] and [`precoder`]), so a sweep produces bit-identical
//! results across reruns and worker counts.

pub mod channel;
pub mod detect;
pub mod io;
pub mod linalg;
pub mod modem;
pub mod precoder;
pub mod presets;
mod scalar;
pub mod sim;
pub mod sm;
pub mod streams;

pub use num_complex::Complex;
pub use scalar::Real;

/// Scalar used by the harness, the presets and the CLI.
pub type Scalar = f64;
/// Complex sample in harness precision.
pub type Cx = Complex<Scalar>;
/// Dense complex matrix in harness precision.
pub type Mat = linalg::CMat<Scalar>;
