//! Seeded pseudo-random phase precoder.
//!
//! Frozen generation contract (transmitter, receiver and test fixtures
//! must agree bit-exactly, across platforms and releases):
//!
//! 1. Key a ChaCha8 stream (`rand_chacha::ChaCha8Rng`) with a 32-byte key:
//!    the seed as a little-endian u64 in bytes 0..8, bytes 8..32 zero.
//! 2. For each entry in row-major order draw one `next_u64()` value `v`
//!    and set theta = 2*pi * (v >> 11) / 2^53, i.e. i.i.d. uniform on
//!    [0, 2*pi) with the standard 53-bit mantissa construction.
//! 3. The matrix entry is (1/sqrt(p)) * e^(j*theta), computed in f64 and
//!    converted to the target scalar last.
//!
//! The first eight phases for seed 0 are recorded in
//! `docs/precoder_phases_seed0.txt` and locked by a test.
//!
//! P is square p x p for PRPP and the ablation, rectangular p x (p*n_t)
//! for PRPP-SM. Every entry has magnitude exactly 1/sqrt(p), which is what
//! makes the Frobenius identities below exact rather than statistical.

use crate::linalg::CMat;
use crate::scalar::Real;
use num_complex::Complex;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSeed(pub u64);

/// The precoder matrix P together with the seed that produced it.
#[derive(Clone, Debug)]
pub struct PrecoderMatrix<T> {
    matrix: CMat<T>,
    seed: PhaseSeed,
}

/// Raw phase stream for the given seed: exactly the sequence consumed by
/// [`generate_precoder`], exposed for golden-vector tests.
pub fn phase_stream(seed: PhaseSeed, count: usize) -> Vec<f64> {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.0.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    (0..count)
        .map(|_| std::f64::consts::TAU * ((rng.next_u64() >> 11) as f64) / (1u64 << 53) as f64)
        .collect()
}

/// Builds P: `p` rows, `cols` columns (cols = p for PRPP/ablation,
/// cols = p*n_t for PRPP-SM), entries (1/sqrt(p)) e^(j theta) row-major.
pub fn generate_precoder<T: Real>(p: usize, cols: usize, seed: PhaseSeed) -> PrecoderMatrix<T> {
    assert!(p >= 1 && cols >= 1, "precoder dimensions must be positive");
    let phases = phase_stream(seed, p * cols);
    let amp = 1.0 / (p as f64).sqrt();
    let matrix = CMat::from_fn(p, cols, |r, c| {
        let (im, re) = phases[r * cols + c].sin_cos();
        Complex::new(T::of(amp * re), T::of(amp * im))
    });
    PrecoderMatrix { matrix, seed }
}

impl<T: Real> PrecoderMatrix<T> {
    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn seed(&self) -> PhaseSeed {
        self.seed
    }

    pub fn p(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_square(&self) -> bool {
        self.matrix.rows() == self.matrix.cols()
    }
}

/// G = D * P for the PRPP chain. D is the p*n_r x p (block-)diagonal
/// channel, P square.
pub fn effective_matrix_prpp<T: Real>(d: &CMat<T>, pm: &PrecoderMatrix<T>) -> CMat<T> {
    assert!(pm.is_square(), "PRPP uses the square precoder");
    assert_eq!(d.cols(), pm.p(), "D width must equal p");
    d.matmul(pm.matrix())
}

/// D * A * P * A for the PRPP-SM chain. A is the p*n_t x p activation
/// matrix, P rectangular p x p*n_t.
pub fn effective_matrix_prppsm<T: Real>(
    d: &CMat<T>,
    a: &CMat<T>,
    pm: &PrecoderMatrix<T>,
) -> CMat<T> {
    assert_eq!(d.cols(), a.rows(), "D width must equal p*n_t");
    assert_eq!(pm.cols(), a.rows(), "P width must equal p*n_t");
    assert_eq!(pm.p(), a.cols(), "P height must equal p");
    d.matmul(a).matmul(&pm.matrix().matmul(a))
}

/// D * A * P_square for the ablation in which only the modulation symbols
/// pass through the precoder (transmit vector A * P * x_s).
pub fn effective_matrix_ablation<T: Real>(
    d: &CMat<T>,
    a: &CMat<T>,
    pm: &PrecoderMatrix<T>,
) -> CMat<T> {
    assert!(pm.is_square(), "ablation uses the square precoder");
    assert_eq!(d.cols(), a.rows(), "D width must equal p*n_t");
    assert_eq!(a.cols(), pm.p(), "A width must equal p");
    d.matmul(a).matmul(pm.matrix())
}
