//! Spatial modulation codec: activation patterns, the A matrix, and the
//! bits <-> frame mapping.
//!
//! Conventions (frozen for reproducibility):
//! - antennas are 0-indexed internally; antenna bits are natural binary,
//!   most significant bit first;
//! - each channel use contributes its antenna bits followed by its symbol
//!   bits, channel uses concatenated in order;
//! - `n_t` is restricted to powers of two so every antenna-bit word is used.
//!
//! With `n_t = 1` the antenna layer carries zero bits and the codec
//! degenerates to plain modulation, which is how the PRPP baseline shares
//! this code path.

use crate::linalg::CMat;
use crate::modem::{self, Alphabet};
use crate::scalar::Real;
use num_complex::Complex;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SmConfigError {
    #[error("n_t must be a power of two, got {0}")]
    BadAntennaCount(usize),
    #[error("p must be at least 1")]
    BadUses,
}

/// Static description of one SM link: antenna count, channel uses per
/// frame, modulation alphabet.
#[derive(Clone, Debug)]
pub struct SmConfig<T> {
    n_t: usize,
    p: usize,
    alphabet: Alphabet<T>,
}

impl<T: Real> SmConfig<T> {
    pub fn new(n_t: usize, p: usize, alphabet: Alphabet<T>) -> Result<Self, SmConfigError> {
        if n_t == 0 || !n_t.is_power_of_two() {
            return Err(SmConfigError::BadAntennaCount(n_t));
        }
        if p == 0 {
            return Err(SmConfigError::BadUses);
        }
        Ok(Self { n_t, p, alphabet })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn alphabet(&self) -> &Alphabet<T> {
        &self.alphabet
    }

    pub fn antenna_bits(&self) -> usize {
        self.n_t.trailing_zeros() as usize
    }

    /// Bits per channel use: antenna index bits plus symbol bits.
    pub fn bpcu(&self) -> usize {
        self.antenna_bits() + self.alphabet.bits_per_symbol()
    }

    pub fn bits_per_frame(&self) -> usize {
        self.p * self.bpcu()
    }

    /// Same link, one channel use; used for per-use SM detection.
    pub fn single_use(&self) -> Self {
        Self {
            n_t: self.n_t,
            p: 1,
            alphabet: self.alphabet.clone(),
        }
    }
}

/// Active antenna per channel use; entry `i` is the 0-based antenna
/// transmitting in use `i`. Encodes the p*n_t x p activation matrix A.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivationPattern(pub Vec<usize>);

impl ActivationPattern {
    pub fn antennas(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices of the non-zero rows of A (the support): use `i` active on
    /// antenna `j` occupies row `i*n_t + j`.
    pub fn support_rows(&self, n_t: usize) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &j)| i * n_t + j)
            .collect()
    }
}

/// One SM frame: the activation pattern plus one alphabet symbol index per
/// channel use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmFrame {
    pub pattern: ActivationPattern,
    pub symbols: Vec<usize>,
}

impl SmFrame {
    pub fn new(antennas: Vec<usize>, symbols: Vec<usize>) -> Self {
        assert_eq!(
            antennas.len(),
            symbols.len(),
            "pattern/symbol length mismatch"
        );
        Self {
            pattern: ActivationPattern(antennas),
            symbols,
        }
    }

    pub fn p(&self) -> usize {
        self.symbols.len()
    }

    /// Complex symbol values in use order.
    pub fn symbol_values<T: Real>(&self, alphabet: &Alphabet<T>) -> Vec<Complex<T>> {
        self.symbols.iter().map(|&k| alphabet.symbol(k)).collect()
    }
}

/// Dense p*n_t x p activation matrix: column `i` has a single 1 at row
/// `i*n_t + j_i`.
pub fn build_activation_matrix<T: Real>(cfg: &SmConfig<T>, pat: &ActivationPattern) -> CMat<T> {
    assert_eq!(pat.len(), cfg.p(), "pattern length must equal p");
    let one = Complex::new(T::one(), T::zero());
    let mut a = CMat::zeros(cfg.p() * cfg.n_t(), cfg.p());
    for (i, &j) in pat.antennas().iter().enumerate() {
        assert!(j < cfg.n_t(), "antenna index out of range");
        a[(i * cfg.n_t() + j, i)] = one;
    }
    a
}

/// A * v without materializing A: spreads the per-use entries of `v` onto
/// their active antenna slots.
pub fn apply_pattern<T: Real>(
    cfg: &SmConfig<T>,
    pat: &ActivationPattern,
    v: &[Complex<T>],
) -> Vec<Complex<T>> {
    assert_eq!(v.len(), cfg.p(), "input length must equal p");
    assert_eq!(pat.len(), cfg.p());
    let mut out = vec![Complex::new(T::zero(), T::zero()); cfg.p() * cfg.n_t()];
    for (i, (&j, &x)) in pat.antennas().iter().zip(v).enumerate() {
        assert!(j < cfg.n_t());
        out[i * cfg.n_t() + j] = x;
    }
    out
}

/// Splits a frame's worth of bits into (antenna, symbol) indices per use.
pub fn bits_to_frame<T: Real>(cfg: &SmConfig<T>, bits: &[u8]) -> SmFrame {
    assert_eq!(bits.len(), cfg.bits_per_frame(), "bit count mismatch");
    let ab = cfg.antenna_bits();
    let sb = cfg.alphabet().bits_per_symbol();
    let mut antennas = Vec::with_capacity(cfg.p());
    let mut symbols = Vec::with_capacity(cfg.p());
    for chunk in bits.chunks_exact(ab + sb) {
        antennas.push(modem::bits_to_index(&chunk[..ab], ab));
        symbols.push(modem::bits_to_index(&chunk[ab..], sb));
    }
    SmFrame::new(antennas, symbols)
}

pub fn frame_to_bits<T: Real>(cfg: &SmConfig<T>, frame: &SmFrame) -> Vec<u8> {
    assert_eq!(frame.p(), cfg.p(), "frame length mismatch");
    let ab = cfg.antenna_bits();
    let sb = cfg.alphabet().bits_per_symbol();
    let mut bits = Vec::with_capacity(cfg.bits_per_frame());
    for (&j, &k) in frame.pattern.antennas().iter().zip(&frame.symbols) {
        bits.extend(modem::index_to_bits(j, ab));
        bits.extend(modem::index_to_bits(k, sb));
    }
    bits
}

/// All single-use SM transmit vectors (length n_t, one non-zero entry),
/// enumerated antenna-major then symbol: the signal set of a single
/// channel use.
pub fn enumerate_sm_set<T: Real>(cfg: &SmConfig<T>) -> Vec<Vec<Complex<T>>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut set = Vec::with_capacity(cfg.n_t() * cfg.alphabet().size());
    for j in 0..cfg.n_t() {
        for k in 0..cfg.alphabet().size() {
            let mut v = vec![zero; cfg.n_t()];
            v[j] = cfg.alphabet().symbol(k);
            set.push(v);
        }
    }
    set
}
