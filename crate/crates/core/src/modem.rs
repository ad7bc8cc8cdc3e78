//! Modulation alphabets, bit mapping and Euclidean demapping.
//!
//! Every alphabet is normalized to unit mean symbol energy so that the
//! noise variance alone fixes the operating SNR. Symbols are stored in
//! bit-label order: the symbol at index `k` carries the bit word `k`
//! (most significant bit first), with Gray structure baked into the
//! geometric placement.

use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetName {
    #[serde(alias = "BPSK")]
    Bpsk,
    #[serde(alias = "QAM4")]
    Qam4,
    #[serde(alias = "QAM8")]
    Qam8,
    #[serde(alias = "QAM16")]
    Qam16,
    #[serde(alias = "PSK8")]
    Psk8,
}

impl AlphabetName {
    pub const ALL: [AlphabetName; 5] = [
        AlphabetName::Bpsk,
        AlphabetName::Qam4,
        AlphabetName::Qam8,
        AlphabetName::Qam16,
        AlphabetName::Psk8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlphabetName::Bpsk => "bpsk",
            AlphabetName::Qam4 => "qam4",
            AlphabetName::Qam8 => "qam8",
            AlphabetName::Qam16 => "qam16",
            AlphabetName::Psk8 => "psk8",
        }
    }
}

impl std::fmt::Display for AlphabetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AlphabetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(AlphabetName::Bpsk),
            "qam4" | "4qam" | "4-qam" => Ok(AlphabetName::Qam4),
            "qam8" | "8qam" | "8-qam" => Ok(AlphabetName::Qam8),
            "qam16" | "16qam" | "16-qam" => Ok(AlphabetName::Qam16),
            "psk8" | "8psk" | "8-psk" => Ok(AlphabetName::Psk8),
            other => Err(format!("unknown alphabet '{other}'")),
        }
    }
}

/// Unit-mean-energy modulation alphabet with Gray bit labels.
#[derive(Clone, Debug)]
pub struct Alphabet<T> {
    name: AlphabetName,
    symbols: Vec<Complex<T>>,
    bits_per_symbol: usize,
}

/// Gray sequence for one axis of a rectangular constellation:
/// amplitude rank -> bit label, so adjacent ranks differ in one bit.
const GRAY4: [usize; 4] = [0b00, 0b01, 0b11, 0b10];

pub fn make_alphabet<T: Real>(name: AlphabetName) -> Alphabet<T> {
    let c = |re: f64, im: f64| Complex::new(T::of(re), T::of(im));
    let mut symbols;
    match name {
        AlphabetName::Bpsk => {
            symbols = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        }
        AlphabetName::Qam4 => {
            // bit 0 -> re sign, bit 1 -> im sign; 0 maps to +
            let s = 0.5f64.sqrt();
            symbols = vec![c(s, s), c(s, -s), c(-s, s), c(-s, -s)];
        }
        AlphabetName::Qam8 => {
            // two rows of four: re in {-3,-1,1,3}, im in {1,-1}, Gray on re,
            // mean energy (2*(9+1+1+9)/8 + 1) = 6 before scaling
            let s = (1.0f64 / 6.0).sqrt();
            symbols = vec![c(0.0, 0.0); 8];
            for (rank, &label) in GRAY4.iter().enumerate() {
                let re = (2.0 * rank as f64 - 3.0) * s;
                symbols[label << 1] = c(re, s);
                symbols[(label << 1) | 1] = c(re, -s);
            }
        }
        AlphabetName::Qam16 => {
            // 4x4 square, Gray per axis, mean energy 10 before scaling
            let s = 0.1f64.sqrt();
            symbols = vec![c(0.0, 0.0); 16];
            for (rr, &rl) in GRAY4.iter().enumerate() {
                for (ir, &il) in GRAY4.iter().enumerate() {
                    let re = (2.0 * rr as f64 - 3.0) * s;
                    let im = (2.0 * ir as f64 - 3.0) * s;
                    symbols[(rl << 2) | il] = c(re, im);
                }
            }
        }
        AlphabetName::Psk8 => {
            // Gray ring: the point at angle 2*pi*m/8 carries label gray(m)
            symbols = vec![c(0.0, 0.0); 8];
            for m in 0..8usize {
                let theta = std::f64::consts::TAU * m as f64 / 8.0;
                symbols[m ^ (m >> 1)] = c(theta.cos(), theta.sin());
            }
        }
    }
    let bits_per_symbol = symbols.len().trailing_zeros() as usize;
    Alphabet {
        name,
        symbols,
        bits_per_symbol,
    }
}

impl<T: Real> Alphabet<T> {
    pub fn name(&self) -> AlphabetName {
        self.name
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn symbols(&self) -> &[Complex<T>] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> Complex<T> {
        self.symbols[index]
    }

    /// Symbol for a bit word, most significant bit first.
    pub fn map_bits(&self, bits: &[u8]) -> Complex<T> {
        self.symbols[bits_to_index(bits, self.bits_per_symbol)]
    }

    /// Nearest symbol in Euclidean distance; exact ties resolve to the
    /// lowest symbol index.
    pub fn demap_symbol(&self, z: Complex<T>) -> (usize, Vec<u8>) {
        let mut best = 0usize;
        let mut best_d = (z - self.symbols[0]).norm_sqr();
        for (k, s) in self.symbols.iter().enumerate().skip(1) {
            let d = (z - *s).norm_sqr();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        (best, index_to_bits(best, self.bits_per_symbol))
    }

    /// Index of the nearest symbol, without materializing bits.
    pub fn demap_index(&self, z: Complex<T>) -> usize {
        self.demap_symbol(z).0
    }
}

/// Most-significant-bit-first bit word to integer.
pub fn bits_to_index(bits: &[u8], width: usize) -> usize {
    assert_eq!(bits.len(), width, "bit word width mismatch");
    bits.iter().fold(0usize, |acc, &b| {
        debug_assert!(b <= 1);
        (acc << 1) | b as usize
    })
}

/// Integer to most-significant-bit-first bit word.
pub fn index_to_bits(index: usize, width: usize) -> Vec<u8> {
    assert!(width == 0 || index < (1 << width), "index out of range");
    (0..width)
        .map(|i| ((index >> (width - 1 - i)) & 1) as u8)
        .collect()
}
