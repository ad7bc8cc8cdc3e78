//! Block-fading channel: per-use Rayleigh blocks, the block-diagonal D,
//! AWGN injection and the SNR convention.
//!
//! SNR convention: alphabets have unit mean energy and the precoder
//! preserves transmit energy, so average received SNR per receive antenna
//! is 1/sigma2 and `sigma2 = 10^(-snr_db/10)`. Noise is circularly
//! symmetric complex Gaussian, real and imaginary parts N(0, sigma2/2).
//!
//! All draws happen in f64 from the caller-provided stream and convert to
//! the target scalar once, so f32 and f64 runs consume identical
//! randomness.

use crate::linalg::CMat;
use crate::scalar::Real;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Fading model: i.i.d. Rayleigh per entry, or fixed unit gains (an AWGN
/// debug reference, h = 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    #[default]
    Rayleigh,
    Awgn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub p: usize,
    /// Average SNR per receive antenna, dB.
    pub snr_db: f64,
    pub fading: Fading,
}

impl ChannelConfig {
    pub fn sigma2(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }
}

/// One frame's channel: p fading blocks H_(i) of size n_r x n_t, plus the
/// noise variance. The detector receives this object unchanged
/// (perfect CSI).
#[derive(Clone, Debug)]
pub struct ChannelRealization<T> {
    blocks: Vec<CMat<T>>,
    sigma2: T,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(blocks: Vec<CMat<T>>, sigma2: T) -> Self {
        assert!(!blocks.is_empty(), "need at least one block");
        assert!(sigma2 > T::zero(), "sigma2 must be positive");
        let (n_r, n_t) = (blocks[0].rows(), blocks[0].cols());
        assert!(
            blocks.iter().all(|b| b.rows() == n_r && b.cols() == n_t),
            "all blocks must share one shape"
        );
        Self { blocks, sigma2 }
    }

    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_r(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn n_t(&self) -> usize {
        self.blocks[0].cols()
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn block(&self, i: usize) -> &CMat<T> {
        &self.blocks[i]
    }

    /// Single-use view for per-use SM detection.
    pub fn single_use(&self, i: usize) -> Self {
        Self {
            blocks: vec![self.blocks[i].clone()],
            sigma2: self.sigma2,
        }
    }
}

/// One CN(0,1) draw: real and imaginary parts independent N(0, 1/2).
fn unit_gaussian<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    let scale = 0.5f64.sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::of(re * scale), T::of(im * scale))
}

/// Draws one frame's fading blocks from the given stream.
pub fn draw_channel<T: Real>(cfg: &ChannelConfig, rng: &mut impl Rng) -> ChannelRealization<T> {
    assert!(cfg.n_t > 0 && cfg.n_r > 0 && cfg.p > 0);
    assert!(cfg.snr_db.is_finite());
    let one = Complex::new(T::one(), T::zero());
    let blocks = (0..cfg.p)
        .map(|_| match cfg.fading {
            Fading::Rayleigh => CMat::from_fn(cfg.n_r, cfg.n_t, |_, _| unit_gaussian(rng)),
            Fading::Awgn => CMat::from_fn(cfg.n_r, cfg.n_t, |_, _| one),
        })
        .collect();
    ChannelRealization::new(blocks, T::of(cfg.sigma2()))
}

/// Dense p*n_r x p*n_t block-diagonal D = diag(H_(1) .. H_(p)).
pub fn assemble_d<T: Real>(r: &ChannelRealization<T>) -> CMat<T> {
    let (p, n_r, n_t) = (r.p(), r.n_r(), r.n_t());
    let mut d = CMat::zeros(p * n_r, p * n_t);
    for i in 0..p {
        let b = r.block(i);
        for rr in 0..n_r {
            for cc in 0..n_t {
                d[(i * n_r + rr, i * n_t + cc)] = b[(rr, cc)];
            }
        }
    }
    d
}

/// Adds i.i.d. CN(0, sigma2) noise in place.
pub fn add_noise<T: Real>(y: &mut [Complex<T>], sigma2: T, rng: &mut impl Rng) {
    let scale = (sigma2.to64() / 2.0).sqrt();
    for v in y.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex::new(T::of(re * scale), T::of(im * scale));
    }
}

/// y = effective * x + n.
pub fn transmit<T: Real>(
    r: &ChannelRealization<T>,
    effective: &CMat<T>,
    x: &[Complex<T>],
    rng: &mut impl Rng,
) -> Vec<Complex<T>> {
    assert_eq!(effective.cols(), x.len(), "dimension mismatch");
    let mut y = effective.matvec(x);
    add_noise(&mut y, r.sigma2(), rng);
    y
}
