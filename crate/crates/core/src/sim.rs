//! Monte Carlo BER harness: scenario configuration, single-frame simulation,
//! SNR sweeps with a deterministic stopping rule, and gap measurement
//! between curves.
//!
//! Determinism contract: every random draw comes from a substream keyed by
//! (master_seed, snr_index, trial_index, purpose), and trials are reduced in
//! trial order, so a sweep produces bit-identical points for any worker
//! count. The harness is pinned to f64.

use crate::channel::{add_noise, draw_channel, ChannelConfig, Fading};
use crate::detect::{
    detect_lsd, detect_ml, detect_sm_per_use, detect_symbol_flip, hypothesis_count, mmse_initial,
    DetectError, DetectionResult, LinkModel, ModelKind, ML_DEFAULT_CAP,
};
use crate::modem::{make_alphabet, AlphabetName};
use crate::precoder::{generate_precoder, PhaseSeed, PrecoderMatrix};
use crate::sm::{bits_to_frame, frame_to_bits, SmConfig, SmConfigError, SmFrame};
use crate::streams::{derived_seed, trial_rng, Purpose};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Plain spatial modulation, p independent single-use transmissions.
    Sm,
    /// Phase precoding without SM (n_t = 1): y = D P s + n.
    Prpp,
    /// The combined scheme: y = D A P A x_s + n.
    PrppSm,
    /// Footnote ablation: square precoder past the activation, y = D A P x_s + n.
    PrppSmAblation,
}

impl Scheme {
    pub fn uses_precoder(self) -> bool {
        !matches!(self, Scheme::Sm)
    }

    pub fn model_kind(self) -> ModelKind {
        match self {
            Scheme::Sm => ModelKind::Sm,
            // PRPP is PRPP-SM at n_t = 1: the rectangle degenerates to p x p
            Scheme::Prpp | Scheme::PrppSm => ModelKind::PrppSm,
            Scheme::PrppSmAblation => ModelKind::Ablation,
        }
    }

    fn precoder_cols(self, n_t: usize, p: usize) -> usize {
        match self {
            Scheme::Sm => 0,
            Scheme::Prpp | Scheme::PrppSm => p * n_t,
            Scheme::PrppSmAblation => p,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Sm => "sm",
            Scheme::Prpp => "prpp",
            Scheme::PrppSm => "prpp_sm",
            Scheme::PrppSmAblation => "prpp_sm_ablation",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorName {
    Ml,
    Lsd,
    SymbolFlipLas,
    MmseOnly,
}

impl fmt::Display for DetectorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorName::Ml => "ml",
            DetectorName::Lsd => "lsd",
            DetectorName::SymbolFlipLas => "symbol_flip_las",
            DetectorName::MmseOnly => "mmse_only",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LsdInit {
    #[default]
    Mmse,
    Random,
    /// Genie start from the transmitted frame; debugging only.
    Truth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmSection {
    pub n_t: usize,
    pub p: usize,
    pub alphabet: AlphabetName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub n_r: usize,
    #[serde(default)]
    pub fading: Fading,
}

fn default_ml_cap() -> u64 {
    ML_DEFAULT_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub name: DetectorName,
    #[serde(default)]
    pub lsd_init: LsdInit,
    #[serde(default = "default_ml_cap")]
    pub ml_max_hypotheses: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stopping {
    pub min_bit_errors: u64,
    pub max_frames: u64,
}

/// One simulation experiment: scheme, dimensions, detector, SNR grid,
/// stopping rule and seeds. Deserializes from a TOML file, one scenario
/// per file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scheme: Scheme,
    pub sm: SmSection,
    pub channel: ChannelSection,
    pub detector: DetectorSection,
    pub snr_db_list: Vec<f64>,
    pub stopping: Stopping,
    pub master_seed: u64,
    #[serde(default)]
    pub precoder_seed: u64,
    #[serde(default)]
    pub precoder_per_frame: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Sm(#[from] SmConfigError),
    #[error("n_r must be at least 1")]
    BadReceiveCount,
    #[error("snr_db_list must be non-empty and strictly increasing")]
    BadSnrList,
    #[error("min_bit_errors must be at least 1")]
    BadMinErrors,
    #[error("max_frames must be at least 1")]
    BadMaxFrames,
    #[error("scheme {scheme} requires n_t = 1, got {n_t}")]
    SchemeNeedsSingleAntenna { scheme: Scheme, n_t: usize },
    #[error("detector {detector} requires n_t = 1, got {n_t}")]
    DetectorNeedsSingleAntenna { detector: DetectorName, n_t: usize },
    #[error("ml would enumerate {hypotheses} hypotheses, above the configured cap of {cap}")]
    MlTooLarge { hypotheses: u64, cap: u64 },
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.sm_config()?;
        if self.channel.n_r == 0 {
            return Err(ScenarioError::BadReceiveCount);
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::BadSnrList);
        }
        if self.stopping.min_bit_errors == 0 {
            return Err(ScenarioError::BadMinErrors);
        }
        if self.stopping.max_frames == 0 {
            return Err(ScenarioError::BadMaxFrames);
        }
        if self.scheme == Scheme::Prpp && self.sm.n_t != 1 {
            return Err(ScenarioError::SchemeNeedsSingleAntenna {
                scheme: self.scheme,
                n_t: self.sm.n_t,
            });
        }
        if self.detector.name == DetectorName::SymbolFlipLas && self.sm.n_t != 1 {
            return Err(ScenarioError::DetectorNeedsSingleAntenna {
                detector: self.detector.name,
                n_t: self.sm.n_t,
            });
        }
        // plain SM detects per use, so only the joint schemes can explode
        if self.detector.name == DetectorName::Ml && self.scheme != Scheme::Sm {
            let alphabet = make_alphabet::<f64>(self.sm.alphabet);
            let count = hypothesis_count(self.sm.n_t, alphabet.size(), self.sm.p);
            if count > self.detector.ml_max_hypotheses {
                return Err(ScenarioError::MlTooLarge {
                    hypotheses: count,
                    cap: self.detector.ml_max_hypotheses,
                });
            }
        }
        Ok(())
    }

    pub fn sm_config(&self) -> Result<SmConfig<f64>, SmConfigError> {
        SmConfig::new(self.sm.n_t, self.sm.p, make_alphabet(self.sm.alphabet))
    }

    /// Bits per channel use carried by this scenario.
    pub fn bpcu(&self) -> usize {
        self.sm_config().map(|c| c.bpcu()).unwrap_or(0)
    }

    fn static_precoder(&self) -> Option<PrecoderMatrix<f64>> {
        (self.scheme.uses_precoder() && !self.precoder_per_frame).then(|| {
            generate_precoder(
                self.sm.p,
                self.scheme.precoder_cols(self.sm.n_t, self.sm.p),
                PhaseSeed(self.precoder_seed),
            )
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Detect(#[from] DetectError),
}

/// One BER sample point of a sweep. The first seven fields, in this order,
/// are the CSV contract; the error split is diagnostic extra carried only
/// in the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub avg_iterations: f64,
    pub avg_neighbor_evals: f64,
    #[serde(default)]
    pub antenna_bit_errors: u64,
    #[serde(default)]
    pub symbol_bit_errors: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BerCurve {
    /// SHA-256 of the canonical scenario JSON; identifies the experiment.
    pub digest: String,
    pub scenario: Scenario,
    pub points: Vec<BerPoint>,
    pub elapsed_secs: f64,
}

pub fn scenario_digest(scn: &Scenario) -> String {
    let canonical = serde_json::to_string(scn).expect("scenario always serializes");
    let hash = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(64);
    for b in hash {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Everything produced by one simulated frame.
pub struct FrameOutcome {
    pub tx_bits: Vec<u8>,
    pub rx_bits: Vec<u8>,
    pub detection: DetectionResult<f64>,
}

/// Simulates a single frame at one of the scenario's SNR points.
/// `snr_db` must be an element of `snr_db_list`; the per-trial randomness
/// is keyed by its index so results do not depend on grid slicing.
#[allow(clippy::type_complexity)]
pub fn run_frame(
    scn: &Scenario,
    snr_db: f64,
    trial: u64,
) -> Result<(Vec<u8>, Vec<u8>, DetectionResult<f64>), SimError> {
    scn.validate()?;
    let snr_index = scn
        .snr_db_list
        .iter()
        .position(|&s| s == snr_db)
        .expect("snr_db must be one of scenario.snr_db_list");
    let cfg = scn.sm_config().expect("validated");
    let pm = scn.static_precoder();
    let out = run_frame_at(scn, &cfg, pm.as_ref(), snr_index, trial)?;
    Ok((out.tx_bits, out.rx_bits, out.detection))
}

fn run_frame_at(
    scn: &Scenario,
    cfg: &SmConfig<f64>,
    static_pm: Option<&PrecoderMatrix<f64>>,
    snr_index: usize,
    trial: u64,
) -> Result<FrameOutcome, SimError> {
    let ms = scn.master_seed;

    let mut bits_rng = trial_rng(ms, snr_index, trial, Purpose::Bits);
    let tx_bits: Vec<u8> = (0..cfg.bits_per_frame())
        .map(|_| bits_rng.random::<bool>() as u8)
        .collect();
    let tx_frame = bits_to_frame(cfg, &tx_bits);

    let ch_cfg = ChannelConfig {
        n_t: cfg.n_t(),
        n_r: scn.channel.n_r,
        p: cfg.p(),
        snr_db: scn.snr_db_list[snr_index],
        fading: scn.channel.fading,
    };
    let mut channel_rng = trial_rng(ms, snr_index, trial, Purpose::Channel);
    let ch = draw_channel(&ch_cfg, &mut channel_rng);
    let sigma2 = ch.sigma2();

    let per_frame_pm;
    let pm: Option<&PrecoderMatrix<f64>> = if !scn.scheme.uses_precoder() {
        None
    } else if scn.precoder_per_frame {
        let seed = derived_seed(&[
            scn.precoder_seed,
            snr_index as u64,
            trial,
            Purpose::Precoder as u64,
        ]);
        per_frame_pm = generate_precoder(
            cfg.p(),
            scn.scheme.precoder_cols(cfg.n_t(), cfg.p()),
            PhaseSeed(seed),
        );
        Some(&per_frame_pm)
    } else {
        Some(static_pm.expect("static precoder prepared by the caller"))
    };

    let model = LinkModel::new(scn.scheme.model_kind(), cfg, &ch, pm);
    let mut y = model.synthesize(&tx_frame);
    let mut noise_rng = trial_rng(ms, snr_index, trial, Purpose::Noise);
    add_noise(&mut y, sigma2, &mut noise_rng);

    let detection = match scn.detector.name {
        DetectorName::Ml => {
            if scn.scheme == Scheme::Sm {
                detect_sm_per_use(&model, &y)
            } else {
                detect_ml(&model, &y, scn.detector.ml_max_hypotheses)?
            }
        }
        DetectorName::Lsd => {
            let init = match scn.detector.lsd_init {
                LsdInit::Mmse => None,
                LsdInit::Random => {
                    let mut rng = trial_rng(ms, snr_index, trial, Purpose::Init);
                    let antennas = (0..cfg.p())
                        .map(|_| rng.random_range(0..cfg.n_t()))
                        .collect();
                    let symbols = (0..cfg.p())
                        .map(|_| rng.random_range(0..cfg.alphabet().size()))
                        .collect();
                    Some(SmFrame::new(antennas, symbols))
                }
                LsdInit::Truth => Some(tx_frame.clone()),
            };
            detect_lsd(&model, &y, sigma2, init)?
        }
        DetectorName::MmseOnly => {
            let hypothesis = mmse_initial(&model, &y, sigma2).map_err(DetectError::from)?;
            let cost = model.cost(&y, &hypothesis);
            DetectionResult {
                hypothesis,
                cost,
                iterations: 0,
                neighbors_evaluated: 0,
            }
        }
        DetectorName::SymbolFlipLas => {
            let g = model.dense_effective(&vec![0; cfg.p()]);
            detect_symbol_flip(&g, cfg.alphabet(), &y, sigma2, None)?
        }
    };

    let rx_bits = frame_to_bits(cfg, &detection.hypothesis);
    Ok(FrameOutcome {
        tx_bits,
        rx_bits,
        detection,
    })
}

struct FrameStats {
    bit_errors: u64,
    antenna_bit_errors: u64,
    symbol_bit_errors: u64,
    iterations: u64,
    neighbors_evaluated: u64,
}

fn frame_stats(
    scn: &Scenario,
    cfg: &SmConfig<f64>,
    static_pm: Option<&PrecoderMatrix<f64>>,
    snr_index: usize,
    trial: u64,
) -> Result<FrameStats, SimError> {
    let out = run_frame_at(scn, cfg, static_pm, snr_index, trial)?;
    let (ant_bits, bpcu) = (cfg.antenna_bits(), cfg.bpcu());
    let mut antenna_bit_errors = 0u64;
    let mut symbol_bit_errors = 0u64;
    for (pos, (a, b)) in out.tx_bits.iter().zip(&out.rx_bits).enumerate() {
        if a != b {
            if pos % bpcu < ant_bits {
                antenna_bit_errors += 1;
            } else {
                symbol_bit_errors += 1;
            }
        }
    }
    Ok(FrameStats {
        bit_errors: antenna_bit_errors + symbol_bit_errors,
        antenna_bit_errors,
        symbol_bit_errors,
        iterations: out.detection.iterations,
        neighbors_evaluated: out.detection.neighbors_evaluated,
    })
}

/// First batch size of the adaptive schedule; batches double up to
/// [`MAX_BATCH`]. The schedule is a pure function of the scenario, which is
/// what keeps sweeps bit-identical across worker counts.
const FIRST_BATCH: u64 = 64;
const MAX_BATCH: u64 = 4096;

fn sweep_point(
    scn: &Scenario,
    cfg: &SmConfig<f64>,
    static_pm: Option<&PrecoderMatrix<f64>>,
    snr_index: usize,
    pool: &rayon::ThreadPool,
) -> Result<BerPoint, SimError> {
    let min_err = scn.stopping.min_bit_errors;
    let max_frames = scn.stopping.max_frames;

    let mut frames = 0u64;
    let mut bit_errors = 0u64;
    let mut antenna_bit_errors = 0u64;
    let mut symbol_bit_errors = 0u64;
    let mut iterations_sum = 0u64;
    let mut neighbor_sum = 0u64;

    let mut next_trial = 0u64;
    let mut batch = FIRST_BATCH;
    let mut done = false;
    while !done && next_trial < max_frames {
        let size = batch.min(max_frames - next_trial);
        let trials: Vec<u64> = (next_trial..next_trial + size).collect();
        let results: Result<Vec<FrameStats>, SimError> = pool.install(|| {
            trials
                .par_iter()
                .map(|&t| frame_stats(scn, cfg, static_pm, snr_index, t))
                .collect()
        });
        // reduce in trial order; overshoot past the stopping trial is discarded
        for fs in results? {
            frames += 1;
            bit_errors += fs.bit_errors;
            antenna_bit_errors += fs.antenna_bit_errors;
            symbol_bit_errors += fs.symbol_bit_errors;
            iterations_sum += fs.iterations;
            neighbor_sum += fs.neighbors_evaluated;
            if bit_errors >= min_err {
                done = true;
                break;
            }
        }
        next_trial += size;
        batch = (batch * 2).min(MAX_BATCH);
    }

    let bits = frames * cfg.bits_per_frame() as u64;
    Ok(BerPoint {
        snr_db: scn.snr_db_list[snr_index],
        frames,
        bits,
        bit_errors,
        ber: bit_errors as f64 / bits as f64,
        avg_iterations: iterations_sum as f64 / frames as f64,
        avg_neighbor_evals: neighbor_sum as f64 / frames as f64,
        antenna_bit_errors,
        symbol_bit_errors,
    })
}

/// Runs the full SNR sweep. `workers = 0` uses the rayon default; any
/// positive count yields bit-identical points.
pub fn run_sweep(scn: &Scenario, workers: usize) -> Result<BerCurve, SimError> {
    run_sweep_with(scn, workers, |_| {})
}

/// [`run_sweep`] with a per-point callback, for progress reporting.
pub fn run_sweep_with(
    scn: &Scenario,
    workers: usize,
    mut on_point: impl FnMut(&BerPoint),
) -> Result<BerCurve, SimError> {
    scn.validate()?;
    let cfg = scn.sm_config().expect("validated");
    let static_pm = scn.static_precoder();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("rayon pool");

    let started = Instant::now();
    let mut points = Vec::with_capacity(scn.snr_db_list.len());
    for snr_index in 0..scn.snr_db_list.len() {
        let point = sweep_point(scn, &cfg, static_pm.as_ref(), snr_index, &pool)?;
        on_point(&point);
        points.push(point);
    }
    Ok(BerCurve {
        digest: scenario_digest(scn),
        scenario: scn.clone(),
        points,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GapError {
    #[error("target BER must be positive and below 1")]
    BadTarget,
    #[error("target BER {target:e} is not bracketed by the curve")]
    Unbracketed { target: f64 },
}

/// SNR (dB) at which the curve crosses `target` BER, by linear
/// interpolation in (snr_db, log10 ber). Zero-BER points carry no log
/// information and are skipped; the first bracketing segment wins.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Result<f64, GapError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(GapError::BadTarget);
    }
    let t = target.log10();
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.ber > 0.0)
        .map(|p| (p.snr_db, p.ber.log10()))
        .collect();
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if (y0 - t) * (y1 - t) <= 0.0 {
            if y0 == y1 {
                return Ok(x0);
            }
            return Ok(x0 + (x1 - x0) * (t - y0) / (y1 - y0));
        }
    }
    Err(GapError::Unbracketed { target })
}

/// SNR gap (dB) between two curves at a target BER: `a` minus `b`.
/// Positive when `a` needs more SNR, i.e. `b` is the better scheme.
pub fn measure_gap(a: &[BerPoint], b: &[BerPoint], target: f64) -> Result<f64, GapError> {
    Ok(snr_at_ber(a, target)? - snr_at_ber(b, target)?)
}
