//! Seeded Monte Carlo link simulation.
//!
//! The simulator transmits uniformly drawn Gray-labeled symbols over AWGN,
//! rotates QAM constellations by the configured phase-noise angle, slices
//! each received axis bit-by-bit with [`pam_layout::decide_bit`], and counts
//! bit errors against the transmitted labels.
//!
//! Reproducibility contract: the bit budget is split into fixed chunks of
//! [`CHUNK_SYMBOLS`] symbols. Chunk c draws from a ChaCha12 generator keyed
//! with the job seed and stream number c; Gaussian deviates come from the
//! Marsaglia polar method over that stream. Results are therefore a pure
//! function of the job, independent of thread count and process restarts.
//! Noise is normalized to N0 = 1, so the per-axis signal scale is the alpha
//! of the closed form and the per-axis noise deviation is 1/sqrt(2).

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::closed_form::{pam_alpha, qam_alpha, PamConfig, QamConfig};
use crate::graycode::{brgc, GrayCodeSequence};
use crate::pam_layout::decide_bit;
use crate::{Error, Result};

/// Smallest accepted bit budget.
pub const MIN_BITS: u64 = 10_000;

/// Symbols per work chunk; fixed so that chunking, and therefore the random
/// streams, do not depend on the worker count.
pub const CHUNK_SYMBOLS: u64 = 1 << 16;

/// The link a simulation runs over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkConfig {
    Pam(PamConfig),
    Qam(QamConfig),
}

impl LinkConfig {
    pub fn bits_per_symbol(&self) -> u32 {
        match self {
            LinkConfig::Pam(cfg) => cfg.bits_per_symbol(),
            LinkConfig::Qam(cfg) => cfg.bits_per_symbol(),
        }
    }
}

/// One simulation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimJob {
    pub link: LinkConfig,
    pub n_bits: u64,
    pub seed: u64,
}

/// Outcome of a simulation: bit error counts and the derived estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BerEstimate {
    pub errors: u64,
    pub bits: u64,
}

impl BerEstimate {
    pub fn estimate(&self) -> f64 {
        self.errors as f64 / self.bits as f64
    }

    /// Normal-approximation 95% confidence half-width 1.96 sqrt(p(1-p)/n).
    pub fn ci_half_width(&self) -> f64 {
        let p = self.estimate();
        1.96 * (p * (1.0 - p) / self.bits as f64).sqrt()
    }
}

/// Two independent standard normal deviates via the Marsaglia polar method:
/// uniform points are drawn in the square until one lands inside the unit
/// disk, then scaled by sqrt(-2 ln s / s). Deterministic for a given
/// generator state.
pub fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let factor = (-2.0 * s.ln() / s).sqrt();
            return (u * factor, v * factor);
        }
    }
}

/// Runs a simulation job and returns its (deterministic) error counts.
pub fn simulate(job: &SimJob) -> Result<BerEstimate> {
    let bits_per_symbol = u64::from(job.link.bits_per_symbol());
    if job.n_bits < MIN_BITS {
        return Err(Error::Budget(format!(
            "bit budget {} is below the minimum {MIN_BITS}",
            job.n_bits
        )));
    }
    if !job.n_bits.is_multiple_of(bits_per_symbol) {
        return Err(Error::Domain(format!(
            "bit budget {} is not a multiple of {bits_per_symbol} bits per symbol",
            job.n_bits
        )));
    }
    let n_symbols = job.n_bits / bits_per_symbol;
    let n_chunks = n_symbols.div_ceil(CHUNK_SYMBOLS);
    let errors = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let count = CHUNK_SYMBOLS.min(n_symbols - chunk * CHUNK_SYMBOLS);
            let mut rng = ChaCha12Rng::seed_from_u64(job.seed);
            rng.set_stream(chunk);
            match job.link {
                LinkConfig::Pam(cfg) => pam_chunk(&cfg, &mut rng, count),
                LinkConfig::Qam(cfg) => qam_chunk(&cfg, &mut rng, count),
            }
        })
        .sum();
    Ok(BerEstimate {
        errors,
        bits: job.n_bits,
    })
}

fn axis_error_count(r_over_d: f64, labels: &GrayCodeSequence, index: usize, bits: u32) -> u64 {
    let mut errors = 0;
    for k in 1..=bits {
        errors += u64::from(decide_bit(r_over_d, bits, k) != labels.bit(index, k));
    }
    errors
}

fn pam_chunk(cfg: &PamConfig, rng: &mut ChaCha12Rng, n_symbols: u64) -> u64 {
    let bits = cfg.bits_per_symbol();
    let m = 1u64 << bits;
    let labels = brgc(bits).expect("validated width");
    let d = pam_alpha(bits, cfg.ebn0()).alpha; // N0 = 1, so d = alpha
    let mut errors = 0;
    for _ in 0..n_symbols {
        let index = (rng.random::<u64>() & (m - 1)) as usize;
        let amplitude = (2 * index as i64 - (m as i64 - 1)) as f64 * d;
        let (noise, _) = gaussian_pair(rng);
        let r = (amplitude + FRAC_1_SQRT_2 * noise) / d;
        errors += axis_error_count(r, &labels, index, bits);
    }
    errors
}

fn qam_chunk(cfg: &QamConfig, rng: &mut ChaCha12Rng, n_symbols: u64) -> u64 {
    let (i_bits, q_bits) = (cfg.i_bits(), cfg.q_bits());
    let (m_i, m_q) = (1u64 << i_bits, 1u64 << q_bits);
    let labels_i = brgc(i_bits).expect("validated width");
    let labels_q = brgc(q_bits).expect("validated width");
    let d = qam_alpha(i_bits, q_bits, cfg.ebn0()).alpha;
    let (sin_t, cos_t) = cfg.theta().sin_cos();
    let mut errors = 0;
    for _ in 0..n_symbols {
        // one draw feeds both axes: the side counts are powers of two
        let word: u64 = rng.random();
        let i_index = (word & (m_i - 1)) as usize;
        let q_index = ((word >> 32) & (m_q - 1)) as usize;
        let a_i = (2 * i_index as i64 - (m_i as i64 - 1)) as f64 * d;
        let a_q = (2 * q_index as i64 - (m_q as i64 - 1)) as f64 * d;
        let (n_i, n_q) = gaussian_pair(rng);
        let r_i = (a_i * cos_t - a_q * sin_t + FRAC_1_SQRT_2 * n_i) / d;
        let r_q = (a_i * sin_t + a_q * cos_t + FRAC_1_SQRT_2 * n_q) / d;
        errors += axis_error_count(r_i, &labels_i, i_index, i_bits);
        errors += axis_error_count(r_q, &labels_q, q_index, q_bits);
    }
    errors
}
