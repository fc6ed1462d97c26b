//! Binary symmetric channel and the hard-decision AWGN + BPSK channel.
//!
//! The AWGN channel is only ever used through the BSC it induces after hard
//! demodulation, with crossover `Q(sqrt(2 Eb/N0))` and no code-rate factor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::Word;
use crate::scalar::Real;

/// Crossover probabilities are clamped to `[EPS_MIN, 1 - EPS_MIN]` wherever
/// they feed a log-likelihood ratio.
pub const EPS_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BscParams {
    pub epsilon: f64,
    /// Set when the value was raised to [`EPS_MIN`].
    #[serde(default)]
    pub clamped: bool,
}

impl BscParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "crossover probability must lie in (0, 1), got {epsilon}"
            )));
        }
        if epsilon >= 0.5 {
            log::warn!("crossover probability {epsilon} >= 1/2");
        }
        Ok(Self {
            epsilon,
            clamped: false,
        })
    }

    /// True when the crossover is at least one half, outside the usual regime.
    pub fn is_degenerate(&self) -> bool {
        self.epsilon >= 0.5
    }
}

/// Signal-to-noise ratio `Eb/N0` in decibels.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SnrPoint {
    pub eb_n0_db: f64,
}

impl SnrPoint {
    pub fn db(eb_n0_db: f64) -> Self {
        Self { eb_n0_db }
    }

    pub fn linear(&self) -> f64 {
        10f64.powf(self.eb_n0_db / 10.0)
    }
}

/// Standard normal tail probability, `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function<T: Real>(x: T) -> T {
    let x = x.to_f64_lossy();
    T::lit(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}

/// Hard-decision BPSK crossover probability at the given `Eb/N0`.
pub fn crossover_from_snr(snr: SnrPoint) -> Result<BscParams> {
    if snr.eb_n0_db.is_nan() || snr.eb_n0_db == f64::INFINITY {
        return Err(Error::Domain(format!("non-finite Eb/N0 {}", snr.eb_n0_db)));
    }
    let eps: f64 = q_function((2.0 * snr.linear()).sqrt());
    if eps < EPS_MIN {
        log::warn!("crossover {eps:e} at {} dB clamped to {EPS_MIN:e}", snr.eb_n0_db);
        return Ok(BscParams {
            epsilon: EPS_MIN,
            clamped: true,
        });
    }
    Ok(BscParams {
        epsilon: eps,
        clamped: false,
    })
}

/// Draws an error pattern with independent flips of probability epsilon.
pub fn sample_bsc_error<R: Rng + ?Sized>(n: usize, params: &BscParams, rng: &mut R) -> Word {
    let bits = (0..n).map(|_| (rng.gen::<f64>() < params.epsilon) as u8).collect();
    Word::from_bits(bits).expect("sampled bits are binary")
}

/// Probability of one specific error string, `eps^w (1-eps)^(n-w)`.
pub fn string_error_probability<T: Real>(e: &Word, epsilon: T) -> T {
    let w = e.weight() as i32;
    let n = e.len() as i32;
    epsilon.powi(w) * (T::one() - epsilon).powi(n - w)
}

/// Parses an SNR grid, either `start:stop:step` (inclusive of `stop` up to
/// rounding) or an explicit comma-separated list.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    parse_grid(text)
}

pub(crate) fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |t: &str| Error::Domain(format!("invalid number {t:?} in grid {text:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(t));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!(
                "range grid must be start:stop:step, got {text:?}"
            )));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::Domain(format!("invalid range {text:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Err(Error::Domain(format!("empty range {text:?}")));
        }
        Ok((0..=count as usize).map(|i| start + i as f64 * step).collect())
    } else {
        let vals = text
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?;
        if vals.is_empty() {
            return Err(Error::Domain("empty grid".into()));
        }
        Ok(vals)
    }
}
