//! QAOA warm start for min-sum decoding.
//!
//! QAOA run on the syndrome of `y` gives, per bit, a probability that the bit
//! is in error. Composing that with the channel crossover yields per-bit
//! channel parameters for the belief-propagation decoder.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::EPS_MIN;
use crate::error::{check_len, Error, Result};
use crate::gf2::{LinearCode, Word};
use crate::minsum::{DecodeResult, MinSumDecoder};
use crate::qaoa::{qaoa_state, sample_outcomes, top_ranked, OutcomeDistribution, QaoaConfig};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QebpMode {
    /// Per-bit error probabilities from the exact QAOA marginals.
    #[default]
    Marginal,
    /// Marginals estimated from `shots` samples.
    ShotMarginal,
    /// Bits of the most frequent sampled string, each 0 or 1.
    OneSample,
}

impl QebpMode {
    pub fn uses_shots(self) -> bool {
        !matches!(self, Self::Marginal)
    }
}

/// Crossover of the BSC followed by an independent flip with probability
/// `eps_qaoa`. Exactly one half is returned untouched; other results are
/// clamped into `[EPS_MIN, 1 - EPS_MIN]`.
pub fn combined_crossover<T: Real>(eps_bsc: T, eps_qaoa: T) -> Result<T> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !unit(eps_bsc) || !unit(eps_qaoa) {
        return Err(Error::Domain(format!(
            "crossovers must lie in [0, 1], got {eps_bsc} and {eps_qaoa}"
        )));
    }
    let one = T::one();
    let e = (one - eps_bsc) * eps_qaoa + eps_bsc * (one - eps_qaoa);
    if e == T::lit(0.5) {
        return Ok(e);
    }
    let lo = T::lit(EPS_MIN);
    Ok(e.max(lo).min(one - lo))
}

/// Per-bit QAOA error estimates for the chosen mode.
pub fn qaoa_bit_estimates<T: Real, R: Rng + ?Sized>(
    dist: &OutcomeDistribution<T>,
    mode: QebpMode,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<T>> {
    match mode {
        QebpMode::Marginal => Ok(dist.marginal_error_probs()),
        QebpMode::ShotMarginal => {
            let counts = sample_outcomes(dist, shots, rng)?;
            let n = dist.n();
            let mut marg = vec![T::zero(); n];
            for (&z, &c) in &counts.counts {
                for (i, m) in marg.iter_mut().enumerate() {
                    if (z >> (n - 1 - i)) & 1 == 1 {
                        *m += T::lit(c as f64);
                    }
                }
            }
            let total = T::lit(counts.total() as f64);
            Ok(marg.into_iter().map(|m| m / total).collect())
        }
        QebpMode::OneSample => {
            let counts = sample_outcomes(dist, shots, rng)?;
            let top = top_ranked(&counts)?;
            Ok(top.bits().iter().map(|&b| T::lit(b as f64)).collect())
        }
    }
}

/// Fused per-bit crossovers for a warm-started decode.
pub fn fused_crossovers<T: Real>(eps_bsc: T, eps_qaoa: &[T]) -> Result<Vec<T>> {
    eps_qaoa.iter().map(|&q| combined_crossover(eps_bsc, q)).collect()
}

/// QEBP decode from a precomputed QAOA outcome distribution for the
/// syndrome of `y`.
#[allow(clippy::too_many_arguments)]
pub fn qebp_decode_with_distribution<T: Real, R: Rng + ?Sized>(
    decoder: &MinSumDecoder<'_>,
    y: &Word,
    eps_bsc: T,
    dist: &OutcomeDistribution<T>,
    mode: QebpMode,
    shots: usize,
    max_iter: usize,
    rng: &mut R,
) -> Result<DecodeResult<T>> {
    check_len(y.len(), dist.n(), "distribution width")?;
    let estimates = qaoa_bit_estimates(dist, mode, shots, rng)?;
    let eps = fused_crossovers(eps_bsc, &estimates)?;
    decoder.decode(y, &eps, max_iter)
}

/// Runs QAOA on the syndrome of `y` and warm-starts min-sum with the result.
pub fn qebp_decode<T: Real, R: Rng + ?Sized>(
    code: &LinearCode,
    y: &Word,
    eps_bsc: T,
    cfg: &QaoaConfig<T>,
    mode: QebpMode,
    max_iter: usize,
    rng: &mut R,
) -> Result<DecodeResult<T>> {
    let s = code.syndrome(y)?;
    let dist = qaoa_state(code, &s, cfg)?.distribution();
    let decoder = MinSumDecoder::new(code);
    qebp_decode_with_distribution(&decoder, y, eps_bsc, &dist, mode, cfg.shots, max_iter, rng)
}

/// Min-sum with the uniform channel crossover.
pub fn plain_bp_decode<T: Real>(code: &LinearCode, y: &Word, eps_bsc: T, max_iter: usize) -> Result<DecodeResult<T>> {
    let eps = vec![combined_crossover(eps_bsc, T::zero())?; code.n()];
    MinSumDecoder::new(code).decode(y, &eps, max_iter)
}
