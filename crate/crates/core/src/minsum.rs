//! Min-sum belief propagation in the log-likelihood-ratio domain, flooding
//! schedule, early termination on a valid codeword.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::channel::EPS_MIN;
use crate::error::{check_len, Error, Result};
use crate::gf2::{LinearCode, Word};
use crate::scalar::Real;

/// Messages and beliefs are clamped to `[-LLR_CLAMP, LLR_CLAMP]`.
pub const LLR_CLAMP: f64 = 50.0;
pub const DEFAULT_MAX_ITER: usize = 50;

static DEGREE_ONE_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LlrVector<T> {
    pub values: Vec<T>,
}

impl<T: Real> LlrVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult<T> {
    pub word: Word,
    pub converged: bool,
    pub iterations: usize,
    pub final_llrs: LlrVector<T>,
}

fn clamp<T: Real>(x: T) -> T {
    let c = T::lit(LLR_CLAMP);
    x.max(-c).min(c)
}

/// Channel LLRs `(-1)^y_i ln((1 - eps_i) / eps_i)`. A crossover of exactly
/// one half gives exactly zero; anything else is clamped into
/// `[EPS_MIN, 1 - EPS_MIN]` first.
pub fn init_llr<T: Real>(y: &Word, eps: &[T]) -> Result<LlrVector<T>> {
    check_len(y.len(), eps.len(), "crossover vector length")?;
    let half = T::lit(0.5);
    let lo = T::lit(EPS_MIN);
    let hi = T::one() - lo;
    let mut values = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        if e.is_nan() || e < T::zero() || e > T::one() {
            return Err(Error::Domain(format!("crossover {e} at bit {i} outside [0, 1]")));
        }
        let l = if e == half {
            T::zero()
        } else {
            let e = e.max(lo).min(hi);
            ((T::one() - e) / e).ln()
        };
        values.push(if y.get(i) == 1 { -l } else { l });
    }
    Ok(LlrVector { values })
}

/// Check-to-variable message: sign product times minimum magnitude. An
/// empty set (degree-one check) sends full-confidence `+LLR_CLAMP`.
pub fn check_update<T: Real>(incoming: &[T]) -> T {
    if incoming.is_empty() {
        return T::lit(LLR_CLAMP);
    }
    let mut negative = false;
    let mut min = T::infinity();
    for &m in incoming {
        negative ^= m < T::zero();
        min = min.min(m.abs());
    }
    if negative {
        -min
    } else {
        min
    }
}

/// Variable-to-check message: channel LLR plus the other incoming messages.
pub fn variable_update<T: Real>(channel: T, incoming: &[T]) -> T {
    clamp(incoming.iter().fold(channel, |acc, &m| acc + m))
}

pub fn belief<T: Real>(channel: T, incoming: &[T]) -> T {
    variable_update(channel, incoming)
}

/// `1` iff the belief is strictly negative.
pub fn hard_decision<T: Real>(belief: T) -> u8 {
    (belief < T::zero()) as u8
}

/// Flooding min-sum decoder bound to one code.
///
/// Edges are stored check-major; `var_edges[i]` lists the edge slots that
/// touch variable `i`.
#[derive(Clone, Debug)]
pub struct MinSumDecoder<'a> {
    code: &'a LinearCode,
    edge_var: Vec<usize>,
    check_start: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl<'a> MinSumDecoder<'a> {
    pub fn new(code: &'a LinearCode) -> Self {
        let mut edge_var = Vec::new();
        let mut check_start = vec![0];
        let mut var_edges = vec![Vec::new(); code.n()];
        for j in 0..code.r() {
            for &i in code.check_adjacency(j) {
                var_edges[i].push(edge_var.len());
                edge_var.push(i);
            }
            check_start.push(edge_var.len());
        }
        if (0..code.r()).any(|j| code.check_adjacency(j).len() == 1) && !DEGREE_ONE_WARNED.swap(true, Ordering::Relaxed)
        {
            log::warn!("degree-one check rows present; they send +{LLR_CLAMP} to their variable");
        }
        Self {
            code,
            edge_var,
            check_start,
            var_edges,
        }
    }

    pub fn decode<T: Real>(&self, y: &Word, eps: &[T], max_iter: usize) -> Result<DecodeResult<T>> {
        check_len(self.code.n(), y.len(), "received word length")?;
        let channel = init_llr(y, eps)?;
        self.decode_llr(&channel, max_iter)
    }

    /// Runs the decoder from given channel LLRs.
    pub fn decode_llr<T: Real>(&self, channel: &LlrVector<T>, max_iter: usize) -> Result<DecodeResult<T>> {
        let n = self.code.n();
        check_len(n, channel.len(), "channel LLR length")?;
        if max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        let edges = self.edge_var.len();
        let mut v2c: Vec<T> = self.edge_var.iter().map(|&i| channel.values[i]).collect();
        let mut c2v = vec![T::zero(); edges];
        let mut beliefs = channel.values.clone();
        let mut bits = vec![0u8; n];
        let mut scratch = Vec::new();

        for iter in 1..=max_iter {
            for j in 0..self.check_start.len() - 1 {
                let (a, b) = (self.check_start[j], self.check_start[j + 1]);
                for e in a..b {
                    scratch.clear();
                    scratch.extend((a..b).filter(|&f| f != e).map(|f| v2c[f]));
                    c2v[e] = check_update(&scratch);
                }
            }
            for (i, slots) in self.var_edges.iter().enumerate() {
                let total = slots.iter().fold(channel.values[i], |acc, &e| acc + c2v[e]);
                for &e in slots {
                    // total minus own message equals the exclusive sum
                    v2c[e] = clamp(total - c2v[e]);
                }
                beliefs[i] = clamp(total);
                bits[i] = hard_decision(beliefs[i]);
            }
            let word = Word::from_bits(bits.clone())?;
            if self.code.is_codeword(&word)? {
                return Ok(DecodeResult {
                    word,
                    converged: true,
                    iterations: iter,
                    final_llrs: LlrVector { values: beliefs },
                });
            }
        }
        Ok(DecodeResult {
            word: Word::from_bits(bits)?,
            converged: false,
            iterations: max_iter,
            final_llrs: LlrVector { values: beliefs },
        })
    }
}

/// One-shot decode with per-bit crossover probabilities.
pub fn decode<T: Real>(code: &LinearCode, y: &Word, eps: &[T], max_iter: usize) -> Result<DecodeResult<T>> {
    MinSumDecoder::new(code).decode(y, eps, max_iter)
}
