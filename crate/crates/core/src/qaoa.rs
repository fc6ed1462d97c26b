//! Exact statevector simulation of the level-`p` QAOA syndrome decoder.
//!
//! The circuit is `prod_l exp(-i beta_l B) exp(-i gamma_l C) |+>^n` with the
//! transverse-field mixer `B = sum_i X_i` and the diagonal syndrome cost
//!
//! ```text
//! C(z) = sign * ( eta * sum_j (1 - 2 s_j) (-1)^(parity_j(z)) + alpha * sum_i (-1)^(z_i) )
//! ```
//!
//! where `sign = -1` for [`SignConvention::MainText`] and `+1` for
//! [`SignConvention::Appendix`]. Amplitudes are indexed with the bit ordering
//! of [`crate::gf2`]: word position `i` is basis bit `n - 1 - i`.
//!
//! The circuit only ever sees the syndrome, never the received word.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{LinearCode, Syndrome, Word};
use crate::scalar::Real;

/// Largest register simulated (2^24 complex doubles is 256 MiB).
pub const MAX_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Leading minus signs: the syndrome-consistent, low-weight strings have
    /// the lowest cost.
    #[default]
    MainText,
    /// Plus signs, as used by the repetition-code transfer-matrix analysis.
    Appendix,
}

impl SignConvention {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Self::MainText => -T::one(),
            Self::Appendix => T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaConfig<T> {
    pub gammas: Vec<T>,
    pub betas: Vec<T>,
    pub alpha: T,
    pub eta: T,
    #[serde(default)]
    pub sign_convention: SignConvention,
    pub shots: usize,
}

impl<T: Real> QaoaConfig<T> {
    pub fn new(gammas: Vec<T>, betas: Vec<T>, alpha: T, eta: T) -> Result<Self> {
        let cfg = Self {
            gammas,
            betas,
            alpha,
            eta,
            sign_convention: SignConvention::MainText,
            shots: 10_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_convention(mut self, convention: SignConvention) -> Self {
        self.sign_convention = convention;
        self
    }

    pub fn with_shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    /// Number of layers.
    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::Domain("QAOA needs at least one layer".into()));
        }
        check_len(self.gammas.len(), self.betas.len(), "beta vector length")?;
        let finite = self
            .gammas
            .iter()
            .chain(&self.betas)
            .chain([&self.alpha, &self.eta])
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Domain("QAOA angles and weights must be finite".into()));
        }
        if self.shots == 0 {
            return Err(Error::Domain("shot count must be positive".into()));
        }
        Ok(())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "qubit count",
            actual: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Parity-term and weight-term sums `(sum_j ±1, sum_i ±1)` for every basis state.
fn cost_terms(code: &LinearCode, s: &Syndrome) -> Result<Vec<(i32, i32)>> {
    let n = code.n();
    check_qubits(n)?;
    check_len(code.r(), s.len(), "syndrome length")?;
    let masks = code.basis_row_masks();
    let syn_sign: Vec<i32> = s.bits().iter().map(|&b| 1 - 2 * b as i32).collect();
    Ok((0..1u64 << n)
        .map(|z| {
            let parity: i32 = masks
                .iter()
                .zip(&syn_sign)
                .map(|(m, sj)| if (m & z).count_ones() & 1 == 0 { *sj } else { -*sj })
                .sum();
            let weight = n as i32 - 2 * z.count_ones() as i32;
            (parity, weight)
        })
        .collect())
}

/// The cost function evaluated on every basis state.
pub fn cost_diagonal<T: Real>(
    code: &LinearCode,
    s: &Syndrome,
    alpha: T,
    eta: T,
    convention: SignConvention,
) -> Result<Vec<T>> {
    Ok(CostHamiltonian::new(code, s, alpha, eta, convention)?.diag)
}

/// Diagonal cost operator with its distinct eigenvalues pre-grouped, so a
/// phase layer needs one `cis` per level instead of one per amplitude.
#[derive(Clone, Debug)]
pub struct CostHamiltonian<T> {
    n: usize,
    diag: Vec<T>,
    levels: Vec<T>,
    level_of: Vec<u32>,
}

impl<T: Real> CostHamiltonian<T> {
    pub fn new(code: &LinearCode, s: &Syndrome, alpha: T, eta: T, convention: SignConvention) -> Result<Self> {
        let terms = cost_terms(code, s)?;
        let sign = convention.sign::<T>();
        let mut key_to_level = HashMap::new();
        let mut levels = Vec::new();
        let mut level_of = Vec::with_capacity(terms.len());
        let mut diag = Vec::with_capacity(terms.len());
        for &(parity, weight) in &terms {
            let value = sign * (eta * T::lit(parity as f64) + alpha * T::lit(weight as f64));
            let level = *key_to_level.entry((parity, weight)).or_insert_with(|| {
                levels.push(value);
                levels.len() as u32 - 1
            });
            level_of.push(level);
            diag.push(value);
        }
        Ok(Self {
            n: code.n(),
            diag,
            levels,
            level_of,
        })
    }

    /// Wraps an arbitrary diagonal of length `2^n`.
    pub fn from_diagonal(n: usize, diag: Vec<T>) -> Result<Self> {
        check_qubits(n)?;
        check_len(1 << n, diag.len(), "cost diagonal length")?;
        let mut key_to_level = HashMap::new();
        let mut levels = Vec::new();
        let level_of = diag
            .iter()
            .map(|&v| {
                *key_to_level.entry(v.to_f64_lossy().to_bits()).or_insert_with(|| {
                    levels.push(v);
                    levels.len() as u32 - 1
                })
            })
            .collect();
        Ok(Self {
            n,
            diag,
            levels,
            level_of,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    /// Prepares the QAOA state for the given angles.
    pub fn evolve(&self, gammas: &[T], betas: &[T]) -> Result<Statevector<T>> {
        check_len(gammas.len(), betas.len(), "beta vector length")?;
        let mut state = Statevector::uniform(self.n);
        let mut phases = vec![Complex::new(T::zero(), T::zero()); self.levels.len()];
        for (&gamma, &beta) in gammas.iter().zip(betas) {
            for (ph, &c) in phases.iter_mut().zip(&self.levels) {
                let (sin, cos) = (-gamma * c).sin_cos();
                *ph = Complex::new(cos, sin);
            }
            for (a, &l) in state.amps.iter_mut().zip(&self.level_of) {
                *a *= phases[l as usize];
            }
            state.apply_mixer(beta);
        }
        Ok(state)
    }

    /// `<psi(gammas, betas)| C |psi(gammas, betas)>`.
    pub fn expectation(&self, gammas: &[T], betas: &[T]) -> Result<T> {
        let state = self.evolve(gammas, betas)?;
        Ok(state.amps.iter().zip(&self.diag).map(|(a, &c)| a.norm_sqr() * c).sum())
    }

    /// Expectation and its exact gradient `(d/dgamma, d/dbeta)` by
    /// back-propagating `C|psi>` through the inverted circuit.
    pub fn expectation_gradient(&self, gammas: &[T], betas: &[T]) -> Result<(T, Vec<T>, Vec<T>)> {
        let p = gammas.len();
        let mut phi = self.evolve(gammas, betas)?;
        let mut lam = phi.clone();
        for (a, &c) in lam.amps.iter_mut().zip(&self.diag) {
            *a = a.scale(c);
        }
        let value = phi.amps.iter().zip(&lam.amps).map(|(a, b)| (a.conj() * b).re).sum();
        let two = T::lit(2.0);
        let mut dg = vec![T::zero(); p];
        let mut db = vec![T::zero(); p];
        let mut gphi = vec![Complex::new(T::zero(), T::zero()); phi.amps.len()];
        for k in (0..p).rev() {
            // mixer generator: sum of X over all qubits
            for (z, g) in gphi.iter_mut().enumerate() {
                *g = (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, t| {
                    acc + phi.amps[z ^ (1 << t)]
                });
            }
            db[k] = two * inner_im(&lam.amps, &gphi);
            phi.apply_mixer(-betas[k]);
            lam.apply_mixer(-betas[k]);
            for ((g, a), &c) in gphi.iter_mut().zip(&phi.amps).zip(&self.diag) {
                *g = a.scale(c);
            }
            dg[k] = two * inner_im(&lam.amps, &gphi);
            phi.apply_phase(&self.diag, -gammas[k])?;
            lam.apply_phase(&self.diag, -gammas[k])?;
        }
        Ok((value, dg, db))
    }
}

/// `Im <a|b>`.
fn inner_im<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).map(|(x, y)| x.re * y.im - x.im * y.re).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector<T> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    /// `|+>^n`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = T::one() / T::lit(dim as f64).sqrt();
        Self {
            n,
            amps: vec![Complex::new(a, T::zero()); dim],
        }
    }

    pub fn basis(n: usize, index: u64) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[index as usize] = Complex::new(T::one(), T::zero());
        Self { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        check_len(1 << n, amps.len(), "amplitude vector length")?;
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, z: &Word) -> Complex<T> {
        self.amps[z.to_index() as usize]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies amplitude `z` by `exp(-i gamma diag[z])`.
    pub fn apply_phase(&mut self, diag: &[T], gamma: T) -> Result<()> {
        check_len(self.amps.len(), diag.len(), "cost diagonal length")?;
        for (a, &c) in self.amps.iter_mut().zip(diag) {
            let (sin, cos) = (-gamma * c).sin_cos();
            *a *= Complex::new(cos, sin);
        }
        Ok(())
    }

    /// Applies `exp(-i beta X)` to every qubit.
    pub fn apply_mixer(&mut self, beta: T) {
        let (s, c) = beta.sin_cos();
        for t in 0..self.n {
            let stride = 1usize << t;
            for block in self.amps.chunks_exact_mut(stride << 1) {
                let (lo, hi) = block.split_at_mut(stride);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (xr, xi, yr, yi) = (x.re, x.im, y.re, y.im);
                    // (c x - i s y, -i s x + c y)
                    *x = Complex::new(c * xr + s * yi, c * xi - s * yr);
                    *y = Complex::new(c * yr + s * xi, c * yi - s * xr);
                }
            }
        }
    }

    pub fn distribution(&self) -> OutcomeDistribution<T> {
        OutcomeDistribution {
            n: self.n,
            probs: self.amps.iter().map(|a| a.norm_sqr()).collect(),
        }
    }
}

/// Runs the QAOA circuit for syndrome `s`.
pub fn qaoa_state<T: Real>(code: &LinearCode, s: &Syndrome, cfg: &QaoaConfig<T>) -> Result<Statevector<T>> {
    cfg.validate()?;
    CostHamiltonian::new(code, s, cfg.alpha, cfg.eta, cfg.sign_convention)?.evolve(&cfg.gammas, &cfg.betas)
}

pub fn outcome_distribution<T: Real>(state: &Statevector<T>) -> OutcomeDistribution<T> {
    state.distribution()
}

pub fn cost_expectation<T: Real>(state: &Statevector<T>, diag: &[T]) -> Result<T> {
    check_len(state.amps.len(), diag.len(), "cost diagonal length")?;
    Ok(state.amps.iter().zip(diag).map(|(a, &c)| a.norm_sqr() * c).sum())
}

/// Measurement statistics over the `2^n` basis strings.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<T> {
    n: usize,
    probs: Vec<T>,
}

impl<T: Real> OutcomeDistribution<T> {
    pub fn new(n: usize, probs: Vec<T>) -> Result<Self> {
        check_len(1 << n, probs.len(), "distribution length")?;
        if probs.iter().any(|p| !(p.is_finite() && *p >= T::zero())) {
            return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
        }
        Ok(Self { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, z: &Word) -> T {
        self.probs[z.to_index() as usize]
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    /// Probability that each bit is flipped by the decoder's output.
    pub fn marginal_error_probs(&self) -> Vec<T> {
        let mut marg = vec![T::zero(); self.n];
        for (z, &p) in self.probs.iter().enumerate() {
            for (i, m) in marg.iter_mut().enumerate() {
                if (z >> (self.n - 1 - i)) & 1 == 1 {
                    *m += p;
                }
            }
        }
        // rounding can leave a sum a few ulps outside [0, 1]
        marg.into_iter().map(|m| m.max(T::zero()).min(T::one())).collect()
    }

    /// Index of the most probable string (smallest index on ties).
    pub fn argmax(&self) -> u64 {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best as u64
    }

    pub fn sampler(&self) -> OutcomeSampler {
        let mut acc = 0.0;
        let cdf = self
            .probs
            .iter()
            .map(|p| {
                acc += p.to_f64_lossy();
                acc
            })
            .collect();
        OutcomeSampler { n: self.n, cdf }
    }
}

pub fn marginal_error_probs<T: Real>(dist: &OutcomeDistribution<T>) -> Vec<T> {
    dist.marginal_error_probs()
}

/// Inverse-CDF sampler over basis-state indices.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    n: usize,
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().expect("nonempty distribution");
        let u = rng.gen::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1) as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> OutcomeCounts {
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(self.sample_index(rng)).or_insert(0) += 1;
        }
        OutcomeCounts { n: self.n, counts }
    }
}

/// Shot counts keyed by basis-state index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub n: usize,
    pub counts: BTreeMap<u64, u64>,
}

impl OutcomeCounts {
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (Word, u64)>) -> Self {
        let mut counts = BTreeMap::new();
        for (w, c) in pairs {
            *counts.entry(w.to_index()).or_insert(0) += c;
        }
        Self { n, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, z: &Word) -> u64 {
        self.counts.get(&z.to_index()).copied().unwrap_or(0)
    }

    /// Highest-count index among those accepted by `keep`, smallest index on
    /// ties.
    pub fn top_where(&self, mut keep: impl FnMut(u64) -> bool) -> Option<(u64, u64)> {
        let mut best: Option<(u64, u64)> = None;
        for (&z, &c) in &self.counts {
            if c > 0 && keep(z) && best.is_none_or(|(_, bc)| c > bc) {
                best = Some((z, c));
            }
        }
        best
    }
}

pub fn sample_outcomes<T: Real, R: Rng + ?Sized>(
    dist: &OutcomeDistribution<T>,
    shots: usize,
    rng: &mut R,
) -> Result<OutcomeCounts> {
    if shots == 0 {
        return Err(Error::Domain("shot count must be positive".into()));
    }
    Ok(dist.sampler().sample(shots, rng))
}

/// Most frequent string; ties go to the smaller basis-state index.
pub fn top_ranked(counts: &OutcomeCounts) -> Result<Word> {
    counts
        .top_where(|_| true)
        .map(|(z, _)| Word::from_index(z, counts.n))
        .ok_or_else(|| Error::Domain("no outcomes to rank".into()))
}
