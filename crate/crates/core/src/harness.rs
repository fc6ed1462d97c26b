//! Seeded Monte Carlo block-error-rate sweeps.
//!
//! Every trial draws from its own RNG streams derived from
//! `(master_seed, snr_index, trial_index)`, so results do not depend on the
//! thread count, and two sweeps that differ only in the decoder see exactly
//! the same channel errors.
//!
//! QAOA angles and outcome distributions depend only on the syndrome, not on
//! the SNR, so they are computed once per syndrome and cached.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{crossover_from_snr, sample_bsc_error, BscParams, SnrPoint};
use crate::error::{Error, Result};
use crate::gf2::{resolve_code, LinearCode, Syndrome, Word};
use crate::minsum::{MinSumDecoder, DEFAULT_MAX_ITER};
use crate::optimize::{optimize_hamiltonian, BfgsOptions, DEFAULT_STARTS};
use crate::oracle::ml_decode_random_ties;
use crate::qaoa::{CostHamiltonian, OutcomeDistribution, OutcomeSampler, SignConvention, MAX_QUBITS};
use crate::qebp::{fused_crossovers, plain_bp_decode, qaoa_bit_estimates, QebpMode};

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

const STREAM_ERROR: u64 = 0;
const STREAM_CODEWORD: u64 = 1;
const STREAM_DECODER: u64 = 2;
const SYNDROME_TAG: u64 = 0x5359_4e44;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "bp")]
    Bp,
    #[serde(rename = "qaoa")]
    Qaoa,
    #[serde(rename = "qaoa_postsel")]
    QaoaPostsel,
    #[serde(rename = "qebp")]
    Qebp,
    #[serde(rename = "qebp_1s")]
    Qebp1s,
    #[serde(rename = "ml")]
    Ml,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 6] = [
        Self::Bp,
        Self::Qaoa,
        Self::QaoaPostsel,
        Self::Qebp,
        Self::Qebp1s,
        Self::Ml,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bp => "bp",
            Self::Qaoa => "qaoa",
            Self::QaoaPostsel => "qaoa_postsel",
            Self::Qebp => "qebp",
            Self::Qebp1s => "qebp_1s",
            Self::Ml => "ml",
        }
    }

    pub fn uses_qaoa(self) -> bool {
        !matches!(self, Self::Bp | Self::Ml)
    }

    pub fn reports_iterations(self) -> bool {
        matches!(self, Self::Bp | Self::Qebp | Self::Qebp1s)
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    /// Accepts both `qaoa_postsel` and `qaoa-postsel` spellings.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == norm)
            .ok_or_else(|| Error::Spec(format!("unknown decoder {s:?}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Optimise the angles separately for every syndrome.
    #[default]
    PerSyndrome,
    /// Use the same angles for every syndrome.
    Fixed { gammas: Vec<f64>, betas: Vec<f64> },
}

fn default_p() -> usize {
    1
}
fn default_alpha() -> f64 {
    1.0
}
fn default_eta() -> f64 {
    2.0
}
fn default_shots() -> usize {
    10_000
}
fn default_trials() -> usize {
    10_000
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_starts() -> usize {
    DEFAULT_STARTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Bundled code id (`reg_12_8`, `irr_12_8`, `rep_N`) or a matrix file.
    pub code_id: String,
    pub decoder: DecoderKind,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_shots")]
    pub shots: usize,
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub param_mode: ParamMode,
    #[serde(default)]
    pub sign_convention: SignConvention,
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// Transmit a uniformly random codeword instead of the zero word.
    #[serde(default)]
    pub random_codeword: bool,
    /// Estimate the QEBP marginals from `shots` samples.
    #[serde(default)]
    pub shot_marginals: bool,
}

impl ExperimentSpec {
    pub fn new(code_id: &str, decoder: DecoderKind, snr_grid_db: Vec<f64>) -> Self {
        Self {
            code_id: code_id.to_string(),
            decoder,
            p: default_p(),
            alpha: default_alpha(),
            eta: default_eta(),
            shots: default_shots(),
            snr_grid_db,
            trials: default_trials(),
            max_iter: default_max_iter(),
            master_seed: 0,
            param_mode: ParamMode::PerSyndrome,
            sign_convention: SignConvention::MainText,
            starts: default_starts(),
            random_codeword: false,
            shot_marginals: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks the spec and returns the resolved code.
    pub fn validate(&self) -> Result<LinearCode> {
        let bad = |m: String| Err(Error::Spec(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_grid_db.is_empty() {
            return bad("snr_grid_db must not be empty".into());
        }
        if let Some(x) = self.snr_grid_db.iter().find(|x| x.is_nan() || **x == f64::INFINITY) {
            return bad(format!("invalid SNR grid value {x}"));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        let code = resolve_code(&self.code_id).map_err(|e| Error::Spec(format!("code {:?}: {e}", self.code_id)))?;
        if self.decoder.uses_qaoa() {
            if self.p == 0 {
                return bad("p must be at least 1 for QAOA decoders".into());
            }
            if code.n() > MAX_QUBITS {
                return bad(format!("code length {} exceeds {MAX_QUBITS} qubits", code.n()));
            }
            if !(self.alpha.is_finite() && self.eta.is_finite()) {
                return bad("alpha and eta must be finite".into());
            }
            let needs_shots = !matches!(self.decoder, DecoderKind::Qebp) || self.shot_marginals;
            if needs_shots && self.shots == 0 {
                return bad("shots must be at least 1".into());
            }
            match &self.param_mode {
                ParamMode::PerSyndrome if self.starts == 0 => return bad("starts must be at least 1".into()),
                ParamMode::Fixed { gammas, betas } if gammas.len() != self.p || betas.len() != self.p => {
                    return bad(format!(
                        "fixed parameters need {} gammas and betas, got {} and {}",
                        self.p,
                        gammas.len(),
                        betas.len()
                    ))
                }
                ParamMode::Fixed { gammas, betas } if gammas.iter().chain(betas).any(|v| !v.is_finite()) => {
                    return bad("fixed parameters must be finite".into())
                }
                _ => {}
            }
        }
        if self.decoder == DecoderKind::Ml || self.random_codeword {
            code.codewords().map_err(|e| Error::Spec(e.to_string()))?;
        }
        Ok(code)
    }

    pub fn qaoa_settings(&self) -> QaoaSettings {
        QaoaSettings {
            p: self.p,
            alpha: self.alpha,
            eta: self.eta,
            convention: self.sign_convention,
            starts: self.starts,
            master_seed: self.master_seed,
            param_mode: self.param_mode.clone(),
        }
    }
}

/// SplitMix64 finaliser.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial, independent of scheduling.
pub fn trial_seed(master_seed: u64, snr_index: usize, trial_index: usize) -> u64 {
    splitmix(splitmix(splitmix(master_seed) ^ snr_index as u64) ^ trial_index as u64)
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ stream.wrapping_mul(0xd1b5_4a32_d192_ed03)))
}

/// Everything that determines the cached QAOA data for a syndrome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaSettings {
    pub p: usize,
    pub alpha: f64,
    pub eta: f64,
    pub convention: SignConvention,
    pub starts: usize,
    pub master_seed: u64,
    pub param_mode: ParamMode,
}

#[derive(Clone, Debug)]
pub struct CachedSyndrome {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cost: f64,
    pub dist: OutcomeDistribution<f64>,
    sampler: OutcomeSampler,
}

impl CachedSyndrome {
    /// Entry for a given distribution, e.g. one not produced by QAOA.
    pub fn from_distribution(gammas: Vec<f64>, betas: Vec<f64>, cost: f64, dist: OutcomeDistribution<f64>) -> Self {
        let sampler = dist.sampler();
        Self {
            gammas,
            betas,
            cost,
            dist,
            sampler,
        }
    }

    pub fn sampler(&self) -> &OutcomeSampler {
        &self.sampler
    }
}

/// QAOA angles and outcome distributions keyed by packed syndrome index.
#[derive(Clone, Debug)]
pub struct SyndromeCache {
    code: LinearCode,
    settings: QaoaSettings,
    entries: BTreeMap<u64, Arc<CachedSyndrome>>,
}

impl SyndromeCache {
    pub fn new(code: LinearCode, settings: QaoaSettings) -> Self {
        Self {
            code,
            settings,
            entries: BTreeMap::new(),
        }
    }

    pub fn settings(&self) -> &QaoaSettings {
        &self.settings
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, syndrome_index: u64) -> Option<&Arc<CachedSyndrome>> {
        self.entries.get(&syndrome_index)
    }

    /// Computes every missing entry, in parallel across syndromes.
    pub fn ensure(&mut self, syndromes: impl IntoIterator<Item = u64>) -> Result<()> {
        let missing: Vec<u64> = syndromes
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|s| !self.entries.contains_key(s))
            .collect();
        if missing.is_empty() {
            return Ok(());
        }
        log::info!("preparing QAOA data for {} syndromes", missing.len());
        let started = Instant::now();
        let built: Vec<Result<(u64, CachedSyndrome)>> = missing.par_iter().map(|&s| Ok((s, self.build(s)?))).collect();
        for item in built {
            let (s, entry) = item?;
            self.entries.insert(s, Arc::new(entry));
        }
        log::info!("QAOA data ready after {:.1?}", started.elapsed());
        Ok(())
    }

    fn build(&self, syndrome_index: u64) -> Result<CachedSyndrome> {
        let st = &self.settings;
        let s = Syndrome::from_index(syndrome_index, self.code.r());
        let h = CostHamiltonian::new(&self.code, &s, st.alpha, st.eta, st.convention)?;
        let (gammas, betas, cost) = match &st.param_mode {
            ParamMode::PerSyndrome => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(splitmix(splitmix(st.master_seed ^ SYNDROME_TAG) ^ syndrome_index));
                let r = optimize_hamiltonian(&h, st.p, st.starts, &mut rng, &BfgsOptions::default())?;
                (r.gammas, r.betas, r.cost)
            }
            ParamMode::Fixed { gammas, betas } => {
                let cost = h.expectation(gammas, betas)?;
                (gammas.clone(), betas.clone(), cost)
            }
        };
        let dist = h.evolve(&gammas, &betas)?.distribution();
        Ok(CachedSyndrome::from_distribution(gammas, betas, cost, dist))
    }
}

/// Dense shot histogram; returns the highest-count index accepted by `keep`
/// (smallest index on ties) or `None` if no sampled index qualifies.
fn sample_top<R: Rng + ?Sized>(
    sampler: &OutcomeSampler,
    space: usize,
    shots: usize,
    rng: &mut R,
    mut keep: impl FnMut(u64) -> bool,
) -> (Option<u64>, u64) {
    let mut counts = vec![0u32; space];
    for _ in 0..shots {
        counts[sampler.sample_index(rng) as usize] += 1;
    }
    let mut best: Option<(u64, u32)> = None;
    let mut overall = (0u64, 0u32);
    for (z, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if c > overall.1 {
            overall = (z as u64, c);
        }
        if best.is_none_or(|(_, bc)| c > bc) && keep(z as u64) {
            best = Some((z as u64, c));
        }
    }
    (best.map(|b| b.0), overall.0)
}

/// QAOA syndrome decoding: the most frequent sampled error pattern.
pub fn qaoa_decode<R: Rng + ?Sized>(y: &Word, entry: &CachedSyndrome, shots: usize, rng: &mut R) -> Word {
    let n = y.len();
    let (_, top) = sample_top(&entry.sampler, 1 << n, shots, rng, |_| true);
    y.xor(&Word::from_index(top, n))
}

/// QAOA decoding with post-selection on patterns that reproduce the
/// syndrome. Returns the decoded word and whether it fell back to the
/// overall top string because no sample qualified.
pub fn qaoa_postsel_decode<R: Rng + ?Sized>(
    code: &LinearCode,
    y: &Word,
    entry: &CachedSyndrome,
    shots: usize,
    rng: &mut R,
) -> Result<(Word, bool)> {
    let n = y.len();
    let masks = code.basis_row_masks();
    let target = code.syndrome(y)?.to_index();
    let (best, top) = sample_top(&entry.sampler, 1 << n, shots, rng, |z| {
        code.syndrome_of_index(&masks, z) == target
    });
    let fallback = best.is_none();
    if fallback {
        log::debug!("no sampled pattern reproduces syndrome {target:b}; using overall top");
    }
    Ok((y.xor(&Word::from_index(best.unwrap_or(top), n)), fallback))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub block_error: bool,
    pub iterations: Option<usize>,
    pub opt_cost: Option<f64>,
    pub postsel_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `errors` out of `trials`, widened if needed so
/// it always contains the point estimate.
pub fn wilson_interval(errors: usize, trials: usize, z: f64) -> WilsonInterval {
    if trials == 0 {
        return WilsonInterval { lo: 0.0, hi: 1.0 };
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    WilsonInterval {
        lo: (center - half).max(0.0).min(p),
        hi: (center + half).min(1.0).max(p),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrRecord {
    pub eb_n0_db: f64,
    pub epsilon: f64,
    pub epsilon_clamped: bool,
    pub trials: usize,
    pub errors: usize,
    pub bler: f64,
    pub bler_lo: f64,
    pub bler_hi: f64,
    pub mean_iters: Option<f64>,
    pub mean_opt_cost: Option<f64>,
    pub postsel_fallbacks: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub spec: ExperimentSpec,
    pub code_n: usize,
    pub code_k: usize,
    pub points: Vec<SnrRecord>,
    pub wall_time_s: f64,
    pub software_version: String,
}

impl ExperimentRecord {
    /// Equality ignoring wall time.
    pub fn same_results(&self, other: &Self) -> bool {
        self.spec == other.spec && self.points == other.points && self.code_n == other.code_n
    }
}

/// Output of one decoder run on one received word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodedWord {
    pub decoder: DecoderKind,
    pub word: Word,
    /// Whether the output is a codeword.
    pub converged: bool,
    pub iterations: Option<usize>,
    pub final_llrs: Option<Vec<f64>>,
    pub opt_cost: Option<f64>,
    pub postsel_fallback: bool,
}

/// Decodes `y` with the decoder named in `spec`. QAOA decoders look up the
/// syndrome of `y` in `cache`, which must already hold it.
pub fn decode_word<R: Rng + ?Sized>(
    spec: &ExperimentSpec,
    code: &LinearCode,
    decoder: &MinSumDecoder<'_>,
    cache: Option<&SyndromeCache>,
    eps: f64,
    y: &Word,
    rng: &mut R,
) -> Result<DecodedWord> {
    let entry = || -> Result<Arc<CachedSyndrome>> {
        let s = code.syndrome(y)?.to_index();
        cache
            .and_then(|c| c.get(s))
            .cloned()
            .ok_or_else(|| Error::Domain(format!("syndrome {s:b} missing from the QAOA cache")))
    };
    let mut out = DecodedWord {
        decoder: spec.decoder,
        word: y.clone(),
        converged: false,
        iterations: None,
        final_llrs: None,
        opt_cost: None,
        postsel_fallback: false,
    };
    match spec.decoder {
        DecoderKind::Bp => {
            let r = plain_bp_decode(code, y, eps, spec.max_iter)?;
            out.iterations = Some(r.iterations);
            out.final_llrs = Some(r.final_llrs.values);
            out.word = r.word;
        }
        DecoderKind::Ml => out.word = ml_decode_random_ties(code, y, eps, rng)?,
        DecoderKind::Qaoa => {
            let e = entry()?;
            out.opt_cost = Some(e.cost);
            out.word = qaoa_decode(y, &e, spec.shots, rng);
        }
        DecoderKind::QaoaPostsel => {
            let e = entry()?;
            out.opt_cost = Some(e.cost);
            let (w, fallback) = qaoa_postsel_decode(code, y, &e, spec.shots, rng)?;
            out.word = w;
            out.postsel_fallback = fallback;
        }
        DecoderKind::Qebp | DecoderKind::Qebp1s => {
            let e = entry()?;
            out.opt_cost = Some(e.cost);
            let estimates: Vec<f64> = if spec.decoder == DecoderKind::Qebp1s {
                let n = y.len();
                let (_, top) = sample_top(&e.sampler, 1 << n, spec.shots, rng, |_| true);
                Word::from_index(top, n).bits().iter().map(|&b| b as f64).collect()
            } else if spec.shot_marginals {
                qaoa_bit_estimates(&e.dist, QebpMode::ShotMarginal, spec.shots, rng)?
            } else {
                e.dist.marginal_error_probs()
            };
            let per_bit = fused_crossovers(eps, &estimates)?;
            let r = decoder.decode(y, &per_bit, spec.max_iter)?;
            out.iterations = Some(r.iterations);
            out.final_llrs = Some(r.final_llrs.values);
            out.word = r.word;
        }
    }
    out.converged = code.is_codeword(&out.word)?;
    Ok(out)
}

/// Runs one decoding trial with a ready syndrome cache.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    spec: &ExperimentSpec,
    code: &LinearCode,
    decoder: &MinSumDecoder<'_>,
    cache: Option<&SyndromeCache>,
    bsc: &BscParams,
    x: &Word,
    y: &Word,
    decoder_seed: u64,
) -> Result<TrialOutcome> {
    let mut rng = stream(decoder_seed, STREAM_DECODER);
    let d = decode_word(spec, code, decoder, cache, bsc.epsilon, y, &mut rng)?;
    Ok(TrialOutcome {
        block_error: &d.word != x,
        iterations: d.iterations,
        opt_cost: d.opt_cost,
        postsel_fallback: d.postsel_fallback,
    })
}

struct PreparedTrial {
    x: Word,
    y: Word,
    seed: u64,
}

fn prepare_trial(spec: &ExperimentSpec, code: &LinearCode, bsc: &BscParams, seed: u64) -> Result<PreparedTrial> {
    let n = code.n();
    let e = sample_bsc_error(n, bsc, &mut stream(seed, STREAM_ERROR));
    let x = if spec.random_codeword {
        let words = code.codewords()?;
        words[stream(seed, STREAM_CODEWORD).gen_range(0..words.len())].clone()
    } else {
        Word::zeros(n)
    };
    let y = x.xor(&e);
    Ok(PreparedTrial { x, y, seed })
}

/// Full sweep with a fresh cache.
pub fn run_bler_sweep(spec: &ExperimentSpec) -> Result<ExperimentRecord> {
    let code = spec.validate()?;
    let mut cache = SyndromeCache::new(code, spec.qaoa_settings());
    run_bler_sweep_with_cache(spec, &mut cache)
}

/// Full sweep reusing (and extending) `cache`, which must have been built for
/// the same code and QAOA settings.
pub fn run_bler_sweep_with_cache(spec: &ExperimentSpec, cache: &mut SyndromeCache) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let code = spec.validate()?;
    if spec.decoder.uses_qaoa() && (cache.code != code || cache.settings != spec.qaoa_settings()) {
        return Err(Error::Spec(
            "syndrome cache was built for different QAOA settings".into(),
        ));
    }
    let grid: Vec<BscParams> = spec
        .snr_grid_db
        .iter()
        .map(|&db| crossover_from_snr(SnrPoint::db(db)))
        .collect::<Result<_>>()?;

    let wrap = |snr_index: usize, trial: usize| {
        move |e: Error| Error::Trial {
            snr_index,
            trial,
            source: Box::new(e),
        }
    };

    let mut prepared: Vec<Vec<PreparedTrial>> = Vec::with_capacity(grid.len());
    for (si, bsc) in grid.iter().enumerate() {
        let trials = (0..spec.trials)
            .into_par_iter()
            .map(|t| prepare_trial(spec, &code, bsc, trial_seed(spec.master_seed, si, t)).map_err(wrap(si, t)))
            .collect::<Result<Vec<_>>>()?;
        prepared.push(trials);
    }
    if spec.decoder.uses_qaoa() {
        let mut needed = BTreeSet::new();
        for t in prepared.iter().flatten() {
            needed.insert(code.syndrome(&t.y)?.to_index());
        }
        cache.ensure(needed)?;
    }

    let decoder = MinSumDecoder::new(&code);
    let cache_ref = spec.decoder.uses_qaoa().then_some(&*cache);
    let mut points = Vec::with_capacity(grid.len());
    for (si, (bsc, trials)) in grid.iter().zip(&prepared).enumerate() {
        let outcomes = trials
            .par_iter()
            .enumerate()
            .map(|(t, p)| run_trial(spec, &code, &decoder, cache_ref, bsc, &p.x, &p.y, p.seed).map_err(wrap(si, t)))
            .collect::<Result<Vec<_>>>()?;
        points.push(aggregate(spec, spec.snr_grid_db[si], bsc, &outcomes));
        log::info!(
            "{} {} dB: bler {:.4e}",
            spec.decoder,
            spec.snr_grid_db[si],
            points[si].bler
        );
    }
    Ok(ExperimentRecord {
        spec: spec.clone(),
        code_n: code.n(),
        code_k: code.k(),
        points,
        wall_time_s: started.elapsed().as_secs_f64(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

fn aggregate(spec: &ExperimentSpec, eb_n0_db: f64, bsc: &BscParams, outcomes: &[TrialOutcome]) -> SnrRecord {
    let trials = outcomes.len();
    let errors = outcomes.iter().filter(|o| o.block_error).count();
    let mean = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    let ci = wilson_interval(errors, trials, WILSON_Z);
    SnrRecord {
        eb_n0_db,
        epsilon: bsc.epsilon,
        epsilon_clamped: bsc.clamped,
        trials,
        errors,
        bler: errors as f64 / trials as f64,
        bler_lo: ci.lo,
        bler_hi: ci.hi,
        mean_iters: mean(outcomes.iter().filter_map(|o| o.iterations.map(|i| i as f64)).collect()),
        mean_opt_cost: mean(outcomes.iter().filter_map(|o| o.opt_cost).collect()),
        postsel_fallbacks: (spec.decoder == DecoderKind::QaoaPostsel)
            .then(|| outcomes.iter().filter(|o| o.postsel_fallback).count()),
    }
}

pub const CSV_HEADER: &str = "code,decoder,p,eb_n0_db,bler,bler_lo,bler_hi,mean_iters,trials,seed";

/// CSV rows for the given records, header first.
pub fn to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        for pt in &r.points {
            let iters = pt.mean_iters.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.spec.code_id,
                r.spec.decoder,
                r.spec.p,
                pt.eb_n0_db,
                pt.bler,
                pt.bler_lo,
                pt.bler_hi,
                iters,
                pt.trials,
                r.spec.master_seed
            ));
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)
}

pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    write_file(path, &to_csv(records))
}

pub fn emit_json(record: &ExperimentRecord, path: &Path) -> Result<()> {
    write_file(path, &serde_json::to_string_pretty(record)?)
}

pub fn load_json(path: &Path) -> Result<ExperimentRecord> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}
