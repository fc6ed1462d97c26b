//! Exact analytics for level-1 QAOA syndrome decoding of the `[n, 1]`
//! repetition code.
//!
//! The probability of measuring the true error string `e` factorises as a
//! chain of 2x2 transfer matrices,
//!
//! ```text
//! P(e | s(e)) = 2^-n | psi(beta)^T exp(-i (-1)^(e_n) alpha gamma Z) T_(e_(n-1)) ... T_(e_1) psi(beta) |^2
//! ```
//!
//! with `psi(beta) = (sqrt(cos beta), sqrt(-i sin beta))` on principal
//! branches. The left boundary is written as a plain transpose of
//! `psi(beta)`; it coincides with the conjugate of `psi(-beta)` whenever
//! `cos beta >= 0` and stays correct for `beta` in `(pi/2, pi)` where the
//! conjugate does not.
//!
//! Everything here uses the plus-sign (appendix) cost convention.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{repetition_code, Word};
use crate::qaoa::{CostHamiltonian, SignConvention};
use crate::scalar::Real;

/// Shared level-1 parameters found by maximising `|lambda_(0,+)|`.
pub const SHARED_GAMMA: f64 = 0.19419;
pub const SHARED_BETA: f64 = 0.506185;

/// Largest length for the `2^n` analytic sums.
pub const MAX_ANALYTIC_N: usize = 23;
/// Largest length for the ranking strategy, which needs one full
/// statevector per syndrome.
pub const MAX_RANKING_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepParams<T> {
    pub alpha: T,
    pub eta: T,
    pub gamma: T,
    pub beta: T,
}

impl RepParams<f64> {
    /// `alpha = 1`, `eta = 2` with the shared angles.
    pub fn shared() -> Self {
        Self {
            alpha: 1.0,
            eta: 2.0,
            gamma: SHARED_GAMMA,
            beta: SHARED_BETA,
        }
    }
}

impl<T: Real> RepParams<T> {
    pub fn new(alpha: T, eta: T, gamma: T, beta: T) -> Self {
        Self {
            alpha,
            eta,
            gamma,
            beta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix<T> {
    pub entries: [[Complex<T>; 2]; 2],
}

impl<T: Real> TransferMatrix<T> {
    pub fn apply(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        let m = &self.entries;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Self {
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Frobenius norm, an upper bound on the spectral radius.
    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().flatten().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }
}

fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

fn parity_sign<T: Real>(bit: u8) -> T {
    if bit & 1 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `psi(beta) = (sqrt(cos beta), sqrt(-i sin beta))`, principal roots.
pub fn boundary_vector<T: Real>(beta: T) -> [Complex<T>; 2] {
    let (s, c) = beta.sin_cos();
    [Complex::new(c, T::zero()).sqrt(), Complex::new(T::zero(), -s).sqrt()]
}

/// Transfer matrix for one chain site with error bit `e_bit`.
pub fn transfer_matrix<T: Real>(e_bit: u8, params: &RepParams<T>) -> TransferMatrix<T> {
    let RepParams {
        alpha,
        eta,
        gamma,
        beta,
    } = *params;
    let se = parity_sign::<T>(e_bit);
    let (s, c) = beta.sin_cos();
    // sqrt(cos b) sqrt(-i sin b) rather than the principal root of their
    // product: the two differ by a sign when cos b and sin b are both negative
    let [r0, r1] = boundary_vector(beta);
    let off = r0 * r1;
    let minus_i = Complex::new(T::zero(), -T::one());
    TransferMatrix {
        entries: [
            [
                cis(-gamma * (eta + se * alpha)) * c,
                off * cis(-gamma * (-eta - se * alpha)),
            ],
            [
                off * cis(-gamma * (-eta + se * alpha)),
                minus_i * s * cis(-gamma * (eta - se * alpha)),
            ],
        ],
    }
}

fn last_site_phase<T: Real>(e_last: u8, params: &RepParams<T>, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
    let theta = parity_sign::<T>(e_last) * params.alpha * params.gamma;
    [v[0] * cis(-theta), v[1] * cis(theta)]
}

fn close_chain<T: Real>(e_last: u8, params: &RepParams<T>, v: [Complex<T>; 2], left: &[Complex<T>; 2]) -> T {
    let v = last_site_phase(e_last, params, v);
    (left[0] * v[0] + left[1] * v[1]).norm_sqr()
}

/// Probability that level-1 QAOA returns exactly `e` given the syndrome of `e`.
pub fn success_probability<T: Real>(e: &Word, params: &RepParams<T>) -> Result<T> {
    let n = e.len();
    if n < 2 {
        return Err(Error::Domain(format!("repetition code needs n >= 2, got {n}")));
    }
    let psi = boundary_vector(params.beta);
    let t = [transfer_matrix(0, params), transfer_matrix(1, params)];
    let mut v = psi;
    for &b in &e.bits()[..n - 1] {
        v = t[b as usize].apply(v);
    }
    let scale = T::lit(2f64.powi(-(n as i32)));
    Ok(scale * close_chain(e.get(n - 1), params, v, &psi))
}

/// `P(e | s(e))` for every `e` in basis-index order (bit 0 most significant).
///
/// Walks the strings depth-first so each prefix product is computed once.
pub fn success_table<T: Real>(n: usize, params: &RepParams<T>) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::Domain(format!("repetition code needs n >= 2, got {n}")));
    }
    if n > MAX_ANALYTIC_N {
        return Err(Error::Capacity {
            what: "repetition length for exhaustive sums",
            actual: n,
            limit: MAX_ANALYTIC_N,
        });
    }
    let psi = boundary_vector(params.beta);
    let t = [transfer_matrix(0, params), transfer_matrix(1, params)];
    let scale = T::lit(2f64.powi(-(n as i32)));
    let mut out = Vec::with_capacity(1 << n);
    // prefix[d] is the vector after the first d sites
    let mut prefix = vec![psi; n];
    fn walk<T: Real>(
        depth: usize,
        n: usize,
        t: &[TransferMatrix<T>; 2],
        prefix: &mut Vec<[Complex<T>; 2]>,
        params: &RepParams<T>,
        psi: &[Complex<T>; 2],
        scale: T,
        out: &mut Vec<T>,
    ) {
        if depth == n - 1 {
            for last in 0..2u8 {
                out.push(scale * close_chain(last, params, prefix[depth], psi));
            }
            return;
        }
        for b in 0..2 {
            prefix[depth + 1] = t[b].apply(prefix[depth]);
            walk(depth + 1, n, t, prefix, params, psi, scale, out);
        }
    }
    walk(0, n, &t, &mut prefix, params, &psi, scale, &mut out);
    Ok(out)
}

/// Eigenvalues `(lambda_+, lambda_-)` of `T_e` from its trace and determinant;
/// `lambda_+` has the larger modulus (larger real part on ties).
pub fn transfer_eigenvalues<T: Real>(e_bit: u8, params: &RepParams<T>) -> (Complex<T>, Complex<T>) {
    let m = transfer_matrix(e_bit, params);
    let tr = m.trace();
    let disc = (tr * tr - m.det() * T::lit(4.0)).sqrt();
    let half = T::lit(0.5);
    let a = (tr + disc) * half;
    let b = (tr - disc) * half;
    let (na, nb) = (a.norm(), b.norm());
    if na > nb || (na == nb && a.re >= b.re) {
        (a, b)
    } else {
        (b, a)
    }
}

/// The closed-form eigenvalue expression as printed alongside the transfer
/// matrix. It disagrees with the numerically exact eigenvalues and is kept
/// only for comparison logging.
pub fn printed_eigenvalues(e_bit: u8, params: &RepParams<f64>) -> (Complex<f64>, Complex<f64>) {
    let RepParams {
        alpha,
        eta,
        gamma,
        beta,
    } = *params;
    let i = Complex::new(0.0, 1.0);
    let se = parity_sign::<f64>(e_bit);
    let (ca, sa) = ((alpha * gamma).cos(), (alpha * gamma).sin());
    let lead = (cis(-beta) * ca - i * se * sa * cis(beta)) * cis(-gamma * eta) * 0.5;
    let radicand = -i * 2.0 * (2.0 * beta).sin() * cis(gamma * eta)
        + (cis(2.0 * beta) * ca * ca - cis(-2.0 * beta) * sa * sa - i * se * sa) * cis(-gamma * eta);
    let root = radicand.sqrt() * 0.5;
    (lead + root, lead - root)
}

/// Result of maximising `|lambda_(0,+)|` over the shared angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedParameters {
    pub gamma: f64,
    pub beta: f64,
    pub modulus: f64,
}

fn lambda0_modulus(alpha: f64, eta: f64, gamma: f64, beta: f64) -> f64 {
    transfer_eigenvalues(0, &RepParams::new(alpha, eta, gamma, beta))
        .0
        .norm()
}

fn compass_ascent(alpha: f64, eta: f64, start: (f64, f64), step: (f64, f64)) -> SharedParameters {
    use std::f64::consts::PI;
    let (mut g, mut b) = start;
    let mut f = lambda0_modulus(alpha, eta, g, b);
    let (mut sg, mut sb) = step;
    while sg > 1e-13 || sb > 1e-13 {
        let mut moved = false;
        for (cg, cb) in [(g + sg, b), (g - sg, b), (g, b + sb), (g, b - sb)] {
            let fc = lambda0_modulus(alpha, eta, cg, cb);
            if fc > f {
                (g, b, f) = (cg, cb, fc);
                moved = true;
                break;
            }
        }
        if !moved {
            sg *= 0.5;
            sb *= 0.5;
        }
    }
    SharedParameters {
        gamma: g.rem_euclid(2.0 * PI),
        beta: b.rem_euclid(PI),
        modulus: f,
    }
}

/// Maximises `|lambda_(0,+)|` over `[0, 2 pi) x [0, pi)`: a 256 x 128 grid
/// seeds a shrinking compass search from the best few cells.
pub fn optimize_shared_parameters(alpha: f64, eta: f64) -> SharedParameters {
    use std::f64::consts::PI;
    let (gr, br) = (256usize, 128usize);
    let (dg, db) = (2.0 * PI / gr as f64, PI / br as f64);
    let mut cells: Vec<(f64, f64, f64)> = (0..gr)
        .flat_map(|a| (0..br).map(move |b| (a as f64 * dg, b as f64 * db)))
        .map(|(g, b)| (lambda0_modulus(alpha, eta, g, b), g, b))
        .collect();
    cells.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut best = SharedParameters {
        gamma: cells[0].1,
        beta: cells[0].2,
        modulus: cells[0].0,
    };
    for &(_, g0, b0) in cells.iter().take(8) {
        let cand = compass_ascent(alpha, eta, (g0, b0), (dg, db));
        if cand.modulus > best.modulus {
            best = cand;
        }
    }
    best
}

/// Local ascent of `|lambda_(0,+)|` from a given starting point.
///
/// The landscape has several tiers of local maxima; starting near the origin
/// lands on the `(0.19419, 0.506185)` tier rather than the global one.
pub fn refine_shared_parameters(alpha: f64, eta: f64, gamma: f64, beta: f64) -> SharedParameters {
    compass_ascent(alpha, eta, (gamma, beta), (0.01, 0.01))
}

/// Which error strings enter the block-error sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumDomain {
    /// All strings except the two constant ones.
    #[default]
    ExcludeConstant,
    /// Every string, including the error-free one (sensitivity variant).
    IncludeZeroError,
}

impl SumDomain {
    fn includes(self, index: u64, n: usize) -> bool {
        match self {
            Self::ExcludeConstant => index != 0 && index != (1u64 << n) - 1,
            Self::IncludeZeroError => true,
        }
    }
}

fn weight_probs(n: usize, eps: f64) -> Vec<f64> {
    (0..=n)
        .map(|m| eps.powi(m as i32) * (1.0 - eps).powi((n - m) as i32))
        .collect()
}

// every BLER below is a sum of non-negative terms that can round a few ulps
// past 1, hence the final `min(1.0)`

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("crossover {eps} outside [0, 1]")));
    }
    Ok(())
}

/// Expected block error rate of a single QAOA run.
pub fn bler_one_sample(n: usize, eps: f64, params: &RepParams<f64>, domain: SumDomain) -> Result<f64> {
    check_eps(eps)?;
    let table = success_table(n, params)?;
    let pw = weight_probs(n, eps);
    Ok(table
        .iter()
        .enumerate()
        .filter(|(z, _)| domain.includes(*z as u64, n))
        .map(|(z, &p)| pw[(z as u64).count_ones() as usize] * (1.0 - p))
        .sum::<f64>()
        .min(1.0))
}

/// Expected block error rate when non-codeword outputs are discarded.
pub fn bler_post_selection(n: usize, eps: f64, params: &RepParams<f64>, domain: SumDomain) -> Result<f64> {
    check_eps(eps)?;
    let table = success_table(n, params)?;
    let pw = weight_probs(n, eps);
    let all = (1u64 << n) - 1;
    let mut total = 0.0;
    for (z, &p) in table.iter().enumerate() {
        let z = z as u64;
        if !domain.includes(z, n) {
            continue;
        }
        let q = table[(z ^ all) as usize];
        let denom = p + q;
        if denom < 1e-300 {
            log::warn!("post-selection denominator underflow for string {z:b}; term skipped");
            continue;
        }
        total += pw[z.count_ones() as usize] * q / denom;
    }
    Ok(total.min(1.0))
}

/// How the ranking indicator is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMode {
    /// Infinite-shot limit: succeed iff the true string is the unique mode.
    Expected,
    /// Draw `rounds` shots per string and rank the empirical counts.
    MonteCarlo { seed: u64 },
}

/// Level-1 QAOA outcome distributions for every syndrome of the length-`n`
/// repetition code, keyed by the index of either error string of the pair.
fn syndrome_distributions(n: usize, params: &RepParams<f64>) -> Result<Vec<Vec<f64>>> {
    if n > MAX_RANKING_N {
        return Err(Error::Capacity {
            what: "repetition length for ranking",
            actual: n,
            limit: MAX_RANKING_N,
        });
    }
    let code = repetition_code(n)?;
    // e and its complement share a syndrome; enumerate e with leading bit 0
    (0..1u64 << (n - 1))
        .map(|z| {
            let s = code.syndrome(&Word::from_index(z, n))?;
            let h = CostHamiltonian::new(&code, &s, params.alpha, params.eta, SignConvention::Appendix)?;
            Ok(h.evolve(&[params.gamma], &[params.beta])?
                .distribution()
                .probs()
                .to_vec())
        })
        .collect()
}

/// Expected block error rate of ranking `rounds` shots by frequency.
pub fn bler_ranking(
    n: usize,
    eps: f64,
    rounds: usize,
    params: &RepParams<f64>,
    mode: RankingMode,
    domain: SumDomain,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("repetition code needs n >= 2, got {n}")));
    }
    let dists = syndrome_distributions(n, params)?;
    bler_ranking_from_distributions(n, eps, rounds, &dists, mode, domain)
}

/// [`bler_ranking`] with caller-supplied outcome distributions, one per
/// syndrome, indexed by the error string of that syndrome whose first bit
/// is 0.
pub fn bler_ranking_from_distributions(
    n: usize,
    eps: f64,
    rounds: usize,
    dists: &[Vec<f64>],
    mode: RankingMode,
    domain: SumDomain,
) -> Result<f64> {
    check_eps(eps)?;
    if rounds == 0 {
        return Err(Error::Domain("ranking needs at least one round".into()));
    }
    if n < 2 {
        return Err(Error::Domain(format!("repetition code needs n >= 2, got {n}")));
    }
    check_len(1 << (n - 1), dists.len(), "number of syndrome distributions")?;
    if let Some(d) = dists.iter().find(|d| d.len() != 1 << n) {
        check_len(1 << n, d.len(), "distribution length")?;
    }
    let pw = weight_probs(n, eps);
    let all = (1u64 << n) - 1;
    let mut rng = match mode {
        RankingMode::MonteCarlo { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        RankingMode::Expected => None,
    };
    let mut total = 0.0;
    for z in 0..=all {
        if !domain.includes(z, n) {
            continue;
        }
        let canonical = if z >> (n - 1) == 1 { z ^ all } else { z };
        let probs = &dists[canonical as usize];
        let failed = match rng.as_mut() {
            None => {
                let pz = probs[z as usize];
                let tol = 1e-12 * pz.abs().max(f64::MIN_POSITIVE);
                probs.iter().enumerate().any(|(i, &p)| i as u64 != z && p >= pz - tol)
            }
            Some(rng) => !empirical_mode_is(probs, z, rounds, rng),
        };
        if failed {
            total += pw[z.count_ones() as usize];
        }
    }
    Ok(total.min(1.0))
}

/// Samples `rounds` shots and reports whether `target` is the unique most
/// frequent outcome.
fn empirical_mode_is<R: Rng>(probs: &[f64], target: u64, rounds: usize, rng: &mut R) -> bool {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let mut counts = vec![0u32; probs.len()];
    for _ in 0..rounds {
        let u = rng.gen::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[i] += 1;
    }
    let target_count = counts[target as usize];
    target_count > 0
        && counts
            .iter()
            .enumerate()
            .all(|(i, &c)| i as u64 == target || c < target_count)
}

/// Majority-vote block error rate, `sum_{m > n/2} C(n, m) eps^m (1-eps)^(n-m)`.
pub fn bler_majority_vote(n: usize, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if n.is_multiple_of(2) {
        return Err(Error::Domain(format!("majority vote needs odd n, got {n}")));
    }
    let mut binom = 1.0f64;
    let mut total = 0.0;
    for m in 0..=n {
        if m > 0 {
            binom = binom * (n - m + 1) as f64 / m as f64;
        }
        if m > n / 2 {
            total += binom * eps.powi(m as i32) * (1.0 - eps).powi((n - m) as i32);
        }
    }
    Ok(total.min(1.0))
}

/// Expected number of QAOA rounds until post-selection sees a codeword.
///
/// With [`SumDomain::ExcludeConstant`] the weights are not renormalised,
/// matching the other block-error sums.
pub fn expected_rounds_postselection(n: usize, eps: f64, params: &RepParams<f64>, domain: SumDomain) -> Result<f64> {
    check_eps(eps)?;
    let table = success_table(n, params)?;
    let pw = weight_probs(n, eps);
    let all = (1u64 << n) - 1;
    let p_term: f64 = table
        .iter()
        .enumerate()
        .filter(|(z, _)| domain.includes(*z as u64, n))
        .map(|(z, &p)| pw[(z as u64).count_ones() as usize] * (p + table[(z as u64 ^ all) as usize]))
        .sum();
    Ok(1.0 / p_term)
}

/// Least-squares fit of `log2(y) = a x + b`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Domain("exponential fit needs at least two points".into()));
    }
    if points.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(Error::Domain("exponential fit needs positive values".into()));
    }
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y.log2()));
    let (mx, my) = (sx / m, sy / m);
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        (sxx + (x - mx).powi(2), sxy + (x - mx) * (y.log2() - my))
    });
    if sxx == 0.0 {
        return Err(Error::Domain("exponential fit needs distinct abscissae".into()));
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

/// Convenience: success probabilities for a list of strings of equal length.
pub fn success_probabilities(strings: &[Word], params: &RepParams<f64>) -> Result<Vec<f64>> {
    let Some(first) = strings.first() else {
        return Ok(Vec::new());
    };
    strings
        .iter()
        .map(|e| {
            check_len(first.len(), e.len(), "error string length")?;
            success_probability(e, params)
        })
        .collect()
}
