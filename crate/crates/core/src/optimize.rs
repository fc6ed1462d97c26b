//! Variational angle search: multistart BFGS on the QAOA cost expectation,
//! and an exhaustive level-1 grid used as an oracle.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{LinearCode, Syndrome};
use crate::qaoa::{CostHamiltonian, SignConvention};
use crate::scalar::Real;

pub const FD_STEP: f64 = 1e-5;
pub const COST_TOL: f64 = 1e-9;
pub const GRAD_TOL: f64 = 1e-7;
pub const MAX_ITER_PER_START: usize = 500;
pub const DEFAULT_STARTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartTrace {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cost: f64,
    pub starts_used: usize,
    pub trace: Vec<StartTrace>,
    /// Whether the angles were reduced into `[0, 2 pi) x [0, pi)`.
    pub reduced: bool,
}

/// Minimiser settings; the defaults are the ones the harness uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsOptions {
    pub fd_step: f64,
    pub cost_tol: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            fd_step: FD_STEP,
            cost_tol: COST_TOL,
            grad_tol: GRAD_TOL,
            max_iter: MAX_ITER_PER_START,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Central-difference gradient.
pub fn fd_gradient<F: Fn(&[f64]) -> Result<f64>>(f: &F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe)?;
            probe[k] = x[k] - h;
            let down = f(&probe)?;
            probe[k] = x[k];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton minimisation with a backtracking Armijo line search and
/// finite-difference gradients. `f` returns an error for non-finite values.
pub fn bfgs<F: Fn(&[f64]) -> Result<f64>>(f: &F, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsOutcome> {
    bfgs_with_gradient(f, &|x: &[f64]| fd_gradient(f, x, opts.fd_step), x0, opts)
}

/// [`bfgs`] with a caller-supplied gradient.
pub fn bfgs_with_gradient<F, G>(f: &F, grad: &G, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let d = x0.len();
    let identity = |h: &mut Vec<f64>| {
        h.iter_mut().for_each(|v| *v = 0.0);
        (0..d).for_each(|i| h[i * d + i] = 1.0);
    };
    let mut hinv = vec![0.0; d * d];
    identity(&mut hinv);
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    let mut g = grad(&x)?;
    let mut fresh = true;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if dot(&g, &g).sqrt() < opts.grad_tol {
            break;
        }
        iterations += 1;
        let mut p: Vec<f64> = (0..d).map(|i| -dot(&hinv[i * d..(i + 1) * d], &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            identity(&mut hinv);
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let ft = f(&trial)?;
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            if fresh {
                break;
            }
            // retry once along steepest descent
            identity(&mut hinv);
            fresh = true;
            continue;
        };
        let gn = grad(&xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            let hy: Vec<f64> = (0..d).map(|i| dot(&hinv[i * d..(i + 1) * d], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..d {
                for j in 0..d {
                    hinv[i * d + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let delta = (fx - fxn).abs();
        x = xn;
        fx = fxn;
        g = gn;
        fresh = false;
        if delta < opts.cost_tol {
            break;
        }
    }
    Ok(BfgsOutcome {
        x,
        value: fx,
        iterations,
    })
}

fn objective<T: Real>(h: &CostHamiltonian<T>, p: usize) -> impl Fn(&[f64]) -> Result<f64> + '_ {
    move |x: &[f64]| {
        let gammas: Vec<T> = x[..p].iter().map(|&v| T::lit(v)).collect();
        let betas: Vec<T> = x[p..].iter().map(|&v| T::lit(v)).collect();
        let value = h.expectation(&gammas, &betas)?.to_f64_lossy();
        if !value.is_finite() {
            return Err(Error::Optimization {
                value,
                gammas: x[..p].to_vec(),
                betas: x[p..].to_vec(),
            });
        }
        Ok(value)
    }
}

/// True when every cost eigenvalue is an integer, so the expectation is
/// `2 pi`-periodic in each gamma. The mixer is always `pi`-periodic in beta
/// up to a global phase.
fn gradient<T: Real>(h: &CostHamiltonian<T>, p: usize) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    move |x: &[f64]| {
        let gammas: Vec<T> = x[..p].iter().map(|&v| T::lit(v)).collect();
        let betas: Vec<T> = x[p..].iter().map(|&v| T::lit(v)).collect();
        let (_, dg, db) = h.expectation_gradient(&gammas, &betas)?;
        let g: Vec<f64> = dg.iter().chain(&db).map(|v| v.to_f64_lossy()).collect();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Optimization {
                value: f64::NAN,
                gammas: x[..p].to_vec(),
                betas: x[p..].to_vec(),
            });
        }
        Ok(g)
    }
}

fn integer_spectrum<T: Real>(h: &CostHamiltonian<T>) -> bool {
    h.diag().iter().all(|&c| {
        let c = c.to_f64_lossy();
        (c - c.round()).abs() < 1e-9
    })
}

/// Multistart BFGS on the cost expectation, with adjoint gradients. Initial angles are uniform on
/// `[0, 2 pi) x [0, pi)`, one RNG stream per start seeded from `rng`; the
/// best final point wins, earlier starts on ties.
#[allow(clippy::too_many_arguments)]
pub fn optimize_parameters<T: Real, R: Rng + ?Sized>(
    code: &LinearCode,
    s: &Syndrome,
    p: usize,
    alpha: T,
    eta: T,
    convention: SignConvention,
    starts: usize,
    rng: &mut R,
) -> Result<OptResult> {
    let h = CostHamiltonian::new(code, s, alpha, eta, convention)?;
    optimize_hamiltonian(&h, p, starts, rng, &BfgsOptions::default())
}

pub fn optimize_hamiltonian<T: Real, R: Rng + ?Sized>(
    h: &CostHamiltonian<T>,
    p: usize,
    starts: usize,
    rng: &mut R,
    opts: &BfgsOptions,
) -> Result<OptResult> {
    if starts == 0 {
        return Err(Error::Domain("optimizer needs at least one start".into()));
    }
    if p == 0 {
        return Err(Error::Domain("QAOA level p must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..starts).map(|_| rng.gen()).collect();
    let f = objective(h, p);
    let df = gradient(h, p);
    let runs: Vec<Result<(StartTrace, Vec<f64>)>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let x0: Vec<f64> = (0..2 * p)
                .map(|k| {
                    if k < p {
                        r.gen::<f64>() * 2.0 * PI
                    } else {
                        r.gen::<f64>() * PI
                    }
                })
                .collect();
            let initial_cost = f(&x0)?;
            let out = bfgs_with_gradient(&f, &df, &x0, opts)?;
            let trace = StartTrace {
                gammas: x0[..p].to_vec(),
                betas: x0[p..].to_vec(),
                initial_cost,
                final_cost: out.value,
                iterations: out.iterations,
            };
            Ok((trace, out.x))
        })
        .collect();

    let mut trace = Vec::with_capacity(starts);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for run in runs {
        let (t, x) = run?;
        if best.as_ref().is_none_or(|(c, _)| t.final_cost < *c) {
            best = Some((t.final_cost, x));
        }
        trace.push(t);
    }
    let (cost, x) = best.expect("at least one start");
    let (mut gammas, mut betas) = (x[..p].to_vec(), x[p..].to_vec());

    let mut reduced = false;
    if integer_spectrum(h) {
        let g2: Vec<f64> = gammas.iter().map(|g| g.rem_euclid(2.0 * PI)).collect();
        let b2: Vec<f64> = betas.iter().map(|b| b.rem_euclid(PI)).collect();
        let x2: Vec<f64> = g2.iter().chain(&b2).copied().collect();
        if (f(&x2)? - cost).abs() <= 1e-9 * (1.0 + cost.abs()) {
            gammas = g2;
            betas = b2;
            reduced = true;
        }
    }
    if !reduced {
        log::debug!("optimized angles reported unreduced");
    }
    Ok(OptResult {
        gammas,
        betas,
        cost,
        starts_used: starts,
        trace,
        reduced,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub gamma: f64,
    pub beta: f64,
    pub cost: f64,
}

/// Exhaustive level-1 scan on a `resolution x resolution` grid over
/// `[0, 2 pi) x [0, pi)`; the first minimum in row-major order wins.
pub fn grid_scan<T: Real>(
    code: &LinearCode,
    s: &Syndrome,
    alpha: T,
    eta: T,
    resolution: usize,
    convention: SignConvention,
) -> Result<GridPoint> {
    let h = CostHamiltonian::new(code, s, alpha, eta, convention)?;
    grid_scan_hamiltonian(&h, resolution)
}

pub fn grid_scan_hamiltonian<T: Real>(h: &CostHamiltonian<T>, resolution: usize) -> Result<GridPoint> {
    if resolution < 8 {
        return Err(Error::Domain(format!(
            "grid resolution must be at least 8, got {resolution}"
        )));
    }
    let step_g = 2.0 * PI / resolution as f64;
    let step_b = PI / resolution as f64;
    let rows: Vec<Result<GridPoint>> = (0..resolution)
        .into_par_iter()
        .map(|a| {
            let gamma = a as f64 * step_g;
            let mut best = GridPoint {
                gamma,
                beta: 0.0,
                cost: f64::INFINITY,
            };
            for b in 0..resolution {
                let beta = b as f64 * step_b;
                let cost = h.expectation(&[T::lit(gamma)], &[T::lit(beta)])?.to_f64_lossy();
                if cost < best.cost {
                    best = GridPoint { gamma, beta, cost };
                }
            }
            Ok(best)
        })
        .collect();
    let mut best: Option<GridPoint> = None;
    for row in rows {
        let row = row?;
        if best.is_none_or(|b| row.cost < b.cost) {
            best = Some(row);
        }
    }
    Ok(best.expect("resolution >= 8"))
}
