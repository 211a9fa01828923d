//! Monte Carlo simulation of the renewing-flow matrix products: i.i.d.
//! draws of the per-interval Jacobian factors, products with per-step
//! renormalization, cumulant and L(l) estimation with batch-mean errors,
//! an independence diagnostic for the shear variables, and the
//! beyond-continuum first-cumulant evaluation.
//!
//! Each factor is a product of shear blocks, one per row i in ascending
//! order, B_i = I + sum_j dt xi_ij N_ij, optionally interleaved with
//! diagonal pure-strain blocks S_i between B_i and B_{i+1}. The shear
//! variables are xi_ij = u'_ij(phi_ij) with phases phi_ij = eta_ij for
//! j < i and phi_ij = eta_ij + dt sum_k u_jk(phi_jk) for j > i, the
//! eta_ij independent and uniform on (-pi, pi).
//!
//! Everything is parametrized by the dimensionless disorder strength
//! tau = sigma dt / sqrt(2); only the combinations dt u'(phi) and
//! dt u(phi) enter, so sigma and dt never appear separately.

use crate::elliptic::gamma1_closed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("tau must be finite and nonnegative, got {0}")]
    BadTau(f64),
    #[error("strain k^2 = {k2} outside [0, 1/{d}]")]
    BadStrainK2 { k2: f64, d: usize },
    #[error("profile must list {expected} derivative polynomials, got {got}")]
    ProfileCount { expected: usize, got: usize },
    #[error("symmetric disorder declared but mean squares differ: {0} vs {1}")]
    AsymmetricDisorder(f64, f64),
    #[error("sample cumulants above order 4 are too noisy; requested {0}")]
    CumulantOrder(usize),
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("exp({0:.1}) would overflow; reduce n or |ell|")]
    Overflow(f64),
    #[error("ell must be finite, got {0}")]
    BadEll(f64),
    #[error("beyond-continuum series needs 0 < tau <= 0.3, got {0}")]
    TauOutOfRange(f64),
    #[error("beyond-continuum order must be 1, 2 or 3, got {0}")]
    OrderOutOfRange(usize),
}

/// Zero-mean trigonometric polynomial: coefficient m (0-based) multiplies
/// cos((m+1) theta) or sin((m+1) theta). The absence of a constant slot
/// makes the zero-mean requirement structural.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPoly {
    /// sqrt(2) cos(theta): unit mean square, the default shear profile.
    pub fn default_shear() -> TrigPoly {
        TrigPoly { cos: vec![std::f64::consts::SQRT_2], sin: vec![] }
    }

    pub fn zero() -> TrigPoly {
        TrigPoly { cos: vec![], sin: vec![] }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (m, &a) in self.cos.iter().enumerate() {
            if a != 0.0 {
                acc += a * ((m + 1) as f64 * theta).cos();
            }
        }
        for (m, &b) in self.sin.iter().enumerate() {
            if b != 0.0 {
                acc += b * ((m + 1) as f64 * theta).sin();
            }
        }
        acc
    }

    /// Antiderivative with zero mean: a cos(m t) -> (a/m) sin(m t),
    /// b sin(m t) -> -(b/m) cos(m t).
    pub fn antiderivative(&self) -> TrigPoly {
        let sin = self
            .cos
            .iter()
            .enumerate()
            .map(|(m, &a)| a / (m + 1) as f64)
            .collect();
        let cos = self
            .sin
            .iter()
            .enumerate()
            .map(|(m, &b)| -b / (m + 1) as f64)
            .collect();
        TrigPoly { cos, sin }
    }

    /// Average of the square over one period.
    pub fn mean_square(&self) -> f64 {
        let s: f64 = self.cos.iter().chain(self.sin.iter()).map(|c| c * c).sum();
        s / 2.0
    }

    pub fn scale(&self, f: f64) -> TrigPoly {
        TrigPoly {
            cos: self.cos.iter().map(|c| c * f).collect(),
            sin: self.sin.iter().map(|c| c * f).collect(),
        }
    }
}

/// Simulation configuration. `profile` lists the shear derivative shapes
/// u'_ij for the ordered pairs (i, j), i != j, in row-major order
/// (1,2), (1,3), ..., (2,1), (2,3), ...; omitted means the default
/// sqrt(2) cos(theta) for every pair. The overall scale of the profile
/// cancels: tau alone sets the disorder strength, with sigma^2 read off
/// as the mean of the per-pair mean squares.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    pub d: usize,
    pub tau: f64,
    #[serde(default)]
    pub profile: Option<Vec<TrigPoly>>,
    /// Enables the pure-strain blocks with Var(dt alpha) = 2 tau^2 (1/d - k^2);
    /// k^2 = 1/d is equivalent to the plain flow up to the random stream.
    #[serde(default)]
    pub strain_k2: Option<f64>,
    /// Declares equal mean-square disorder across pairs; checked at load.
    #[serde(default = "default_true")]
    pub symmetric: bool,
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl FlowConfig {
    pub fn plain(d: usize, tau: f64, seed: u64) -> FlowConfig {
        FlowConfig { d, tau, profile: None, strain_k2: None, symmetric: true, seed }
    }

    pub fn with_strain(d: usize, tau: f64, k2: f64, seed: u64) -> FlowConfig {
        FlowConfig { d, tau, profile: None, strain_k2: Some(k2), symmetric: true, seed }
    }
}

/// Unit-determinant d x d matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct SLMatrix {
    pub d: usize,
    pub a: Vec<f64>,
}

impl SLMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.d + c]
    }

    /// Determinant by partially pivoted elimination.
    pub fn det(&self) -> f64 {
        let d = self.d;
        let mut m = self.a.clone();
        let mut det = 1.0;
        for k in 0..d {
            let piv = (k..d).max_by(|&i, &j| {
                m[i * d + k].abs().total_cmp(&m[j * d + k].abs())
            });
            let p = piv.unwrap();
            if m[p * d + k] == 0.0 {
                return 0.0;
            }
            if p != k {
                for c in 0..d {
                    m.swap(p * d + c, k * d + c);
                }
                det = -det;
            }
            det *= m[k * d + k];
            for i in k + 1..d {
                let f = m[i * d + k] / m[k * d + k];
                for c in k..d {
                    m[i * d + c] -= f * m[k * d + c];
                }
            }
        }
        det
    }
}

fn pair_index(d: usize, i: usize, j: usize) -> usize {
    (i - 1) * (d - 1) + (j - 1) - usize::from(j > i)
}

/// Validated sampler with precombined dt-scaled profiles.
#[derive(Debug, Clone)]
pub struct FlowSampler {
    d: usize,
    /// Evaluates dt xi_ij; pair order as in `FlowConfig::profile`.
    dt_du: Vec<TrigPoly>,
    /// Evaluates dt u_ij, used in the upper-phase coupling.
    dt_u: Vec<TrigPoly>,
    /// Amplitude of dt alpha_ij = amp cos(theta); zero when strain disabled.
    strain_amp: f64,
    strain_on: bool,
    seed: u64,
}

struct Workspace {
    phi: Vec<f64>,
    shift: Vec<f64>,
    coeff: Vec<f64>,
    g: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl FlowSampler {
    pub fn new(cfg: &FlowConfig) -> Result<FlowSampler, FlowError> {
        let d = cfg.d;
        if d < 2 {
            return Err(FlowError::BadDimension(d));
        }
        if !cfg.tau.is_finite() || cfg.tau < 0.0 {
            return Err(FlowError::BadTau(cfg.tau));
        }
        let npairs = d * (d - 1);
        let shapes: Vec<TrigPoly> = match &cfg.profile {
            None => vec![TrigPoly::default_shear(); npairs],
            Some(p) => {
                if p.len() != npairs {
                    return Err(FlowError::ProfileCount { expected: npairs, got: p.len() });
                }
                p.clone()
            }
        };
        let squares: Vec<f64> = shapes.iter().map(|s| s.mean_square()).collect();
        if cfg.symmetric {
            for &s in &squares {
                let s0 = squares[0];
                if (s - s0).abs() > 1e-9 * s0.max(1e-300) {
                    return Err(FlowError::AsymmetricDisorder(s0, s));
                }
            }
        }
        let mean_sq = squares.iter().sum::<f64>() / npairs as f64;
        // dt u'_ij = sqrt(2) tau u'_ij / sigma, and sigma^2 is the mean square
        let f = if mean_sq > 0.0 {
            std::f64::consts::SQRT_2 * cfg.tau / mean_sq.sqrt()
        } else {
            0.0
        };
        let strain_amp = match cfg.strain_k2 {
            None => 0.0,
            Some(k2) => {
                let top = 1.0 / d as f64;
                if !(0.0..=top).contains(&k2) {
                    return Err(FlowError::BadStrainK2 { k2, d });
                }
                2.0 * cfg.tau * (top - k2).sqrt()
            }
        };
        Ok(FlowSampler {
            d,
            dt_du: shapes.iter().map(|s| s.scale(f)).collect(),
            dt_u: shapes.iter().map(|s| s.antiderivative().scale(f)).collect(),
            strain_amp,
            strain_on: cfg.strain_k2.is_some(),
            seed: cfg.seed,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    fn workspace(&self) -> Workspace {
        let d = self.d;
        Workspace {
            phi: vec![0.0; d * (d - 1)],
            shift: vec![0.0; d + 1],
            coeff: vec![0.0; d * (d - 1)],
            g: vec![0.0; d * d],
            x: vec![0.0; d],
            y: vec![0.0; d],
        }
    }

    /// Reproducible per-trial stream: the master seed and trial index are
    /// mixed through SplitMix64 into a full ChaCha8 seed.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut state = self
            .seed
            .wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(trial.wrapping_add(1)));
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^= z >> 31;
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Draws the phases and fills `coeff` with the dt xi_ij values.
    /// Rows are resolved from d down to 1 because an upper phase phi_ij
    /// couples to the already-drawn phases of row j > i.
    fn draw_shear(&self, ws: &mut Workspace, rng: &mut ChaCha8Rng) {
        let d = self.d;
        for p in ws.phi.iter_mut() {
            *p = rng.gen_range(-PI..PI);
        }
        for i in (1..=d).rev() {
            for j in 1..=d {
                if j > i {
                    let p = pair_index(d, i, j);
                    ws.phi[p] += ws.shift[j];
                }
            }
            let mut s = 0.0;
            for k in 1..=d {
                if k != i {
                    let p = pair_index(d, i, k);
                    s += self.dt_u[p].eval(ws.phi[p]);
                }
            }
            ws.shift[i] = s;
        }
        for (p, c) in ws.coeff.iter_mut().enumerate() {
            *c = self.dt_du[p].eval(ws.phi[p]);
        }
    }

    /// One factor g = B_1 S_1 B_2 S_2 ... S_{d-1} B_d into ws.g.
    fn sample_into(&self, ws: &mut Workspace, rng: &mut ChaCha8Rng) {
        let d = self.d;
        self.draw_shear(ws, rng);
        ws.g.fill(0.0);
        for r in 0..d {
            ws.g[r * d + r] = 1.0;
        }
        for j in 2..=d {
            ws.g[j - 1] = ws.coeff[pair_index(d, 1, j)];
        }
        for i in 2..=d {
            if self.strain_on {
                // right-multiply by the diagonal block S_{i-1}
                let mut expo = 0.0;
                for j in i..=d {
                    let a = self.strain_amp * rng.gen_range(-PI..PI).cos();
                    expo += a;
                    let v = (-a).exp();
                    for r in 0..d {
                        ws.g[r * d + j - 1] *= v;
                    }
                }
                let v = expo.exp();
                for r in 0..d {
                    ws.g[r * d + i - 2] *= v;
                }
            }
            // right-multiply by B_i = I + row-i entries
            for r in 0..d {
                let gri = ws.g[r * d + i - 1];
                if gri != 0.0 {
                    for j in 1..=d {
                        if j != i {
                            ws.g[r * d + j - 1] +=
                                gri * ws.coeff[pair_index(d, i, j)];
                        }
                    }
                }
            }
        }
    }

    /// One i.i.d. factor of the product.
    pub fn sample_factor(&self, rng: &mut ChaCha8Rng) -> SLMatrix {
        let mut ws = self.workspace();
        self.sample_into(&mut ws, rng);
        SLMatrix { d: self.d, a: ws.g.clone() }
    }

    /// ln |x Pi_n| for x = e_1, with per-step renormalization and
    /// compensated accumulation; also returns the final direction.
    pub fn run_product(&self, n: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
        let d = self.d;
        let mut ws = self.workspace();
        ws.x.fill(0.0);
        ws.x[0] = 1.0;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for _ in 0..n {
            self.sample_into(&mut ws, rng);
            ws.y.fill(0.0);
            for r in 0..d {
                let xr = ws.x[r];
                if xr != 0.0 {
                    for c in 0..d {
                        ws.y[c] += xr * ws.g[r * d + c];
                    }
                }
            }
            let norm = ws.y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let term = norm.ln() - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
            for c in 0..d {
                ws.x[c] = ws.y[c] / norm;
            }
        }
        (sum, ws.x.clone())
    }

    /// Per-trial log norms, ordered by trial index regardless of the
    /// executing thread pool: the fold is over indices, not arrival order.
    pub fn log_norms(&self, n: usize, trials: usize) -> Vec<f64> {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| self.run_product(n, &mut self.trial_rng(t)).0)
            .collect()
    }

    fn xi_samples(&self, trials: usize) -> Vec<Vec<f64>> {
        let rows: Vec<Vec<f64>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut ws = self.workspace();
                self.draw_shear(&mut ws, &mut self.trial_rng(t));
                ws.coeff
            })
            .collect();
        let m = self.d * (self.d - 1);
        (0..m).map(|p| rows.iter().map(|r| r[p]).collect()).collect()
    }
}

pub fn sample_factor(cfg: &FlowConfig, rng: &mut ChaCha8Rng) -> Result<SLMatrix, FlowError> {
    Ok(FlowSampler::new(cfg)?.sample_factor(rng))
}

pub fn run_product(
    cfg: &FlowConfig,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<f64>), FlowError> {
    Ok(FlowSampler::new(cfg)?.run_product(n, rng))
}

/// Sample cumulant of ln |x Pi_n| per product step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CumulantEstimate {
    pub j: usize,
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
    pub n: usize,
}

/// Fisher k-statistics: unbiased estimators of the first four cumulants.
fn k_statistics(values: &[f64], jmax: usize) -> Vec<f64> {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let dx = v - mean;
        let dx2 = dx * dx;
        m2 += dx2;
        m3 += dx2 * dx;
        m4 += dx2 * dx2;
    }
    m2 /= t;
    m3 /= t;
    m4 /= t;
    let mut k = vec![mean];
    if jmax >= 2 {
        k.push(t / (t - 1.0) * m2);
    }
    if jmax >= 3 {
        k.push(t * t / ((t - 1.0) * (t - 2.0)) * m3);
    }
    if jmax >= 4 {
        k.push(
            t * t * ((t + 1.0) * m4 - 3.0 * (t - 1.0) * m2 * m2)
                / ((t - 1.0) * (t - 2.0) * (t - 3.0)),
        );
    }
    k.truncate(jmax);
    k
}

fn batch_bounds(trials: usize) -> (usize, usize) {
    let b = (trials as f64).sqrt().floor() as usize;
    let b = b.max(2);
    (b, trials / b)
}

/// Sample cumulants gamma_j of ln |x Pi_n| divided by n, for j = 1..=jmax,
/// with batch-mean standard errors over sqrt(trials) batches of trials.
pub fn estimate_cumulants(
    cfg: &FlowConfig,
    n: usize,
    trials: usize,
    jmax: usize,
) -> Result<Vec<CumulantEstimate>, FlowError> {
    if jmax == 0 || jmax > 4 {
        return Err(FlowError::CumulantOrder(jmax));
    }
    if trials < 30 {
        return Err(FlowError::TooFewTrials { min: 30, got: trials });
    }
    let sampler = FlowSampler::new(cfg)?;
    let values = sampler.log_norms(n, trials);
    let global = k_statistics(&values, jmax);
    let (b, size) = batch_bounds(trials);
    let mut batch_ks: Vec<Vec<f64>> = Vec::with_capacity(b);
    for i in 0..b {
        batch_ks.push(k_statistics(&values[i * size..(i + 1) * size], jmax));
    }
    let nf = n as f64;
    Ok((0..jmax)
        .map(|idx| {
            let mean_b = batch_ks.iter().map(|k| k[idx]).sum::<f64>() / b as f64;
            let var_b = batch_ks
                .iter()
                .map(|k| (k[idx] - mean_b) * (k[idx] - mean_b))
                .sum::<f64>()
                / (b as f64 - 1.0);
            CumulantEstimate {
                j: idx + 1,
                value: global[idx] / nf,
                stderr: (var_b / b as f64).sqrt() / nf,
                trials,
                n,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LEstimate {
    pub ell: f64,
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
    pub n: usize,
}

const MAX_EXP: f64 = 700.0;

/// (1/n) ln of the trial average of exp(ell ln|x Pi_n|), with a delta-method
/// standard error from batch means. The estimate carries large-deviation
/// bias when |ell| ln-norm fluctuations are large: the average is then
/// dominated by rare trials, so stderr itself becomes unreliable; keep
/// n tau^2 |ell| moderate.
pub fn estimate_l(
    cfg: &FlowConfig,
    ell: f64,
    n: usize,
    trials: usize,
) -> Result<LEstimate, FlowError> {
    if !ell.is_finite() {
        return Err(FlowError::BadEll(ell));
    }
    if trials < 2 {
        return Err(FlowError::TooFewTrials { min: 2, got: trials });
    }
    let sampler = FlowSampler::new(cfg)?;
    let values = sampler.log_norms(n, trials);
    let z: Vec<f64> = values.iter().map(|y| ell * y).collect();
    let zmax = z.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    if zmax > MAX_EXP {
        return Err(FlowError::Overflow(zmax));
    }
    // shifted mean keeps the batch ratios well scaled
    let w: Vec<f64> = z.iter().map(|&v| (v - zmax).exp()).collect();
    let wbar = w.iter().sum::<f64>() / trials as f64;
    let (b, size) = batch_bounds(trials);
    let mut var_b = 0.0;
    for i in 0..b {
        let batch = w[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64;
        var_b += (batch - wbar) * (batch - wbar);
    }
    var_b /= b as f64 - 1.0;
    let nf = n as f64;
    Ok(LEstimate {
        ell,
        value: (wbar.ln() + zmax) / nf,
        stderr: (var_b / b as f64).sqrt() / (wbar * nf),
        trials,
        n,
    })
}

/// Independence diagnostic for the shear variables xi_ij of a single
/// factor: pairwise correlations and a factorization test of the joint
/// characteristic function on a fixed s-grid, both judged at 4 sigma.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub d: usize,
    pub trials: usize,
    /// Ordered pairs (i, j) labelling the components.
    pub labels: Vec<(usize, usize)>,
    pub corr: Vec<Vec<f64>>,
    pub max_abs_corr: f64,
    pub corr_threshold: f64,
    /// Largest |z| over component pairs, grid points and real/imaginary
    /// parts of joint CF minus product of marginal CFs.
    pub cf_max_z: f64,
    pub cf_threshold: f64,
    /// True when some component has (numerically) zero variance; such
    /// components carry no dependence information and are skipped.
    pub degenerate: bool,
    pub pass: bool,
}

const CF_GRID: [f64; 2] = [0.5, 1.0];

pub fn independence_diagnostic(
    cfg: &FlowConfig,
    trials: usize,
) -> Result<IndependenceReport, FlowError> {
    if trials < 10_000 {
        return Err(FlowError::TooFewTrials { min: 10_000, got: trials });
    }
    let sampler = FlowSampler::new(cfg)?;
    let d = cfg.d;
    let comps = sampler.xi_samples(trials);
    let m = comps.len();
    let t = trials as f64;
    let means: Vec<f64> = comps.iter().map(|c| c.iter().sum::<f64>() / t).collect();
    let vars: Vec<f64> = comps
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / t)
        .collect();
    let scale = vars.iter().fold(0.0f64, |a, &v| a.max(v));
    let live: Vec<bool> = vars.iter().map(|&v| v > 1e-12 * scale.max(1e-300)).collect();
    let degenerate = live.iter().any(|l| !l);

    let mut corr = vec![vec![0.0; m]; m];
    let mut max_abs_corr = 0.0f64;
    for p in 0..m {
        corr[p][p] = 1.0;
        for q in p + 1..m {
            if !(live[p] && live[q]) {
                continue;
            }
            let c: f64 = comps[p]
                .iter()
                .zip(&comps[q])
                .map(|(&a, &b)| (a - means[p]) * (b - means[q]))
                .sum::<f64>()
                / t;
            let r = c / (vars[p] * vars[q]).sqrt();
            corr[p][q] = r;
            corr[q][p] = r;
            max_abs_corr = max_abs_corr.max(r.abs());
        }
    }

    let (nb, size) = batch_bounds(trials);
    let mut cf_max_z = 0.0f64;
    for p in 0..m {
        for q in p + 1..m {
            if !(live[p] && live[q]) {
                continue;
            }
            for &s in &CF_GRID {
                for &u in &CF_GRID {
                    // batch values of joint CF minus product of marginals
                    let mut dre = Vec::with_capacity(nb);
                    let mut dim = Vec::with_capacity(nb);
                    for bidx in 0..nb {
                        let range = bidx * size..(bidx + 1) * size;
                        let (mut jr, mut ji) = (0.0, 0.0);
                        let (mut pr, mut pi) = (0.0, 0.0);
                        let (mut qr, mut qi) = (0.0, 0.0);
                        for k in range {
                            let a = s * comps[p][k];
                            let b = u * comps[q][k];
                            jr += (a + b).cos();
                            ji += (a + b).sin();
                            pr += a.cos();
                            pi += a.sin();
                            qr += b.cos();
                            qi += b.sin();
                        }
                        let sf = size as f64;
                        let (jr, ji) = (jr / sf, ji / sf);
                        let (pr, pi) = (pr / sf, pi / sf);
                        let (qr, qi) = (qr / sf, qi / sf);
                        dre.push(jr - (pr * qr - pi * qi));
                        dim.push(ji - (pr * qi + pi * qr));
                    }
                    for part in [&dre, &dim] {
                        let mb = part.iter().sum::<f64>() / nb as f64;
                        let vb = part.iter().map(|v| (v - mb) * (v - mb)).sum::<f64>()
                            / (nb as f64 - 1.0);
                        let se = (vb / nb as f64).sqrt();
                        if se > 0.0 {
                            cf_max_z = cf_max_z.max(mb.abs() / se);
                        }
                    }
                }
            }
        }
    }

    let corr_threshold = 4.0 / t.sqrt();
    let pass = max_abs_corr < corr_threshold && cf_max_z < 4.0;
    Ok(IndependenceReport {
        d,
        trials,
        labels: (1..=d)
            .flat_map(|i| (1..=d).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect(),
        corr,
        max_abs_corr,
        corr_threshold,
        cf_max_z,
        cf_threshold: 4.0,
        degenerate,
        pass,
    })
}

/// First cumulant beyond the continuum limit, d = 2 plain flow:
/// gamma_1 = zeta tau^2 + (1/24 + 3 zeta^2/8) tau^4
///         + (5 zeta/192 + 9 zeta^3/64) tau^6 + ...,
/// zeta the continuum value 2E/K - 1 at modulus 1/sqrt(2), truncated at
/// `order`. The full expansion has a radius of convergence equal to zero,
/// so this is an asymptotic approximation for small tau only; successive
/// orders improve accuracy only while tau^2 remains below the ratio of
/// consecutive coefficients.
pub fn gamma1_beyond_continuum(tau: f64, order: usize) -> Result<f64, FlowError> {
    if !(tau > 0.0 && tau <= 0.3) {
        return Err(FlowError::TauOutOfRange(tau));
    }
    if !(1..=3).contains(&order) {
        return Err(FlowError::OrderOutOfRange(order));
    }
    let zeta = gamma1_closed(FRAC_1_SQRT_2).expect("valid modulus");
    let coeffs = [
        zeta,
        1.0 / 24.0 + 3.0 * zeta * zeta / 8.0,
        5.0 * zeta / 192.0 + 9.0 * zeta * zeta * zeta / 64.0,
    ];
    let t2 = tau * tau;
    let mut acc = 0.0;
    for j in (1..=order).rev() {
        acc = (acc + coeffs[j - 1]) * t2;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::gamma2_closed;
    use crate::series::cumulant_series;
    use crate::spectral2d::l_2d;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got:.12e}, want {want:.12e}, diff {:.3e}",
            (got - want).abs()
        );
    }

    fn assert_within_sigma(got: f64, want: f64, stderr: f64, nsigma: f64) {
        assert!(
            (got - want).abs() <= nsigma * stderr,
            "got {got:.8e}, want {want:.8e}, z = {:.2}",
            (got - want).abs() / stderr
        );
    }

    #[test]
    fn trig_poly_basics() {
        let w = TrigPoly::default_shear();
        assert_close(w.eval(0.3), std::f64::consts::SQRT_2 * 0.3f64.cos(), 1e-15);
        assert_close(w.mean_square(), 1.0, 1e-15);
        let anti = w.antiderivative();
        assert_close(anti.eval(0.3), std::f64::consts::SQRT_2 * 0.3f64.sin(), 1e-15);
        let p = TrigPoly { cos: vec![0.0, 1.0], sin: vec![2.0] };
        assert_close(p.eval(0.7), (2.0 * 0.7f64).cos() + 2.0 * 0.7f64.sin(), 1e-15);
        assert_close(p.mean_square(), (1.0 + 4.0) / 2.0, 1e-15);
        let a = p.antiderivative();
        assert_close(
            a.eval(0.7),
            0.5 * (2.0 * 0.7f64).sin() - 2.0 * 0.7f64.cos(),
            1e-15,
        );
    }

    #[test]
    fn config_validation() {
        assert!(FlowSampler::new(&FlowConfig::plain(1, 0.1, 0)).is_err());
        assert!(FlowSampler::new(&FlowConfig::plain(2, f64::NAN, 0)).is_err());
        assert!(FlowSampler::new(&FlowConfig::plain(2, -0.1, 0)).is_err());
        assert!(FlowSampler::new(&FlowConfig::with_strain(2, 0.1, 0.6, 0)).is_err());
        assert!(FlowSampler::new(&FlowConfig::with_strain(2, 0.1, -0.01, 0)).is_err());
        assert!(FlowSampler::new(&FlowConfig::with_strain(2, 0.1, 0.5, 0)).is_ok());
        let mut cfg = FlowConfig::plain(2, 0.1, 0);
        cfg.profile = Some(vec![TrigPoly::default_shear()]);
        assert!(matches!(
            FlowSampler::new(&cfg),
            Err(FlowError::ProfileCount { expected: 2, got: 1 })
        ));
        cfg.profile = Some(vec![
            TrigPoly::default_shear(),
            TrigPoly { cos: vec![2.0], sin: vec![] },
        ]);
        assert!(matches!(FlowSampler::new(&cfg), Err(FlowError::AsymmetricDisorder(..))));
        cfg.symmetric = false;
        assert!(FlowSampler::new(&cfg).is_ok());
    }

    #[test]
    fn config_json_round_trip() {
        let mut cfg = FlowConfig::with_strain(3, 0.07, 0.2, 42);
        cfg.profile = Some(vec![TrigPoly { cos: vec![1.0], sin: vec![0.5, 0.25] }; 6]);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: FlowConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.d, 3);
        assert_eq!(back.tau, 0.07);
        assert_eq!(back.strain_k2, Some(0.2));
        assert_eq!(back.profile, cfg.profile);
        assert!(back.symmetric);
        let minimal: FlowConfig =
            serde_json::from_str(r#"{"d": 2, "tau": 0.05, "seed": 7}"#).unwrap();
        assert!(minimal.profile.is_none());
        assert!(minimal.strain_k2.is_none());
        assert!(minimal.symmetric);
    }

    #[test]
    fn tau_zero_is_identity() {
        let cfg = FlowConfig::plain(3, 0.0, 5);
        let sampler = FlowSampler::new(&cfg).unwrap();
        let g = sampler.sample_factor(&mut sampler.trial_rng(0));
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(g.get(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }
        let (log_norm, dir) = sampler.run_product(100, &mut sampler.trial_rng(1));
        assert_eq!(log_norm, 0.0);
        assert_eq!(dir, vec![1.0, 0.0, 0.0]);
        let cums = estimate_cumulants(&cfg, 50, 64, 4).unwrap();
        for c in &cums {
            assert_eq!(c.value, 0.0);
        }
    }

    #[test]
    fn d2_factor_structure() {
        let sampler = FlowSampler::new(&FlowConfig::plain(2, 0.3, 11)).unwrap();
        for t in 0..20 {
            let g = sampler.sample_factor(&mut sampler.trial_rng(t));
            assert_eq!(g.get(1, 1), 1.0);
            assert_eq!(g.get(0, 0), 1.0 + g.get(0, 1) * g.get(1, 0));
            assert!(g.get(0, 1).abs() <= 2.0 * 0.3 + 1e-12);
        }
    }

    #[test]
    fn determinant_one() {
        for cfg in [
            FlowConfig::plain(2, 0.5, 3),
            FlowConfig::with_strain(3, 0.5, 0.1, 4),
            FlowConfig::with_strain(4, 0.3, 0.05, 5),
        ] {
            let sampler = FlowSampler::new(&cfg).unwrap();
            let mut rng = sampler.trial_rng(0);
            let mut worst = 0.0f64;
            for _ in 0..10_000 {
                let g = sampler.sample_factor(&mut rng);
                worst = worst.max((g.det() - 1.0).abs());
            }
            assert!(worst < 1e-12, "d={} worst {:.3e}", cfg.d, worst);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = FlowConfig::with_strain(3, 0.1, 0.2, 99);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let sampler = FlowSampler::new(&cfg).unwrap();
                sampler.log_norms(50, 64)
            })
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a, b);
    }

    #[test]
    fn mc_gamma12_d2_plain() {
        let cfg = FlowConfig::plain(2, 0.05, 2024);
        let t2 = 0.05f64 * 0.05;
        let cums = estimate_cumulants(&cfg, 2000, 2000, 2).unwrap();
        let zeta = gamma1_closed(FRAC_1_SQRT_2).unwrap();
        assert!(cums[0].stderr > 0.0);
        assert_within_sigma(cums[0].value, t2 * zeta, cums[0].stderr, 3.0);
        let g2 = gamma2_closed(FRAC_1_SQRT_2).unwrap();
        assert_within_sigma(cums[1].value, 2.0 * t2 * g2, cums[1].stderr, 3.0);
    }

    #[test]
    fn mc_gamma1_strain_sweep() {
        let t2 = 0.05f64 * 0.05;
        for (k2, idx) in [(0.0, 0u64), (0.25, 1)] {
            let cfg = FlowConfig::with_strain(2, 0.05, k2, 7000 + idx);
            let cums = estimate_cumulants(&cfg, 2000, 2000, 1).unwrap();
            let want = t2 * gamma1_closed(k2.sqrt()).unwrap();
            assert_within_sigma(cums[0].value, want, cums[0].stderr, 3.0);
        }
    }

    #[test]
    fn mc_gamma1_d3_plain() {
        let cfg = FlowConfig::plain(3, 0.05, 31);
        let t2 = 0.05f64 * 0.05;
        let series = cumulant_series(3, 1, 5).unwrap();
        let want = t2 * series.eval_f64(1.0 / 3.0, 0.0);
        let cums = estimate_cumulants(&cfg, 2000, 2000, 1).unwrap();
        assert_within_sigma(cums[0].value, want, cums[0].stderr, 3.0);
    }

    #[test]
    fn estimate_l_checkpoints() {
        // n must be large enough that the O(1/n) startup transient of the
        // tilted average sits below the statistical band, yet small enough
        // that exp(ell ln-norm) is not dominated by rare trials
        let cfg = FlowConfig::plain(2, 0.05, 555);
        let zero = estimate_l(&cfg, 0.0, 500, 64).unwrap();
        assert_eq!(zero.value, 0.0);
        let t2 = 0.05f64 * 0.05;
        let est = estimate_l(&cfg, 1.0, 4000, 20_000).unwrap();
        let want = t2 * l_2d(0.5, 1.0).unwrap();
        assert_within_sigma(est.value, want, est.stderr, 3.0);
        let est = estimate_l(&cfg, -1.0, 4000, 20_000).unwrap();
        assert_within_sigma(est.value, -0.2257817708 * t2, est.stderr, 3.0);
    }

    #[test]
    fn estimate_l_symmetry_pair() {
        let cfg = FlowConfig::plain(2, 0.05, 808);
        let a = estimate_l(&cfg, -0.5, 2500, 30_000).unwrap();
        let cfg2 = FlowConfig::plain(2, 0.05, 809);
        let b = estimate_l(&cfg2, -1.5, 2500, 30_000).unwrap();
        let combined = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert_within_sigma(a.value, b.value, combined, 3.0);
    }

    #[test]
    fn estimate_l_overflow_guard() {
        let cfg = FlowConfig::plain(2, 0.5, 1);
        assert!(matches!(
            estimate_l(&cfg, 50.0, 10_000, 32),
            Err(FlowError::Overflow(_))
        ));
        assert!(estimate_l(&cfg, f64::INFINITY, 10, 32).is_err());
    }

    #[test]
    fn estimator_input_validation() {
        let cfg = FlowConfig::plain(2, 0.1, 0);
        assert!(matches!(
            estimate_cumulants(&cfg, 10, 20, 2),
            Err(FlowError::TooFewTrials { min: 30, .. })
        ));
        assert!(matches!(
            estimate_cumulants(&cfg, 10, 64, 5),
            Err(FlowError::CumulantOrder(5))
        ));
        assert!(matches!(
            independence_diagnostic(&cfg, 100),
            Err(FlowError::TooFewTrials { min: 10_000, .. })
        ));
    }

    #[test]
    fn k_statistics_match_known_sample() {
        // sample 1, 2, 3, 4: k1 = 5/2, k2 = 5/3, k3 = 0, k4 = -10/3
        let k = k_statistics(&[1.0, 2.0, 3.0, 4.0], 4);
        assert_close(k[0], 2.5, 1e-14);
        assert_close(k[1], 5.0 / 3.0, 1e-14);
        assert_close(k[2], 0.0, 1e-13);
        assert_close(k[3], -10.0 / 3.0, 1e-13);
    }

    #[test]
    fn independence_d2_and_d3() {
        for d in [2usize, 3] {
            let cfg = FlowConfig::plain(d, 0.1, 17 + d as u64);
            let rep = independence_diagnostic(&cfg, 10_000).unwrap();
            assert!(!rep.degenerate);
            assert!(
                rep.pass,
                "d={d}: max corr {:.4} (thr {:.4}), cf z {:.2}",
                rep.max_abs_corr, rep.corr_threshold, rep.cf_max_z
            );
            let m = d * (d - 1);
            assert_eq!(rep.corr.len(), m);
            assert_eq!(rep.labels.len(), m);
        }
    }

    #[test]
    fn independence_degenerate_profile() {
        let mut cfg = FlowConfig::plain(2, 0.1, 3);
        cfg.profile = Some(vec![TrigPoly::zero(), TrigPoly::zero()]);
        let rep = independence_diagnostic(&cfg, 10_000).unwrap();
        assert!(rep.degenerate);
        assert!(rep.pass);
        assert_eq!(rep.max_abs_corr, 0.0);
    }

    #[test]
    fn beyond_continuum_values() {
        let zeta = gamma1_closed(FRAC_1_SQRT_2).unwrap();
        assert_close(gamma1_beyond_continuum(0.2, 1).unwrap(), zeta * 0.04, 1e-15);
        assert_close(
            gamma1_beyond_continuum(0.1, 2).unwrap(),
            0.00458146248378361,
            1e-15,
        );
        let o3 = gamma1_beyond_continuum(0.1, 3).unwrap();
        let extra = (5.0 * zeta / 192.0 + 9.0 * zeta.powi(3) / 64.0) * 1e-6;
        assert_close(o3, 0.00458146248378361 + extra, 1e-15);
        assert!(gamma1_beyond_continuum(0.0, 2).is_err());
        assert!(gamma1_beyond_continuum(0.31, 2).is_err());
        assert!(gamma1_beyond_continuum(0.1, 0).is_err());
        assert!(gamma1_beyond_continuum(0.1, 4).is_err());
    }

    #[test]
    fn beyond_continuum_vs_mc() {
        let cfg = FlowConfig::plain(2, 0.1, 444);
        let cums = estimate_cumulants(&cfg, 5000, 2000, 1).unwrap();
        let want = gamma1_beyond_continuum(0.1, 2).unwrap();
        assert_within_sigma(cums[0].value, want, cums[0].stderr, 3.0);
    }
}
