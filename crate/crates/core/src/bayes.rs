//! Bayesian two-group comparison with a Student-t likelihood.
//!
//! Parameters `(mu1, mu2, sigma1, sigma2, nu)` are sampled by
//! component-wise random-walk Metropolis in the unconstrained coordinates
//! `(mu1, mu2, ln sigma1, ln sigma2, ln(nu - 1))`.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ChainConfig {
    pub chains: usize,
    pub draws: usize,
    pub burn_in: usize,
    /// Acceptance rate targeted by burn-in step adaptation.
    pub target_acceptance: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { chains: 4, draws: 20_000, burn_in: 5_000, target_acceptance: 0.35 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Priors {
    pub mu_mean: f64,
    pub mu_sd: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
    /// Mean of the exponential prior on `nu - 1`.
    pub nu_minus_one_mean: f64,
}

impl Priors {
    /// Broad priors scaled by the pooled data. A zero pooled spread is
    /// replaced by a small floor; the flag reports it.
    pub fn from_pooled(a: &[f64], b: &[f64]) -> (Priors, bool) {
        let all: Vec<f64> = a.iter().chain(b).copied().collect();
        let (mean, sd) = mean_sd(&all);
        let floor = 1e-6 * mean.abs().max(1.0);
        let degenerate = !(sd > floor);
        let sd = if degenerate { floor } else { sd };
        (
            Priors {
                mu_mean: mean,
                mu_sd: 1000.0 * sd,
                sigma_low: sd / 1000.0,
                sigma_high: sd * 1000.0,
                nu_minus_one_mean: 29.0,
            },
            degenerate,
        )
    }
}

pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 { x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, libm::sqrt(var))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PosteriorSamples {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub nu: Vec<f64>,
    /// Post-burn-in acceptance rate per parameter, averaged over chains.
    pub acceptance: [f64; 5],
    /// Mean of `mu1 - mu2` per chain, for agreement checks.
    pub chain_means: Vec<f64>,
    pub degenerate: bool,
}

impl PosteriorSamples {
    pub fn mean_difference(&self) -> Vec<f64> {
        self.mu1.iter().zip(&self.mu2).map(|(a, b)| a - b).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitError {
    TooFewSamples,
    NonFinite,
}

fn t_log_density(y: f64, mu: f64, sigma: f64, nu: f64, norm: f64) -> f64 {
    let z = (y - mu) / sigma;
    norm - libm::log(sigma) - 0.5 * (nu + 1.0) * libm::log1p(z * z / nu)
}

fn t_norm(nu: f64) -> f64 {
    libm::lgamma(0.5 * (nu + 1.0)) - libm::lgamma(0.5 * nu) - 0.5 * libm::log(nu * core::f64::consts::PI)
}

struct Model<'a> {
    a: &'a [f64],
    b: &'a [f64],
    priors: Priors,
}

impl Model<'_> {
    fn group_loglik(&self, data: &[f64], mu: f64, sigma: f64, nu: f64) -> f64 {
        let norm = t_norm(nu);
        data.iter().map(|&y| t_log_density(y, mu, sigma, nu, norm)).sum()
    }

    /// Log prior in the unconstrained coordinates, including the Jacobian
    /// of the log transforms.
    fn log_prior(&self, th: &[f64; 5]) -> f64 {
        let p = &self.priors;
        let (s1, s2) = (libm::exp(th[2]), libm::exp(th[3]));
        if s1 < p.sigma_low || s1 > p.sigma_high || s2 < p.sigma_low || s2 > p.sigma_high {
            return f64::NEG_INFINITY;
        }
        let normal = |x: f64| -0.5 * ((x - p.mu_mean) / p.mu_sd) * ((x - p.mu_mean) / p.mu_sd);
        let nu1 = libm::exp(th[4]);
        normal(th[0]) + normal(th[1]) + th[2] + th[3] - nu1 / p.nu_minus_one_mean + th[4]
    }
}

pub fn fit_t_model(a: &[f64], b: &[f64], seed: u64, config: &ChainConfig) -> Result<PosteriorSamples, FitError> {
    if a.len() < 5 || b.len() < 5 {
        return Err(FitError::TooFewSamples);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let (priors, degenerate) = Priors::from_pooled(a, b);
    let model = Model { a, b, priors };
    let mut out = PosteriorSamples { degenerate, ..Default::default() };
    for c in 0..config.chains {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let chain = run_chain(&model, config, &mut rng);
        let mut sum = 0.0;
        for th in &chain.draws {
            out.mu1.push(th[0]);
            out.mu2.push(th[1]);
            out.sigma1.push(libm::exp(th[2]));
            out.sigma2.push(libm::exp(th[3]));
            out.nu.push(1.0 + libm::exp(th[4]));
            sum += th[0] - th[1];
        }
        out.chain_means.push(sum / chain.draws.len().max(1) as f64);
        for k in 0..5 {
            out.acceptance[k] += chain.acceptance[k] / config.chains as f64;
        }
    }
    Ok(out)
}

struct Chain {
    draws: Vec<[f64; 5]>,
    acceptance: [f64; 5],
}

fn run_chain(model: &Model<'_>, config: &ChainConfig, rng: &mut ChaCha8Rng) -> Chain {
    let (ma, sa) = mean_sd(model.a);
    let (mb, sb) = mean_sd(model.b);
    let floor = model.priors.sigma_low * 10.0;
    let mut th = [ma, mb, libm::log(sa.max(floor)), libm::log(sb.max(floor)), libm::log(29.0)];
    let mut step = [sa.max(floor) * 0.3, sb.max(floor) * 0.3, 0.2, 0.2, 0.5];
    let loglik = |th: &[f64; 5]| -> (f64, f64) {
        let nu = 1.0 + libm::exp(th[4]);
        (
            model.group_loglik(model.a, th[0], libm::exp(th[2]), nu),
            model.group_loglik(model.b, th[1], libm::exp(th[3]), nu),
        )
    };
    let (mut la, mut lb) = loglik(&th);
    let mut lp = model.log_prior(&th);
    let mut accepted = [0usize; 5];
    let mut window = [0usize; 5];
    let total = config.burn_in + config.draws;
    let mut draws = Vec::with_capacity(config.draws);
    for it in 0..total {
        for k in 0..5 {
            let z: f64 = StandardNormal.sample(rng);
            let mut prop = th;
            prop[k] += step[k] * z;
            let prior = model.log_prior(&prop);
            let (na, nb) = if prior.is_finite() {
                match k {
                    0 | 2 => (model.group_loglik(model.a, prop[0], libm::exp(prop[2]), 1.0 + libm::exp(prop[4])), lb),
                    1 | 3 => (la, model.group_loglik(model.b, prop[1], libm::exp(prop[3]), 1.0 + libm::exp(prop[4]))),
                    _ => loglik(&prop),
                }
            } else {
                (f64::NEG_INFINITY, f64::NEG_INFINITY)
            };
            let log_ratio = (na + nb + prior) - (la + lb + lp);
            let u: f64 = rng.random();
            if prior.is_finite() && libm::log(u) < log_ratio {
                th = prop;
                la = na;
                lb = nb;
                lp = prior;
                window[k] += 1;
                if it >= config.burn_in {
                    accepted[k] += 1;
                }
            }
        }
        // adapt step sizes every 100 burn-in sweeps, frozen afterwards
        if it < config.burn_in && (it + 1) % 100 == 0 {
            for k in 0..5 {
                let rate = window[k] as f64 / 100.0;
                step[k] *= libm::exp(rate - config.target_acceptance);
                window[k] = 0;
            }
        }
        if it >= config.burn_in {
            draws.push(th);
        }
    }
    let n = config.draws.max(1) as f64;
    Chain { draws, acceptance: accepted.map(|a| a as f64 / n) }
}

/// Shortest interval containing `ceil(mass * n)` of the sorted draws;
/// ties go to the lowest interval.
pub fn hdi(draws: &[f64], mass: f64) -> (f64, f64) {
    let mut s: Vec<f64> = draws.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    let k = (libm::ceil(mass * n as f64) as usize).clamp(1, n);
    let mut best = (s[0], s[k - 1]);
    for i in 1..=n - k {
        if s[i + k - 1] - s[i] < best.1 - best.0 {
            best = (s[i], s[i + k - 1]);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "verdict", content = "overlap", rename_all = "snake_case"))]
pub enum RopeVerdict {
    Equivalent,
    Distinct,
    /// Fraction of the interval inside the region.
    Inconclusive(f64),
}

pub fn rope_decision(hdi: (f64, f64), rope: (f64, f64)) -> RopeVerdict {
    if hdi.0 >= rope.0 && hdi.1 <= rope.1 {
        return RopeVerdict::Equivalent;
    }
    if hdi.1 < rope.0 || hdi.0 > rope.1 {
        return RopeVerdict::Distinct;
    }
    let overlap = (hdi.1.min(rope.1) - hdi.0.max(rope.0)).max(0.0);
    let width = hdi.1 - hdi.0;
    RopeVerdict::Inconclusive(if width > 0.0 { overlap / width } else { 0.0 })
}

/// Median of a sample (mean of the middle pair for even sizes).
pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) }
}
