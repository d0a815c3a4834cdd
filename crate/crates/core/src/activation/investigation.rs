//! Claim authenticity by likelihood-ratio investigation.
//!
//! A party reports a message about a claim. Under `H0` observations follow the
//! performance anticipated from that message, under `H1` they follow the
//! opposite truth value. `H1` is established when the likelihood ratio of `k`
//! i.i.d. observations reaches the threshold `tau`; the authenticity `P_A` is
//! the probability of establishing `H1` when `H1` is in force.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::InitError;
use crate::par::{map_indexed, Parallelism};

pub const MIN_TRIALS: u64 = 10_000;
const TRIALS_PER_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Observation densities under both hypotheses.
pub trait ObservationFamily: Sync {
    fn validate(&self) -> Result<(), InitError>;

    fn log_density(&self, y: f64, hypothesis: Hypothesis) -> f64;

    /// `ln f(y | H1) - ln f(y | H0)`.
    fn log_ratio(&self, y: f64) -> f64 {
        self.log_density(y, Hypothesis::H1) - self.log_density(y, Hypothesis::H0)
    }

    fn sample<R: Rng + ?Sized>(&self, hypothesis: Hypothesis, rng: &mut R) -> f64;

    /// `Pr(sum of k log-ratios >= log_threshold | H1)` in closed form, if the
    /// family has one.
    fn detection_probability(&self, _k: u32, _log_threshold: f64) -> Option<f64> {
        None
    }
}

/// Gaussian location pair with shared spread: `N(mu0, sigma²)` under `H0`,
/// `N(mu1, sigma²)` under `H1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPair {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma: f64,
}

impl GaussianPair {
    fn mean(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => self.mu0,
            Hypothesis::H1 => self.mu1,
        }
    }
}

impl ObservationFamily for GaussianPair {
    fn validate(&self) -> Result<(), InitError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(InitError::InvalidModel(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.mu0.is_finite() && self.mu1.is_finite()) {
            return Err(InitError::InvalidModel("means must be finite".into()));
        }
        if self.mu0 == self.mu1 {
            return Err(InitError::InvalidModel("mu0 and mu1 must differ".into()));
        }
        Ok(())
    }

    fn log_density(&self, y: f64, h: Hypothesis) -> f64 {
        let z = (y - self.mean(h)) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    fn log_ratio(&self, y: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        ((y - self.mu0).powi(2) - (y - self.mu1).powi(2)) / (2.0 * s2)
    }

    fn sample<R: Rng + ?Sized>(&self, h: Hypothesis, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean(h) + self.sigma * z
    }

    fn detection_probability(&self, k: u32, log_threshold: f64) -> Option<f64> {
        // sum of log-ratios = (mu1 - mu0) S / s2 - k (mu1² - mu0²) / (2 s2), S = sum y
        let k = k as f64;
        let s2 = self.sigma * self.sigma;
        let diff = self.mu1 - self.mu0;
        let cut = s2 * log_threshold / diff + k * (self.mu0 + self.mu1) / 2.0;
        // S ~ N(k mu1, k s2) under H1
        let z = (cut - k * self.mu1) / (self.sigma * k.sqrt());
        Some(if diff > 0.0 { std_normal_cdf(-z) } else { std_normal_cdf(z) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvestigationModel<F = GaussianPair> {
    pub family: F,
    /// The reported truth value `m`; it selects which density is anticipated.
    pub message: bool,
    /// Opaque label of how the message is acted upon.
    pub operation: String,
    /// `Pr(H0)`; `Pr(H1) = 1 - prior_h0`.
    pub prior_h0: f64,
    /// `p(theta = not m) / p(theta = m)`, the claim-prior factor in each
    /// likelihood-ratio term.
    pub claim_prior_ratio: f64,
    pub k: u32,
    /// Explicit threshold; defaults to `Pr(H0) / Pr(H1)`.
    pub tau: Option<f64>,
}

impl<F: ObservationFamily> InvestigationModel<F> {
    pub fn new(family: F, prior_h0: f64, k: u32) -> Self {
        InvestigationModel {
            family,
            message: true,
            operation: String::new(),
            prior_h0,
            claim_prior_ratio: 1.0,
            k,
            tau: None,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.prior_h0 / (1.0 - self.prior_h0))
    }

    pub fn validate(&self) -> Result<(), InitError> {
        self.family.validate()?;
        if !(self.prior_h0 > 0.0 && self.prior_h0 < 1.0) {
            return Err(InitError::InvalidModel(format!(
                "Pr(H0) must lie in (0, 1), got {}",
                self.prior_h0
            )));
        }
        if !(self.claim_prior_ratio > 0.0 && self.claim_prior_ratio.is_finite()) {
            return Err(InitError::InvalidModel("claim prior ratio must be > 0".into()));
        }
        if self.k == 0 {
            return Err(InitError::InvalidModel("need at least one observation".into()));
        }
        let tau = self.tau();
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(InitError::InvalidModel(format!("tau must be > 0, got {tau}")));
        }
        Ok(())
    }

    /// Threshold on the summed per-observation log-ratios.
    fn log_threshold(&self) -> f64 {
        self.tau().ln() - self.k as f64 * self.claim_prior_ratio.ln()
    }

    fn sum_log_ratio(&self, observations: &[f64]) -> f64 {
        observations.iter().map(|&y| self.family.log_ratio(y)).sum()
    }

    fn check_observations(&self, observations: &[f64]) -> Result<(), InitError> {
        self.validate()?;
        if observations.len() != self.k as usize {
            return Err(InitError::ObservationCount {
                expected: self.k as usize,
                got: observations.len(),
            });
        }
        Ok(())
    }
}

/// Natural log of the likelihood ratio, claim prior factor included per term.
pub fn log_likelihood_ratio<F: ObservationFamily>(
    model: &InvestigationModel<F>,
    observations: &[f64],
) -> Result<f64, InitError> {
    model.check_observations(observations)?;
    Ok(model.sum_log_ratio(observations) + model.k as f64 * model.claim_prior_ratio.ln())
}

pub fn likelihood_ratio<F: ObservationFamily>(model: &InvestigationModel<F>, observations: &[f64]) -> Result<f64, InitError> {
    log_likelihood_ratio(model, observations).map(f64::exp)
}

/// `H1` iff the likelihood ratio reaches `tau` (ties go to `H1`).
pub fn decide<F: ObservationFamily>(model: &InvestigationModel<F>, observations: &[f64]) -> Result<Hypothesis, InitError> {
    let log_l = log_likelihood_ratio(model, observations)?;
    Ok(if log_l >= model.tau().ln() {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthenticityReport {
    pub p_a: f64,
    pub method: MethodKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Threshold actually used.
    pub tau: f64,
    pub claim_prior_ratio: f64,
    /// `2 P_A - 1`.
    pub activation: f64,
}

/// Probability of establishing `H1` when `H1` holds.
pub fn claim_authenticity<F: ObservationFamily>(
    model: &InvestigationModel<F>,
    method: Method,
    policy: Parallelism,
) -> Result<AuthenticityReport, InitError> {
    model.validate()?;
    let (p_a, kind, trials, stderr, seed) = match method {
        Method::ClosedForm => {
            let p = model
                .family
                .detection_probability(model.k, model.log_threshold())
                .ok_or(InitError::ClosedFormUnavailable)?;
            (p, MethodKind::ClosedForm, None, None, None)
        }
        Method::MonteCarlo { trials, seed } => {
            if trials < MIN_TRIALS {
                return Err(InitError::TooFewTrials { got: trials, min: MIN_TRIALS });
            }
            let hits = monte_carlo_hits(model, trials, seed, policy);
            let p = hits as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            (p, MethodKind::MonteCarlo, Some(trials), Some(se), Some(seed))
        }
    };
    let p_a = p_a.clamp(0.0, 1.0);
    Ok(AuthenticityReport {
        p_a,
        method: kind,
        trials,
        stderr,
        seed,
        tau: model.tau(),
        claim_prior_ratio: model.claim_prior_ratio,
        activation: authenticity_to_activation(p_a)?,
    })
}

// Trials are grouped into fixed-size blocks, each driven by its own ChaCha
// stream keyed by (seed, block index), so the count depends only on the seed.
fn monte_carlo_hits<F: ObservationFamily>(model: &InvestigationModel<F>, trials: u64, seed: u64, policy: Parallelism) -> u64 {
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    let threshold = model.log_threshold();
    let k = model.k as usize;
    map_indexed(policy, blocks as usize, |b| {
        let b = b as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b);
        let n = TRIALS_PER_BLOCK.min(trials - b * TRIALS_PER_BLOCK);
        let mut hits = 0u64;
        for _ in 0..n {
            let mut total = 0.0;
            for _ in 0..k {
                total += model.family.log_ratio(model.family.sample(Hypothesis::H1, &mut rng));
            }
            if total >= threshold {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Maps an authenticity probability onto the activation range: `2 p - 1`.
pub fn authenticity_to_activation(p_a: f64) -> Result<f64, InitError> {
    if !(0.0..=1.0).contains(&p_a) {
        return Err(InitError::ProbabilityOutOfRange(p_a));
    }
    Ok(2.0 * p_a - 1.0)
}

/// File form of a Gaussian investigation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvestigationConfig {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma: f64,
    pub prior_h0: f64,
    pub k: u32,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_method")]
    pub method: MethodKind,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub claim_prior_ratio: f64,
}

fn default_method() -> MethodKind {
    MethodKind::ClosedForm
}

fn default_trials() -> u64 {
    100_000
}

fn one() -> f64 {
    1.0
}

impl InvestigationConfig {
    pub fn model(&self) -> InvestigationModel<GaussianPair> {
        InvestigationModel {
            family: GaussianPair {
                mu0: self.mu0,
                mu1: self.mu1,
                sigma: self.sigma,
            },
            message: true,
            operation: String::new(),
            prior_h0: self.prior_h0,
            claim_prior_ratio: self.claim_prior_ratio,
            k: self.k,
            tau: self.tau,
        }
    }

    pub fn method(&self) -> Method {
        match self.method {
            MethodKind::ClosedForm => Method::ClosedForm,
            MethodKind::MonteCarlo => Method::MonteCarlo {
                trials: self.trials,
                seed: self.seed,
            },
        }
    }

    pub fn run(&self, policy: Parallelism) -> Result<AuthenticityReport, InitError> {
        claim_authenticity(&self.model(), self.method(), policy)
    }
}
