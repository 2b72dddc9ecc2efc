//! Household education decision model.
//!
//! A household with income `y` and perceived education value `β` enrolls a
//! daughter iff `y ≥ k` and `β ≥ k`, where `k` is the cost of schooling. When
//! the cost is removed the budget constraint disappears and enrollment is
//! `β ≥ 0`. Educated and non-educated households draw `(y, β)` from
//! `(F¹, G¹)` and `(F⁰, G⁰)` respectively; `y` and `β` are independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::did::Dominance;
use crate::numerics::norm_cdf;
use crate::parallel::derive_seed;
use crate::{Error, Result};

/// Default mean of the income noise of educated households.
pub const DEFAULT_LOC1: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Distribution {
    Normal { mean: f64, sd: f64 },
    /// `α + ε` with `α ~ Bernoulli(p)` on {0, 1} and `ε ~ N(loc, sd²)`.
    BernoulliNormalMixture { p: f64, loc: f64, sd: f64 },
}

impl Distribution {
    pub fn normal(mean: f64, sd: f64) -> Self {
        Distribution::Normal { mean, sd }
    }

    pub fn mixture(p: f64, loc: f64, sd: f64) -> Self {
        Distribution::BernoulliNormalMixture { p, loc, sd }
    }

    pub fn validate(&self) -> Result<()> {
        let (loc, sd) = match *self {
            Distribution::Normal { mean, sd } => (mean, sd),
            Distribution::BernoulliNormalMixture { p, loc, sd } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!("mixture weight p = {p} outside [0, 1]")));
                }
                (loc, sd)
            }
        };
        if !loc.is_finite() {
            return Err(Error::Domain(format!("location {loc} is not finite")));
        }
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::Domain(format!("sd = {sd} must be positive and finite")));
        }
        Ok(())
    }

    /// CDF at `x`; ±∞ map to 0 and 1. Assumes a valid distribution.
    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 1.0;
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        match *self {
            Distribution::Normal { mean, sd } => norm_cdf((x - mean) / sd),
            Distribution::BernoulliNormalMixture { p, loc, sd } => {
                p * norm_cdf((x - 1.0 - loc) / sd) + (1.0 - p) * norm_cdf((x - loc) / sd)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Distribution::BernoulliNormalMixture { p, loc, sd } => {
                let alpha = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
                let z: f64 = rng.sample(StandardNormal);
                alpha + loc + sd * z
            }
        }
    }
}

/// Checked CDF.
pub fn cdf(d: &Distribution, x: f64) -> Result<f64> {
    d.validate()?;
    if x.is_nan() {
        return Err(Error::Domain("cdf at NaN".into()));
    }
    Ok(d.cdf(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    Educated,
    NonEducated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionModelSpec {
    /// Income law of non-educated households.
    pub f0: Distribution,
    /// Income law of educated households.
    pub f1: Distribution,
    /// Education-value law of non-educated households.
    pub g0: Distribution,
    /// Education-value law of educated households.
    pub g1: Distribution,
    pub k: f64,
    /// Share of households with an educated head. Carried for aggregation;
    /// the group effects do not depend on it.
    pub eta: f64,
}

impl DecisionModelSpec {
    /// Parametric family: `F⁰ = Mix(p⁰, 0, 1)`, `F¹ = Mix(p¹, loc¹, 1)`,
    /// `G⁰ = N(0, 1)`, `G¹ = N(μ, 1)`.
    pub fn parametric(p0: f64, p1: f64, mu: f64, loc1: f64, k: f64) -> Result<Self> {
        let spec = Self {
            f0: Distribution::mixture(p0, 0.0, 1.0),
            f1: Distribution::mixture(p1, loc1, 1.0),
            g0: Distribution::normal(0.0, 1.0),
            g1: Distribution::normal(mu, 1.0),
            k,
            eta: 0.5,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for d in [&self.f0, &self.f1, &self.g0, &self.g1] {
            d.validate()?;
        }
        check_k(self.k)?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Domain(format!("eta = {} outside [0, 1]", self.eta)));
        }
        Ok(())
    }

    /// (F, G) of a group.
    pub fn laws(&self, group: Group) -> (Distribution, Distribution) {
        match group {
            Group::Educated => (self.f1, self.g1),
            Group::NonEducated => (self.f0, self.g0),
        }
    }

    /// FOSD assumptions of the model (F¹ over F⁰, G¹ over G⁰) on `grid`.
    /// Violations are allowed; callers may report them.
    pub fn fosd_flags(&self, grid: &[f64]) -> (Dominance, Dominance) {
        (dominance_check(&self.f1, &self.f0, grid), dominance_check(&self.g1, &self.g0, grid))
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0) || k.is_infinite() {
        return Err(Error::Domain(format!("cost k = {k} must be finite and non-negative")));
    }
    Ok(())
}

/// P(enroll) at cost `k`: (1 − F(k))(1 − G(k)) for k > 0, 1 − G(0) at k = 0.
pub fn enrollment_prob(spec: &DecisionModelSpec, group: Group, k: f64) -> Result<f64> {
    check_k(k)?;
    let (f, g) = spec.laws(group);
    Ok(enrollment(&f, &g, k))
}

fn enrollment(f: &Distribution, g: &Distribution, k: f64) -> f64 {
    if k == 0.0 {
        1.0 - g.cdf(0.0)
    } else {
        (1.0 - f.cdf(k)) * (1.0 - g.cdf(k))
    }
}

/// Effect of removing cost `k`: (G(k) − G(0)) + F(k)(1 − G(k)), and 0 at k = 0.
pub fn policy_effect(spec: &DecisionModelSpec, group: Group, k: f64) -> Result<f64> {
    check_k(k)?;
    let (f, g) = spec.laws(group);
    Ok(effect(&f, &g, k))
}

fn effect(f: &Distribution, g: &Distribution, k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let gk = g.cdf(k);
    (gk - g.cdf(0.0)) + f.cdf(k) * (1.0 - gk)
}

/// Whether F¹(k)(1−G¹(k)) − F⁰(k)(1−G⁰(k)) < (G⁰(k)−G⁰(0)) − (G¹(k)−G¹(0)),
/// the condition for the non-educated group to gain more.
pub fn noneducated_gain_larger(spec: &DecisionModelSpec, k: f64) -> Result<bool> {
    check_k(k)?;
    let (f0, g0, f1, g1) = (spec.f0, spec.g0, spec.f1, spec.g1);
    let lhs = f1.cdf(k) * (1.0 - g1.cdf(k)) - f0.cdf(k) * (1.0 - g0.cdf(k));
    let rhs = (g0.cdf(k) - g0.cdf(0.0)) - (g1.cdf(k) - g1.cdf(0.0));
    Ok(lhs < rhs)
}

/// Sign label of a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(v: f64) -> Self {
        if v < 0.0 {
            Sign::Negative
        } else if v > 0.0 {
            Sign::Positive
        } else {
            Sign::Zero
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapCell {
    pub mu: f64,
    pub p1: f64,
    pub tau0: f64,
    pub tau1: f64,
    /// τ¹ − τ⁰
    pub f: f64,
    pub sign: Sign,
}

/// Grid settings for [`effect_gap_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSettings {
    pub k: f64,
    pub p0: f64,
    /// Mean of the educated households' income noise.
    pub loc1: f64,
}

impl Default for GapSettings {
    fn default() -> Self {
        Self { k: 0.1, p0: 0.5, loc1: DEFAULT_LOC1 }
    }
}

/// `start, start + step, …` up to `end` (inclusive within half a step), computed
/// by multiplication so grid points do not accumulate rounding.
pub fn linear_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::Config(format!("invalid grid {start}..{end} step {step}")));
    }
    let n = ((end - start) / step + 0.5).floor() as usize;
    if n > 10_000_000 {
        return Err(Error::Config(format!("grid {start}..{end} step {step} is too large")));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// μ ∈ [0, 3] in steps of 0.05.
pub fn default_mu_grid() -> Vec<f64> {
    (0..=60).map(|i| i as f64 * 0.05).collect()
}

/// f(μ, p¹) = τ¹ − τ⁰ over the grid, μ-major order. τ⁰ uses
/// `F⁰ = Mix(p⁰, 0, 1)`, `G⁰ = N(0, 1)`; τ¹ uses `F¹ = Mix(p¹, loc¹, 1)`, `G¹ = N(μ, 1)`.
pub fn effect_gap_grid(mu_grid: &[f64], p1_grid: &[f64], settings: &GapSettings) -> Result<Vec<GapCell>> {
    if mu_grid.is_empty() || p1_grid.is_empty() {
        return Err(Error::Config("effect gap grid needs non-empty mu and p1 grids".into()));
    }
    check_k(settings.k)?;
    for &p1 in p1_grid {
        DecisionModelSpec::parametric(settings.p0, p1, 0.0, settings.loc1, settings.k)?;
    }
    for &mu in mu_grid {
        DecisionModelSpec::parametric(settings.p0, 0.5, mu, settings.loc1, settings.k)?;
    }
    let base = DecisionModelSpec::parametric(settings.p0, settings.p0, 0.0, settings.loc1, settings.k)?;
    let tau0 = effect(&base.f0, &base.g0, settings.k);
    let cells: Vec<(f64, f64)> = mu_grid.iter().flat_map(|&mu| p1_grid.iter().map(move |&p1| (mu, p1))).collect();
    Ok(cells
        .par_iter()
        .map(|&(mu, p1)| {
            let f1 = Distribution::mixture(p1, settings.loc1, 1.0);
            let g1 = Distribution::normal(mu, 1.0);
            let tau1 = effect(&f1, &g1, settings.k);
            let f = tau1 - tau0;
            GapCell { mu, p1, tau0, tau1, f, sign: Sign::of(f) }
        })
        .collect())
}

/// `a` dominates `b` iff CDF_a ≤ CDF_b on every grid point, strictly somewhere.
pub fn dominance_check(a: &Distribution, b: &Distribution, grid: &[f64]) -> Dominance {
    let (mut a_below, mut b_below) = (false, false);
    for &x in grid {
        let (fa, fb) = (a.cdf(x), b.cdf(x));
        a_below |= fa < fb;
        b_below |= fb < fa;
    }
    match (a_below, b_below) {
        (false, false) => Dominance::Identical,
        (true, false) => Dominance::FirstDominates,
        (false, true) => Dominance::SecondDominates,
        (true, true) => Dominance::Crossing,
    }
}

/// Draws per Monte Carlo chunk; each chunk has its own derived seed.
pub const MC_CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub n: usize,
    pub enroll_with_cost: f64,
    pub enroll_without_cost: f64,
    pub tau_hat: f64,
    pub se: f64,
}

/// Monte Carlo policy effect with common random numbers: each simulated
/// household is evaluated with and without the cost. The effect is the share
/// of households that enroll only without the cost, so its standard error is
/// the binomial √(τ̂(1−τ̂)/n).
pub fn mc_simulate(spec: &DecisionModelSpec, group: Group, k: f64, n: usize, seed: u64) -> Result<McResult> {
    spec.validate()?;
    check_k(k)?;
    if n == 0 {
        return Err(Error::Config("Monte Carlo needs n >= 1".into()));
    }
    let (f, g) = spec.laws(group);
    let chunks = n.div_ceil(MC_CHUNK);
    let (with_cost, without_cost) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            let (mut e_k, mut e_0) = (0u64, 0u64);
            for _ in 0..len {
                let y = f.sample(&mut rng);
                let beta = g.sample(&mut rng);
                let free = beta >= 0.0;
                let paid = if k == 0.0 { free } else { y >= k && beta >= k };
                e_0 += u64::from(free);
                e_k += u64::from(paid);
            }
            (e_k, e_0)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let tau_hat = (without_cost - with_cost) as f64 / nf;
    Ok(McResult {
        n,
        enroll_with_cost: with_cost as f64 / nf,
        enroll_without_cost: without_cost as f64 / nf,
        tau_hat,
        se: (tau_hat * (1.0 - tau_hat) / nf).sqrt(),
    })
}
