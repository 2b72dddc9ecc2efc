//! Seeded synthetic panels with analytic ground truth.
//!
//! [`generate_probit_panel`] draws children from the latent probit model, so
//! the per-row effect on the treated is known exactly. [`generate_decision_panel`]
//! simulates the household decision model, with daughters of exposed cohorts
//! facing no schooling cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{covariates, ChildRecord, EstimationSample, HouseholdPanel, HouseholdRecord, Religion, SampleWindows, N_COVARIATES};
use crate::decision_model::{enrollment_prob, DecisionModelSpec, Distribution, Group};
use crate::did::tau_at;
use crate::numerics::{norm_cdf, std_normal_quantile};
use crate::parallel::derive_seed;
use crate::{Error, Result, SCHEMA_VERSION};

/// Household and child composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariateLaw {
    pub p_educated_head: f64,
    pub p_low_hwi: f64,
    /// P(christian), P(muslim), P(other).
    pub religion: [f64; 3],
    pub p_female_head: f64,
    pub p_rural: f64,
    /// Mean of the Poisson child count before truncation at 1.
    pub mean_children: f64,
    pub p_female_child: f64,
    /// Child ages are uniform on [age_min, age_max].
    pub age_min: u32,
    pub age_max: u32,
}

impl Default for CovariateLaw {
    fn default() -> Self {
        Self {
            p_educated_head: 0.2347,
            p_low_hwi: 0.5,
            religion: [0.45, 0.25, 0.30],
            p_female_head: 0.2,
            p_rural: 1.0,
            mean_children: 3.0,
            p_female_child: 0.5,
            age_min: 13,
            age_max: 28,
        }
    }
}

impl CovariateLaw {
    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_educated_head, self.p_low_hwi, self.p_female_head, self.p_rural, self.p_female_child];
        if probs.iter().chain(&self.religion).any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("covariate law probabilities must lie in [0, 1]".into()));
        }
        if (self.religion.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("religion frequencies sum to {}, expected 1", self.religion.iter().sum::<f64>())));
        }
        if !(self.mean_children > 0.0 && self.mean_children.is_finite()) {
            return Err(Error::Config(format!("mean_children = {} must be positive", self.mean_children)));
        }
        if self.age_min > self.age_max || self.age_max > 120 {
            return Err(Error::Config(format!("child ages [{}, {}] must satisfy min <= max <= 120", self.age_min, self.age_max)));
        }
        Ok(())
    }

    fn draw_household<R: Rng>(&self, rng: &mut R, id: String) -> HouseholdRecord {
        let head_edu_years = if rng.random_bool(self.p_educated_head) { rng.random_range(1..=6) } else { 0 };
        let hwi = {
            let z: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            if rng.random_bool(self.p_low_hwi) {
                -z
            } else {
                z.max(1e-6)
            }
        };
        let u: f64 = rng.random();
        let religion = if u < self.religion[0] {
            Religion::Christian
        } else if u < self.religion[0] + self.religion[1] {
            Religion::Muslim
        } else {
            Religion::Other
        };
        let poisson = Poisson::new(self.mean_children).expect("validated mean");
        let n = loop {
            let k: f64 = rng.sample(poisson);
            if k >= 1.0 {
                break k as usize;
            }
        };
        let children = (0..n)
            .map(|j| ChildRecord {
                child_id: format!("{id}-c{j}"),
                age_years: rng.random_range(self.age_min..=self.age_max),
                female: rng.random_bool(self.p_female_child),
                educated: false,
            })
            .collect();
        HouseholdRecord {
            household_id: id,
            head_edu_years,
            head_female: rng.random_bool(self.p_female_head),
            rural: rng.random_bool(self.p_rural),
            religion,
            hwi,
            n_children: n,
            children,
            subsample: false,
        }
    }
}

fn household_id(i: usize) -> String {
    format!("h{i:07}")
}

/// Latent probit data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    /// κ in [`EstimationSample::column_names`] order.
    pub kappa_true: Vec<f64>,
    pub law: CovariateLaw,
    /// Windows defining T when outcomes are drawn.
    pub windows: SampleWindows,
    pub n_households: usize,
    pub seed: u64,
}

impl DgpSpec {
    /// A moderate κ with nonzero interactions.
    pub fn default_kappa() -> Vec<f64> {
        vec![
            -0.1, 0.15, // G, T
            0.25, -0.15, 0.1, -0.03, 0.05, -0.05, 0.05, // W block
            -0.3, 0.8, -0.4, -0.05, 0.2, -0.2, 0.1, // X block
        ]
    }

    pub fn new(n_households: usize, seed: u64) -> Self {
        Self { kappa_true: Self::default_kappa(), law: CovariateLaw::default(), windows: SampleWindows::default(), n_households, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa_true.len() != EstimationSample::width() {
            return Err(Error::Config(format!("kappa_true has {} entries, expected {}", self.kappa_true.len(), EstimationSample::width())));
        }
        if self.kappa_true.iter().any(|k| !k.is_finite()) {
            return Err(Error::Config("kappa_true must be finite".into()));
        }
        if self.n_households == 0 {
            return Err(Error::Config("n_households must be at least 1".into()));
        }
        self.law.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub household_id: String,
    pub child_id: String,
    pub tau: f64,
}

/// Analytic truth attached to a probit panel: τ(X) for every treated child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitTruth {
    pub schema_version: u32,
    pub kappa_true: Vec<f64>,
    pub column_names: Vec<String>,
    pub true_att: f64,
    pub n_treated: usize,
    pub rows: Vec<TruthRow>,
}

impl ProbitTruth {
    /// Mean true τ over the listed children.
    pub fn att_over<'a>(&self, child_ids: impl IntoIterator<Item = &'a str>) -> Option<f64> {
        let lookup: std::collections::HashMap<&str, f64> = self.rows.iter().map(|r| (r.child_id.as_str(), r.tau)).collect();
        let (mut sum, mut n) = (0.0, 0usize);
        for id in child_ids {
            sum += lookup.get(id)?;
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Draw a panel from the latent probit model `Y* = αG + βT + γ(XW) + θX + ε`.
/// G marks rural daughters; T marks ages in the post window of `spec.windows`.
pub fn generate_probit_panel(spec: &DgpSpec) -> Result<(HouseholdPanel, ProbitTruth)> {
    spec.validate()?;
    let k = &spec.kappa_true;
    let drawn: Vec<(HouseholdRecord, Vec<TruthRow>)> = (0..spec.n_households)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, i as u64));
            let mut h = spec.law.draw_household(&mut rng, household_id(i));
            let x = covariates(&h);
            let mut truth = Vec::new();
            for c in &mut h.children {
                let g = h.rural && c.female;
                let t = spec.windows.post.contains(c.age_years);
                let w = g && t;
                let xw = if w { x } else { [0.0; N_COVARIATES] };
                let mut z = if g { k[0] } else { 0.0 } + if t { k[1] } else { 0.0 };
                z += (0..N_COVARIATES).map(|j| k[2 + j] * xw[j] + k[2 + N_COVARIATES + j] * x[j]).sum::<f64>();
                let e: f64 = rng.sample(StandardNormal);
                c.educated = z + e > 0.0;
                if w {
                    let tau = tau_at(k, &x, &x).expect("dimensions validated");
                    truth.push(TruthRow { household_id: h.household_id.clone(), child_id: c.child_id.clone(), tau });
                }
            }
            (h, truth)
        })
        .collect();
    let mut households = Vec::with_capacity(drawn.len());
    let mut rows = Vec::new();
    for (h, t) in drawn {
        households.push(h);
        rows.extend(t);
    }
    let true_att = if rows.is_empty() { 0.0 } else { rows.iter().map(|r| r.tau).sum::<f64>() / rows.len() as f64 };
    Ok((
        HouseholdPanel::new(households),
        ProbitTruth {
            schema_version: SCHEMA_VERSION,
            kappa_true: k.clone(),
            column_names: EstimationSample::column_names(),
            true_att,
            n_treated: rows.len(),
            rows,
        },
    ))
}

/// Pre-policy enrollment share and policy effect targeted for one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupTarget {
    pub pre: f64,
    pub tau: f64,
    /// Mixture weight of the income law.
    pub p: f64,
}

/// Built-in decision-panel scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Educated households near saturation: 76% vs 37% pre-policy enrollment.
    Saturation,
    /// Educated households far from saturation: 27% vs 14%.
    Conditional,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "saturation" => Some(Preset::Saturation),
            "conditional" => Some(Preset::Conditional),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Saturation => "saturation",
            Preset::Conditional => "conditional",
        }
    }

    /// (educated, non-educated) targets.
    pub fn targets(self) -> (GroupTarget, GroupTarget) {
        match self {
            Preset::Saturation => (GroupTarget { pre: 0.76, tau: 0.0027, p: 0.9 }, GroupTarget { pre: 0.37, tau: 0.038, p: 0.5 }),
            Preset::Conditional => (GroupTarget { pre: 0.27, tau: 0.24, p: 0.9 }, GroupTarget { pre: 0.14, tau: 0.1964, p: 0.5 }),
        }
    }

    pub fn spec(self) -> Result<DecisionModelSpec> {
        let (edu, non) = self.targets();
        calibrate_spec(edu, non, PRESET_COST, PRESET_ETA)
    }
}

/// Schooling cost used by the presets; small enough that every target is reachable.
pub const PRESET_COST: f64 = 0.005;
/// Share of educated household heads in the presets.
pub const PRESET_ETA: f64 = 0.2347;

/// Solve (G, F) for one group so that enrollment is `pre` at cost `k` and
/// `pre + tau` without cost: G = N(μ, 1) with Φ(μ) = pre + tau, then the
/// income location so that (1 − F(k))(1 − G(k)) = pre.
pub fn calibrate_group(target: GroupTarget, k: f64) -> Result<(Distribution, Distribution)> {
    let post = target.pre + target.tau;
    if !(target.pre > 0.0 && target.tau > 0.0 && post < 1.0 && k > 0.0) || !(0.0..=1.0).contains(&target.p) {
        return Err(Error::Config(format!("unreachable calibration target {target:?} at k = {k}")));
    }
    let mu = std_normal_quantile(post)?;
    let g = Distribution::normal(mu, 1.0);
    let afford = target.pre / (1.0 - g.cdf(k));
    if !(afford < 1.0) {
        return Err(Error::Config(format!("target {target:?} needs more enrollment than the education value allows at k = {k}")));
    }
    let want = 1.0 - afford;
    // F(k) decreases in the location
    let (mut lo, mut hi) = (-40.0, 40.0);
    let f_at = |loc: f64| Distribution::mixture(target.p, loc, 1.0).cdf(k);
    if !(f_at(lo) > want && f_at(hi) < want) {
        return Err(Error::Config(format!("income location for {target:?} is outside [-40, 40]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_at(mid) > want {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((Distribution::mixture(target.p, 0.5 * (lo + hi), 1.0), g))
}

pub fn calibrate_spec(educated: GroupTarget, non_educated: GroupTarget, k: f64, eta: f64) -> Result<DecisionModelSpec> {
    let (f1, g1) = calibrate_group(educated, k)?;
    let (f0, g0) = calibrate_group(non_educated, k)?;
    let spec = DecisionModelSpec { f0, f1, g0, g1, k, eta };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionDgp {
    pub model: DecisionModelSpec,
    /// Household composition; the educated-head share is taken from `model.eta`.
    pub law: CovariateLaw,
    pub windows: SampleWindows,
    /// Cost faced by rural daughters in the post window.
    pub post_cost: f64,
    pub n_households: usize,
    pub seed: u64,
}

impl DecisionDgp {
    pub fn preset(preset: Preset, n_households: usize, seed: u64) -> Result<Self> {
        let model = preset.spec()?;
        Ok(Self {
            law: CovariateLaw { p_educated_head: model.eta, ..CovariateLaw::default() },
            model,
            windows: SampleWindows::default(),
            post_cost: 0.0,
            n_households,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupTruth {
    /// Enrollment at cost k.
    pub pre: f64,
    /// Enrollment at the post-policy cost.
    pub post: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTruth {
    pub schema_version: u32,
    pub model: DecisionModelSpec,
    pub post_cost: f64,
    pub educated: GroupTruth,
    pub non_educated: GroupTruth,
}

fn group_truth(model: &DecisionModelSpec, group: Group, post_cost: f64) -> Result<GroupTruth> {
    let pre = enrollment_prob(model, group, model.k)?;
    let post = enrollment_prob(model, group, post_cost)?;
    Ok(GroupTruth { pre, post, tau: post - pre })
}

/// Simulate the decision model. Each child draws its own (y, β) from its
/// household's group laws and enrolls iff y ≥ c and β ≥ c (β ≥ 0 when c = 0),
/// where c is `post_cost` for rural daughters in the post window and k otherwise.
pub fn generate_decision_panel(dgp: &DecisionDgp) -> Result<(HouseholdPanel, DecisionTruth)> {
    dgp.model.validate()?;
    dgp.law.validate()?;
    if !(dgp.post_cost >= 0.0 && dgp.post_cost.is_finite()) {
        return Err(Error::Config(format!("post_cost = {} must be finite and non-negative", dgp.post_cost)));
    }
    if dgp.n_households == 0 {
        return Err(Error::Config("n_households must be at least 1".into()));
    }
    let law = CovariateLaw { p_educated_head: dgp.model.eta, ..dgp.law };
    let households: Vec<HouseholdRecord> = (0..dgp.n_households)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(dgp.seed, i as u64));
            let mut h = law.draw_household(&mut rng, household_id(i));
            let group = if h.head_educated() { Group::Educated } else { Group::NonEducated };
            let (f, g) = dgp.model.laws(group);
            for c in &mut h.children {
                let exposed = h.rural && c.female && dgp.windows.post.contains(c.age_years);
                let cost = if exposed { dgp.post_cost } else { dgp.model.k };
                let y = f.sample(&mut rng);
                let beta = g.sample(&mut rng);
                c.educated = if cost == 0.0 { beta >= 0.0 } else { y >= cost && beta >= cost };
            }
            h
        })
        .collect();
    let truth = DecisionTruth {
        schema_version: SCHEMA_VERSION,
        model: dgp.model,
        post_cost: dgp.post_cost,
        educated: group_truth(&dgp.model, Group::Educated, dgp.post_cost)?,
        non_educated: group_truth(&dgp.model, Group::NonEducated, dgp.post_cost)?,
    };
    Ok((HouseholdPanel::new(households), truth))
}

/// Sidecar written next to a simulated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Truth {
    Probit(ProbitTruth),
    Decision(DecisionTruth),
}

/// Two-cell closed form used in tests: the ATT when the only covariate
/// beyond the constant is one binary indicator with share `share`.
pub fn two_cell_att(z0: [f64; 2], shift: [f64; 2], share: f64) -> f64 {
    let cell = |j: usize| norm_cdf(z0[j] + shift[j]) - norm_cdf(z0[j]);
    (1.0 - share) * cell(0) + share * cell(1)
}
