//! Experiment configuration: the on-disk TOML schema and its resolution
//! into validated laws, scales, and budgets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gw::{self, ScalePolicy};
use crate::offspring::{OffspringLaw, Regime};
use crate::steps::{StepComponent, StepLaw};

/// `[offspring]` section.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OffspringSpec {
    Table {
        probs: Vec<f64>,
    },
    BinaryCritical,
    Geometric {
        mean: f64,
    },
    Stable {
        beta: f64,
        c: f64,
        support_cutoff: Option<usize>,
    },
}

impl OffspringSpec {
    pub fn build(&self) -> Result<OffspringLaw> {
        match self {
            OffspringSpec::Table { probs } => OffspringLaw::table(probs),
            OffspringSpec::BinaryCritical => Ok(OffspringLaw::binary_critical()),
            OffspringSpec::Geometric { mean } => OffspringLaw::geometric(*mean),
            OffspringSpec::Stable {
                beta,
                c,
                support_cutoff,
            } => match support_cutoff {
                Some(k) => OffspringLaw::stable_with_cutoff(*beta, *c, *k),
                None => OffspringLaw::stable(*beta, *c),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Gaussian,
    Rademacher,
    Uniform,
    Pareto,
}

/// `[step]` section.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub component: StepKind,
    pub dimension: u32,
    pub half_width: Option<f64>,
    pub tail_index: Option<f64>,
}

impl StepSpec {
    pub fn build(&self) -> Result<StepLaw> {
        let component = match self.component {
            StepKind::Gaussian => StepComponent::StandardGaussian,
            StepKind::Rademacher => StepComponent::Rademacher,
            StepKind::Uniform => StepComponent::Uniform {
                half_width: self
                    .half_width
                    .ok_or_else(|| Error::Config("uniform step needs `half_width`".into()))?,
            },
            StepKind::Pareto => StepComponent::ParetoSymmetric {
                tail_index: self
                    .tail_index
                    .ok_or_else(|| Error::Config("pareto step needs `tail_index`".into()))?,
            },
        };
        StepLaw::new(component, self.dimension)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Direct,
    Factorized,
    Both,
}

fn default_fields() -> usize {
    2000
}
fn default_eps() -> f64 {
    1e-3
}
fn default_cap() -> usize {
    crate::engine::DEFAULT_POPULATION_CAP
}

/// `[experiment]` section.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Declared regime, cross-checked against the offspring law.
    pub regime: Option<Regime>,
    pub n: Vec<u64>,
    pub r: Vec<f64>,
    pub estimator: EstimatorKind,
    /// Poisson fields per direct estimate.
    #[serde(default = "default_fields")]
    pub fields: usize,
    /// Ancestor-run budget per factorized estimate (defaults to 100x fields).
    pub budget: Option<usize>,
    #[serde(default = "default_eps")]
    pub eps_trunc: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

/// The whole config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub offspring: OffspringSpec,
    pub step: StepSpec,
    pub experiment: ExperimentSpec,
}

impl ConfigFile {
    pub fn parse_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_specs(&self.offspring, &self.step, &self.experiment)
    }
}

/// A validated, resolved experiment: laws constructed, scale selected,
/// moment conditions checked.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub law: OffspringLaw,
    pub step: StepLaw,
    pub policy: ScalePolicy,
    pub d: u32,
    pub n_list: Vec<u64>,
    pub r_list: Vec<f64>,
    pub estimator: EstimatorKind,
    pub fields: usize,
    pub budget: usize,
    pub eps_trunc: f64,
    pub cap: usize,
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_specs(
        offspring: &OffspringSpec,
        step: &StepSpec,
        exp: &ExperimentSpec,
    ) -> Result<Self> {
        let law = offspring.build()?;
        let step_law = step.build()?;
        let d = step_law.dim();
        let policy = gw::scale_policy(&law, d)?;

        if let Some(declared) = exp.regime {
            if declared != law.regime() {
                return Err(Error::Config(format!(
                    "declared regime {declared} does not match the offspring law ({})",
                    law.regime()
                )));
            }
        }
        check_step_moments(&law, &step_law, d)?;

        if exp.n.is_empty() || exp.r.is_empty() {
            return Err(Error::Config("n and r grids must be non-empty".into()));
        }
        if exp.r.iter().any(|&r| r.is_nan() || r <= 0.0) {
            return Err(Error::Config("all r must be positive".into()));
        }
        if exp.fields < 100 {
            return Err(Error::Config(format!(
                "at least 100 fields are required, got {}",
                exp.fields
            )));
        }
        if !(exp.eps_trunc > 0.0 && exp.eps_trunc <= 0.01) {
            return Err(Error::Config(format!(
                "eps_trunc must lie in (0, 0.01], got {}",
                exp.eps_trunc
            )));
        }
        if exp.cap < 1 {
            return Err(Error::Config("population cap must be >= 1".into()));
        }

        let mut r_list = exp.r.clone();
        r_list.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r_list.dedup();
        let mut n_list = exp.n.clone();
        n_list.sort_unstable();
        n_list.dedup();

        Ok(ExperimentConfig {
            law,
            step: step_law,
            policy,
            d,
            n_list,
            r_list,
            estimator: exp.estimator,
            fields: exp.fields,
            budget: exp.budget.unwrap_or(exp.fields.saturating_mul(100)),
            eps_trunc: exp.eps_trunc,
            cap: exp.cap,
            master_seed: exp.master_seed,
            workers: exp.workers,
            output: exp.output.clone(),
        })
    }
}

/// Each regime's limit theorem needs step moments of a minimum order.
fn check_step_moments(law: &OffspringLaw, step: &StepLaw, d: u32) -> Result<()> {
    let required: f64 = match law.regime() {
        Regime::CriticalFiniteVar => match d {
            1 => 2.0,
            2 => 4.0,
            _ => 3.0,
        },
        Regime::CriticalStable => (1.0 + law.beta().expect("stable law")) * d as f64,
        Regime::Subcritical => 1.0,
    };
    if step.alpha() <= required {
        return Err(Error::Regime(format!(
            "the {} regime in d = {d} needs step moments of order > {required}, \
             but the step law only guarantees orders below {}",
            law.regime(),
            step.alpha()
        )));
    }
    Ok(())
}
