//! Scenario configuration: a TOML document with fixed sections, schema
//! validated before any computation. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use refmarket::abm::{AbmConfig, AbmMode, AbmScenario};
use refmarket::dist::{ReferralFamily, ReferralPmf, ValueDistribution};
use refmarket::dynamics::{GroupParams, GroupState};
use refmarket::policy::AaKind;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub values: ValuesSection,
    pub referrals: ReferralsSection,
    pub groups: GroupsSection,
    pub market: MarketSection,
    pub initial_state: StateSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub policy: Option<PolicySection>,
    #[serde(default)]
    pub abm: Option<AbmSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuesSection {
    /// Inline `[value, prob]` atoms.
    #[serde(default)]
    pub atoms: Option<Vec<[f64; 2]>>,
    /// Alternative: path to a `value,prob`-per-line CSV file.
    #[serde(default)]
    pub file: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferralsSection {
    /// Family tag: "poisson" or "tabulated".
    pub family: String,
    /// Knot means for a tabulated family.
    #[serde(default)]
    pub means: Option<Vec<f64>>,
    /// Knot PMFs (rows aligned with `means`).
    #[serde(default)]
    pub pmfs: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupsSection {
    pub n_b: f64,
    pub n_g: f64,
    pub h_b: f64,
    pub h_g: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub w_min: f64,
    /// Default mixing parameter.
    #[serde(default = "default_r")]
    pub r: f64,
}

fn default_r() -> f64 {
    1.0
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub e_b: f64,
    pub e_g: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// Convergence tolerance override for steady-state iteration.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

fn default_periods() -> usize {
    20
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            periods: default_periods(),
            tolerance: None,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    #[serde(default)]
    pub aa_kind: Option<String>,
    #[serde(default)]
    pub aa_size: Option<f64>,
    #[serde(default)]
    pub aa_period: Option<usize>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbmSection {
    pub firm_count: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_abm_periods")]
    pub periods: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> String {
    "myopic".into()
}

fn default_abm_periods() -> usize {
    10
}

/// Parsed and validated scenario, converted to domain types.
pub struct Scenario {
    pub values: ValueDistribution,
    pub family: ReferralFamily,
    pub params: GroupParams,
    pub state0: GroupState,
    pub w_min: f64,
    pub r: f64,
    pub run: RunSection,
    pub policy: Option<PolicySection>,
    pub abm: Option<AbmSection>,
    /// Raw config bytes, hashed into every CSV.
    pub raw: Vec<u8>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let raw = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&raw)
            .map_err(|e| CliError::Config(format!("{} is not UTF-8: {e}", path.display())))?;
        let cfg: ScenarioConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.into_scenario(raw, path)
    }

    fn into_scenario(self, raw: Vec<u8>, path: &Path) -> Result<Scenario, CliError> {
        let conf = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));

        let values = match (&self.values.atoms, &self.values.file) {
            (Some(atoms), None) => {
                ValueDistribution::new(atoms.iter().map(|a| (a[0], a[1])).collect())
                    .map_err(|e| conf(format!("section [values]: {e}")))?
            }
            (None, Some(file)) => {
                let rel = path.parent().unwrap_or(Path::new(".")).join(file);
                let text = std::fs::read_to_string(&rel)
                    .map_err(|e| conf(format!("values file {}: {e}", rel.display())))?;
                ValueDistribution::from_csv(&text)
                    .map_err(|e| conf(format!("values file {}: {e}", rel.display())))?
            }
            (Some(_), Some(_)) => {
                return Err(conf("section [values]: give either atoms or file, not both".into()))
            }
            (None, None) => {
                return Err(conf("section [values]: needs atoms or file".into()))
            }
        };

        let family = match self.referrals.family.as_str() {
            "poisson" => ReferralFamily::poisson(),
            "tabulated" => {
                let means = self
                    .referrals
                    .means
                    .as_ref()
                    .ok_or_else(|| conf("section [referrals]: tabulated family needs means".into()))?;
                let pmfs = self
                    .referrals
                    .pmfs
                    .as_ref()
                    .ok_or_else(|| conf("section [referrals]: tabulated family needs pmfs".into()))?;
                if means.len() != pmfs.len() {
                    return Err(conf("section [referrals]: means and pmfs must align".into()));
                }
                let knots = means
                    .iter()
                    .zip(pmfs)
                    .map(|(&m, probs)| {
                        ReferralPmf::new(probs.clone(), 0.0).map(|p| (m, p))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| conf(format!("section [referrals]: {e}")))?;
                ReferralFamily::tabulated(knots)
                    .map_err(|e| conf(format!("section [referrals]: {e}")))?
            }
            other => {
                return Err(conf(format!(
                    "section [referrals]: unknown family tag {other:?} (try \"poisson\")"
                )))
            }
        };

        let params = GroupParams::new(
            self.groups.n_b,
            self.groups.n_g,
            self.groups.h_b,
            self.groups.h_g,
            family.clone(),
        )
        .map_err(|e| conf(format!("section [groups]: {e}")))?;

        if !(0.0..=1.0).contains(&self.market.r) {
            return Err(conf(format!(
                "section [market]: r = {} outside [0, 1]",
                self.market.r
            )));
        }

        let state0 = GroupState::new(self.initial_state.e_b, self.initial_state.e_g);
        state0
            .validate(&params)
            .map_err(|e| conf(format!("section [initial_state]: {e}")))?;

        if self.run.periods == 0 {
            return Err(conf("section [run]: periods must be at least 1".into()));
        }

        if let Some(abm) = &self.abm {
            if !matches!(abm.mode.as_str(), "myopic" | "redraw") {
                return Err(conf(format!(
                    "section [abm]: unknown mode {:?} (myopic | redraw)",
                    abm.mode
                )));
            }
            if abm.firm_count == 0 {
                return Err(conf("section [abm]: firm_count must be at least 1".into()));
            }
        }
        if let Some(p) = &self.policy {
            if let Some(kind) = &p.aa_kind {
                if !matches!(kind.as_str(), "promote-green" | "demote-blue") {
                    return Err(conf(format!(
                        "section [policy]: unknown aa_kind {kind:?} (promote-green | demote-blue)"
                    )));
                }
            }
            if let Some(kappa) = p.kappa {
                if !(0.0..1.0).contains(&kappa) {
                    return Err(conf(format!("section [policy]: kappa = {kappa} outside [0, 1)")));
                }
            }
            if let Some(lambda) = p.lambda {
                if !(0.0..=1.0).contains(&lambda) {
                    return Err(conf(format!(
                        "section [policy]: lambda = {lambda} outside [0, 1]"
                    )));
                }
            }
        }

        Ok(Scenario {
            values,
            family,
            params,
            state0,
            w_min: self.market.w_min,
            r: self.market.r,
            run: self.run,
            policy: self.policy,
            abm: self.abm,
            raw,
        })
    }
}

impl Scenario {
    pub fn aa_kind(&self) -> Result<AaKind, CliError> {
        let kind = self
            .policy
            .as_ref()
            .and_then(|p| p.aa_kind.as_deref())
            .ok_or_else(|| CliError::Config("section [policy]: aa_kind is required".into()))?;
        Ok(match kind {
            "promote-green" => AaKind::PromoteGreen,
            _ => AaKind::DemoteBlue,
        })
    }

    pub fn aa_size(&self) -> Result<f64, CliError> {
        self.policy
            .as_ref()
            .and_then(|p| p.aa_size)
            .ok_or_else(|| CliError::Config("section [policy]: aa_size is required".into()))
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        self.policy
            .as_ref()
            .and_then(|p| p.lambda)
            .ok_or_else(|| CliError::Config("section [policy]: lambda is required".into()))
    }

    pub fn kappa(&self) -> Result<f64, CliError> {
        self.policy
            .as_ref()
            .and_then(|p| p.kappa)
            .ok_or_else(|| CliError::Config("section [policy]: kappa is required".into()))
    }

    pub fn abm_config(&self, seed_override: Option<u64>) -> Result<AbmConfig, CliError> {
        let abm = self
            .abm
            .as_ref()
            .ok_or_else(|| CliError::Config("section [abm] is required for this command".into()))?;
        Ok(AbmConfig {
            firm_count: abm.firm_count,
            scenario: AbmScenario {
                values: self.values.clone(),
                params: self.params.clone(),
                state0: self.state0,
                w_min: self.w_min,
                r: self.r,
            },
            mode: if abm.mode == "redraw" {
                AbmMode::Redraw
            } else {
                AbmMode::Myopic
            },
            periods: abm.periods,
            seed: seed_override.unwrap_or(abm.seed),
        })
    }
}
