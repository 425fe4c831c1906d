//! Optical efficiency chain and trap counting.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{fraction, parse_json};
use crate::error::{Error, Result};

pub const DEFAULT_POWER_PER_TRAP_W: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub name: String,
    pub transmission: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyChain {
    #[serde(default)]
    pub name: String,
    pub stages: Vec<Stage>,
    /// Optical power entering the first stage, W.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_power_w: Option<f64>,
    /// Where `input_power_w` comes from; reports print it verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_power_provenance: Option<String>,
}

impl EfficiencyChain {
    pub fn new(name: impl Into<String>, stages: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let chain = EfficiencyChain {
            name: name.into(),
            stages: stages
                .into_iter()
                .map(|(name, transmission)| Stage { name, transmission })
                .collect(),
            input_power_w: None,
            input_power_provenance: None,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        for stage in &self.stages {
            fraction(&format!("stages[{}].transmission", stage.name), stage.transmission)?;
        }
        if let Some(p) = self.input_power_w {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::invalid("input_power_w", format!("must be finite and >= 0, got {p}")));
            }
        }
        Ok(())
    }

    pub fn from_json_str(source_name: &str, text: &str) -> Result<Self> {
        let chain: EfficiencyChain = parse_json(source_name, text)?;
        chain.validate()?;
        Ok(chain)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&path.display().to_string(), &text)
    }

    /// Stages of `self` followed by those of `other`; input power comes from `self`.
    pub fn concat(&self, other: &EfficiencyChain) -> EfficiencyChain {
        let mut out = self.clone();
        out.stages.extend(other.stages.iter().cloned());
        out
    }

    pub fn with_input_power(mut self, watts: f64, provenance: impl Into<String>) -> Self {
        self.input_power_w = Some(watts);
        self.input_power_provenance = Some(provenance.into());
        self
    }
}

/// Product of stage transmissions; 1 for an empty chain.
pub fn chain_efficiency(chain: &EfficiencyChain) -> f64 {
    chain.stages.iter().map(|s| s.transmission).product()
}

pub fn trap_count(power_at_atoms_w: f64, power_per_trap_w: f64) -> Result<u64> {
    if !(power_per_trap_w.is_finite() && power_per_trap_w > 0.0) {
        return Err(Error::invalid(
            "power_per_trap_w",
            format!("must be finite and > 0, got {power_per_trap_w}"),
        ));
    }
    if !(power_at_atoms_w.is_finite() && power_at_atoms_w >= 0.0) {
        return Err(Error::invalid(
            "power_at_atoms_w",
            format!("must be finite and >= 0, got {power_at_atoms_w}"),
        ));
    }
    // Guard against 0.5/0.001 landing just below 500.
    let ratio = power_at_atoms_w / power_per_trap_w;
    Ok((ratio * (1.0 + 1e-12)).floor() as u64)
}

/// Value rounded to one significant figure, e.g. 0.01875 -> 0.02.
pub fn one_sig_fig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powf(x.abs().log10().floor());
    (x / scale).round() * scale
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetRow {
    pub stage: String,
    pub transmission: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetReport {
    pub chain_name: String,
    pub rows: Vec<BudgetRow>,
    pub total: f64,
    pub input_power_w: Option<f64>,
    pub input_power_provenance: Option<String>,
    pub power_at_atoms_w: Option<f64>,
    pub power_per_trap_w: f64,
    pub traps: Option<u64>,
}

impl BudgetReport {
    pub fn new(chain: &EfficiencyChain, power_per_trap_w: f64) -> Result<Self> {
        chain.validate()?;
        let mut cumulative = 1.0;
        let rows = chain
            .stages
            .iter()
            .map(|s| {
                cumulative *= s.transmission;
                BudgetRow {
                    stage: s.name.clone(),
                    transmission: s.transmission,
                    cumulative,
                }
            })
            .collect();
        let total = chain_efficiency(chain);
        let power_at_atoms_w = chain.input_power_w.map(|p| p * total);
        let traps = power_at_atoms_w
            .map(|p| trap_count(p, power_per_trap_w))
            .transpose()?;
        Ok(BudgetReport {
            chain_name: chain.name.clone(),
            rows,
            total,
            input_power_w: chain.input_power_w,
            input_power_provenance: chain.input_power_provenance.clone(),
            power_at_atoms_w,
            power_per_trap_w,
            traps,
        })
    }
}

impl fmt::Display for BudgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.chain_name.is_empty() {
            writeln!(f, "chain: {}", self.chain_name)?;
        }
        let width = self.rows.iter().map(|r| r.stage.len()).max().unwrap_or(0).max(5);
        writeln!(f, "{:<width$}  {:>12}  {:>10}", "stage", "transmission", "cumulative")?;
        for r in &self.rows {
            writeln!(f, "{:<width$}  {:>12.4}  {:>10.5}", r.stage, r.transmission, r.cumulative)?;
        }
        writeln!(f, "total efficiency: {} (\u{2248}{})", self.total, one_sig_fig(self.total))?;
        if let Some(p_in) = self.input_power_w {
            let provenance = self.input_power_provenance.as_deref().unwrap_or("user supplied");
            writeln!(f, "input power: {:.3} W [{}]", p_in, provenance)?;
        }
        if let Some(p) = self.power_at_atoms_w {
            writeln!(f, "power at atoms: {:.1} mW", p * 1e3)?;
        }
        if let Some(n) = self.traps {
            writeln!(f, "traps at {:.3} mW/trap: {}", self.power_per_trap_w * 1e3, n)?;
        }
        Ok(())
    }
}
