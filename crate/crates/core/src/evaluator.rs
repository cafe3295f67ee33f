use serde::{Deserialize, Serialize};

use crate::discrepancy::{exact_star_discrepancy, DiscrepancyBound, Grid, DEFAULT_BUDGET};
use crate::error::Result;
use crate::estimator::{ta_best_of, TaConfig};
use crate::sequence::PointSet;

/// How fitness values are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact grid enumeration; refuses when over budget.
    Exact,
    /// Threshold-accepting lower bounds only.
    Ta,
    /// Exact when the grid fits the budget, otherwise threshold accepting.
    Auto,
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "ta" => Ok(Self::Ta),
            "auto" => Ok(Self::Auto),
            other => Err(format!(
                "unknown mode `{other}` (expected exact, ta or auto)"
            )),
        }
    }
}

/// Discrepancy evaluator shared by the optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluator {
    pub mode: EvalMode,
    pub budget: u64,
    pub ta: TaConfig,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self {
            mode: EvalMode::Auto,
            budget: DEFAULT_BUDGET,
            ta: TaConfig::default(),
        }
    }
}

impl Evaluator {
    pub fn exact(budget: u64) -> Self {
        Self {
            mode: EvalMode::Exact,
            budget,
            ..Self::default()
        }
    }

    pub fn ta(ta: TaConfig) -> Self {
        Self {
            mode: EvalMode::Ta,
            ta,
            ..Self::default()
        }
    }

    pub fn is_affordable(&self, x: &PointSet) -> bool {
        Grid::new(x).cell_count() <= self.budget as u128
    }

    /// Scores `x`; `seed` keys the heuristic's random stream.
    pub fn evaluate(&self, x: &PointSet, seed: u64) -> Result<DiscrepancyBound> {
        match self.mode {
            EvalMode::Exact => exact_star_discrepancy(x, self.budget),
            EvalMode::Ta => Ok(ta_best_of(x, &self.ta.with_seed(seed))),
            EvalMode::Auto if self.is_affordable(x) => exact_star_discrepancy(x, self.budget),
            EvalMode::Auto => Ok(ta_best_of(x, &self.ta.with_seed(seed))),
        }
    }
}
