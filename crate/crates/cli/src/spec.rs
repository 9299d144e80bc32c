use std::path::Path;
use std::sync::Arc;

use geoprod::homogeneous::{build_chain_metric, ChainMetric, SubalgebraChain};
use geoprod::liealgebra::{catalog_so, trace_form};
use geoprod::oracle::OrbitMap;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupFamily {
    #[serde(rename = "SO")]
    So,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainFamily {
    #[serde(rename = "SO")]
    So,
    #[serde(rename = "trivial")]
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    #[serde(rename = "negative_trace")]
    NegativeTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub family: GroupFamily,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub family: ChainFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// Declarative description of `G/H` with a chain metric. The chain lists
/// `h_0 ⊂ … ⊂ h_{N−1}` as lower-right blocks; `h_N = g` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub group: GroupSpec,
    pub chain: Vec<LevelSpec>,
    pub lambdas: Vec<f64>,
    pub form: FormKind,
}

/// A validated space ready for the geometric layers.
#[derive(Debug, Clone)]
pub struct Space {
    pub spec: SpaceSpec,
    pub metric: Arc<ChainMetric>,
    pub orbit: OrbitMap,
}

impl SpaceSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            let (line, column) = (e.line(), e.column());
            let msg = e.to_string();
            let msg = msg.trim_end_matches(&format!(" at line {line} column {column}"));
            CliError::Input(format!("line {line}, column {column}: {msg}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Block sizes with `0` for the trivial level.
    pub fn block_sizes(&self) -> Result<Vec<usize>, CliError> {
        let n = self.group.n;
        if n < 2 {
            return Err(CliError::Input(format!("group SO({n}) needs n >= 2")));
        }
        if self.chain.is_empty() {
            return Err(CliError::Input("chain must list at least h_0".into()));
        }
        let mut ks = Vec::with_capacity(self.chain.len());
        for (i, level) in self.chain.iter().enumerate() {
            let k = match (level.family, level.k) {
                (ChainFamily::Trivial, None | Some(0)) => 0,
                (ChainFamily::Trivial, Some(k)) => {
                    return Err(CliError::Input(format!("chain level {i}: trivial level cannot have k = {k}")))
                }
                (ChainFamily::So, None) => return Err(CliError::Input(format!("chain level {i}: SO level needs k"))),
                (ChainFamily::So, Some(k)) if k < 2 => {
                    return Err(CliError::Input(format!("chain level {i}: SO({k}) needs k >= 2")))
                }
                (ChainFamily::So, Some(k)) => k,
            };
            if k >= n {
                return Err(CliError::Input(format!("chain level {i}: k = {k} must be below n = {n}")));
            }
            if let Some(&prev) = ks.last() {
                if k <= prev {
                    return Err(CliError::Input(format!(
                        "chain level {i}: k must increase strictly ({prev} then {k})"
                    )));
                }
            }
            ks.push(k);
        }
        Ok(ks)
    }

    pub fn build(&self) -> Result<Space, CliError> {
        let ks = self.block_sizes()?;
        if self.lambdas.len() != ks.len() {
            return Err(CliError::Input(format!(
                "{} lambdas given for a chain with {} steps",
                self.lambdas.len(),
                ks.len()
            )));
        }
        if let Some(i) = self.lambdas.iter().position(|l| !l.is_finite()) {
            return Err(CliError::Input(format!("lambda {} is not finite", i + 1)));
        }
        let g = catalog_so(self.group.n)?;
        let q = trace_form(&g)?;
        let chain = SubalgebraChain::so_blocks(&g, &ks)?;
        let metric = Arc::new(build_chain_metric(&chain, &q, &self.lambdas)?);
        let orbit = OrbitMap::from_split(metric.split())?;
        Ok(Space { spec: self.clone(), metric, orbit })
    }
}
