//! Interchange forms of witnesses and partitions, using identifier names
//! instead of indices.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, WitnessError};
use crate::model::{AgentId, Machine, View};
use crate::ndi::NdiWitness;
use crate::nds::{NdsWitness, StrategyTable};
use crate::res::{Partition, ResVerdict};
use crate::stateset::StateSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdiWitnessDoc {
    pub alpha: Vec<String>,
    pub view: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub knowledge: Vec<String>,
    pub action: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdsWitnessDoc {
    pub beta: Vec<String>,
    pub strategy: Vec<Vec<StrategyEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResCounterexample {
    pub state: String,
    pub a1: String,
    pub a2: String,
    pub a3: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResDoc {
    Blocks(Vec<Vec<String>>),
    Counterexample(ResCounterexample),
}

fn malformed(e: ModelError) -> WitnessError {
    WitnessError::Malformed(e.to_string())
}

impl NdiWitnessDoc {
    pub fn from_witness(m: &Machine, w: &NdiWitness) -> Self {
        NdiWitnessDoc {
            alpha: w.h_actions.iter().map(|&a| m.h_action_name(a).to_owned()).collect(),
            view: w.l_view.symbols(m),
        }
    }

    pub fn to_witness(&self, m: &Machine) -> Result<NdiWitness, WitnessError> {
        let h_actions = self
            .alpha
            .iter()
            .map(|a| m.h_action_id(a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(malformed)?;
        let l_view = View::from_symbols(m, AgentId::L, &self.view).map_err(malformed)?;
        Ok(NdiWitness { h_actions, l_view })
    }
}

impl NdsWitnessDoc {
    pub fn from_witness(m: &Machine, w: &NdsWitness) -> Self {
        let strategy = w
            .strategy
            .levels
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|(k, &a)| StrategyEntry {
                        knowledge: m.state_names(k.iter()),
                        action: m.h_action_name(a).to_owned(),
                    })
                    .collect()
            })
            .collect();
        NdsWitnessDoc {
            beta: w.excluded_view.symbols(m),
            strategy,
        }
    }

    pub fn to_witness(&self, m: &Machine) -> Result<NdsWitness, WitnessError> {
        let excluded_view = View::from_symbols(m, AgentId::L, &self.beta).map_err(malformed)?;
        let mut strategy = StrategyTable::default();
        for (step, level) in self.strategy.iter().enumerate() {
            for entry in level {
                let states = entry
                    .knowledge
                    .iter()
                    .map(|s| m.state_id(s))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(malformed)?;
                let action = m.h_action_id(&entry.action).map_err(malformed)?;
                strategy.set(step, StateSet::from_states(m.num_states(), states), action);
            }
        }
        Ok(NdsWitness {
            excluded_view,
            strategy,
        })
    }
}

impl ResDoc {
    pub fn from_verdict(m: &Machine, v: &ResVerdict) -> Self {
        match v {
            ResVerdict::Satisfies(p) => ResDoc::Blocks(p.named_blocks(m)),
            ResVerdict::Violates { state, a1, a2, a3 } => ResDoc::Counterexample(ResCounterexample {
                state: m.state_name(*state).to_owned(),
                a1: m.h_action_name(*a1).to_owned(),
                a2: m.h_action_name(*a2).to_owned(),
                a3: m.l_action_name(*a3).to_owned(),
            }),
        }
    }

    /// The partition named by a `Blocks` document.
    pub fn to_partition(&self, m: &Machine) -> Result<Option<Partition>, ModelError> {
        let ResDoc::Blocks(blocks) = self else {
            return Ok(None);
        };
        let ids = blocks
            .iter()
            .map(|b| b.iter().map(|s| m.state_id(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(Partition::new(m.num_states(), ids)))
    }
}
