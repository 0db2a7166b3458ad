//! JSON instance and exchange files.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use balex::preprocess::{split_agent_capacity, SplitMap};
use balex::{AgentId, AgentSpec, Cycle, Error, Exchange, ExchangeArc, Instance, Mode, Rational, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: AgentId,
    pub preferences: Vec<AgentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcEntry {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub capacity: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub mode: Mode,
    pub agents: Vec<AgentEntry>,
    pub arcs: Vec<ArcEntry>,
}

/// A parsed instance, plus its agent-capacity split when any agent is capped.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub original: Instance,
    pub working: Instance,
    pub split: SplitMap,
}

impl Loaded {
    pub fn to_working(&self, x: &Exchange) -> Result<Exchange> {
        self.split.to_split(x)
    }

    pub fn to_original(&self, x: &Exchange) -> Result<Exchange> {
        self.split.to_original(x)
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance: {e}")))
    }

    /// Structural checks with positions, then full validation.
    pub fn build(&self) -> Result<Loaded> {
        let mut ids = HashSet::new();
        for (i, a) in self.agents.iter().enumerate() {
            if !ids.insert(&a.id) {
                return Err(Error::Parse(format!("agents[{i}]: duplicate agent id {}", a.id)));
            }
        }
        let mut pairs = HashSet::new();
        for (i, a) in self.arcs.iter().enumerate() {
            for (role, id) in [("buyer", &a.buyer), ("seller", &a.seller)] {
                if !ids.contains(id) {
                    return Err(Error::Parse(format!("arcs[{i}]: unknown {role} {id}")));
                }
            }
            if a.buyer == a.seller {
                return Err(Error::Parse(format!("arcs[{i}]: self-loop on {}", a.buyer)));
            }
            if !pairs.insert((&a.buyer, &a.seller)) {
                return Err(Error::Parse(format!("arcs[{i}]: duplicate arc ({}, {})", a.buyer, a.seller)));
            }
        }
        for (i, a) in self.agents.iter().enumerate() {
            let mut seen = HashSet::new();
            for (j, p) in a.preferences.iter().enumerate() {
                if !ids.contains(p) {
                    return Err(Error::Parse(format!("agents[{i}].preferences[{j}]: unknown agent {p}")));
                }
                if !seen.insert(p) {
                    return Err(Error::Parse(format!("agents[{i}].preferences[{j}]: {p} listed twice")));
                }
                if !pairs.contains(&(&a.id, p)) {
                    return Err(Error::Parse(format!("agents[{i}].preferences[{j}]: no arc ({}, {p})", a.id)));
                }
            }
        }
        let specs = self
            .agents
            .iter()
            .map(|a| AgentSpec { id: a.id.clone(), preferences: a.preferences.clone() })
            .collect();
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                let arc = ExchangeArc::new(a.buyer.clone(), a.seller.clone(), a.capacity.clone());
                match &a.weight {
                    Some(w) => arc.with_weight(w.clone()),
                    None => arc,
                }
            })
            .collect();
        let original = Instance::new(self.mode, specs, arcs)?;
        let caps: BTreeMap<AgentId, Rational> =
            self.agents.iter().filter_map(|a| a.capacity.clone().map(|c| (a.id.clone(), c))).collect();
        let (working, split) = split_agent_capacity(&original, &caps)?;
        Ok(Loaded { original, working, split })
    }

    pub fn from_instance(inst: &Instance) -> InstanceFile {
        let (specs, arcs) = inst.to_parts();
        InstanceFile {
            mode: inst.mode(),
            agents: specs
                .into_iter()
                .map(|s| AgentEntry { id: s.id, preferences: s.preferences, capacity: None })
                .collect(),
            arcs: arcs
                .into_iter()
                .map(|a| ArcEntry {
                    buyer: a.buyer,
                    seller: a.seller,
                    capacity: a.capacity,
                    weight: if a.weight == Rational::one() { None } else { Some(a.weight) },
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub agents: Vec<AgentId>,
    pub flow: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcFlowEntry {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub flow: Rational,
}

/// Exchange document. Only `cycles` is read back; `weight` and `arc_flows`
/// are derived on output. Unknown fields are ignored so command output can be
/// fed back in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeFile {
    pub cycles: Vec<CycleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_flows: Option<Vec<ArcFlowEntry>>,
}

impl ExchangeFile {
    pub fn parse(text: &str) -> Result<ExchangeFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("exchange: {e}")))
    }

    pub fn to_exchange(&self) -> Result<Exchange> {
        let mut x = Exchange::new();
        for (i, c) in self.cycles.iter().enumerate() {
            let cycle = Cycle::new(c.agents.clone()).map_err(|e| Error::Parse(format!("cycles[{i}]: {e}")))?;
            x.push(cycle, c.flow.clone());
        }
        Ok(x)
    }

    /// Canonical document for `x` on `inst` (cycles rotated, derived fields filled in).
    pub fn from_exchange(inst: &Instance, x: &Exchange) -> Result<ExchangeFile> {
        let flow = x.flow(inst)?;
        Ok(ExchangeFile {
            cycles: x
                .cycles()
                .iter()
                .map(|(c, f)| CycleEntry { agents: c.agents().to_vec(), flow: f.clone() })
                .collect(),
            weight: Some(balex::weight(inst, x)?),
            arc_flows: Some(
                flow.entries(inst)
                    .map(|(b, s, f)| ArcFlowEntry { buyer: b.clone(), seller: s.clone(), flow: f.clone() })
                    .collect(),
            ),
        })
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<Loaded> {
    InstanceFile::parse(&read(path)?)?.build().map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        Error::InvalidInstance(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_exchange(path: &Path) -> Result<Exchange> {
    ExchangeFile::parse(&read(path)?)?.to_exchange()
}
