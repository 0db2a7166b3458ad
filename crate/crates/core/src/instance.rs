//! Capacitated preference digraphs.
//!
//! Agents are stored in ascending id order, so "smallest agent id" and
//! "smallest agent index" coincide everywhere in the crate. An arc
//! `(buyer, seller)` means the buyer may receive goods from the seller.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

/// Where an arc came from. Zero weights are reserved for the synthetic kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcKind {
    Trade,
    /// The internal `(v+, v-)` arc of a capacity-split agent.
    Split,
    /// A zero-capacity arc added by complete-graph closure.
    Closure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Fractional,
    Integral,
}

/// An arc as supplied by callers, keyed by agent ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeArc {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub capacity: Rational,
    pub weight: Rational,
    pub kind: ArcKind,
}

impl ExchangeArc {
    pub fn new(buyer: impl Into<AgentId>, seller: impl Into<AgentId>, capacity: Rational) -> Self {
        ExchangeArc {
            buyer: buyer.into(),
            seller: seller.into(),
            capacity,
            weight: Rational::one(),
            kind: ArcKind::Trade,
        }
    }

    pub fn with_weight(mut self, weight: Rational) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_kind(mut self, kind: ArcKind) -> Self {
        self.kind = kind;
        self
    }
}

/// An agent and its strict preference list, most preferred seller first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSpec {
    pub id: AgentId,
    pub preferences: Vec<AgentId>,
}

/// Index-based view of an arc inside an [`Instance`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcInfo {
    pub buyer: usize,
    pub seller: usize,
    pub capacity: Rational,
    pub weight: Rational,
    pub kind: ArcKind,
    /// Position of `seller` in the buyer's preference list (0 = most preferred).
    pub rank: usize,
}

/// Immutable capacitated directed simple graph with per-agent strict preferences.
#[derive(Clone, Debug)]
pub struct Instance {
    mode: Mode,
    agents: Vec<AgentId>,
    index: HashMap<AgentId, usize>,
    arcs: Vec<ArcInfo>,
    arc_index: HashMap<(usize, usize), usize>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(mode: Mode, agents: Vec<AgentSpec>, arcs: Vec<ExchangeArc>) -> Result<Instance> {
        let invalid = |msg: String| Error::InvalidInstance(msg);

        let mut ids: Vec<AgentId> = Vec::with_capacity(agents.len());
        let mut seen = BTreeSet::new();
        for spec in &agents {
            if !seen.insert(spec.id.clone()) {
                return Err(invalid(format!("duplicate agent id {:?}", spec.id)));
            }
            ids.push(spec.id.clone());
        }
        ids.sort();
        let index: HashMap<AgentId, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();

        let mut by_pair: BTreeMap<(usize, usize), ExchangeArc> = BTreeMap::new();
        for arc in arcs {
            let b = *index
                .get(&arc.buyer)
                .ok_or_else(|| invalid(format!("arc ({}, {}): unknown buyer", arc.buyer, arc.seller)))?;
            let s = *index
                .get(&arc.seller)
                .ok_or_else(|| invalid(format!("arc ({}, {}): unknown seller", arc.buyer, arc.seller)))?;
            if b == s {
                return Err(invalid(format!("self-loop at {}", arc.buyer)));
            }
            if arc.capacity.is_negative() {
                return Err(invalid(format!("arc ({}, {}): negative capacity", arc.buyer, arc.seller)));
            }
            if arc.weight.is_negative() {
                return Err(invalid(format!("arc ({}, {}): negative weight", arc.buyer, arc.seller)));
            }
            if arc.weight.is_zero() && arc.kind == ArcKind::Trade {
                return Err(invalid(format!(
                    "arc ({}, {}): zero weight is reserved for split and closure arcs",
                    arc.buyer, arc.seller
                )));
            }
            if mode == Mode::Integral && !arc.capacity.is_integer() {
                return Err(invalid(format!(
                    "arc ({}, {}): capacity {} is not an integer in integral mode",
                    arc.buyer, arc.seller, arc.capacity
                )));
            }
            if by_pair.insert((b, s), arc).is_some() {
                let arc = &by_pair[&(b, s)];
                return Err(invalid(format!("duplicate arc ({}, {})", arc.buyer, arc.seller)));
            }
        }

        // Preference ranks.
        let mut rank: HashMap<(usize, usize), usize> = HashMap::new();
        for spec in &agents {
            let b = index[&spec.id];
            for (pos, seller) in spec.preferences.iter().enumerate() {
                let s = *index.get(seller).ok_or_else(|| {
                    invalid(format!("preferences of {}: unknown agent {}", spec.id, seller))
                })?;
                if !by_pair.contains_key(&(b, s)) {
                    return Err(invalid(format!(
                        "preferences of {}: {} is not an out-neighbor",
                        spec.id, seller
                    )));
                }
                if rank.insert((b, s), pos).is_some() {
                    return Err(invalid(format!("preferences of {}: {} listed twice", spec.id, seller)));
                }
            }
        }

        let n = ids.len();
        let mut arc_list = Vec::with_capacity(by_pair.len());
        let mut arc_index = HashMap::with_capacity(by_pair.len());
        for ((b, s), arc) in by_pair {
            let r = *rank.get(&(b, s)).ok_or_else(|| {
                invalid(format!("preferences of {}: missing out-neighbor {}", arc.buyer, arc.seller))
            })?;
            arc_index.insert((b, s), arc_list.len());
            arc_list.push(ArcInfo {
                buyer: b,
                seller: s,
                capacity: arc.capacity,
                weight: arc.weight,
                kind: arc.kind,
                rank: r,
            });
        }

        let mut out_arcs = vec![Vec::new(); n];
        let mut in_arcs = vec![Vec::new(); n];
        for (e, arc) in arc_list.iter().enumerate() {
            out_arcs[arc.buyer].push(e);
            in_arcs[arc.seller].push(e);
        }
        for list in &mut out_arcs {
            list.sort_by_key(|&e| arc_list[e].rank);
        }

        Ok(Instance {
            mode,
            agents: ids,
            index,
            arcs: arc_list,
            arc_index,
            out_arcs,
            in_arcs,
        })
    }

    pub fn builder(mode: Mode) -> InstanceBuilder {
        InstanceBuilder {
            mode,
            agents: Vec::new(),
            arcs: Vec::new(),
        }
    }

    pub fn empty(mode: Mode) -> Instance {
        Instance::new(mode, Vec::new(), Vec::new()).expect("empty instance is valid")
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_integral(&self) -> bool {
        self.mode == Mode::Integral
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent(&self, v: usize) -> &AgentId {
        &self.agents[v]
    }

    pub fn index_of(&self, id: &AgentId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_agent(&self, id: &AgentId) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub fn arcs(&self) -> &[ArcInfo] {
        &self.arcs
    }

    pub fn arc(&self, e: usize) -> &ArcInfo {
        &self.arcs[e]
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn find_arc(&self, buyer: usize, seller: usize) -> Option<usize> {
        self.arc_index.get(&(buyer, seller)).copied()
    }

    pub fn find_arc_by_id(&self, buyer: &AgentId, seller: &AgentId) -> Result<usize> {
        let unknown = || Error::UnknownArc(buyer.to_string(), seller.to_string());
        let b = self.index_of(buyer).ok_or_else(unknown)?;
        let s = self.index_of(seller).ok_or_else(unknown)?;
        self.find_arc(b, s).ok_or_else(unknown)
    }

    /// Out-arcs of `v` in preference order.
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out_arcs[v]
    }

    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.in_arcs[v]
    }

    /// Preference list P(v), most preferred first.
    pub fn preferences(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_arcs[v].iter().map(move |&e| self.arcs[e].seller)
    }

    pub fn arc_ids(&self, e: usize) -> (&AgentId, &AgentId) {
        let a = &self.arcs[e];
        (&self.agents[a.buyer], &self.agents[a.seller])
    }

    /// Decomposes the instance back into caller-facing parts.
    pub fn to_parts(&self) -> (Vec<AgentSpec>, Vec<ExchangeArc>) {
        let agents = (0..self.agent_count())
            .map(|v| AgentSpec {
                id: self.agents[v].clone(),
                preferences: self.preferences(v).map(|s| self.agents[s].clone()).collect(),
            })
            .collect();
        let arcs = self
            .arcs
            .iter()
            .map(|a| ExchangeArc {
                buyer: self.agents[a.buyer].clone(),
                seller: self.agents[a.seller].clone(),
                capacity: a.capacity.clone(),
                weight: a.weight.clone(),
                kind: a.kind,
            })
            .collect();
        (agents, arcs)
    }

    /// Total capacity over all arcs.
    pub fn total_capacity(&self) -> Rational {
        self.arcs.iter().map(|a| &a.capacity).sum()
    }
}

/// Incremental construction helper, mostly for tests and examples.
#[derive(Clone, Debug)]
pub struct InstanceBuilder {
    mode: Mode,
    agents: Vec<AgentSpec>,
    arcs: Vec<ExchangeArc>,
}

impl InstanceBuilder {
    /// Declares an agent with its preference list (most preferred first).
    pub fn agent(mut self, id: &str, preferences: &[&str]) -> Self {
        self.agents.push(AgentSpec {
            id: id.into(),
            preferences: preferences.iter().map(|&p| p.into()).collect(),
        });
        self
    }

    pub fn arc(mut self, buyer: &str, seller: &str, capacity: impl Into<Rational>) -> Self {
        self.arcs.push(ExchangeArc::new(buyer, seller, capacity.into()));
        self
    }

    pub fn weighted_arc(
        mut self,
        buyer: &str,
        seller: &str,
        capacity: impl Into<Rational>,
        weight: impl Into<Rational>,
    ) -> Self {
        self.arcs
            .push(ExchangeArc::new(buyer, seller, capacity.into()).with_weight(weight.into()));
        self
    }

    pub fn build(self) -> Result<Instance> {
        Instance::new(self.mode, self.agents, self.arcs)
    }
}
