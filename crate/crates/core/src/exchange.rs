//! Exchanges (flow-carrying cycle packings), their arc flows, the agents'
//! lexicographic preference over exchanges, and circulation decomposition.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance};
use crate::rational::Rational;

/// A simple directed cycle given by its agents in order; the closing arc is implicit.
///
/// Stored rotated so the smallest agent id comes first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<AgentId>", into = "Vec<AgentId>")]
pub struct Cycle(Vec<AgentId>);

impl Cycle {
    pub fn new(agents: Vec<AgentId>) -> Result<Cycle> {
        if agents.len() < 2 {
            return Err(Error::InvalidFlow(format!("cycle {agents:?} has fewer than two agents")));
        }
        let mut sorted = agents.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != agents.len() {
            return Err(Error::InvalidFlow(format!("cycle {agents:?} repeats an agent")));
        }
        let start = (0..agents.len()).min_by(|&a, &b| agents[a].cmp(&agents[b])).unwrap();
        let mut rotated = agents;
        rotated.rotate_left(start);
        Ok(Cycle(rotated))
    }

    pub fn from_ids(ids: &[&str]) -> Result<Cycle> {
        Cycle::new(ids.iter().map(|&s| AgentId::from(s)).collect())
    }

    pub(crate) fn from_indices(inst: &Instance, vertices: &[usize]) -> Cycle {
        Cycle::new(vertices.iter().map(|&v| inst.agent(v).clone()).collect())
            .expect("index cycles are simple")
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Arcs `(buyer, seller)` along the cycle, including the closing arc.
    pub fn arcs(&self) -> impl Iterator<Item = (&AgentId, &AgentId)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (&self.0[i], &self.0[(i + 1) % n]))
    }

    /// Arc indices in `inst`; errors on the first arc the instance lacks.
    pub fn arc_indices(&self, inst: &Instance) -> Result<Vec<usize>> {
        self.arcs().map(|(b, s)| inst.find_arc_by_id(b, s)).collect()
    }
}

impl TryFrom<Vec<AgentId>> for Cycle {
    type Error = Error;
    fn try_from(v: Vec<AgentId>) -> Result<Self> {
        Cycle::new(v)
    }
}

impl From<Cycle> for Vec<AgentId> {
    fn from(c: Cycle) -> Self {
        c.0
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for a in &self.0 {
            write!(f, "{a},")?;
        }
        write!(f, "{})", self.0[0])
    }
}

impl fmt::Debug for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A balanced exchange: cycles with positive flow values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Exchange {
    cycles: Vec<(Cycle, Rational)>,
}

impl Exchange {
    pub fn new() -> Self {
        Exchange::default()
    }

    pub fn from_cycles(cycles: Vec<(Cycle, Rational)>) -> Self {
        Exchange { cycles }
    }

    pub fn with(mut self, cycle: Cycle, flow: impl Into<Rational>) -> Self {
        self.cycles.push((cycle, flow.into()));
        self
    }

    pub fn push(&mut self, cycle: Cycle, flow: Rational) {
        self.cycles.push((cycle, flow));
    }

    pub fn cycles(&self) -> &[(Cycle, Rational)] {
        &self.cycles
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Induced arc flows on `inst`; errors on unknown agents or arcs.
    pub fn flow(&self, inst: &Instance) -> Result<ArcFlow> {
        let mut flow = ArcFlow::zeros(inst);
        for (cycle, f) in &self.cycles {
            for e in cycle.arc_indices(inst)? {
                flow.0[e] += f;
            }
        }
        Ok(flow)
    }
}

impl Serialize for Exchange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            agents: &'a Cycle,
            flow: &'a Rational,
        }
        s.collect_seq(self.cycles().iter().map(|(c, f)| Entry { agents: c, flow: f }))
    }
}

/// Arc-level flow aligned with `Instance::arcs()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcFlow(Vec<Rational>);

impl ArcFlow {
    pub fn zeros(inst: &Instance) -> Self {
        ArcFlow(vec![Rational::zero(); inst.arc_count()])
    }

    pub fn from_values(values: Vec<Rational>) -> Self {
        ArcFlow(values)
    }

    /// Builds an arc flow from `(buyer, seller) -> amount` entries; missing arcs are zero.
    pub fn from_map<'a>(
        inst: &Instance,
        entries: impl IntoIterator<Item = (&'a AgentId, &'a AgentId, Rational)>,
    ) -> Result<Self> {
        let mut flow = ArcFlow::zeros(inst);
        for (b, s, f) in entries {
            let e = inst.find_arc_by_id(b, s)?;
            flow.0[e] += f;
        }
        Ok(flow)
    }

    pub fn get(&self, e: usize) -> &Rational {
        &self.0[e]
    }

    pub fn set(&mut self, e: usize, value: Rational) {
        self.0[e] = value;
    }

    pub fn add(&mut self, e: usize, delta: &Rational) {
        self.0[e] += delta;
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn residual(&self, inst: &Instance, e: usize) -> Rational {
        &inst.arc(e).capacity - &self.0[e]
    }

    /// Σ_e flow(e)·l(e).
    pub fn weight(&self, inst: &Instance) -> Rational {
        self.0
            .iter()
            .zip(inst.arcs())
            .filter(|(f, _)| !f.is_zero())
            .map(|(f, a)| f * &a.weight)
            .sum()
    }

    /// Errors naming the first agent whose inflow differs from its outflow.
    pub fn check_conservation(&self, inst: &Instance) -> Result<()> {
        for v in 0..inst.agent_count() {
            let out: Rational = inst.out_arcs(v).iter().map(|&e| &self.0[e]).sum();
            let inn: Rational = inst.in_arcs(v).iter().map(|&e| &self.0[e]).sum();
            if out != inn {
                return Err(Error::NotConserved(inst.agent(v).to_string()));
            }
        }
        Ok(())
    }

    /// Errors on negative flow, capacity overflow, or fractional flow in integral mode.
    pub fn check_bounds(&self, inst: &Instance) -> Result<()> {
        for (e, f) in self.0.iter().enumerate() {
            let (b, s) = inst.arc_ids(e);
            if f.is_negative() {
                return Err(Error::InvalidFlow(format!("negative flow {f} on ({b}, {s})")));
            }
            if f > &inst.arc(e).capacity {
                return Err(Error::InvalidFlow(format!(
                    "flow {f} exceeds capacity {} on ({b}, {s})",
                    inst.arc(e).capacity
                )));
            }
            if inst.is_integral() && !f.is_integer() {
                return Err(Error::InvalidFlow(format!("fractional flow {f} on ({b}, {s}) in integral mode")));
            }
        }
        Ok(())
    }

    /// Non-zero entries as `(buyer, seller, flow)` in arc order.
    pub fn entries<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = (&'a AgentId, &'a AgentId, &'a Rational)> + 'a {
        self.0.iter().enumerate().filter(|(_, f)| !f.is_zero()).map(move |(e, f)| {
            let (b, s) = inst.arc_ids(e);
            (b, s, f)
        })
    }
}

/// What an agent receives from each seller on its preference list, in preference order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReceivedVector {
    pub owner: AgentId,
    pub amounts: Vec<(AgentId, Rational)>,
}

pub fn received_vector(inst: &Instance, flow: &ArcFlow, v: usize) -> ReceivedVector {
    ReceivedVector {
        owner: inst.agent(v).clone(),
        amounts: inst
            .out_arcs(v)
            .iter()
            .map(|&e| (inst.agent(inst.arc(e).seller).clone(), flow.get(e).clone()))
            .collect(),
    }
}

/// Sum of flows of the cycles of `x` that use arc `(buyer, seller)`.
pub fn arc_flow(inst: &Instance, x: &Exchange, buyer: &AgentId, seller: &AgentId) -> Result<Rational> {
    inst.find_arc_by_id(buyer, seller)?;
    let mut total = Rational::zero();
    for (cycle, f) in x.cycles() {
        if cycle.arcs().any(|(b, s)| b == buyer && s == seller) {
            total += f;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownAgent { agent: AgentId },
    UnknownArc { buyer: AgentId, seller: AgentId },
    NotSimple,
    NonPositiveFlow { flow: Rational },
    NonIntegralFlow { flow: Rational },
    CapacityExceeded { buyer: AgentId, seller: AgentId, flow: Rational, capacity: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Index of the offending cycle, when the violation is local to one cycle.
    pub cycle: Option<usize>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.cycle {
            write!(f, "cycle {c}: ")?;
        }
        match &self.kind {
            ViolationKind::UnknownAgent { agent } => write!(f, "unknown agent {agent}"),
            ViolationKind::UnknownArc { buyer, seller } => write!(f, "unknown arc ({buyer}, {seller})"),
            ViolationKind::NotSimple => write!(f, "not a simple cycle"),
            ViolationKind::NonPositiveFlow { flow } => write!(f, "non-positive flow {flow}"),
            ViolationKind::NonIntegralFlow { flow } => write!(f, "non-integral flow {flow} in integral mode"),
            ViolationKind::CapacityExceeded { buyer, seller, flow, capacity } => {
                write!(f, "capacity exceeded on ({buyer}, {seller}): {flow} > {capacity}")
            }
        }
    }
}

/// Checks every exchange invariant against `inst`, reporting the first violation.
pub fn validate(inst: &Instance, x: &Exchange) -> std::result::Result<(), Violation> {
    let mut flow = ArcFlow::zeros(inst);
    for (i, (cycle, f)) in x.cycles().iter().enumerate() {
        let at = |kind| Violation { cycle: Some(i), kind };
        if cycle.len() < 2 {
            return Err(at(ViolationKind::NotSimple));
        }
        if !f.is_positive() {
            return Err(at(ViolationKind::NonPositiveFlow { flow: f.clone() }));
        }
        if inst.is_integral() && !f.is_integer() {
            return Err(at(ViolationKind::NonIntegralFlow { flow: f.clone() }));
        }
        for a in cycle.agents() {
            if inst.index_of(a).is_none() {
                return Err(at(ViolationKind::UnknownAgent { agent: a.clone() }));
            }
        }
        for (b, s) in cycle.arcs() {
            match inst.find_arc_by_id(b, s) {
                Ok(e) => flow.add(e, f),
                Err(_) => {
                    return Err(at(ViolationKind::UnknownArc { buyer: b.clone(), seller: s.clone() }))
                }
            }
        }
    }
    for (e, f) in flow.values().iter().enumerate() {
        let cap = &inst.arc(e).capacity;
        if f > cap {
            let (b, s) = inst.arc_ids(e);
            return Err(Violation {
                cycle: None,
                kind: ViolationKind::CapacityExceeded {
                    buyer: b.clone(),
                    seller: s.clone(),
                    flow: f.clone(),
                    capacity: cap.clone(),
                },
            });
        }
    }
    Ok(())
}

/// Lexicographic comparison of what `v` receives: true iff `fx` is strictly better for `v`.
pub fn prefers_flow(inst: &Instance, v: usize, fx: &ArcFlow, fy: &ArcFlow) -> bool {
    for &e in inst.out_arcs(v) {
        match fx.get(e).cmp(fy.get(e)) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// No agent prefers `fy` and at least one agent prefers `fx`.
pub fn dominates_flow(inst: &Instance, fx: &ArcFlow, fy: &ArcFlow) -> bool {
    let mut strict = false;
    for v in 0..inst.agent_count() {
        if prefers_flow(inst, v, fy, fx) {
            return false;
        }
        if !strict && prefers_flow(inst, v, fx, fy) {
            strict = true;
        }
    }
    strict
}

/// True iff agent `v` strictly prefers exchange `x` to exchange `y`.
pub fn prefers(inst: &Instance, v: &AgentId, x: &Exchange, y: &Exchange) -> Result<bool> {
    let v = inst.require_agent(v)?;
    Ok(prefers_flow(inst, v, &x.flow(inst)?, &y.flow(inst)?))
}

/// Pareto domination: `x` is weakly better for everyone and strictly better for someone.
pub fn dominates(inst: &Instance, x: &Exchange, y: &Exchange) -> Result<bool> {
    Ok(dominates_flow(inst, &x.flow(inst)?, &y.flow(inst)?))
}

/// Σ_C f(C)·w(C) with w(C) the sum of arc weights on C.
pub fn weight(inst: &Instance, x: &Exchange) -> Result<Rational> {
    let mut by_cycle = Rational::zero();
    for (cycle, f) in x.cycles() {
        let w: Rational = cycle.arc_indices(inst)?.iter().map(|&e| &inst.arc(e).weight).sum();
        by_cycle += f * &w;
    }
    let by_arc = x.flow(inst)?.weight(inst);
    if by_cycle != by_arc {
        return Err(Error::Invariant(format!(
            "cycle-wise weight {by_cycle} differs from arc-wise weight {by_arc}"
        )));
    }
    Ok(by_cycle)
}

/// Splits a circulation into flow-carrying simple cycles whose arc flows sum back exactly.
///
/// Each step walks from the smallest agent with remaining outflow, always leaving
/// through the most preferred out-arc that still carries flow, until an agent
/// repeats. The closed part of the walk becomes a cycle carrying its bottleneck.
pub fn decompose_circulation(inst: &Instance, flow: &ArcFlow) -> Result<Exchange> {
    if flow.len() != inst.arc_count() {
        return Err(Error::InvalidFlow(format!(
            "flow has {} entries, instance has {} arcs",
            flow.len(),
            inst.arc_count()
        )));
    }
    flow.check_conservation(inst)?;
    for (e, f) in flow.values().iter().enumerate() {
        if f.is_negative() || f > &inst.arc(e).capacity {
            let (b, s) = inst.arc_ids(e);
            return Err(Error::InvalidFlow(format!("flow {f} on ({b}, {s}) outside [0, capacity]")));
        }
    }

    let mut rest = flow.clone();
    let mut out = Exchange::new();
    let next_arc = |rest: &ArcFlow, v: usize| inst.out_arcs(v).iter().copied().find(|&e| rest.get(e).is_positive());

    while let Some(start) = (0..inst.agent_count()).find(|&v| next_arc(&rest, v).is_some()) {
        let mut position: HashMap<usize, usize> = HashMap::new();
        let mut walk_vertices = vec![start];
        let mut walk_arcs = Vec::new();
        position.insert(start, 0);
        let mut v = start;
        let cycle_start = loop {
            let e = next_arc(&rest, v)
                .ok_or_else(|| Error::Invariant(format!("walk stuck at {}", inst.agent(v))))?;
            walk_arcs.push(e);
            v = inst.arc(e).seller;
            if let Some(&p) = position.get(&v) {
                break p;
            }
            position.insert(v, walk_vertices.len());
            walk_vertices.push(v);
        };
        let cycle_arcs = &walk_arcs[cycle_start..];
        let bottleneck = cycle_arcs.iter().map(|&e| rest.get(e)).min().unwrap().clone();
        for &e in cycle_arcs {
            let left = rest.get(e) - &bottleneck;
            rest.set(e, left);
        }
        out.push(Cycle::from_indices(inst, &walk_vertices[cycle_start..]), bottleneck);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Mode;
    use crate::fixtures::*;

    #[test]
    fn cycle_is_canonically_rotated() {
        let c = Cycle::from_ids(&["C", "A", "B"]).unwrap();
        assert_eq!(c.to_string(), "(A,B,C,A)");
        assert!(Cycle::from_ids(&["A"]).is_err());
        assert!(Cycle::from_ids(&["A", "B", "A"]).is_err());
    }

    #[test]
    fn arc_flow_on_example_one() {
        let inst = seven_agents();
        let x = seven_initial();
        assert_eq!(arc_flow(&inst, &x, &"F".into(), &"A".into()).unwrap(), Rational::from_integer(2));
        assert_eq!(arc_flow(&inst, &x, &"A".into(), &"E".into()).unwrap(), Rational::zero());
        assert_eq!(arc_flow(&inst, &Exchange::new(), &"F".into(), &"A".into()).unwrap(), Rational::zero());
        assert!(arc_flow(&inst, &x, &"B".into(), &"A".into()).is_err());
    }

    #[test]
    fn arc_flow_adds_shared_cycles() {
        let inst = Instance::builder(Mode::Fractional)
            .agent("u", &["v", "w"])
            .agent("v", &["u"])
            .agent("w", &["u"])
            .arc("u", "v", 1i64)
            .arc("u", "w", 1i64)
            .arc("v", "u", 1i64)
            .arc("w", "u", 1i64)
            .build()
            .unwrap();
        let x = Exchange::new()
            .with(Cycle::from_ids(&["u", "v"]).unwrap(), Rational::new(1, 2))
            .with(Cycle::from_ids(&["u", "w"]).unwrap(), Rational::new(1, 3));
        // Both cycles feed u's outflow; they share no arc, so check the arc (v,u) directly
        assert_eq!(arc_flow(&inst, &x, &"v".into(), &"u".into()).unwrap(), Rational::new(1, 2));
        let y = Exchange::new()
            .with(Cycle::from_ids(&["u", "v"]).unwrap(), Rational::new(1, 2))
            .with(Cycle::from_ids(&["v", "u"]).unwrap(), Rational::new(1, 3));
        assert_eq!(arc_flow(&inst, &y, &"u".into(), &"v".into()).unwrap(), Rational::new(5, 6));
    }

    #[test]
    fn validate_reports_violations() {
        let inst = seven_agents();
        assert_eq!(validate(&inst, &seven_initial()), Ok(()));
        let bad = Exchange::new().with(Cycle::from_ids(&["A", "B"]).unwrap(), 1i64);
        let v = validate(&inst, &bad).unwrap_err();
        assert!(v.to_string().contains("unknown arc"), "{v}");
        let over = Exchange::new().with(Cycle::from_ids(&["A", "G", "F"]).unwrap(), 2i64);
        let v = validate(&inst, &over).unwrap_err();
        assert!(v.to_string().contains("capacity exceeded"), "{v}");
    }

    #[test]
    fn prefers_and_dominates_example_one() {
        let inst = seven_agents();
        let x = seven_improved();
        let y = seven_initial();
        assert!(prefers(&inst, &"A".into(), &x, &y).unwrap());
        assert!(!prefers(&inst, &"A".into(), &x, &x).unwrap());
        assert!(dominates(&inst, &x, &y).unwrap());
        assert!(!dominates(&inst, &y, &x).unwrap());
        assert!(!dominates(&inst, &x, &x).unwrap());
        assert!(prefers(&inst, &"Z".into(), &x, &y).is_err());
    }

    #[test]
    fn nothing_received_is_not_preferred() {
        let inst = seven_agents();
        let e = Exchange::new();
        assert!(!prefers(&inst, &"D".into(), &e, &e).unwrap());
    }

    #[test]
    fn incomparable_exchanges_do_not_dominate() {
        // u prefers v over w; v, w each only trade with u. Giving u's unit to v
        // or to w helps a different agent each time.
        let inst = Instance::builder(Mode::Integral)
            .agent("u", &["v", "w"])
            .agent("v", &["u"])
            .agent("w", &["u"])
            .agent("x", &["y"])
            .agent("y", &["x"])
            .arc("u", "v", 1i64)
            .arc("u", "w", 1i64)
            .arc("v", "u", 1i64)
            .arc("w", "u", 1i64)
            .arc("x", "y", 1i64)
            .arc("y", "x", 1i64)
            .build()
            .unwrap();
        // Two disjoint 2-cycles, each strictly better for a different agent.
        let a = Exchange::new().with(Cycle::from_ids(&["u", "w"]).unwrap(), 1i64);
        let b = Exchange::new().with(Cycle::from_ids(&["x", "y"]).unwrap(), 1i64);
        assert!(prefers(&inst, &"w".into(), &a, &b).unwrap());
        assert!(prefers(&inst, &"x".into(), &b, &a).unwrap());
        assert!(!dominates(&inst, &a, &b).unwrap());
        assert!(!dominates(&inst, &b, &a).unwrap());
    }

    #[test]
    fn weight_examples() {
        let inst = two_cycle(1);
        let x = Exchange::new().with(Cycle::from_ids(&["u", "v"]).unwrap(), 1i64);
        assert_eq!(weight(&inst, &x).unwrap(), Rational::from_integer(2));
        assert_eq!(weight(&inst, &Exchange::new()).unwrap(), Rational::zero());
        assert_eq!(weight(&seven_agents(), &seven_initial()).unwrap(), Rational::from_integer(9));
    }

    #[test]
    fn decompose_triangle() {
        let inst = Instance::builder(Mode::Integral)
            .agent("u", &["v"])
            .agent("v", &["w"])
            .agent("w", &["u"])
            .arc("u", "v", 1i64)
            .arc("v", "w", 1i64)
            .arc("w", "u", 1i64)
            .build()
            .unwrap();
        let flow = ArcFlow::from_values(vec![Rational::one(); 3]);
        let x = decompose_circulation(&inst, &flow).unwrap();
        assert_eq!(x.cycles().len(), 1);
        assert_eq!(x.cycles()[0].1, Rational::one());
        assert_eq!(x.flow(&inst).unwrap(), flow);
    }

    #[test]
    fn decompose_figure_eight() {
        let inst = Instance::builder(Mode::Integral)
            .agent("u", &["a", "c"])
            .agent("a", &["b"])
            .agent("b", &["u"])
            .agent("c", &["d"])
            .agent("d", &["u"])
            .arc("u", "a", 1i64)
            .arc("a", "b", 1i64)
            .arc("b", "u", 1i64)
            .arc("u", "c", 1i64)
            .arc("c", "d", 1i64)
            .arc("d", "u", 1i64)
            .build()
            .unwrap();
        let flow = ArcFlow::from_values(vec![Rational::one(); 6]);
        let x = decompose_circulation(&inst, &flow).unwrap();
        assert_eq!(x.cycles().len(), 2);
        assert!(x.cycles().iter().all(|(_, f)| f == &Rational::one()));
        assert_eq!(x.flow(&inst).unwrap(), flow);
    }

    #[test]
    fn decompose_rejects_unbalanced_flow() {
        let inst = two_cycle(1);
        let e = inst.find_arc(0, 1).unwrap();
        let mut flow = ArcFlow::zeros(&inst);
        flow.set(e, Rational::one());
        assert!(matches!(decompose_circulation(&inst, &flow), Err(Error::NotConserved(_))));
    }
}
