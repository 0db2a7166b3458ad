//! Instance normalization: trimming, agent-capacity splitting, complete closure.

use std::collections::{BTreeMap, HashMap};

use log::debug;

use crate::error::{Error, Result};
use crate::exchange::{Cycle, Exchange};
use crate::instance::{AgentId, AgentSpec, ArcKind, ExchangeArc, Instance};
use crate::rational::Rational;

/// Drops zero-capacity arcs, then repeatedly removes agents with no positive
/// in-arc or no positive out-arc until every remaining agent has both.
pub fn trim(inst: &Instance) -> Instance {
    let n = inst.agent_count();
    let live_arc = |e: usize| inst.arc(e).capacity.is_positive();
    let mut alive = vec![true; n];
    let mut outdeg: Vec<usize> = (0..n).map(|v| inst.out_arcs(v).iter().filter(|&&e| live_arc(e)).count()).collect();
    let mut indeg: Vec<usize> = (0..n).map(|v| inst.in_arcs(v).iter().filter(|&&e| live_arc(e)).count()).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| outdeg[v] == 0 || indeg[v] == 0).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &e in inst.out_arcs(v).iter().filter(|&&e| live_arc(e)) {
            let s = inst.arc(e).seller;
            if alive[s] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    stack.push(s);
                }
            }
        }
        for &e in inst.in_arcs(v).iter().filter(|&&e| live_arc(e)) {
            let b = inst.arc(e).buyer;
            if alive[b] {
                outdeg[b] -= 1;
                if outdeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
    }

    let keep_arc = |e: usize| {
        let a = inst.arc(e);
        live_arc(e) && alive[a.buyer] && alive[a.seller]
    };
    let removed = alive.iter().filter(|a| !**a).count();
    if removed > 0 {
        debug!("trim removed {removed} of {n} agents");
    }
    restrict(inst, |v| alive[v], keep_arc)
}

/// Sub-instance on the kept agents and arcs, preserving preference order.
fn restrict(inst: &Instance, keep_agent: impl Fn(usize) -> bool, keep_arc: impl Fn(usize) -> bool) -> Instance {
    let agents = (0..inst.agent_count())
        .filter(|&v| keep_agent(v))
        .map(|v| AgentSpec {
            id: inst.agent(v).clone(),
            preferences: inst
                .out_arcs(v)
                .iter()
                .filter(|&&e| keep_arc(e))
                .map(|&e| inst.agent(inst.arc(e).seller).clone())
                .collect(),
        })
        .collect();
    let arcs = (0..inst.arc_count())
        .filter(|&e| keep_arc(e))
        .map(|e| {
            let a = inst.arc(e);
            ExchangeArc {
                buyer: inst.agent(a.buyer).clone(),
                seller: inst.agent(a.seller).clone(),
                capacity: a.capacity.clone(),
                weight: a.weight.clone(),
                kind: a.kind,
            }
        })
        .collect();
    Instance::new(inst.mode(), agents, arcs).expect("restriction of a valid instance is valid")
}

/// How split agents map back onto the original instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitMap {
    /// original agent -> (v+, v-)
    pub halves: BTreeMap<AgentId, (AgentId, AgentId)>,
    back: HashMap<AgentId, AgentId>,
}

impl SplitMap {
    pub fn is_identity(&self) -> bool {
        self.halves.is_empty()
    }

    /// Original agent for a (possibly split) agent id.
    pub fn original<'a>(&'a self, id: &'a AgentId) -> &'a AgentId {
        self.back.get(id).unwrap_or(id)
    }

    /// Maps an exchange on the split instance back to the original agents.
    ///
    /// Each `v+, v-` pair is consecutive on any cycle (v+ has a single out-arc),
    /// so it collapses into one visit of `v`.
    pub fn to_original(&self, x: &Exchange) -> Result<Exchange> {
        let mut out = Exchange::new();
        for (cycle, f) in x.cycles() {
            let mut agents: Vec<AgentId> = Vec::with_capacity(cycle.len());
            for a in cycle.agents() {
                let orig = self.original(a).clone();
                if agents.last() != Some(&orig) {
                    agents.push(orig);
                }
            }
            if agents.len() > 1 && agents.first() == agents.last() {
                agents.pop();
            }
            out.push(Cycle::new(agents)?, f.clone());
        }
        Ok(out)
    }

    /// Maps an exchange on the original instance onto the split instance.
    pub fn to_split(&self, x: &Exchange) -> Result<Exchange> {
        let mut out = Exchange::new();
        for (cycle, f) in x.cycles() {
            let mut agents = Vec::with_capacity(cycle.len() * 2);
            for a in cycle.agents() {
                match self.halves.get(a) {
                    Some((plus, minus)) => {
                        agents.push(plus.clone());
                        agents.push(minus.clone());
                    }
                    None => agents.push(a.clone()),
                }
            }
            out.push(Cycle::new(agents)?, f.clone());
        }
        Ok(out)
    }
}

/// Replaces every capped agent `v` by `v+` (takes v's in-arcs) and `v-` (takes
/// v's out-arcs and preference list), joined by the arc `(v+, v-)` of capacity
/// `caps[v]` and weight 0.
pub fn split_agent_capacity(inst: &Instance, caps: &BTreeMap<AgentId, Rational>) -> Result<(Instance, SplitMap)> {
    let mut map = SplitMap::default();
    for (v, cap) in caps {
        inst.require_agent(v)?;
        if cap.is_negative() {
            return Err(Error::InvalidInstance(format!("negative agent capacity {cap} for {v}")));
        }
        if inst.is_integral() && !cap.is_integer() {
            return Err(Error::InvalidInstance(format!("fractional agent capacity {cap} for {v} in integral mode")));
        }
        let plus = AgentId::new(format!("{v}+"));
        let minus = AgentId::new(format!("{v}-"));
        for half in [&plus, &minus] {
            if inst.index_of(half).is_some() {
                return Err(Error::InvalidInstance(format!("split name {half} collides with an existing agent")));
            }
        }
        map.back.insert(plus.clone(), v.clone());
        map.back.insert(minus.clone(), v.clone());
        map.halves.insert(v.clone(), (plus, minus));
    }
    if map.is_identity() {
        return Ok((inst.clone(), map));
    }

    // in-arc (w, v) now points at v+, out-arc (v, u) now leaves from v-
    let as_seller = |id: &AgentId| map.halves.get(id).map_or(id.clone(), |(p, _)| p.clone());
    let as_buyer = |id: &AgentId| map.halves.get(id).map_or(id.clone(), |(_, m)| m.clone());

    let (specs, arcs) = inst.to_parts();
    let mut new_specs = Vec::new();
    for spec in specs {
        let prefs: Vec<AgentId> = spec.preferences.iter().map(as_seller).collect();
        match map.halves.get(&spec.id) {
            Some((plus, minus)) => {
                new_specs.push(AgentSpec { id: plus.clone(), preferences: vec![minus.clone()] });
                new_specs.push(AgentSpec { id: minus.clone(), preferences: prefs });
            }
            None => new_specs.push(AgentSpec { id: spec.id, preferences: prefs }),
        }
    }
    let mut new_arcs: Vec<ExchangeArc> = arcs
        .into_iter()
        .map(|a| ExchangeArc { buyer: as_buyer(&a.buyer), seller: as_seller(&a.seller), ..a })
        .collect();
    for (v, (plus, minus)) in &map.halves {
        new_arcs.push(
            ExchangeArc::new(plus.clone(), minus.clone(), caps[v].clone())
                .with_weight(Rational::zero())
                .with_kind(ArcKind::Split),
        );
    }
    Ok((Instance::new(inst.mode(), new_specs, new_arcs)?, map))
}

/// Adds a zero-capacity, zero-weight closure arc for every missing ordered pair;
/// closure arcs go to the end of each preference list in ascending id order.
pub fn complete_closure(inst: &Instance) -> Instance {
    let n = inst.agent_count();
    let (mut specs, mut arcs) = inst.to_parts();
    for v in 0..n {
        for u in 0..n {
            if u != v && inst.find_arc(v, u).is_none() {
                specs[v].preferences.push(inst.agent(u).clone());
                arcs.push(
                    ExchangeArc::new(inst.agent(v).clone(), inst.agent(u).clone(), Rational::zero())
                        .with_weight(Rational::zero())
                        .with_kind(ArcKind::Closure),
                );
            }
        }
    }
    Instance::new(inst.mode(), specs, arcs).expect("closure of a valid instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::validate;
    use crate::fixtures::*;
    use crate::instance::Mode;

    fn ids(inst: &Instance) -> Vec<&str> {
        inst.agents().iter().map(|a| a.as_str()).collect()
    }

    #[test]
    fn trim_single_arc_is_empty() {
        let inst = Instance::builder(Mode::Fractional)
            .agent("u", &["v"])
            .agent("v", &[])
            .arc("u", "v", 1i64)
            .build()
            .unwrap();
        assert!(trim(&inst).is_empty());
    }

    #[test]
    fn trim_keeps_seven_agents() {
        let inst = seven_agents();
        let t = trim(&inst);
        assert_eq!(t.agents(), inst.agents());
        assert_eq!(t.arcs(), inst.arcs());
    }

    #[test]
    fn trim_path_into_cycle() {
        let inst = Instance::builder(Mode::Fractional)
            .agent("a", &["b"])
            .agent("b", &["c"])
            .agent("c", &["d"])
            .agent("d", &["c"])
            .arc("a", "b", 1i64)
            .arc("b", "c", 1i64)
            .arc("c", "d", 1i64)
            .arc("d", "c", 1i64)
            .build()
            .unwrap();
        let t = trim(&inst);
        assert_eq!(ids(&t), vec!["c", "d"]);
        assert_eq!(t.arc_count(), 2);
        assert_eq!(trim(&t).arcs(), t.arcs());
    }

    #[test]
    fn trim_drops_zero_capacity_arcs() {
        let t = trim(&complete_closure(&triangle()));
        assert_eq!(t.arc_count(), 3);
    }

    #[test]
    fn split_without_caps_is_identity() {
        let inst = seven_agents();
        let (s, map) = split_agent_capacity(&inst, &BTreeMap::new()).unwrap();
        assert!(map.is_identity());
        assert_eq!(s.arcs(), inst.arcs());
    }

    #[test]
    fn split_structure() {
        let inst = two_cycle(5);
        let caps = BTreeMap::from([(AgentId::from("u"), Rational::from_integer(2))]);
        let (s, map) = split_agent_capacity(&inst, &caps).unwrap();
        assert_eq!(ids(&s), vec!["u+", "u-", "v"]);
        let plus = s.index_of(&"u+".into()).unwrap();
        let minus = s.index_of(&"u-".into()).unwrap();
        assert_eq!(s.out_arcs(plus).len(), 1);
        assert_eq!(s.in_arcs(minus).len(), 1);
        let e = s.find_arc(plus, minus).unwrap();
        assert_eq!(s.arc(e).capacity, Rational::from_integer(2));
        assert!(s.arc(e).weight.is_zero());

        let x = Exchange::new().with(Cycle::from_ids(&["u+", "u-", "v"]).unwrap(), 2i64);
        assert_eq!(validate(&s, &x), Ok(()));
        let back = map.to_original(&x).unwrap();
        assert_eq!(back, Exchange::new().with(Cycle::from_ids(&["u", "v"]).unwrap(), 2i64));
        assert_eq!(map.to_split(&back).unwrap(), x);
        let over = Exchange::new().with(Cycle::from_ids(&["u+", "u-", "v"]).unwrap(), 3i64);
        assert!(validate(&s, &over).is_err());
    }

    #[test]
    fn split_rejects_unknown_agent() {
        let caps = BTreeMap::from([(AgentId::from("z"), Rational::one())]);
        assert!(split_agent_capacity(&two_cycle(1), &caps).is_err());
    }

    #[test]
    fn closure_counts() {
        assert_eq!(complete_closure(&triangle()).arc_count(), 6);
        assert_eq!(complete_closure(&square()).arc_count(), 12);
        let full = complete_closure(&square());
        assert_eq!(complete_closure(&full).arcs(), full.arcs());
    }

    #[test]
    fn closure_arcs_rank_last() {
        let c = complete_closure(&square());
        let b = c.index_of(&"B".into()).unwrap();
        let prefs: Vec<&str> = c.preferences(b).map(|s| c.agent(s).as_str()).collect();
        assert_eq!(prefs, vec!["A", "C", "D"]);
        let e = c.find_arc(b, c.index_of(&"D".into()).unwrap()).unwrap();
        assert_eq!(c.arc(e).kind, ArcKind::Closure);
    }
}
