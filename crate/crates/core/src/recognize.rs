//! Recognition through a one-to-many bipartite matching instance, coalition
//! lifting and application, and the improvement loop.
//!
//! Every flow-carrying arc (v,u) becomes a bipartite agent `v_u` matched to the
//! object `u`. Its list holds the objects reachable from v in the residual
//! graph when v may only leave towards sellers it ranks above u, followed by u.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use log::{debug, info};
use serde::Serialize;

use crate::characterize::{ids_of_path, pareto_verdict, residual_cycle_flow, trade_in_flow, Coalition, ResidualCycle};
use crate::error::{Error, Result};
use crate::exchange::{decompose_circulation, dominates_flow, validate, ArcFlow, Cycle, Exchange};
use crate::instance::{AgentId, Instance};
use crate::rational::Rational;
use crate::residual::{vertices_of, RestrictedBfs};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteAgent {
    pub buyer: AgentId,
    pub seller: AgentId,
    /// Reachable objects in ascending id order, then `seller` last.
    pub preferences: Vec<AgentId>,
    #[serde(skip)]
    arc: usize,
}

impl BipartiteAgent {
    pub fn name(&self) -> String {
        format!("{}_{}", self.buyer, self.seller)
    }

    /// Objects ranked above the matched one.
    pub fn envied(&self) -> &[AgentId] {
        &self.preferences[..self.preferences.len() - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteInstance {
    pub agents: Vec<BipartiteAgent>,
    pub quotas: BTreeMap<AgentId, usize>,
}

impl BipartiteInstance {
    /// The canonical matching M_C: every agent `v_u` gets object `u`.
    pub fn matching(&self) -> Vec<(String, AgentId)> {
        self.agents.iter().map(|a| (a.name(), a.seller.clone())).collect()
    }

    pub fn agent(&self, name: &str) -> Option<&BipartiteAgent> {
        self.agents.iter().find(|a| a.name() == name)
    }
}

fn reduction_of(inst: &Instance, flow: &ArcFlow) -> BipartiteInstance {
    let mut quotas: BTreeMap<AgentId, usize> = BTreeMap::new();
    for e in 0..inst.arc_count() {
        if flow.get(e).is_positive() {
            *quotas.entry(inst.agent(inst.arc(e).seller).clone()).or_default() += 1;
        }
    }
    let mut agents = Vec::new();
    for e in 0..inst.arc_count() {
        if !flow.get(e).is_positive() {
            continue;
        }
        let a = inst.arc(e);
        let bfs = RestrictedBfs::run(inst, flow, a.buyer, a.rank);
        let mut preferences: Vec<AgentId> = (0..inst.agent_count())
            .filter(|&w| bfs.reached[w] && quotas.contains_key(inst.agent(w)))
            .map(|w| inst.agent(w).clone())
            .collect();
        preferences.push(inst.agent(a.seller).clone());
        let (b, s) = inst.arc_ids(e);
        agents.push(BipartiteAgent { buyer: b.clone(), seller: s.clone(), preferences, arc: e });
    }
    BipartiteInstance { agents, quotas }
}

/// Builds the reduction after checking that `x` is maximal and trade-in-free.
pub fn build_reduction(inst: &Instance, x: &Exchange) -> Result<BipartiteInstance> {
    let flow = x.flow(inst)?;
    if let Some((arcs, _)) = residual_cycle_flow(inst, &flow) {
        let c = Cycle::from_indices(inst, &vertices_of(inst, &arcs));
        return Err(Error::Precondition(format!(
            "exchange is not maximal (residual cycle {c}); restore maximality first"
        )));
    }
    if let Some(w) = trade_in_flow(inst, &flow) {
        return Err(Error::Precondition(format!("exchange is not trade-in-free ({w}); repair trade-ins first")));
    }
    Ok(reduction_of(inst, &flow))
}

/// Builds the reduction without any precondition; trade-ins show up as parallel edges.
pub fn build_reduction_relaxed(inst: &Instance, x: &Exchange) -> Result<BipartiteInstance> {
    Ok(reduction_of(inst, &x.flow(inst)?))
}

/// True iff some agent `v_u` lists `u` before its final entry.
pub fn has_parallel_edges(b: &BipartiteInstance) -> bool {
    b.agents.iter().any(|a| a.envied().contains(&a.seller))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "pairs", rename_all = "snake_case")]
pub enum BipartiteVerdict {
    Optimal,
    /// Indices into `agents`; each pair envies the object of the next one.
    Coalition(Vec<usize>),
}

/// Envy cycle on the matched pairs, ignoring a pair's envy of itself.
///
/// Pairs that cannot reach an envy cycle are pruned first. Each remaining pair
/// then points at the first remaining pair it envies (its list order, holders
/// in pair order), and the walk from the smallest remaining pair closes a cycle.
fn envy_cycle(b: &BipartiteInstance) -> Option<Vec<usize>> {
    let n = b.agents.len();
    let mut holders: HashMap<&AgentId, Vec<usize>> = HashMap::new();
    for (i, a) in b.agents.iter().enumerate() {
        holders.entry(&a.seller).or_default().push(i);
    }
    let envies = |p: usize| -> Vec<usize> {
        b.agents[p]
            .envied()
            .iter()
            .flat_map(|o| holders.get(o).cloned().unwrap_or_default())
            .filter(|&q| q != p)
            .collect()
    };
    let out: Vec<Vec<usize>> = (0..n).map(envies).collect();

    let mut alive = vec![true; n];
    loop {
        let sinks: Vec<usize> = (0..n).filter(|&p| alive[p] && !out[p].iter().any(|&q| alive[q])).collect();
        if sinks.is_empty() {
            break;
        }
        for p in sinks {
            alive[p] = false;
        }
    }
    let start = (0..n).find(|&p| alive[p])?;
    let next = |p: usize| *out[p].iter().find(|&&q| alive[q]).unwrap();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut walk = Vec::new();
    let mut p = start;
    while !seen.contains_key(&p) {
        seen.insert(p, walk.len());
        walk.push(p);
        p = next(p);
    }
    Some(walk[seen[&p]..].to_vec())
}

/// Pareto check of M_C. Errors with [`Error::Precondition`] on parallel edges.
pub fn bipartite_pareto_check(b: &BipartiteInstance) -> Result<BipartiteVerdict> {
    if has_parallel_edges(b) {
        return Err(Error::Precondition("reduction has parallel edges; repair trade-ins first".into()));
    }
    Ok(match envy_cycle(b) {
        Some(pairs) => BipartiteVerdict::Coalition(pairs),
        None => BipartiteVerdict::Optimal,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    /// Residual arc traversed forwards.
    Residual(usize),
    /// Coalition member (index into the member list) traversed from seller to buyer.
    Reversed(usize),
}

/// Turns the coalition's closed walk into one that uses every residual arc at most once.
///
/// For the earliest residual arc that recurs, the walk from that position up
/// to its last occurrence is cut out; this repeats until no arc recurs.
fn shortcut_walk(mut steps: Vec<Step>) -> Vec<Step> {
    loop {
        let mut last: HashMap<usize, usize> = HashMap::new();
        for (pos, s) in steps.iter().enumerate() {
            if let Step::Residual(e) = s {
                last.insert(*e, pos);
            }
        }
        let repeat = steps.iter().enumerate().find_map(|(pos, s)| match s {
            Step::Residual(e) if last[e] > pos => Some((pos, last[e])),
            _ => None,
        });
        match repeat {
            Some((i, j)) => {
                steps.drain(i..j);
            }
            None => return steps,
        }
    }
}

fn lift_flow(inst: &Instance, flow: &ArcFlow, b: &BipartiteInstance, pairs: &[usize]) -> Result<Coalition> {
    let k = pairs.len();
    if k == 0 {
        return Err(Error::Invariant("empty bipartite coalition".into()));
    }
    let members: Vec<usize> = pairs.iter().map(|&p| b.agents[p].arc).collect();
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        let a = inst.arc(members[i]);
        let target = inst.arc(members[(i + 1) % k]).seller;
        let bfs = RestrictedBfs::run(inst, flow, a.buyer, a.rank);
        let path = bfs.path_to(inst, target).ok_or_else(|| {
            Error::Invariant(format!(
                "no residual path from {} to {} for pair {}",
                inst.agent(a.buyer),
                inst.agent(target),
                b.agents[pairs[i]].name()
            ))
        })?;
        paths.push(path);
    }

    let (members, paths) = if inst.is_integral() {
        let mut steps = Vec::new();
        for (i, p) in paths.iter().enumerate() {
            steps.push(Step::Reversed(i));
            steps.extend(p.iter().map(|&e| Step::Residual(e)));
        }
        let steps = shortcut_walk(steps);
        let mut kept_members = Vec::new();
        let mut kept_paths: Vec<Vec<usize>> = Vec::new();
        for s in steps {
            match s {
                Step::Reversed(i) => {
                    kept_members.push(members[i]);
                    kept_paths.push(Vec::new());
                }
                Step::Residual(e) => kept_paths
                    .last_mut()
                    .ok_or_else(|| Error::Invariant("walk does not start at a member".into()))?
                    .push(e),
            }
        }
        if kept_members.is_empty() || kept_paths.iter().any(|p| p.is_empty()) {
            return Err(Error::Invariant("shortcut walk lost its coalition structure".into()));
        }
        (kept_members, kept_paths)
    } else {
        (members, paths)
    };

    let mut multiplicity: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &paths {
        for &e in p {
            *multiplicity.entry(e).or_default() += 1;
        }
    }
    let by_members = members.iter().map(|&e| flow.get(e).clone());
    let by_paths = multiplicity
        .iter()
        .map(|(&e, &m)| flow.residual(inst, e) / Rational::from_integer(m as i64));
    let transfer = by_members.chain(by_paths).min().unwrap();

    Ok(Coalition {
        exchange_arcs: members
            .iter()
            .map(|&e| {
                let (v, u) = inst.arc_ids(e);
                (v.clone(), u.clone())
            })
            .collect(),
        paths: members.iter().zip(&paths).map(|(&e, p)| ids_of_path(inst, inst.arc(e).buyer, p)).collect(),
        transfer,
    })
}

/// Maps a bipartite envy cycle to residual paths in the exchange graph.
///
/// In integral mode the paths are first made pairwise arc-disjoint, which keeps
/// the transfer integral.
pub fn lift_coalition(inst: &Instance, x: &Exchange, b: &BipartiteInstance, pairs: &[usize]) -> Result<Coalition> {
    lift_flow(inst, &x.flow(inst)?, b, pairs)
}

/// Coalition from the relaxed reduction: same as the strict one, but trade-ins
/// are not required to be repaired first. May return a coalition whose arcs
/// also admit trade-ins.
pub fn relaxed_coalition(inst: &Instance, x: &Exchange) -> Result<Option<Coalition>> {
    relaxed_coalition_flow(inst, &x.flow(inst)?)
}

fn relaxed_coalition_flow(inst: &Instance, flow: &ArcFlow) -> Result<Option<Coalition>> {
    let b = reduction_of(inst, flow);
    match envy_cycle(&b) {
        Some(pairs) => Ok(Some(lift_flow(inst, flow, &b, &pairs)?)),
        None => Ok(None),
    }
}

pub(crate) fn apply_flow(inst: &Instance, flow: &ArcFlow, co: &Coalition) -> Result<ArcFlow> {
    co.check(inst, flow)?;
    let mut out = flow.clone();
    for (v, u) in &co.exchange_arcs {
        out.add(inst.find_arc_by_id(v, u)?, &-&co.transfer);
    }
    for a in co.path_arcs(inst)? {
        out.add(a, &co.transfer);
    }
    out.check_bounds(inst).map_err(|e| Error::Invariant(format!("coalition transfer miscomputed: {e}")))?;
    out.check_conservation(inst)
        .map_err(|e| Error::Invariant(format!("coalition broke balance: {e}")))?;
    Ok(out)
}

/// Moves `co.transfer` units from the coalition arcs onto its paths.
pub fn apply_coalition(inst: &Instance, x: &Exchange, co: &Coalition) -> Result<Exchange> {
    decompose_circulation(inst, &apply_flow(inst, &x.flow(inst)?, co)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Maximality,
    Coalition,
    TradeIn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImproveStep {
    pub kind: StepKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<ResidualCycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalition: Option<Coalition>,
    pub weight_before: Rational,
    pub weight_after: Rational,
}

impl fmt::Display for ImproveStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.cycle, &self.coalition) {
            (Some(c), _) => write!(f, "add {} at {}", c.cycle, c.bottleneck),
            (_, Some(co)) => write!(f, "{:?} {co}", self.kind),
            _ => write!(f, "{:?}", self.kind),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ImproveTrace {
    pub steps: Vec<ImproveStep>,
}

impl ImproveTrace {
    pub fn coalition_steps(&self) -> impl Iterator<Item = &ImproveStep> {
        self.steps.iter().filter(|s| s.kind != StepKind::Maximality)
    }
}

/// Upper bound on improvement steps: 4·|A|².
pub fn iteration_cap(inst: &Instance) -> usize {
    (4 * inst.arc_count() * inst.arc_count()).max(1)
}

/// Improves `x` until it is Pareto optimal.
///
/// Each step either adds a residual cycle at its bottleneck, applies a coalition
/// of two or more arcs from the relaxed reduction, or applies a trade-in, in
/// that order of priority. Every step must dominate the previous exchange.
pub fn improve_to_pareto(inst: &Instance, x: &Exchange) -> Result<(Exchange, ImproveTrace)> {
    validate(inst, x).map_err(|v| Error::InvalidFlow(v.to_string()))?;
    let cap = iteration_cap(inst);
    let mut flow = x.flow(inst)?;
    let mut trace = ImproveTrace::default();

    loop {
        let before = flow.weight(inst);
        let (next, mut step) = if let Some((arcs, bottleneck)) = residual_cycle_flow(inst, &flow) {
            let mut next = flow.clone();
            for &e in &arcs {
                next.add(e, &bottleneck);
            }
            let cycle = Cycle::from_indices(inst, &vertices_of(inst, &arcs));
            let step = ImproveStep {
                kind: StepKind::Maximality,
                cycle: Some(ResidualCycle { cycle, bottleneck }),
                coalition: None,
                weight_before: before.clone(),
                weight_after: Rational::zero(),
            };
            (next, step)
        } else if let Some(co) = relaxed_coalition_flow(inst, &flow)? {
            let next = apply_flow(inst, &flow, &co)?;
            let kind = if co.is_trade_in() { StepKind::TradeIn } else { StepKind::Coalition };
            (next, ImproveStep { kind, cycle: None, coalition: Some(co), weight_before: before.clone(), weight_after: Rational::zero() })
        } else if let Some(co) = trade_in_flow(inst, &flow) {
            let next = apply_flow(inst, &flow, &co)?;
            (next, ImproveStep { kind: StepKind::TradeIn, cycle: None, coalition: Some(co), weight_before: before.clone(), weight_after: Rational::zero() })
        } else {
            break;
        };
        step.weight_after = next.weight(inst);
        if !dominates_flow(inst, &next, &flow) {
            return Err(Error::Invariant(format!("improvement step does not dominate: {step}")));
        }
        debug!("improve step {}: {step} (weight {} -> {})", trace.steps.len() + 1, step.weight_before, step.weight_after);
        trace.steps.push(step);
        flow = next;
        if trace.steps.len() > cap {
            let tail: Vec<String> = trace.steps.iter().rev().take(5).map(|s| s.to_string()).collect();
            return Err(Error::IterationCap { cap, trace: tail.join(" | ") });
        }
    }

    let out = if trace.steps.is_empty() { x.clone() } else { decompose_circulation(inst, &flow)? };
    let verdict = pareto_verdict(inst, &out)?;
    if !verdict.is_optimal() {
        return Err(Error::Invariant(format!("improvement loop ended on a non-optimal exchange: {verdict:?}")));
    }
    info!("improvement finished after {} steps", trace.steps.len());
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::is_pareto_optimal;
    use crate::exchange::dominates;
    use crate::fixtures::*;
    use crate::instance::Mode;
    use crate::ttc::run_ttc;

    fn names(ids: &[AgentId]) -> Vec<&str> {
        ids.iter().map(|a| a.as_str()).collect()
    }

    #[test]
    fn seven_reduction() {
        let inst = seven_agents();
        let b = build_reduction_relaxed(&inst, &seven_initial()).unwrap();
        let quotas: Vec<(&str, usize)> = b.quotas.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        assert_eq!(quotas, vec![("A", 1), ("B", 1), ("C", 1), ("D", 1), ("E", 1), ("F", 2), ("G", 1)]);
        assert_eq!(b.quotas.values().sum::<usize>(), b.agents.len());
        assert_eq!(names(&b.agent("E_F").unwrap().preferences), vec!["B", "C", "D", "F"]);
        assert_eq!(names(&b.agent("A_B").unwrap().preferences), vec!["B", "C", "D", "E", "B"]);
        assert_eq!(names(&b.agent("C_D").unwrap().preferences), vec!["B", "D", "D"]);
        assert!(has_parallel_edges(&b));
        assert!(matches!(build_reduction(&inst, &seven_initial()), Err(Error::Precondition(_))));
    }

    #[test]
    fn improved_reduction_has_no_parallel_edges() {
        let inst = seven_agents();
        let b = build_reduction(&inst, &seven_improved()).unwrap();
        assert!(!has_parallel_edges(&b));
        assert_eq!(bipartite_pareto_check(&b).unwrap(), BipartiteVerdict::Optimal);
    }

    #[test]
    fn saturated_two_cycle_forced() {
        let inst = two_cycle(1);
        let x = Exchange::new().with(Cycle::from_ids(&["u", "v"]).unwrap(), 1i64);
        let b = build_reduction(&inst, &x).unwrap();
        assert_eq!(b.agents.len(), 2);
        assert!(b.agents.iter().all(|a| a.preferences.len() == 1));
        assert!(!has_parallel_edges(&b));
        assert_eq!(bipartite_pareto_check(&b).unwrap(), BipartiteVerdict::Optimal);
    }

    #[test]
    fn independent_two_cycles_are_optimal() {
        let inst = Instance::builder(Mode::Integral)
            .agent("a", &["b"])
            .agent("b", &["a"])
            .agent("c", &["d"])
            .agent("d", &["c"])
            .arc("a", "b", 1i64)
            .arc("b", "a", 1i64)
            .arc("c", "d", 1i64)
            .arc("d", "c", 1i64)
            .build()
            .unwrap();
        let x = Exchange::new()
            .with(Cycle::from_ids(&["a", "b"]).unwrap(), 1i64)
            .with(Cycle::from_ids(&["c", "d"]).unwrap(), 1i64);
        let b = build_reduction(&inst, &x).unwrap();
        assert_eq!(bipartite_pareto_check(&b).unwrap(), BipartiteVerdict::Optimal);
    }

    #[test]
    fn seven_relaxed_coalition_and_lift() {
        let inst = seven_agents();
        let co = relaxed_coalition(&inst, &seven_initial()).unwrap().unwrap();
        let arcs: Vec<String> = co.exchange_arcs.iter().map(|(v, u)| format!("{v}{u}")).collect();
        assert_eq!(arcs, vec!["AB", "BC", "CD"]);
        let paths: Vec<Vec<&str>> = co.paths.iter().map(|p| names(p)).collect();
        assert_eq!(paths, vec![vec!["A", "E", "C"], vec!["B", "D"], vec!["C", "B"]]);
        assert_eq!(co.transfer, Rational::one());
        let y = apply_coalition(&inst, &seven_initial(), &co).unwrap();
        assert_eq!(y.flow(&inst).unwrap(), seven_improved().flow(&inst).unwrap());
    }

    #[test]
    fn trade_in_transfer_is_bottleneck() {
        // v -> u carries 5; v prefers t; residual path v,t,u has residuals 3 and 2.
        let inst = Instance::builder(Mode::Fractional)
            .agent("v", &["t", "u"])
            .agent("t", &["u"])
            .agent("u", &["v"])
            .arc("v", "t", 3i64)
            .arc("v", "u", 5i64)
            .arc("t", "u", 2i64)
            .arc("u", "v", 5i64)
            .build()
            .unwrap();
        let x = Exchange::new().with(Cycle::from_ids(&["u", "v"]).unwrap(), 5i64);
        let w = crate::characterize::trade_in_witness(&inst, &x).unwrap().unwrap();
        assert_eq!(w.transfer, Rational::from_integer(2));
    }

    #[test]
    fn shared_arc_halves_transfer() {
        // Two agents a, b each hold one unit from a worse seller; both improving
        // paths run through the shared arc (s, h) with residual 1.
        let inst = Instance::builder(Mode::Fractional)
            .agent("a", &["s", "x"])
            .agent("b", &["s", "y"])
            .agent("s", &["h"])
            .agent("h", &["x", "y"])
            .agent("x", &["a", "b"])
            .agent("y", &["b", "a"])
            .arc("a", "s", 1i64)
            .arc("a", "x", 1i64)
            .arc("b", "s", 1i64)
            .arc("b", "y", 1i64)
            .arc("s", "h", 1i64)
            .arc("h", "x", 1i64)
            .arc("h", "y", 1i64)
            .arc("x", "a", 1i64)
            .arc("x", "b", 1i64)
            .arc("y", "b", 1i64)
            .arc("y", "a", 1i64)
            .build()
            .unwrap();
        let mut flow = ArcFlow::zeros(&inst);
        for (b, s) in [("a", "x"), ("x", "b"), ("b", "y"), ("y", "a")] {
            flow.set(inst.find_arc_by_id(&b.into(), &s.into()).unwrap(), Rational::one());
        }
        let x = decompose_circulation(&inst, &flow).unwrap();
        let b = build_reduction_relaxed(&inst, &x).unwrap();
        let pair = |n: &str| b.agents.iter().position(|a| a.name() == n).unwrap();
        let co = lift_coalition(&inst, &x, &b, &[pair("a_x"), pair("b_y")]).unwrap();
        assert_eq!(co.transfer, Rational::new(1, 2));
        let y = apply_coalition(&inst, &x, &co).unwrap();
        assert_eq!(validate(&inst, &y), Ok(()));
        assert!(dominates(&inst, &y, &x).unwrap());
    }

    #[test]
    fn square_coalition_application() {
        let inst = square();
        let co = crate::characterize::coalition_witness(&inst, &square_four_cycle()).unwrap().unwrap();
        let y = apply_coalition(&inst, &square_four_cycle(), &co).unwrap();
        assert_eq!(y.flow(&inst).unwrap(), square_two_cycles().flow(&inst).unwrap());
    }

    #[test]
    fn full_transfer_clears_coalition_arcs() {
        let inst = square();
        let co = crate::characterize::coalition_witness(&inst, &square_four_cycle()).unwrap().unwrap();
        let y = apply_coalition(&inst, &square_four_cycle(), &co).unwrap();
        let f = y.flow(&inst).unwrap();
        for (v, u) in &co.exchange_arcs {
            assert!(f.get(inst.find_arc_by_id(v, u).unwrap()).is_zero());
        }
    }

    #[test]
    fn improve_seven() {
        let inst = seven_agents();
        let (y, trace) = improve_to_pareto(&inst, &seven_initial()).unwrap();
        assert_eq!(y.flow(&inst).unwrap(), seven_improved().flow(&inst).unwrap());
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].kind, StepKind::Coalition);
    }

    #[test]
    fn improve_leaves_ttc_output_alone() {
        let inst = seven_agents();
        let (x, _) = run_ttc(&inst);
        let (y, trace) = improve_to_pareto(&inst, &x).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(y, x);
    }

    #[test]
    fn improve_empty_two_cycle() {
        let inst = two_cycle(1);
        let (y, trace) = improve_to_pareto(&inst, &Exchange::new()).unwrap();
        assert_eq!(y, Exchange::new().with(Cycle::from_ids(&["u", "v"]).unwrap(), 1i64));
        assert_eq!(trace.steps.len(), 1);
        assert!(is_pareto_optimal(&inst, &y).unwrap());
    }

    #[test]
    fn shortcut_removes_repeated_arc() {
        use Step::*;
        let steps = vec![Reversed(0), Residual(1), Residual(2), Reversed(1), Residual(3), Residual(2), Residual(4)];
        assert_eq!(shortcut_walk(steps), vec![Reversed(0), Residual(1), Residual(2), Residual(4)]);
    }
}
