//! Maximality, trade-in freeness and coalition freeness, and the combined
//! Pareto-optimality test built from them.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{ArcFlow, Cycle, Exchange};
use crate::instance::{AgentId, Instance};
use crate::rational::Rational;
use crate::recognize;
use crate::residual::{find_cycle, has_residual, vertices_of, RestrictedBfs};

/// Arcs with positive residual capacity c(e) - f(e).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualGraph {
    pub arcs: Vec<(AgentId, AgentId, Rational)>,
}

pub fn residual_graph(inst: &Instance, x: &Exchange) -> Result<ResidualGraph> {
    let flow = x.flow(inst)?;
    let arcs = (0..inst.arc_count())
        .filter(|&e| has_residual(inst, &flow, e))
        .map(|e| {
            let (b, s) = inst.arc_ids(e);
            (b.clone(), s.clone(), flow.residual(inst, e))
        })
        .collect();
    Ok(ResidualGraph { arcs })
}

/// A set of flow-carrying arcs `(v_i, u_i)` replaced by residual paths `v_i ~> u_{i+1}`.
///
/// Path `i` starts at `v_i` and its first hop is strictly preferred by `v_i` to `u_i`.
/// With one arc this is a trade-in, and the single path returns to `u_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coalition {
    pub exchange_arcs: Vec<(AgentId, AgentId)>,
    /// Vertex sequences, start and end included.
    pub paths: Vec<Vec<AgentId>>,
    pub transfer: Rational,
}

impl Coalition {
    pub fn is_trade_in(&self) -> bool {
        self.exchange_arcs.len() == 1
    }

    /// Arc indices of the path arcs, with repetition.
    pub(crate) fn path_arcs(&self, inst: &Instance) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for p in &self.paths {
            for w in p.windows(2) {
                out.push(inst.find_arc_by_id(&w[0], &w[1])?);
            }
        }
        Ok(out)
    }

    /// True iff no arc appears on two paths or twice on one path.
    pub fn paths_arc_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.paths.iter().all(|p| p.windows(2).all(|w| seen.insert((w[0].clone(), w[1].clone()))))
    }

    /// Checks the structural conditions against `inst` and the current flow.
    pub fn check(&self, inst: &Instance, flow: &ArcFlow) -> Result<()> {
        let k = self.exchange_arcs.len();
        if k == 0 || self.paths.len() != k {
            return Err(Error::Invariant(format!("coalition has {k} arcs and {} paths", self.paths.len())));
        }
        if !self.transfer.is_positive() {
            return Err(Error::Invariant(format!("non-positive transfer {}", self.transfer)));
        }
        for (i, (v, u)) in self.exchange_arcs.iter().enumerate() {
            let e = inst.find_arc_by_id(v, u)?;
            if !flow.get(e).is_positive() {
                return Err(Error::Invariant(format!("coalition arc ({v}, {u}) carries no flow")));
            }
            let path = &self.paths[i];
            let next_u = &self.exchange_arcs[(i + 1) % k].1;
            if path.len() < 2 || &path[0] != v || path.last() != Some(next_u) {
                return Err(Error::Invariant(format!("path {i} does not run from {v} to {next_u}")));
            }
            let first = inst.find_arc_by_id(&path[0], &path[1])?;
            if inst.arc(first).rank >= inst.arc(e).rank {
                return Err(Error::Invariant(format!("first hop {} is not preferred by {v} to {u}", path[1])));
            }
        }
        for a in self.path_arcs(inst)? {
            if !has_residual(inst, flow, a) {
                let (b, s) = inst.arc_ids(a);
                return Err(Error::Invariant(format!("path arc ({b}, {s}) has no residual capacity")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ((v, u), p)) in self.exchange_arcs.iter().zip(&self.paths).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let path: Vec<&str> = p.iter().map(|a| a.as_str()).collect();
            write!(f, "({v},{u}) -> ({})", path.join(","))?;
        }
        write!(f, " [transfer {}]", self.transfer)
    }
}

/// Residual cycle with its bottleneck, witnessing non-maximality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualCycle {
    pub cycle: Cycle,
    pub bottleneck: Rational,
}

pub(crate) fn residual_cycle_flow(inst: &Instance, flow: &ArcFlow) -> Option<(Vec<usize>, Rational)> {
    let arcs = find_cycle(inst, |e| has_residual(inst, flow, e))?;
    let bottleneck = arcs.iter().map(|&e| flow.residual(inst, e)).min().unwrap();
    Some((arcs, bottleneck))
}

pub fn residual_cycle(inst: &Instance, x: &Exchange) -> Result<Option<ResidualCycle>> {
    let flow = x.flow(inst)?;
    Ok(residual_cycle_flow(inst, &flow).map(|(arcs, bottleneck)| ResidualCycle {
        cycle: Cycle::from_indices(inst, &vertices_of(inst, &arcs)),
        bottleneck,
    }))
}

/// True iff the residual graph is acyclic.
pub fn is_maximal(inst: &Instance, x: &Exchange) -> Result<bool> {
    Ok(residual_cycle(inst, x)?.is_none())
}

pub(crate) fn ids_of_path(inst: &Instance, start: usize, arcs: &[usize]) -> Vec<AgentId> {
    let mut out = vec![inst.agent(start).clone()];
    out.extend(arcs.iter().map(|&e| inst.agent(inst.arc(e).seller).clone()));
    out
}

/// First trade-in in arc order: a flow arc (v,u) and a shortest residual path
/// back to u whose first hop v strictly prefers to u.
pub(crate) fn trade_in_flow(inst: &Instance, flow: &ArcFlow) -> Option<Coalition> {
    for e in 0..inst.arc_count() {
        if !flow.get(e).is_positive() {
            continue;
        }
        let a = inst.arc(e);
        let bfs = RestrictedBfs::run(inst, flow, a.buyer, a.rank);
        if let Some(path) = bfs.path_to(inst, a.seller) {
            let bottleneck = path.iter().map(|&p| flow.residual(inst, p)).min().unwrap();
            let transfer = std::cmp::min(flow.get(e).clone(), bottleneck);
            let (b, s) = inst.arc_ids(e);
            return Some(Coalition {
                exchange_arcs: vec![(b.clone(), s.clone())],
                paths: vec![ids_of_path(inst, a.buyer, &path)],
                transfer,
            });
        }
    }
    None
}

pub fn trade_in_witness(inst: &Instance, x: &Exchange) -> Result<Option<Coalition>> {
    Ok(trade_in_flow(inst, &x.flow(inst)?))
}

pub fn is_trade_in_free(inst: &Instance, x: &Exchange) -> Result<bool> {
    Ok(trade_in_witness(inst, x)?.is_none())
}

/// A coalition with at least two arcs, found through the bipartite reduction.
///
/// Errors with [`Error::Precondition`] unless `x` is maximal and trade-in-free.
pub fn coalition_witness(inst: &Instance, x: &Exchange) -> Result<Option<Coalition>> {
    let reduction = recognize::build_reduction(inst, x)?;
    match recognize::bipartite_pareto_check(&reduction)? {
        recognize::BipartiteVerdict::Optimal => Ok(None),
        recognize::BipartiteVerdict::Coalition(pairs) => {
            Ok(Some(recognize::lift_coalition(inst, x, &reduction, &pairs)?))
        }
    }
}

pub fn is_coalition_free(inst: &Instance, x: &Exchange) -> Result<bool> {
    Ok(coalition_witness(inst, x)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ParetoVerdict {
    Optimal,
    NotMaximal { witness: ResidualCycle },
    TradeIn { witness: Coalition },
    Coalition { witness: Coalition },
}

impl ParetoVerdict {
    pub fn is_optimal(&self) -> bool {
        matches!(self, ParetoVerdict::Optimal)
    }
}

/// Checks the three conditions in order and reports the first that fails.
pub fn pareto_verdict(inst: &Instance, x: &Exchange) -> Result<ParetoVerdict> {
    if let Some(witness) = residual_cycle(inst, x)? {
        return Ok(ParetoVerdict::NotMaximal { witness });
    }
    if let Some(witness) = trade_in_witness(inst, x)? {
        return Ok(ParetoVerdict::TradeIn { witness });
    }
    if let Some(witness) = coalition_witness(inst, x)? {
        return Ok(ParetoVerdict::Coalition { witness });
    }
    Ok(ParetoVerdict::Optimal)
}

pub fn is_pareto_optimal(inst: &Instance, x: &Exchange) -> Result<bool> {
    Ok(pareto_verdict(inst, x)?.is_optimal())
}
