//! Max-weight fractional cycle packing.
//!
//! The primal is solved as a max-weight circulation by cancelling residual
//! cycles of maximum positive mean weight; the cycle view is recovered by
//! decomposition. Two dual objects are offered: the reduced dual over the
//! completed graph (2-cycle equalities and 3-cycle inequalities), solved by
//! exact simplex, and a circulation dual certificate built from residual
//! potentials of the primal optimum.

use std::collections::HashSet;
use std::hash::Hash;

use log::debug;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{decompose_circulation, ArcFlow, Exchange};
use crate::instance::{AgentId, Instance};
use crate::lp::{LinearProgram, LpOutcome, Relation, Sense};
use crate::preprocess::complete_closure;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimalSolution {
    #[serde(skip)]
    pub flow: ArcFlow,
    pub exchange: Exchange,
    pub objective: Rational,
    /// Number of cycles cancelled.
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualEntry {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub value: Rational,
}

/// Arc prices, one per arc of the instance they were computed on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualSolution {
    pub x: Vec<DualEntry>,
    pub objective: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ResidualEdge {
    arc: usize,
    forward: bool,
    tail: usize,
    head: usize,
}

fn residual_edges(inst: &Instance, flow: &ArcFlow) -> Vec<ResidualEdge> {
    let mut edges = Vec::new();
    for e in 0..inst.arc_count() {
        let a = inst.arc(e);
        if flow.get(e) < &a.capacity {
            edges.push(ResidualEdge { arc: e, forward: true, tail: a.buyer, head: a.seller });
        }
        if flow.get(e).is_positive() {
            edges.push(ResidualEdge { arc: e, forward: false, tail: a.seller, head: a.buyer });
        }
    }
    edges.sort_by_key(|r| (r.tail, r.head, r.arc, !r.forward));
    edges
}

fn edge_weight(inst: &Instance, r: &ResidualEdge) -> Rational {
    if r.forward {
        inst.arc(r.arc).weight.clone()
    } else {
        -&inst.arc(r.arc).weight
    }
}

/// Karp's maximum mean cycle value, or `None` when the graph is acyclic.
fn max_mean(n: usize, edges: &[ResidualEdge], w: &[Rational]) -> Option<Rational> {
    // d[k][v]: best weight of a walk with exactly k edges ending at v
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![Some(Rational::zero()); n]];
    for k in 1..=n {
        let mut row: Vec<Option<Rational>> = vec![None; n];
        for (r, we) in edges.iter().zip(w) {
            if let Some(prev) = &d[k - 1][r.tail] {
                let cand = prev + we;
                if row[r.head].as_ref().is_none_or(|cur| cand > *cur) {
                    row[r.head] = Some(cand);
                }
            }
        }
        d.push(row);
    }
    let mut best: Option<Rational> = None;
    for v in 0..n {
        let Some(dn) = &d[n][v] else { continue };
        let worst = (0..n)
            .filter_map(|k| d[k][v].as_ref().map(|dk| (dn - dk) / Rational::from_integer((n - k) as i64)))
            .min()?;
        if best.as_ref().is_none_or(|b| worst > *b) {
            best = Some(worst);
        }
    }
    best
}

/// A cycle of mean weight exactly `lambda` (the maximum mean), as edge indices.
fn tight_cycle(n: usize, edges: &[ResidualEdge], w: &[Rational], lambda: &Rational) -> Option<Vec<usize>> {
    let shifted: Vec<Rational> = w.iter().map(|x| x - lambda).collect();
    let mut pi = vec![Rational::zero(); n];
    for _ in 0..n {
        let mut changed = false;
        for (r, we) in edges.iter().zip(&shifted) {
            let cand = &pi[r.tail] + we;
            if cand > pi[r.head] {
                pi[r.head] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<usize> = (0..edges.len())
        .filter(|&i| &pi[edges[i].tail] + &shifted[i] == pi[edges[i].head])
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &i in &tight {
        adj[edges[i].tail].push(i);
    }
    find_edge_cycle(n, edges, &adj)
}

fn find_edge_cycle(n: usize, edges: &[ResidualEdge], adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut state = vec![0u8; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut via: Vec<usize> = Vec::new();
        state[root] = 1;
        while let Some(top) = stack.last_mut() {
            let (v, pos) = *top;
            if pos == adj[v].len() {
                state[v] = 2;
                stack.pop();
                via.pop();
                continue;
            }
            top.1 += 1;
            let i = adj[v][pos];
            let u = edges[i].head;
            match state[u] {
                1 => {
                    let at = stack.iter().position(|&(w, _)| w == u).unwrap();
                    let mut cyc = via[at..].to_vec();
                    cyc.push(i);
                    return Some(cyc);
                }
                0 => {
                    state[u] = 1;
                    stack.push((u, 0));
                    via.push(i);
                }
                _ => {}
            }
        }
    }
    None
}

/// Exact max-weight circulation, decomposed into cycles.
pub fn solve_max_weight(inst: &Instance) -> Result<PrimalSolution> {
    for a in inst.arcs() {
        if a.weight.is_negative() {
            return Err(Error::Precondition("negative arc weight".into()));
        }
    }
    let n = inst.agent_count();
    let mut flow = ArcFlow::zeros(inst);
    let guard = 8 * (inst.arc_count() + 1).pow(2) * (n + 1) + 64;
    let mut iterations = 0;
    loop {
        let edges = residual_edges(inst, &flow);
        let w: Vec<Rational> = edges.iter().map(|r| edge_weight(inst, r)).collect();
        let Some(lambda) = max_mean(n, &edges, &w) else { break };
        if !lambda.is_positive() {
            break;
        }
        let cycle = tight_cycle(n, &edges, &w, &lambda)
            .ok_or_else(|| Error::Invariant(format!("no cycle of mean {lambda} found")))?;
        let bottleneck = cycle
            .iter()
            .map(|&i| {
                let r = &edges[i];
                if r.forward {
                    flow.residual(inst, r.arc)
                } else {
                    flow.get(r.arc).clone()
                }
            })
            .min()
            .unwrap();
        for &i in &cycle {
            let r = &edges[i];
            if r.forward {
                flow.add(r.arc, &bottleneck);
            } else {
                flow.add(r.arc, &-&bottleneck);
            }
        }
        iterations += 1;
        debug!("cancelled cycle of mean {lambda} with {bottleneck} units (iteration {iterations})");
        if iterations > guard {
            return Err(Error::Invariant(format!("cycle cancelling exceeded {guard} iterations")));
        }
    }
    flow.check_conservation(inst)?;
    flow.check_bounds(inst)?;
    let exchange = decompose_circulation(inst, &flow)?;
    let objective = flow.weight(inst);
    let by_cycles = crate::exchange::weight(inst, &exchange)?;
    if by_cycles != objective {
        return Err(Error::Invariant(format!("decomposed weight {by_cycles} differs from {objective}")));
    }
    Ok(PrimalSolution { flow, exchange, objective, iterations })
}

/// Longest-path potentials in the residual graph of an optimal circulation.
fn residual_potentials(inst: &Instance, flow: &ArcFlow) -> Result<Vec<Rational>> {
    let n = inst.agent_count();
    let edges = residual_edges(inst, flow);
    let w: Vec<Rational> = edges.iter().map(|r| edge_weight(inst, r)).collect();
    let mut pi = vec![Rational::zero(); n];
    for round in 0..=n {
        let mut changed = false;
        for (r, we) in edges.iter().zip(&w) {
            let cand = &pi[r.tail] + we;
            if cand > pi[r.head] {
                pi[r.head] = cand;
                changed = true;
            }
        }
        if !changed {
            return Ok(pi);
        }
        if round == n {
            break;
        }
    }
    Err(Error::Precondition("residual graph has a positive cycle; circulation is not optimal".into()))
}

/// Dual certificate for the circulation LP: x(e) = max(0, l(e) + π(v) − π(u))
/// for arc e = (v,u), with π the residual longest-path potentials.
///
/// Feasible for min Σ c·x subject to x(e) + y(v) − y(u) ≥ l(e), x ≥ 0, and
/// tight against the primal by complementary slackness.
pub fn circulation_dual(inst: &Instance, p: &PrimalSolution) -> Result<DualSolution> {
    let pi = residual_potentials(inst, &p.flow)?;
    let mut x = Vec::with_capacity(inst.arc_count());
    let mut objective = Rational::zero();
    for e in 0..inst.arc_count() {
        let a = inst.arc(e);
        let reduced = &a.weight + &pi[a.buyer] - &pi[a.seller];
        let value = if reduced.is_positive() { reduced } else { Rational::zero() };
        objective += &a.capacity * &value;
        let (b, s) = inst.arc_ids(e);
        x.push(DualEntry { buyer: b.clone(), seller: s.clone(), value });
    }
    Ok(DualSolution { x, objective })
}

/// Solves the reduced dual on the completed graph:
/// min Σ c(e)·x(e) subject to x(u,v) + x(v,u) = l(u,v) + l(v,u) for every pair,
/// Σ_{e∈C} x(e) ≥ Σ_{e∈C} l(e) for every 3-cycle C, and x ≥ 0.
///
/// Adding the two orientations of a triangle turns both of its inequalities
/// into equalities, so on the complete graph the feasible x are exactly
/// x(u,v) = l(u,v) + φ(v) − φ(u) ≥ 0 for a potential φ. The program is solved
/// in that form (φ ≥ 0 loses nothing as the objective ignores shifts) and the
/// resulting x is checked against the constraints as stated.
pub fn solve_dual_reduced(inst: &Instance) -> Result<DualSolution> {
    let full = complete_closure(inst);
    let n = full.agent_count();
    // objective: Σ c(u,v)(l + φ(v) − φ(u)) = const + Σ_w φ(w)·(c_in(w) − c_out(w)) with w as seller / buyer
    let mut coeff = vec![Rational::zero(); n];
    let mut constant = Rational::zero();
    for a in full.arcs() {
        constant += &a.capacity * &a.weight;
        coeff[a.seller] += &a.capacity;
        coeff[a.buyer] -= &a.capacity;
    }
    let mut lp = LinearProgram::new(Sense::Minimize, coeff);
    for a in full.arcs() {
        // l(u,v) + φ(v) − φ(u) ≥ 0  ⇔  φ(u) − φ(v) ≤ l(u,v)
        lp.add_sparse(
            &[(a.buyer, Rational::one()), (a.seller, -Rational::one())],
            Relation::Le,
            a.weight.clone(),
        );
    }
    let phi = match lp.solve() {
        LpOutcome::Optimal { x, .. } => x,
        other => return Err(Error::Invariant(format!("reduced dual LP returned {other:?}"))),
    };
    let mut x = Vec::with_capacity(full.arc_count());
    let mut objective = Rational::zero();
    for e in 0..full.arc_count() {
        let a = full.arc(e);
        let value = &a.weight + &phi[a.seller] - &phi[a.buyer];
        objective += &a.capacity * &value;
        let (b, s) = full.arc_ids(e);
        x.push(DualEntry { buyer: b.clone(), seller: s.clone(), value });
    }
    let sol = DualSolution { x, objective };
    check_reduced_feasible(&full, &sol)?;
    debug!("reduced dual objective {} (constant part {constant})", sol.objective);
    Ok(sol)
}

/// Checks the reduced-dual constraints literally on a completed instance.
pub fn check_reduced_feasible(full: &Instance, d: &DualSolution) -> Result<()> {
    let n = full.agent_count();
    if d.x.len() != full.arc_count() {
        return Err(Error::InvalidFlow("dual has the wrong number of entries".into()));
    }
    let idx = |v: usize, u: usize| {
        full.find_arc(v, u).ok_or_else(|| Error::Precondition("instance is not complete".into()))
    };
    for entry in &d.x {
        if entry.value.is_negative() {
            return Err(Error::Invariant(format!("negative dual value on ({}, {})", entry.buyer, entry.seller)));
        }
    }
    for v in 0..n {
        for u in (v + 1)..n {
            let (a, b) = (idx(v, u)?, idx(u, v)?);
            let lhs = &d.x[a].value + &d.x[b].value;
            let rhs = &full.arc(a).weight + &full.arc(b).weight;
            if lhs != rhs {
                return Err(Error::Invariant(format!(
                    "2-cycle ({}, {}) has x sum {lhs}, expected {rhs}",
                    full.agent(v),
                    full.agent(u)
                )));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c || !(a < b && a < c) {
                    continue;
                }
                let arcs = [idx(a, b)?, idx(b, c)?, idx(c, a)?];
                let lhs: Rational = arcs.iter().map(|&e| &d.x[e].value).sum();
                let rhs: Rational = arcs.iter().map(|&e| &full.arc(e).weight).sum();
                if lhs < rhs {
                    return Err(Error::Invariant(format!(
                        "3-cycle ({},{},{}) has x sum {lhs} below {rhs}",
                        full.agent(a),
                        full.agent(b),
                        full.agent(c)
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DualityReport {
    Ok { objective: Rational },
    Gap { primal: Rational, dual: Rational, gap: Rational },
    Infeasible { reason: String },
}

impl DualityReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, DualityReport::Ok { .. })
    }
}

/// Exact objective comparison; dual values must also be non-negative.
pub fn verify_duality(p: &PrimalSolution, d: &DualSolution) -> DualityReport {
    if let Some(bad) = d.x.iter().find(|e| e.value.is_negative()) {
        return DualityReport::Infeasible { reason: format!("negative price on ({}, {})", bad.buyer, bad.seller) };
    }
    if p.objective == d.objective {
        DualityReport::Ok { objective: d.objective.clone() }
    } else {
        DualityReport::Gap { gap: &d.objective - &p.objective, primal: p.objective.clone(), dual: d.objective.clone() }
    }
}

/// Splits a closed walk, given as vertices with the start repeated at the end,
/// into simple cycles covering each step of the walk exactly once.
///
/// The earliest vertex that occurs again is cut at its last occurrence: the
/// closed part between them is one walk, the remainder another, and both are
/// split further until no vertex repeats.
pub fn decompose_walk<T: Clone + Eq + Hash>(walk: &[T]) -> Result<Vec<Vec<T>>> {
    if walk.len() < 3 || walk.first() != walk.last() {
        return Err(Error::InvalidWalk(format!(
            "expected a closed walk with at least two steps, got {} vertices",
            walk.len()
        )));
    }
    let mut out = Vec::new();
    let mut pending = vec![walk[..walk.len() - 1].to_vec()];
    while let Some(w) = pending.pop() {
        let m = w.len();
        let repeat = (0..m).find_map(|j| (j + 1..m).rev().find(|&k| w[k] == w[j]).map(|k| (j, k)));
        match repeat {
            None => {
                if m < 2 {
                    return Err(Error::InvalidWalk("walk contains a self-loop".into()));
                }
                out.push(w);
            }
            Some((j, k)) => {
                if k == j + 1 {
                    return Err(Error::InvalidWalk("walk contains a self-loop".into()));
                }
                let inner = w[j..k].to_vec();
                let mut outer = w[..j].to_vec();
                outer.extend_from_slice(&w[k..]);
                pending.push(inner);
                pending.push(outer);
            }
        }
    }
    // each piece is produced as an open vertex sequence; close it again
    Ok(out
        .into_iter()
        .rev()
        .map(|mut c| {
            c.push(c[0].clone());
            c
        })
        .collect())
}

/// Arc multiset of a closed vertex walk, for comparing walks and cycle sets.
pub fn walk_arcs<T: Clone + Eq + Hash + Ord>(walks: &[Vec<T>]) -> Vec<(T, T)> {
    let mut arcs: Vec<(T, T)> = walks.iter().flat_map(|w| w.windows(2).map(|p| (p[0].clone(), p[1].clone()))).collect();
    arcs.sort();
    arcs
}

/// Distinct vertex count of a walk; handy for diagnostics.
pub fn distinct_vertices<T: Clone + Eq + Hash>(walk: &[T]) -> usize {
    walk.iter().cloned().collect::<HashSet<T>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::instance::Mode;

    fn int(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn two_cycle_primal_and_dual() {
        let inst = two_cycle(1);
        let p = solve_max_weight(&inst).unwrap();
        assert_eq!(p.objective, int(2));
        assert_eq!(p.exchange.cycles().len(), 1);
        let d = solve_dual_reduced(&inst).unwrap();
        assert_eq!(d.objective, int(2));
        assert!(verify_duality(&p, &d).is_ok());
    }

    #[test]
    fn triangle_primal_and_dual() {
        let inst = triangle();
        let p = solve_max_weight(&inst).unwrap();
        assert_eq!(p.objective, int(3));
        let d = solve_dual_reduced(&inst).unwrap();
        assert_eq!(d.objective, int(3));
        assert!(verify_duality(&p, &d).is_ok());
        // the three real arcs are priced at 1 each
        for e in &d.x {
            let real = inst.find_arc_by_id(&e.buyer, &e.seller).is_ok();
            assert_eq!(e.value, if real { int(1) } else { int(0) }, "({}, {})", e.buyer, e.seller);
        }
    }

    #[test]
    fn zero_weights_give_zero() {
        // every arc of the completed graph is a zero-weight closure arc
        let inst = Instance::builder(Mode::Fractional).agent("u", &[]).agent("v", &[]).agent("w", &[]).build().unwrap();
        let d = solve_dual_reduced(&inst).unwrap();
        assert_eq!(d.x.len(), 6);
        assert_eq!(d.objective, int(0));
        assert!(d.x.iter().all(|e| e.value.is_zero()));
        assert_eq!(solve_max_weight(&inst).unwrap().objective, int(0));
    }

    #[test]
    fn square_and_kite_optima() {
        assert_eq!(solve_max_weight(&square()).unwrap().objective, int(4));
        let p = solve_max_weight(&kite()).unwrap();
        assert_eq!(p.objective, int(4));
        assert_eq!(p.exchange, kite_adc());
    }

    #[test]
    fn circulation_certificate_closes_gap() {
        for inst in [seven_agents(), square(), kite(), two_cycle(3), triangle()] {
            let p = solve_max_weight(&inst).unwrap();
            let d = circulation_dual(&inst, &p).unwrap();
            assert!(verify_duality(&p, &d).is_ok(), "{:?}", verify_duality(&p, &d));
        }
    }

    #[test]
    fn perturbed_dual_reports_gap() {
        let inst = two_cycle(1);
        let p = solve_max_weight(&inst).unwrap();
        let mut d = solve_dual_reduced(&inst).unwrap();
        d.x[0].value += int(1);
        d.objective += &int(1) * &inst.arc(0).capacity;
        assert!(!verify_duality(&p, &d).is_ok());
    }

    #[test]
    fn walk_decomposition() {
        let simple = decompose_walk(&["a", "b", "c", "a"]).unwrap();
        assert_eq!(simple, vec![vec!["a", "b", "c", "a"]]);

        // v x1 x2 u y1 v with x2 = y1
        let w = ["v", "x1", "z", "u", "z", "v"];
        let parts = decompose_walk(&w).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(walk_arcs(&parts), walk_arcs(&[w.to_vec()]));
        assert!(parts.contains(&vec!["z", "u", "z"]));

        let eight = ["u", "a", "b", "u", "c", "d", "u"];
        let parts = decompose_walk(&eight).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(walk_arcs(&parts), walk_arcs(&[eight.to_vec()]));

        assert!(decompose_walk(&["a", "b", "c"]).is_err());
        assert!(decompose_walk(&["a", "a"]).is_err());
    }
}
