//! Brute-force ground truth for small integral instances.
//!
//! Everything here is deliberately naive and independent of the algorithmic
//! modules: exchanges are enumerated as integer arc-flow vectors and compared
//! through plain integer vectors.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{decompose_circulation, ArcFlow, Exchange};
use crate::instance::Instance;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationBudget {
    pub max_agents: usize,
    pub max_total_capacity: u64,
    pub max_cycles: usize,
    /// Cap on distinct arc-flow vectors kept during enumeration.
    pub max_exchanges: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_agents: 8, max_total_capacity: 40, max_cycles: 200, max_exchanges: 20_000 }
    }
}

type IntFlow = Vec<u64>;

fn capacities(inst: &Instance, b: &EnumerationBudget) -> Result<Vec<u64>> {
    if !inst.is_integral() {
        return Err(Error::Precondition("the oracle only handles integral instances".into()));
    }
    if inst.agent_count() > b.max_agents {
        return Err(Error::BudgetExceeded(format!("{} agents > {}", inst.agent_count(), b.max_agents)));
    }
    let caps: Vec<u64> = inst
        .arcs()
        .iter()
        .map(|a| a.capacity.to_u64().ok_or_else(|| Error::Precondition("capacity out of range".into())))
        .collect::<Result<_>>()?;
    let total: u64 = caps.iter().sum();
    if total > b.max_total_capacity {
        return Err(Error::BudgetExceeded(format!("total capacity {total} > {}", b.max_total_capacity)));
    }
    Ok(caps)
}

/// Every simple directed cycle, as arc-index lists starting at its smallest vertex.
pub fn simple_cycles(inst: &Instance, limit: usize) -> Result<Vec<Vec<usize>>> {
    let n = inst.agent_count();
    let mut out = Vec::new();
    for s in 0..n {
        // paths from s through vertices > s, closing back at s
        let mut on_path = vec![false; n];
        on_path[s] = true;
        let mut arcs: Vec<usize> = Vec::new();
        extend(inst, s, s, &mut on_path, &mut arcs, &mut out, limit)?;
    }
    Ok(out)
}

fn extend(
    inst: &Instance,
    start: usize,
    v: usize,
    on_path: &mut [bool],
    arcs: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) -> Result<()> {
    for &e in inst.out_arcs(v) {
        let u = inst.arc(e).seller;
        if inst.arc(e).capacity.is_zero() {
            continue;
        }
        if u == start {
            arcs.push(e);
            out.push(arcs.clone());
            arcs.pop();
            if out.len() > limit {
                return Err(Error::BudgetExceeded(format!("more than {limit} simple cycles")));
            }
        } else if u > start && !on_path[u] {
            on_path[u] = true;
            arcs.push(e);
            extend(inst, start, u, on_path, arcs, out, limit)?;
            arcs.pop();
            on_path[u] = false;
        }
    }
    Ok(())
}

/// All distinct integral arc-flow vectors that are sums of capacity-feasible cycle flows.
fn enumerate_flows(inst: &Instance, b: &EnumerationBudget) -> Result<Vec<IntFlow>> {
    let caps = capacities(inst, b)?;
    let cycles = simple_cycles(inst, b.max_cycles)?;
    let mut seen: BTreeSet<IntFlow> = BTreeSet::new();
    seen.insert(vec![0; caps.len()]);
    for cycle in &cycles {
        let mut next = seen.clone();
        for base in &seen {
            let mut cur = base.clone();
            loop {
                if cycle.iter().any(|&e| cur[e] + 1 > caps[e]) {
                    break;
                }
                for &e in cycle {
                    cur[e] += 1;
                }
                next.insert(cur.clone());
                if next.len() > b.max_exchanges {
                    return Err(Error::BudgetExceeded(format!("more than {} exchanges", b.max_exchanges)));
                }
            }
        }
        seen = next;
    }
    Ok(seen.into_iter().collect())
}

fn to_arc_flow(f: &IntFlow) -> ArcFlow {
    ArcFlow::from_values(f.iter().map(|&v| Rational::from(v)).collect())
}

/// Every integral exchange, one per distinct arc flow, in lexicographic arc-flow order.
pub fn enumerate_exchanges(inst: &Instance, b: &EnumerationBudget) -> Result<Vec<Exchange>> {
    enumerate_flows(inst, b)?.iter().map(|f| decompose_circulation(inst, &to_arc_flow(f))).collect()
}

/// Received amounts per agent, in preference order.
fn received(inst: &Instance, f: &IntFlow) -> Vec<Vec<u64>> {
    (0..inst.agent_count()).map(|v| inst.out_arcs(v).iter().map(|&e| f[e]).collect()).collect()
}

fn dominates_int(a: &[Vec<u64>], b: &[Vec<u64>]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Greater => strict = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    strict
}

fn int_flow_of(inst: &Instance, x: &Exchange) -> Result<IntFlow> {
    x.flow(inst)?
        .values()
        .iter()
        .map(|v| v.to_u64().ok_or_else(|| Error::Precondition(format!("non-integral flow {v}"))))
        .collect()
}

/// True iff no enumerated exchange dominates `x`.
pub fn oracle_pareto(inst: &Instance, x: &Exchange, b: &EnumerationBudget) -> Result<bool> {
    let target = received(inst, &int_flow_of(inst, x)?);
    Ok(!enumerate_flows(inst, b)?.iter().any(|f| dominates_int(&received(inst, f), &target)))
}

/// Arc flows of all Pareto-optimal integral exchanges, computed in one pass.
pub fn oracle_pareto_set(inst: &Instance, b: &EnumerationBudget) -> Result<Vec<(Exchange, bool)>> {
    let flows = enumerate_flows(inst, b)?;
    let recv: Vec<Vec<Vec<u64>>> = flows.iter().map(|f| received(inst, f)).collect();
    flows
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let optimal = !recv.iter().any(|r| dominates_int(r, &recv[i]));
            Ok((decompose_circulation(inst, &to_arc_flow(f))?, optimal))
        })
        .collect()
}

/// Best total weight over all integral exchanges.
pub fn oracle_max_weight_integral(inst: &Instance, b: &EnumerationBudget) -> Result<Rational> {
    let flows = enumerate_flows(inst, b)?;
    Ok(flows
        .iter()
        .map(|f| f.iter().zip(inst.arcs()).map(|(&v, a)| Rational::from(v) * &a.weight).sum::<Rational>())
        .max()
        .unwrap_or_default())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub cycles: usize,
    pub exchanges: usize,
    pub pareto_optimal: Vec<Exchange>,
    pub max_weight: Rational,
}

pub fn report(inst: &Instance, b: &EnumerationBudget) -> Result<OracleReport> {
    let cycles = simple_cycles(inst, b.max_cycles)?.len();
    let set = oracle_pareto_set(inst, b)?;
    Ok(OracleReport {
        cycles,
        exchanges: set.len(),
        pareto_optimal: set.into_iter().filter(|(_, o)| *o).map(|(x, _)| x).collect(),
        max_weight: oracle_max_weight_integral(inst, b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::instance::Mode;

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_exchanges(&two_cycle(1), &budget()).unwrap().len(), 2);
        assert_eq!(enumerate_exchanges(&triangle(), &budget()).unwrap().len(), 2);
        assert_eq!(enumerate_exchanges(&two_cycle(2), &budget()).unwrap().len(), 3);
    }

    #[test]
    fn square_count_is_order_independent() {
        let inst = square();
        let all = enumerate_exchanges(&inst, &budget()).unwrap();
        // empty, 4-cycle, (A,B,A), (C,D,C), both 2-cycles
        assert_eq!(all.len(), 5);
        // recount by brute force over all 0/1 arc vectors that are circulations
        let m = inst.arc_count();
        let mut count = 0;
        for mask in 0u32..(1 << m) {
            let f = ArcFlow::from_values((0..m).map(|e| Rational::from((mask >> e & 1) as u64)).collect());
            if f.check_conservation(&inst).is_ok() {
                count += 1;
            }
        }
        assert_eq!(count, all.len());
    }

    #[test]
    fn pareto_examples() {
        let inst = seven_agents();
        assert!(!oracle_pareto(&inst, &seven_initial(), &budget()).unwrap());
        assert!(oracle_pareto(&inst, &seven_improved(), &budget()).unwrap());
        assert!(!oracle_pareto(&two_cycle(1), &Exchange::new(), &budget()).unwrap());
    }

    #[test]
    fn max_weights() {
        assert_eq!(oracle_max_weight_integral(&two_cycle(1), &budget()).unwrap(), Rational::from_integer(2));
        assert_eq!(oracle_max_weight_integral(&square(), &budget()).unwrap(), Rational::from_integer(4));
        assert_eq!(oracle_max_weight_integral(&kite(), &budget()).unwrap(), Rational::from_integer(4));
    }

    #[test]
    fn budget_and_mode_errors() {
        let tight = EnumerationBudget { max_agents: 1, ..budget() };
        assert!(matches!(enumerate_exchanges(&two_cycle(1), &tight), Err(Error::BudgetExceeded(_))));
        let frac = Instance::builder(Mode::Fractional)
            .agent("u", &["v"])
            .agent("v", &["u"])
            .arc("u", "v", 1i64)
            .arc("v", "u", 1i64)
            .build()
            .unwrap();
        assert!(matches!(enumerate_exchanges(&frac, &budget()), Err(Error::Precondition(_))));
    }
}
