//! Top trading cycles for balanced exchanges with arc capacities.
//!
//! Each round every remaining agent points at its most preferred remaining
//! seller. The pointer graph has out-degree one everywhere, so its cycles are
//! vertex-disjoint; each gets the minimum capacity on it as flow. Saturated
//! arcs are deleted and agents left without out-arcs are removed repeatedly.

use log::debug;
use serde::Serialize;

use crate::exchange::{Cycle, Exchange};
use crate::instance::{AgentId, Instance};
use crate::preprocess::trim;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TtcRound {
    /// (agent, its top remaining choice)
    pub top_choices: Vec<(AgentId, AgentId)>,
    pub cycles: Vec<(Cycle, Rational)>,
    pub arcs_removed: Vec<(AgentId, AgentId)>,
    pub agents_removed: Vec<AgentId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TtcTrace {
    /// Agents removed by the initial trim, before any round.
    pub trimmed: Vec<AgentId>,
    pub rounds: Vec<TtcRound>,
}

impl TtcTrace {
    /// Rebuilds the exchange from the recorded cycles.
    pub fn replay(&self) -> Exchange {
        let mut x = Exchange::new();
        for round in &self.rounds {
            for (c, f) in &round.cycles {
                add_cycle(&mut x, c.clone(), f.clone());
            }
        }
        x
    }
}

fn add_cycle(x: &mut Exchange, cycle: Cycle, flow: Rational) {
    let mut cycles = x.cycles().to_vec();
    match cycles.iter_mut().find(|(c, _)| *c == cycle) {
        Some((_, f)) => *f += flow,
        None => cycles.push((cycle, flow)),
    }
    *x = Exchange::from_cycles(cycles);
}

/// Runs the algorithm on `trim(inst)`; the result is valid on `inst` itself.
pub fn run_ttc(inst: &Instance) -> (Exchange, TtcTrace) {
    let trimmed = trim(inst);
    let mut trace = TtcTrace {
        trimmed: inst.agents().iter().filter(|a| trimmed.index_of(a).is_none()).cloned().collect(),
        rounds: Vec::new(),
    };
    let inst = &trimmed;
    let n = inst.agent_count();
    let mut cap: Vec<Rational> = inst.arcs().iter().map(|a| a.capacity.clone()).collect();
    let mut alive = vec![true; n];
    let mut x = Exchange::new();

    let top = |v: usize, cap: &[Rational], alive: &[bool]| {
        inst.out_arcs(v).iter().copied().find(|&e| cap[e].is_positive() && alive[inst.arc(e).seller])
    };

    // Agents with an empty list never trade; the fixpoint also runs after every round.
    let mut initial = Vec::new();
    remove_stranded(inst, &cap, &mut alive, &mut initial);

    while alive.iter().any(|&a| a) {
        let choice: Vec<Option<usize>> = (0..n).map(|v| if alive[v] { top(v, &cap, &alive) } else { None }).collect();
        let mut round = TtcRound {
            top_choices: (0..n)
                .filter_map(|v| choice[v].map(|e| (inst.agent(v).clone(), inst.agent(inst.arc(e).seller).clone())))
                .collect(),
            cycles: Vec::new(),
            arcs_removed: Vec::new(),
            agents_removed: Vec::new(),
        };

        // Successor walk with colours: 0 unvisited, 1 on the current walk, 2 finished.
        let mut colour = vec![0u8; n];
        let mut found: Vec<Vec<usize>> = Vec::new();
        for s in 0..n {
            if !alive[s] || colour[s] != 0 {
                continue;
            }
            let mut walk = Vec::new();
            let mut v = s;
            while alive[v] && colour[v] == 0 {
                colour[v] = 1;
                walk.push(v);
                v = inst.arc(choice[v].expect("alive agents have a top choice")).seller;
            }
            if colour[v] == 1 {
                let at = walk.iter().position(|&w| w == v).unwrap();
                found.push(walk[at..].to_vec());
            }
            for w in walk {
                colour[w] = 2;
            }
        }
        found.sort_by_key(|c| *c.iter().min().unwrap());

        for cyc in found {
            let arcs: Vec<usize> = cyc.iter().map(|&v| choice[v].unwrap()).collect();
            let f = arcs.iter().map(|&e| &cap[e]).min().unwrap().clone();
            for &e in &arcs {
                cap[e] -= &f;
                if cap[e].is_zero() {
                    let (b, s) = inst.arc_ids(e);
                    round.arcs_removed.push((b.clone(), s.clone()));
                }
            }
            let cycle = Cycle::from_indices(inst, &cyc);
            debug!("ttc round {}: cycle {cycle} flow {f}", trace.rounds.len() + 1);
            round.cycles.push((cycle.clone(), f.clone()));
            add_cycle(&mut x, cycle, f);
        }

        let mut removed = Vec::new();
        remove_stranded(inst, &cap, &mut alive, &mut removed);
        round.agents_removed = removed.into_iter().map(|v| inst.agent(v).clone()).collect();
        trace.rounds.push(round);
    }
    trace.trimmed.extend(initial.into_iter().map(|v| inst.agent(v).clone()));
    (x, trace)
}

/// Removes agents with no positive-capacity arc to a remaining agent, to a fixpoint.
fn remove_stranded(inst: &Instance, cap: &[Rational], alive: &mut [bool], removed: &mut Vec<usize>) {
    loop {
        let stranded: Vec<usize> = (0..inst.agent_count())
            .filter(|&v| {
                alive[v] && !inst.out_arcs(v).iter().any(|&e| cap[e].is_positive() && alive[inst.arc(e).seller])
            })
            .collect();
        if stranded.is_empty() {
            return;
        }
        for v in stranded {
            alive[v] = false;
            removed.push(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::validate;
    use crate::fixtures::*;
    use crate::instance::Mode;

    #[test]
    fn seven_agents_rounds() {
        let inst = seven_agents();
        let (x, trace) = run_ttc(&inst);
        assert_eq!(x.flow(&inst).unwrap(), seven_improved().flow(&inst).unwrap());
        assert_eq!(trace.rounds.len(), 2);
        let first: Vec<String> = trace.rounds[0].cycles.iter().map(|(c, _)| c.to_string()).collect();
        assert_eq!(first, vec!["(A,G,F,A)", "(B,D,E,C,B)"]);
        let second: Vec<String> = trace.rounds[1].cycles.iter().map(|(c, _)| c.to_string()).collect();
        assert_eq!(second, vec!["(A,E,F,A)"]);
        assert_eq!(trace.replay(), x);
        assert_eq!(validate(&inst, &x), Ok(()));
    }

    #[test]
    fn two_cycle_single_round() {
        let (x, _) = run_ttc(&two_cycle(1));
        assert_eq!(x, Exchange::new().with(Cycle::from_ids(&["u", "v"]).unwrap(), 1i64));
    }

    #[test]
    fn trimmed_to_empty() {
        let inst = Instance::builder(Mode::Integral)
            .agent("u", &["v"])
            .agent("v", &[])
            .arc("u", "v", 1i64)
            .build()
            .unwrap();
        let (x, trace) = run_ttc(&inst);
        assert!(x.is_empty());
        assert!(trace.rounds.is_empty());
    }

    #[test]
    fn repeated_cycle_accumulates() {
        // u prefers v (cap 2) ; v's top choice u has cap 1 then w; w -> u.
        let inst = Instance::builder(Mode::Integral)
            .agent("u", &["v"])
            .agent("v", &["u", "w"])
            .agent("w", &["v"])
            .arc("u", "v", 2i64)
            .arc("v", "u", 1i64)
            .arc("v", "w", 1i64)
            .arc("w", "v", 1i64)
            .build()
            .unwrap();
        let (x, trace) = run_ttc(&inst);
        assert_eq!(validate(&inst, &x), Ok(()));
        assert_eq!(trace.replay(), x);
        assert_eq!(crate::exchange::weight(&inst, &x).unwrap(), Rational::from_integer(4));
    }
}
