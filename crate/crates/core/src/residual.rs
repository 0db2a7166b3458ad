//! Residual-graph searches shared by the characterization and recognition code.

use std::collections::VecDeque;

use crate::exchange::ArcFlow;
use crate::instance::Instance;

pub(crate) fn has_residual(inst: &Instance, flow: &ArcFlow, e: usize) -> bool {
    flow.get(e) < &inst.arc(e).capacity
}

/// Breadth-first search in D'_vu: the residual graph where the start agent may
/// only leave through arcs ranked strictly above `rank_limit` (i.e. rank < limit).
pub(crate) struct RestrictedBfs {
    pub parent: Vec<Option<usize>>,
    pub reached: Vec<bool>,
}

impl RestrictedBfs {
    pub fn run(inst: &Instance, flow: &ArcFlow, start: usize, rank_limit: usize) -> Self {
        let n = inst.agent_count();
        let mut parent = vec![None; n];
        let mut reached = vec![false; n];
        let mut queue = VecDeque::new();
        reached[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &e in inst.out_arcs(v) {
                let a = inst.arc(e);
                if v == start && a.rank >= rank_limit {
                    break;
                }
                if reached[a.seller] || !has_residual(inst, flow, e) {
                    continue;
                }
                reached[a.seller] = true;
                parent[a.seller] = Some(e);
                queue.push_back(a.seller);
            }
        }
        reached[start] = false;
        RestrictedBfs { parent, reached }
    }

    /// Arc sequence from the start to `target`, if reached.
    pub fn path_to(&self, inst: &Instance, target: usize) -> Option<Vec<usize>> {
        if !self.reached[target] {
            return None;
        }
        let mut arcs = Vec::new();
        let mut v = target;
        while let Some(e) = self.parent[v] {
            arcs.push(e);
            v = inst.arc(e).buyer;
        }
        arcs.reverse();
        Some(arcs)
    }
}

/// Finds a directed cycle among arcs accepted by `usable`, by depth-first search
/// from the smallest agent, following out-arcs in preference order.
pub(crate) fn find_cycle(inst: &Instance, usable: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = inst.agent_count();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // stack of (vertex, next out-arc position); `via` holds the arc used to enter each stacked vertex
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut via: Vec<usize> = Vec::new();
        mark[root] = Mark::Active;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            let outs = inst.out_arcs(v);
            if *pos == outs.len() {
                mark[v] = Mark::Done;
                stack.pop();
                via.pop();
                continue;
            }
            let e = outs[*pos];
            *pos += 1;
            if !usable(e) {
                continue;
            }
            let u = inst.arc(e).seller;
            match mark[u] {
                Mark::Active => {
                    let at = stack.iter().position(|&(w, _)| w == u).unwrap();
                    let mut cycle: Vec<usize> = via[at..].to_vec();
                    cycle.push(e);
                    return Some(cycle);
                }
                Mark::New => {
                    mark[u] = Mark::Active;
                    stack.push((u, 0));
                    via.push(e);
                }
                Mark::Done => {}
            }
        }
    }
    None
}

/// Vertex sequence (buyer of each arc) of an arc cycle or path.
pub(crate) fn vertices_of(inst: &Instance, arcs: &[usize]) -> Vec<usize> {
    arcs.iter().map(|&e| inst.arc(e).buyer).collect()
}
