//! Preference-concordant weights and max-weight Pareto-optimal exchanges.
//!
//! Weights are concordant when they never increase along an agent's
//! preference list, and strictly concordant when they strictly decrease.

use log::info;
use serde::Serialize;

use crate::characterize::{is_pareto_optimal, trade_in_witness};
use crate::error::{Error, Result};
use crate::exchange::Exchange;
use crate::instance::{AgentId, ArcKind, Instance};
use crate::maxweight::solve_max_weight;
use crate::rational::Rational;
use crate::recognize::{improve_to_pareto, ImproveTrace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Concordance {
    StrictlyConcordant,
    Concordant,
    /// `agent` prefers `preferred` to `other` but l(agent, preferred) < l(agent, other).
    Violation { agent: AgentId, preferred: AgentId, other: AgentId },
}

impl Concordance {
    pub fn is_concordant(&self) -> bool {
        !matches!(self, Concordance::Violation { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConcordanceReport {
    pub verdict: Concordance,
    /// Whether "y preferred to y' whenever l(x,y) >= l(x,y')" holds for every pair.
    /// With strict preferences this forbids ties, so it coincides with strict concordance.
    pub literal_reading_holds: bool,
    /// Set when the two readings disagree on concordance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Checks every ordered pair on each preference list; closure arcs are ignored.
pub fn check_concordance(inst: &Instance) -> ConcordanceReport {
    let mut strict = true;
    let mut literal = true;
    let mut violation = None;
    for v in 0..inst.agent_count() {
        let arcs: Vec<usize> = inst.out_arcs(v).iter().copied().filter(|&e| inst.arc(e).kind != ArcKind::Closure).collect();
        for (i, &hi) in arcs.iter().enumerate() {
            for &lo in &arcs[i + 1..] {
                let (wh, wl) = (&inst.arc(hi).weight, &inst.arc(lo).weight);
                if wh <= wl {
                    strict = false;
                    // l(v,lo) >= l(v,hi) would force lo to be preferred
                    literal = false;
                }
                if wh < wl && violation.is_none() {
                    violation = Some(Concordance::Violation {
                        agent: inst.agent(v).clone(),
                        preferred: inst.agent(inst.arc(hi).seller).clone(),
                        other: inst.agent(inst.arc(lo).seller).clone(),
                    });
                }
            }
        }
    }
    let verdict = match violation {
        Some(v) => v,
        None if strict => Concordance::StrictlyConcordant,
        None => Concordance::Concordant,
    };
    let diagnostic = (verdict.is_concordant() != literal).then(|| {
        "concordant with non-increasing weights, but ties violate the literal strict reading".to_string()
    });
    ConcordanceReport { verdict, literal_reading_holds: literal, diagnostic }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxWeightPareto {
    pub exchange: Exchange,
    pub weight: Rational,
    /// Optimum of the max-weight circulation the pipeline started from.
    pub optimum: Rational,
    pub concordance: Concordance,
    pub trace: ImproveTrace,
}

/// Max-weight exchange, then repaired to Pareto optimality without losing weight.
///
/// Errors with [`Error::Precondition`] when weights are not concordant, and with
/// [`Error::Invariant`] if the max-weight exchange has a trade-in, if any
/// improvement step changes the weight, or if the result is not Pareto optimal.
pub fn max_weight_pareto(inst: &Instance) -> Result<MaxWeightPareto> {
    let report = check_concordance(inst);
    if let Concordance::Violation { agent, preferred, other } = &report.verdict {
        return Err(Error::Precondition(format!(
            "weights are not concordant: {agent} prefers {preferred} to {other} but weighs it less"
        )));
    }
    let primal = solve_max_weight(inst)?;
    if let Some(w) = trade_in_witness(inst, &primal.exchange)? {
        return Err(Error::Invariant(format!("max-weight exchange admits a trade-in: {w}")));
    }
    let (exchange, trace) = improve_to_pareto(inst, &primal.exchange)?;
    for (i, step) in trace.steps.iter().enumerate() {
        info!("max-weight repair step {}: weight {} -> {}", i + 1, step.weight_before, step.weight_after);
        if step.weight_after != step.weight_before {
            return Err(Error::Invariant(format!(
                "improvement step {} changed weight from {} to {}",
                i + 1,
                step.weight_before,
                step.weight_after
            )));
        }
    }
    let weight = crate::exchange::weight(inst, &exchange)?;
    if weight != primal.objective {
        return Err(Error::Invariant(format!("final weight {weight} differs from the optimum {}", primal.objective)));
    }
    if !is_pareto_optimal(inst, &exchange)? {
        return Err(Error::Invariant("final exchange is not Pareto optimal".into()));
    }
    Ok(MaxWeightPareto { exchange, weight, optimum: primal.objective, concordance: report.verdict, trace })
}
