//! Small hand-made instances shared by unit tests, integration tests and docs.

use crate::exchange::{Cycle, Exchange};
use crate::instance::{Instance, Mode};

fn cycle(ids: &[&str]) -> Cycle {
    Cycle::from_ids(ids).expect("fixture cycle")
}

/// Seven agents A..G; c(F,A) = 2, every other capacity 1, unit weights.
pub fn seven_agents() -> Instance {
    Instance::builder(Mode::Integral)
        .agent("A", &["G", "E", "B"])
        .agent("B", &["D", "C"])
        .agent("C", &["B", "D"])
        .agent("D", &["E"])
        .agent("E", &["C", "F"])
        .agent("F", &["A"])
        .agent("G", &["F"])
        .arc("A", "B", 1i64)
        .arc("A", "E", 1i64)
        .arc("A", "G", 1i64)
        .arc("B", "C", 1i64)
        .arc("B", "D", 1i64)
        .arc("C", "B", 1i64)
        .arc("C", "D", 1i64)
        .arc("D", "E", 1i64)
        .arc("E", "C", 1i64)
        .arc("E", "F", 1i64)
        .arc("F", "A", 2i64)
        .arc("G", "F", 1i64)
        .build()
        .expect("seven_agents")
}

/// {(A,B,C,D,E,F,A):1, (A,G,F,A):1} on [`seven_agents`].
pub fn seven_initial() -> Exchange {
    Exchange::new()
        .with(cycle(&["A", "B", "C", "D", "E", "F"]), 1i64)
        .with(cycle(&["A", "G", "F"]), 1i64)
}

/// {(A,G,F,A):1, (A,E,F,A):1, (B,D,E,C,B):1} on [`seven_agents`].
pub fn seven_improved() -> Exchange {
    Exchange::new()
        .with(cycle(&["A", "G", "F"]), 1i64)
        .with(cycle(&["A", "E", "F"]), 1i64)
        .with(cycle(&["B", "D", "E", "C"]), 1i64)
}

/// u <-> v with capacity `cap` and unit weight on both arcs.
pub fn two_cycle(cap: i64) -> Instance {
    Instance::builder(Mode::Integral)
        .agent("u", &["v"])
        .agent("v", &["u"])
        .arc("u", "v", cap)
        .arc("v", "u", cap)
        .build()
        .expect("two_cycle")
}

/// Directed triangle u -> v -> w -> u with unit capacities and weights.
pub fn triangle() -> Instance {
    Instance::builder(Mode::Integral)
        .agent("u", &["v"])
        .agent("v", &["w"])
        .agent("w", &["u"])
        .arc("u", "v", 1i64)
        .arc("v", "w", 1i64)
        .arc("w", "u", 1i64)
        .build()
        .expect("triangle")
}

/// Four agents on a 4-cycle plus the back arcs (B,A) and (D,C); unit capacities and weights.
pub fn square() -> Instance {
    Instance::builder(Mode::Integral)
        .agent("A", &["B"])
        .agent("B", &["A", "C"])
        .agent("C", &["D"])
        .agent("D", &["C", "A"])
        .arc("A", "B", 1i64)
        .arc("B", "C", 1i64)
        .arc("C", "D", 1i64)
        .arc("D", "A", 1i64)
        .arc("B", "A", 1i64)
        .arc("D", "C", 1i64)
        .build()
        .expect("square")
}

/// {(A,B,C,D,A):1} on [`square`].
pub fn square_four_cycle() -> Exchange {
    Exchange::new().with(cycle(&["A", "B", "C", "D"]), 1i64)
}

/// {(A,B,A):1, (C,D,C):1} on [`square`].
pub fn square_two_cycles() -> Exchange {
    Exchange::new().with(cycle(&["A", "B"]), 1i64).with(cycle(&["C", "D"]), 1i64)
}

/// Two triangles (A,B,C) and (A,D,C) sharing (C,A); A prefers B to D; l(A,D) = 2.
pub fn kite() -> Instance {
    Instance::builder(Mode::Integral)
        .agent("A", &["B", "D"])
        .agent("B", &["C"])
        .agent("C", &["A"])
        .agent("D", &["C"])
        .weighted_arc("A", "B", 1i64, 1i64)
        .weighted_arc("A", "D", 1i64, 2i64)
        .weighted_arc("B", "C", 1i64, 1i64)
        .weighted_arc("D", "C", 1i64, 1i64)
        .weighted_arc("C", "A", 1i64, 1i64)
        .build()
        .expect("kite")
}

pub fn kite_abc() -> Exchange {
    Exchange::new().with(cycle(&["A", "B", "C"]), 1i64)
}

pub fn kite_adc() -> Exchange {
    Exchange::new().with(cycle(&["A", "D", "C"]), 1i64)
}
