//! Seeded random instances.
//!
//! Every ordered pair of agents gets an arc with probability `density`. If the
//! trimmed result is empty the seed is advanced and the draw repeated, so a
//! given configuration always yields the same non-empty trimmed instance.

use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{AgentId, AgentSpec, ExchangeArc, Instance, Mode};
use crate::preprocess::trim;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Unit,
    /// Non-increasing along each preference list.
    Concordant,
    /// Strictly decreasing along each preference list.
    StrictConcordant,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    pub agents: usize,
    pub density: f64,
    pub max_cap: u64,
    pub weights: WeightMode,
    pub seed: u64,
    /// Draw capacities (and random weights) as fractions with denominators up to 4.
    pub fractional: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { agents: 6, density: 0.4, max_cap: 2, weights: WeightMode::Unit, seed: 0, fractional: false }
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    /// Seed that produced the instance after any rejections.
    pub seed: u64,
}

const MAX_ATTEMPTS: u64 = 10_000;

pub fn generate(cfg: &GenConfig) -> Result<Generated> {
    if cfg.agents < 2 {
        return Err(Error::Precondition("need at least two agents".into()));
    }
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(Error::Precondition(format!("density {} outside (0, 1]", cfg.density)));
    }
    if cfg.max_cap == 0 {
        return Err(Error::Precondition("max capacity must be positive".into()));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let seed = cfg.seed.wrapping_add(attempt);
        let inst = trim(&draw(cfg, seed));
        if !inst.is_empty() {
            if attempt > 0 {
                info!("seed {} gave an empty instance; advanced to seed {seed}", cfg.seed);
            }
            return Ok(Generated { instance: inst, seed });
        }
    }
    Err(Error::Precondition(format!("no non-empty instance within {MAX_ATTEMPTS} seeds")))
}

fn agent_name(i: usize, n: usize) -> AgentId {
    let width = (n.saturating_sub(1)).to_string().len().max(2);
    AgentId::new(format!("a{i:0width$}"))
}

fn draw(cfg: &GenConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.agents;
    let ids: Vec<AgentId> = (0..n).map(|i| agent_name(i, n)).collect();
    let mut specs = Vec::with_capacity(n);
    let mut arcs = Vec::new();
    for v in 0..n {
        let mut sellers: Vec<usize> = (0..n).filter(|&u| u != v && rng.gen_bool(cfg.density)).collect();
        sellers.shuffle(&mut rng);
        let weights = weights_for(cfg, sellers.len(), &mut rng);
        for (&u, w) in sellers.iter().zip(weights) {
            arcs.push(ExchangeArc::new(ids[v].clone(), ids[u].clone(), capacity(cfg, &mut rng)).with_weight(w));
        }
        specs.push(AgentSpec { id: ids[v].clone(), preferences: sellers.iter().map(|&u| ids[u].clone()).collect() });
    }
    let mode = if cfg.fractional { Mode::Fractional } else { Mode::Integral };
    Instance::new(mode, specs, arcs).expect("generated instances are valid")
}

fn fraction(rng: &mut ChaCha8Rng, max: u64) -> Rational {
    let den = rng.gen_range(1..=4i64);
    let num = rng.gen_range(1..=(max as i64) * den);
    Rational::new(num, den)
}

fn capacity(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Rational {
    if cfg.fractional {
        fraction(rng, cfg.max_cap)
    } else {
        Rational::from(rng.gen_range(1..=cfg.max_cap))
    }
}

/// Weights for one preference list, most preferred first.
fn weights_for(cfg: &GenConfig, len: usize, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    match cfg.weights {
        WeightMode::Unit => vec![Rational::one(); len],
        WeightMode::Random => (0..len)
            .map(|_| if cfg.fractional { fraction(rng, 5) } else { Rational::from(rng.gen_range(1..=5u64)) })
            .collect(),
        WeightMode::Concordant => {
            let mut w: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=3u64)).collect();
            w.sort_unstable_by(|a, b| b.cmp(a));
            w.into_iter().map(Rational::from).collect()
        }
        WeightMode::StrictConcordant => {
            let mut w: Vec<u64> = (1..=(len as u64 + 3)).collect();
            w.shuffle(rng);
            w.truncate(len);
            w.sort_unstable_by(|a, b| b.cmp(a));
            w.into_iter().map(Rational::from).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concordant::{check_concordance, Concordance};

    #[test]
    fn same_seed_same_instance() {
        let cfg = GenConfig { agents: 8, seed: 42, ..GenConfig::default() };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.instance.arcs(), b.instance.arcs());
        assert_eq!(a.instance.agents(), b.instance.agents());
    }

    #[test]
    fn trimmed_and_nonempty() {
        for seed in 0..50 {
            let g = generate(&GenConfig { agents: 3, density: 0.2, seed, ..GenConfig::default() }).unwrap();
            assert!(!g.instance.is_empty());
            assert_eq!(trim(&g.instance).arcs(), g.instance.arcs());
        }
    }

    #[test]
    fn weight_modes() {
        for seed in 0..20 {
            let c = generate(&GenConfig { weights: WeightMode::Concordant, seed, ..GenConfig::default() }).unwrap();
            assert!(check_concordance(&c.instance).verdict.is_concordant());
            let s = generate(&GenConfig { weights: WeightMode::StrictConcordant, seed, ..GenConfig::default() })
                .unwrap();
            assert_eq!(check_concordance(&s.instance).verdict, Concordance::StrictlyConcordant);
        }
    }

    #[test]
    fn fractional_capacities() {
        let g = generate(&GenConfig { fractional: true, max_cap: 3, seed: 7, ..GenConfig::default() }).unwrap();
        assert_eq!(g.instance.mode(), Mode::Fractional);
        for a in g.instance.arcs() {
            assert!(a.capacity.is_positive() && a.capacity <= Rational::from_integer(3));
        }
    }

    #[test]
    fn names_are_padded() {
        assert_eq!(agent_name(3, 12).as_str(), "a03");
        assert_eq!(agent_name(7, 120).as_str(), "a007");
    }
}
