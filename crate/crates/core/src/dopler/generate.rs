//! Random boolean models of a fixed shape, for benchmarking.
//!
//! Rules read `if xd || [!]xe && [!]xf then xg = true|false` with four
//! distinct decisions, constraints read `[!](xd) || [!](xe) || !(xf)`.
//! Only decisions that are never assigned by a rule may be visible.
//! Generation uses ChaCha8 seeded with `seed`, so a (seed, size, ratios)
//! triple always yields the same model.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dopler::model::{DecisionDoc, DecisionType, ModelDocument, RuleDoc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratios {
    /// Rules per decision.
    pub rules: f64,
    /// Constraints per decision.
    pub constraints: f64,
    /// Upper bound on the visible fraction of decisions.
    pub visible: f64,
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios {
            rules: 1.5,
            constraints: 1.0,
            visible: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("need at least 4 decisions, got {0}")]
    TooFewDecisions(usize),
}

/// The seed for model `i` of a batch generated from `seed`.
pub fn batch_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

pub fn generate_random_model(n: usize, seed: u64, ratios: &Ratios) -> Result<ModelDocument, GenerateError> {
    if n < 4 {
        return Err(GenerateError::TooFewDecisions(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |k: usize| format!("x{}", k + 1);
    let neg = |b: bool| if b { "!" } else { "" };

    let n_rules = (ratios.rules * n as f64).ceil() as usize;
    let mut targeted = vec![false; n];
    let mut rules = Vec::with_capacity(n_rules);
    for _ in 0..n_rules {
        let p = sample(&mut rng, n, 4).into_vec();
        let (ne, nf, value) = (rng.gen::<bool>(), rng.gen::<bool>(), rng.gen::<bool>());
        targeted[p[3]] = true;
        rules.push(RuleDoc {
            condition: format!("{} || {}{} && {}{}", name(p[0]), neg(ne), name(p[1]), neg(nf), name(p[2])),
            then: vec![format!("{} = {value}", name(p[3]))],
            comment: None,
        });
    }

    let cap = (ratios.visible * n as f64).floor() as usize;
    let mut visible = vec![false; n];
    for k in (0..n).filter(|&k| !targeted[k]).take(cap) {
        visible[k] = true;
    }
    let decisions = (0..n)
        .map(|k| DecisionDoc {
            name: name(k),
            kind: DecisionType::Boolean,
            options: Vec::new(),
            min: None,
            max: None,
            visibility: (!visible[k]).then(|| "false".to_string()),
            comment: None,
        })
        .collect();

    let n_constraints = (ratios.constraints * n as f64).ceil() as usize;
    let constraints = (0..n_constraints)
        .map(|_| {
            let p = sample(&mut rng, n, 3).into_vec();
            let (nd, ne) = (rng.gen::<bool>(), rng.gen::<bool>());
            format!("{}({}) || {}({}) || !({})", neg(nd), name(p[0]), neg(ne), name(p[1]), name(p[2]))
        })
        .collect();

    Ok(ModelDocument {
        comment: Some(format!("random model: {n} decisions, seed {seed}")),
        decisions,
        rules,
        assets: Vec::new(),
        constraints,
        checks: Vec::new(),
    })
}
