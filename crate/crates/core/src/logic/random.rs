//! Random specifications for differential testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::formula::Formula;
use crate::logic::spec::{Specification, Transition};
use crate::logic::state::State;
use crate::logic::var::{Lit, Var, VarTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpecParams {
    pub max_vars: usize,
    pub max_transitions: usize,
    pub max_constraints: usize,
    /// Maximum formula nesting depth.
    pub depth: usize,
}

impl Default for RandomSpecParams {
    fn default() -> Self {
        RandomSpecParams {
            max_vars: 12,
            max_transitions: 8,
            max_constraints: 6,
            depth: 3,
        }
    }
}

fn random_formula(rng: &mut impl Rng, vars: &[Var], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..20) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::Atom(*vars.choose(rng).unwrap()),
        };
    }
    let sub = |rng: &mut _| random_formula(rng, vars, depth - 1);
    match rng.gen_range(0..4) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and([sub(rng), sub(rng)]),
        2 => Formula::or([sub(rng), sub(rng)]),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

fn random_literal(rng: &mut impl Rng, vars: &[Var]) -> Formula {
    Formula::lit(Lit::new(*vars.choose(rng).unwrap(), rng.gen_bool(0.5)))
}

fn random_state(rng: &mut impl Rng, vars: &[Var], min: usize, max: usize) -> State {
    let mut pick: Vec<Var> = vars.to_vec();
    pick.shuffle(rng);
    let n = rng.gen_range(min.min(pick.len())..=max.min(pick.len()));
    State::new(pick[..n].iter().map(|&v| Lit::new(v, rng.gen_bool(0.5)))).expect("distinct variables")
}

/// A specification drawn from `seed`. Transition kinds are mixed and
/// indexes are `1..=k`.
pub fn random_spec(seed: u64, p: &RandomSpecParams) -> Specification {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=p.max_vars);
    let table = VarTable::new((0..n).map(|k| format!("v{k:02}"))).unwrap();
    let vars: Vec<Var> = table.user_vars().collect();
    // A hidden valuation biases the initial state and most constraints
    // towards consistency, so exploration usually gets somewhere.
    let hidden: Vec<bool> = (0..table.len()).map(|_| rng.gen_bool(0.5)).collect();
    let value = |v: Var| v == Var::START || hidden[v.index()];
    let initial = random_state(&mut rng, &vars, n / 2, n);
    let initial = State::new(initial.lits().iter().map(|l| Lit::new(l.var(), value(l.var())))).unwrap();
    let constraints = (0..rng.gen_range(0..=p.max_constraints))
        .map(|_| {
            let mut f = Formula::True;
            for _ in 0..4 {
                f = if rng.gen_bool(0.5) {
                    Formula::or((0..rng.gen_range(2..=3)).map(|_| random_literal(&mut rng, &vars)))
                } else {
                    random_formula(&mut rng, &vars, p.depth)
                };
                if f.eval(&value) {
                    break;
                }
            }
            f
        })
        .collect();
    let transitions = (1..=rng.gen_range(0..=p.max_transitions) as u32)
        .map(|i| {
            // Literal conjunctions are entailed often enough to make the
            // state space interesting.
            let cond = if rng.gen_bool(0.6) {
                Formula::and((0..rng.gen_range(1..=2)).map(|_| random_literal(&mut rng, &vars)))
            } else {
                random_formula(&mut rng, &vars, p.depth)
            };
            let effect = random_state(&mut rng, &vars, 1, 3);
            if rng.gen_bool(0.5) {
                Transition::rule(i, cond, effect)
            } else {
                Transition::user(i, cond, effect)
            }
        })
        .collect();
    Specification::new(table, initial, constraints, transitions).unwrap()
}

/// A rule system with a guaranteed cycle: rules toggling one variable back
/// and forth, plus random noise from [`random_spec`].
pub fn random_cyclic_spec(seed: u64, p: &RandomSpecParams) -> Specification {
    let base = random_spec(seed, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let table = base.vars().clone();
    let vars: Vec<Var> = table.user_vars().collect();
    let v = *vars.choose(&mut rng).unwrap();
    let mut transitions: Vec<Transition> = base.transitions().to_vec();
    let next = transitions.len() as u32 + 1;
    transitions.push(Transition::rule(next, Formula::lit(v.positive()), State::new([v.negative()]).unwrap()));
    transitions.push(Transition::rule(next + 1, Formula::lit(v.negative()), State::new([v.positive()]).unwrap()));
    let initial = base.initial().update(&State::new([v.positive()]).unwrap());
    Specification::new(table, initial, Vec::new(), transitions).unwrap()
}
