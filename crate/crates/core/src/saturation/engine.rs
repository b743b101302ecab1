//! Per-state saturation.
//!
//! A given-clause loop over ordered resolution: the passive queue is
//! ordered by clause length then age, units are propagated eagerly, and
//! clauses are deleted by forward and backward subsumption. The general
//! (`*`) clauses of a state are saturated first; each tagged condition is
//! then saturated separately on top of that closure, since clauses with
//! different indexes never interact.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use crate::logic::clause::Clause;
use crate::logic::formula::{cnf_of, Formula};
use crate::logic::spec::Specification;
use crate::logic::state::State;
use crate::logic::var::{Lit, Var, VarTable};
use crate::saturation::labeled::{LabeledClause, Path, Tag};

/// The closure of a start clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSaturation {
    pub state: State,
    pub path: Path,
    /// Retained clauses, only filled when requested.
    pub clauses: Vec<LabeledClause>,
    pub bottom_star: bool,
    /// Indexes `i` with `(S, τ, i || ⊥)` derived. When the state itself is
    /// inconsistent this holds every transition index.
    pub bottom_tags: BTreeSet<u32>,
}

impl StateSaturation {
    pub fn is_consistent(&self) -> bool {
        !self.bottom_star
    }

    /// `S ∪ C ⊨ χ_i`
    pub fn fires(&self, index: u32) -> bool {
        self.bottom_tags.contains(&index)
    }

    /// The `S | tau | p | C` dump, one clause per line.
    pub fn dump(&self, table: &VarTable) -> String {
        let mut out = String::new();
        for c in &self.clauses {
            out.push_str(&c.dump(table));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Node {
    clause: Clause,
    tag: Tag,
    parents: Vec<u32>,
}

// Unit assignments per variable: the value and the unit clause's node.
type Units = Vec<Option<(bool, u32)>>;

enum Simplified {
    Satisfied,
    Kept,
    Reduced(Clause, Vec<u32>),
}

fn simplify(c: &Clause, layers: &[&Units]) -> Simplified {
    let mut used = Vec::new();
    let mut keep = Vec::new();
    for &l in c.lits() {
        match layers.iter().find_map(|u| u[l.var().index()]) {
            Some((b, _)) if b == l.is_positive() => return Simplified::Satisfied,
            Some((_, id)) => used.push(id),
            None => keep.push(l),
        }
    }
    if used.is_empty() {
        Simplified::Kept
    } else {
        Simplified::Reduced(Clause::new(keep).expect("subclause of a non-tautology"), used)
    }
}

fn push_queue(queue: &mut BinaryHeap<Reverse<(usize, u32)>>, nodes: &[Node], id: u32) {
    queue.push(Reverse((nodes[id as usize].clause.len(), id)));
}

/// Resolvent on `lit ∈ a`, `¬lit ∈ b`.
fn resolve(a: &Clause, b: &Clause, lit: Lit) -> Option<Clause> {
    a.without(lit).union(&b.without(lit.complement()))
}

/// The saturated `*` clauses of one state.
struct Closure {
    nodes: Vec<Node>,
    units: Units,
    unit_nodes: Vec<u32>,
    active: Vec<u32>,
    bottom: Option<u32>,
}

impl Closure {
    fn push(&mut self, clause: Clause, tag: Tag, parents: Vec<u32>) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node { clause, tag, parents });
        id
    }

    fn clause(&self, id: u32) -> &Clause {
        &self.nodes[id as usize].clause
    }

    /// Units creation, constraints creation and the `*` saturation loop.
    fn build(nvars: usize, state: &State, constraints: &[Clause]) -> Closure {
        let mut cl = Closure {
            nodes: Vec::new(),
            units: vec![None; nvars],
            unit_nodes: Vec::new(),
            active: Vec::new(),
            bottom: None,
        };
        let start = cl.push(Clause::unit(Var::START.positive()), Tag::Star, Vec::new());
        cl.units[Var::START.index()] = Some((true, start));
        cl.unit_nodes.push(start);
        let mut queue = BinaryHeap::new();
        for &l in state.lits() {
            let id = cl.push(Clause::unit(l), Tag::Star, vec![start]);
            push_queue(&mut queue, &cl.nodes, id);
        }
        for c in constraints {
            let id = cl.push(c.clone(), Tag::Star, vec![start]);
            push_queue(&mut queue, &cl.nodes, id);
        }
        while let Some(Reverse((_, mut id))) = queue.pop() {
            match simplify(cl.clause(id), &[&cl.units]) {
                Simplified::Satisfied => continue,
                Simplified::Kept => {}
                Simplified::Reduced(c, mut used) => {
                    used.insert(0, id);
                    id = cl.push(c, Tag::Star, used);
                }
            }
            let c = cl.clause(id).clone();
            if c.is_empty() {
                cl.bottom = Some(id);
                break;
            }
            if cl.active.iter().any(|&a| cl.clause(a).subsumes(&c)) {
                continue;
            }
            if c.is_unit() {
                let l = c.lits()[0];
                cl.units[l.var().index()] = Some((l.is_positive(), id));
                cl.unit_nodes.push(id);
                let old = std::mem::take(&mut cl.active);
                for a in old {
                    let ac = cl.clause(a);
                    if ac.contains(l) {
                        continue;
                    }
                    if ac.contains(l.complement()) {
                        let reduced = ac.without(l.complement());
                        let n = cl.push(reduced, Tag::Star, vec![a, id]);
                        push_queue(&mut queue, &cl.nodes, n);
                    } else {
                        cl.active.push(a);
                    }
                }
                continue;
            }
            let nodes = &cl.nodes;
            cl.active.retain(|&a| !c.subsumes(&nodes[a as usize].clause));
            let m = c.max_lit().unwrap();
            let partners: Vec<u32> = cl
                .active
                .iter()
                .copied()
                .filter(|&a| cl.clause(a).max_lit() == Some(m.complement()))
                .collect();
            for a in partners {
                if let Some(r) = resolve(&c, cl.clause(a), m) {
                    let n = cl.push(r, Tag::Star, vec![id, a]);
                    push_queue(&mut queue, &cl.nodes, n);
                }
            }
            cl.active.push(id);
        }
        cl
    }

    /// Saturates `clauses` (the negated condition under `tag`) against the
    /// closure. Nodes created here are appended past `base` and dropped by
    /// the caller. Returns the bottom node and the surviving tagged clauses.
    fn refute(&mut self, tag: Tag, clauses: &[Clause]) -> (Option<u32>, Vec<u32>) {
        let base = self.nodes.len();
        let mut units: Units = vec![None; self.units.len()];
        let mut masked = vec![false; base];
        let mut active: Vec<u32> = Vec::new();
        let mut queue = BinaryHeap::new();
        for c in clauses {
            let id = self.push(c.clone(), tag, vec![0]);
            push_queue(&mut queue, &self.nodes, id);
        }
        while let Some(Reverse((_, mut id))) = queue.pop() {
            match simplify(self.clause(id), &[&self.units, &units]) {
                Simplified::Satisfied => continue,
                Simplified::Kept => {}
                Simplified::Reduced(c, mut used) => {
                    used.insert(0, id);
                    id = self.push(c, tag, used);
                }
            }
            let c = self.clause(id).clone();
            if c.is_empty() {
                return (Some(id), active);
            }
            if self.active.iter().chain(&active).any(|&a| self.clause(a).subsumes(&c)) {
                continue;
            }
            if c.is_unit() {
                let l = c.lits()[0];
                units[l.var().index()] = Some((l.is_positive(), id));
                let old = std::mem::take(&mut active);
                for a in old {
                    let ac = self.clause(a);
                    if ac.contains(l) {
                        continue;
                    }
                    if ac.contains(l.complement()) {
                        let reduced = ac.without(l.complement());
                        let n = self.push(reduced, tag, vec![a, id]);
                        push_queue(&mut queue, &self.nodes, n);
                    } else {
                        active.push(a);
                    }
                }
                // General clauses are never deleted by a tagged unit; inside
                // this tag they are superseded by their reduced copies.
                for k in 0..self.active.len() {
                    let a = self.active[k];
                    if masked[a as usize] {
                        continue;
                    }
                    let ac = self.clause(a);
                    if ac.contains(l) {
                        masked[a as usize] = true;
                    } else if ac.contains(l.complement()) {
                        masked[a as usize] = true;
                        let reduced = ac.without(l.complement());
                        let n = self.push(reduced, tag, vec![a, id]);
                        push_queue(&mut queue, &self.nodes, n);
                    }
                }
                continue;
            }
            let nodes = &self.nodes;
            active.retain(|&a| !c.subsumes(&nodes[a as usize].clause));
            let m = c.max_lit().unwrap();
            let partners: Vec<u32> = self
                .active
                .iter()
                .filter(|&&a| !masked[a as usize])
                .chain(&active)
                .copied()
                .filter(|&a| self.clause(a).max_lit() == Some(m.complement()))
                .collect();
            for a in partners {
                if let Some(r) = resolve(&c, self.clause(a), m) {
                    let n = self.push(r, tag, vec![id, a]);
                    push_queue(&mut queue, &self.nodes, n);
                }
            }
            active.push(id);
        }
        (None, active)
    }

    /// Every node other than the start clause descends from it, and no
    /// general clause has a tagged ancestor.
    fn rooted(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| {
            i == 0
                || (!n.parents.is_empty()
                    && n.parents.iter().all(|&p| {
                        (p as usize) < i && (n.tag != Tag::Star || self.nodes[p as usize].tag == Tag::Star)
                    }))
        })
    }

    /// Candidate model of the saturated general clauses: walk the clauses
    /// in ascending order and make the maximal literal of every clause that
    /// is still false true.
    fn model(&self) -> Option<Vec<bool>> {
        if self.bottom.is_some() {
            return None;
        }
        let mut value = vec![false; self.units.len()];
        for (v, u) in self.units.iter().enumerate() {
            if let Some((b, _)) = u {
                value[v] = *b;
            }
        }
        let mut order: Vec<&Clause> = self.active.iter().map(|&a| self.clause(a)).collect();
        order.sort_by(|a, b| {
            if a.multiset_less(b) {
                Ordering::Less
            } else if b.multiset_less(a) {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        for c in &order {
            if !c.eval(&|v: Var| value[v.index()]) {
                let m = c.max_lit().unwrap();
                if !m.is_positive() {
                    return None;
                }
                value[m.var().index()] = true;
            }
        }
        order.iter().all(|c| c.eval(&|v: Var| value[v.index()])).then_some(value)
    }
}

/// Precomputed clause forms of one specification.
pub struct Saturator<'a> {
    spec: &'a Specification,
    constraints: Vec<Clause>,
    conditions: Vec<(u32, Vec<Clause>)>,
}

impl<'a> Saturator<'a> {
    pub fn new(spec: &'a Specification) -> Saturator<'a> {
        let constraints = crate::logic::formula::cnf(spec.constraints());
        let conditions = spec
            .transitions()
            .iter()
            .map(|t| (t.index, cnf_of(&Formula::not(t.condition.clone()))))
            .collect();
        Saturator {
            spec,
            constraints,
            conditions,
        }
    }

    pub fn spec(&self) -> &'a Specification {
        self.spec
    }

    pub fn constraint_clauses(&self) -> &[Clause] {
        &self.constraints
    }

    pub fn saturate(&self, state: &State, path: &Path) -> StateSaturation {
        self.run(state, path, false)
    }

    /// Like [`Saturator::saturate`], retaining the final clause set.
    pub fn saturate_keeping(&self, state: &State, path: &Path) -> StateSaturation {
        self.run(state, path, true)
    }

    fn run(&self, state: &State, path: &Path, keep: bool) -> StateSaturation {
        let nvars = self.spec.vars().len();
        let mut cl = Closure::build(nvars, state, &self.constraints);
        let mut kept: Vec<(Tag, Clause)> = Vec::new();
        let mut bottom_tags = BTreeSet::new();
        let bottom_star = cl.bottom.is_some();
        if keep {
            kept.extend(cl.unit_nodes.iter().map(|&u| (Tag::Star, cl.clause(u).clone())));
            kept.extend(cl.active.iter().map(|&a| (Tag::Star, cl.clause(a).clone())));
            if bottom_star {
                kept.push((Tag::Star, Clause::empty()));
            }
        }
        if bottom_star {
            // ⊥ with tag * combines with nothing, yet every condition is
            // entailed by an unsatisfiable state.
            bottom_tags.extend(self.conditions.iter().map(|(i, _)| *i));
        } else {
            for (index, clauses) in &self.conditions {
                let base = cl.nodes.len();
                let tag = Tag::Index(*index);
                let (bottom, active) = cl.refute(tag, clauses);
                debug_assert!(cl.rooted());
                if keep {
                    match bottom {
                        Some(_) => kept.push((tag, Clause::empty())),
                        None => kept.extend(active.iter().map(|&a| (tag, cl.clause(a).clone()))),
                    }
                }
                if bottom.is_some() {
                    bottom_tags.insert(*index);
                }
                cl.nodes.truncate(base);
            }
        }
        debug_assert!(cl.rooted());
        let mut clauses: Vec<LabeledClause> = kept
            .into_iter()
            .map(|(tag, clause)| LabeledClause {
                state: state.clone(),
                path: path.clone(),
                tag,
                clause,
            })
            .collect();
        clauses.sort_by(|a, b| (a.tag, a.clause.len(), &a.clause).cmp(&(b.tag, b.clause.len(), &b.clause)));
        clauses.dedup();
        StateSaturation {
            state: state.clone(),
            path: path.clone(),
            clauses,
            bottom_star,
            bottom_tags,
        }
    }

    /// `S ∪ C ⊭ ⊥`
    pub fn consistent(&self, state: &State) -> bool {
        Closure::build(self.spec.vars().len(), state, &self.constraints).bottom.is_none()
    }

    /// `S ∪ C ⊨ φ`, saturating `¬φ` as a registered query.
    pub fn entails(&self, state: &State, phi: &Formula) -> bool {
        self.entails_all(state, std::slice::from_ref(phi))[0]
    }

    /// Several queries against one saturated state.
    pub fn entails_all(&self, state: &State, queries: &[Formula]) -> Vec<bool> {
        let mut cl = Closure::build(self.spec.vars().len(), state, &self.constraints);
        if cl.bottom.is_some() {
            return vec![true; queries.len()];
        }
        queries
            .iter()
            .enumerate()
            .map(|(k, q)| {
                let base = cl.nodes.len();
                let (bottom, _) = cl.refute(Tag::Query(k as u32), &cnf_of(&Formula::not(q.clone())));
                cl.nodes.truncate(base);
                bottom.is_some()
            })
            .collect()
    }

    /// A total valuation (indexed by variable) satisfying `S ∪ C`, or
    /// `None` if the state is inconsistent.
    pub fn model(&self, state: &State) -> Option<Vec<bool>> {
        Closure::build(self.spec.vars().len(), state, &self.constraints).model()
    }
}

/// SInf closure of a start clause, with the clause set retained.
pub fn saturate_state(start: &LabeledClause, spec: &Specification) -> StateSaturation {
    assert!(start.is_start(), "saturation must begin at a start clause");
    Saturator::new(spec).saturate_keeping(&start.state, &start.path)
}

/// Satisfiability of `state ∪ clauses` over `nvars` variables (including
/// `start`), by the same saturation loop.
pub fn satisfiable(nvars: usize, state: &State, clauses: &[Clause]) -> bool {
    Closure::build(nvars, state, clauses).bottom.is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_spec_text;

    const EXAMPLE4: &str = "\
[vars]
A B C D
[init]
!A !B
[constraints]
B -> C
[user]
1: !A ~> A B
[rules]
2: C ~> D
";

    #[test]
    fn example4_initial_state() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        let sat = saturate_state(&LabeledClause::start(spec.initial().clone(), Path::empty()), &spec);
        assert!(!sat.bottom_star);
        assert_eq!(sat.bottom_tags, BTreeSet::from([1]));
    }

    #[test]
    fn example4_after_user_step() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        let s1 = State::parse(spec.vars(), "A B").unwrap();
        let sat = Saturator::new(&spec).saturate(&s1, &Path::from(vec![1]));
        assert!(!sat.bottom_star);
        assert!(sat.fires(2));
        assert!(!sat.fires(1));
    }

    #[test]
    fn direct_contradiction() {
        let spec = parse_spec_text("[vars]\nB\n[constraints]\n!B\n").unwrap();
        let s = State::parse(spec.vars(), "B").unwrap();
        assert!(Saturator::new(&spec).saturate(&s, &Path::empty()).bottom_star);
    }

    #[test]
    fn dump_lists_state_clauses() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        let sat = saturate_state(&LabeledClause::start(spec.initial().clone(), Path::empty()), &spec);
        let dump = sat.dump(spec.vars());
        assert!(dump.lines().all(|l| l.starts_with("{!A, !B} | [] | ")));
        assert!(dump.contains("{!A, !B} | [] | * | start\n"));
        assert!(dump.contains("{!A, !B} | [] | 1 | ⊥\n"));
    }

    #[test]
    fn model_satisfies_constraints() {
        let spec = parse_spec_text("[vars]\nA B C\n[constraints]\nA || B\n!A || C\n!C || !B\n").unwrap();
        let sat = Saturator::new(&spec);
        let m = sat.model(&State::empty()).unwrap();
        for f in spec.constraints() {
            assert!(f.eval(&|v: Var| m[v.index()]));
        }
        assert!(m[0]);
    }

    #[test]
    fn entailment_queries() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        let sat = Saturator::new(&spec);
        let t = spec.vars();
        let s = State::parse(t, "B").unwrap();
        let f = |x: &str| crate::logic::parse::parse_formula(t, x).unwrap();
        assert_eq!(sat.entails_all(&s, &[f("C"), f("D"), f("B && C")]), [true, false, true]);
    }
}
