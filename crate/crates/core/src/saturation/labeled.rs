use std::cmp::Ordering;
use std::fmt;

use crate::logic::clause::Clause;
use crate::logic::state::State;
use crate::logic::var::{Var, VarTable};

/// A path: the transition indexes leading from the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<u32>);

impl Path {
    pub fn empty() -> Path {
        Path(Vec::new())
    }

    /// `τ :: i`
    pub fn extend(&self, index: u32) -> Path {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(index);
        Path(v)
    }

    pub fn indexes(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u32>> for Path {
    fn from(v: Vec<u32>) -> Path {
        Path(v)
    }
}

/// Shorter paths first, equal lengths lexicographically.
impl Ord for Path {
    fn cmp(&self, other: &Path) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Path) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("]")
    }
}

pub fn path_less(a: &Path, b: &Path) -> bool {
    a < b
}

/// Clause tag: `*` for general clauses of a state, an index for clauses
/// stemming from the negated condition of a transition, or a query slot
/// for ad-hoc entailment checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Star,
    Index(u32),
    Query(u32),
}

impl Tag {
    /// `p ⊕ p′`; `None` when the tags may not be combined.
    pub fn combine(self, other: Tag) -> Option<Tag> {
        match (self, other) {
            (Tag::Star, p) => Some(p),
            (p, Tag::Star) => Some(p),
            (p, q) if p == q => Some(p),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Star => f.write_str("*"),
            Tag::Index(i) => write!(f, "{i}"),
            Tag::Query(q) => write!(f, "q{q}"),
        }
    }
}

/// `(S, τ, p || C)`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledClause {
    pub state: State,
    pub path: Path,
    pub tag: Tag,
    pub clause: Clause,
}

impl LabeledClause {
    /// The start clause `(S, τ, * || start)`.
    pub fn start(state: State, path: Path) -> LabeledClause {
        LabeledClause {
            state,
            path,
            tag: Tag::Star,
            clause: Clause::unit(Var::START.positive()),
        }
    }

    pub fn is_start(&self) -> bool {
        self.tag == Tag::Star && self.clause == Clause::unit(Var::START.positive())
    }

    /// One line of the debug dump: `S | tau | p | C`.
    pub fn dump(&self, table: &VarTable) -> String {
        format!(
            "{} | {} | {} | {}",
            self.state.display(table),
            self.path,
            self.tag,
            self.clause.display(table)
        )
    }
}

/// The partial ordering on labeled clauses: by path, then (for compatible
/// tags) by the multiset extension of the literal ordering.
pub fn clause_less(a: &LabeledClause, b: &LabeledClause) -> bool {
    if a.path < b.path {
        return true;
    }
    a.path == b.path && (a.tag == Tag::Star || a.tag == b.tag) && a.clause.multiset_less(&b.clause)
}

/// Whether `c` is redundant with respect to `n`: some clauses of `n` with
/// the state of `c`, sharing one path and each smaller than `c`, jointly
/// entail `c`'s clause. Entailment is decided by truth tables over the
/// variables involved.
pub fn is_redundant(c: &LabeledClause, n: &[LabeledClause]) -> bool {
    let mut paths: Vec<&Path> = n.iter().filter(|d| d.state == c.state).map(|d| &d.path).collect();
    paths.sort();
    paths.dedup();
    paths.into_iter().any(|p| {
        let premises: Vec<&Clause> = n
            .iter()
            .filter(|d| d.state == c.state && &d.path == p && clause_less(d, c))
            .map(|d| &d.clause)
            .collect();
        !premises.is_empty() && clauses_entail(&premises, &c.clause)
    })
}

fn clauses_entail(premises: &[&Clause], goal: &Clause) -> bool {
    let mut vars: Vec<Var> = premises
        .iter()
        .flat_map(|c| c.lits().iter().map(|l| l.var()))
        .chain(goal.lits().iter().map(|l| l.var()))
        .collect();
    vars.sort();
    vars.dedup();
    assert!(vars.len() <= 24, "redundancy check over too many variables");
    (0u64..1 << vars.len()).all(|bits| {
        let value = |v: Var| {
            let k = vars.binary_search(&v).unwrap();
            bits >> k & 1 == 1
        };
        !premises.iter().all(|c| c.eval(&value)) || goal.eval(&value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Path {
        Path::from(v.to_vec())
    }

    #[test]
    fn path_ordering_examples() {
        assert!(path_less(&p(&[3, 5, 2]), &p(&[4, 9, 2, 1, 3])));
        assert!(path_less(&p(&[2, 9, 4, 2]), &p(&[2, 9, 4, 5])));
        assert!(path_less(&p(&[]), &p(&[1])));
        assert!(!path_less(&p(&[1]), &p(&[1])));
    }

    #[test]
    fn tag_combination() {
        assert_eq!(Tag::Star.combine(Tag::Index(3)), Some(Tag::Index(3)));
        assert_eq!(Tag::Index(3).combine(Tag::Star), Some(Tag::Index(3)));
        assert_eq!(Tag::Index(3).combine(Tag::Index(3)), Some(Tag::Index(3)));
        assert_eq!(Tag::Index(3).combine(Tag::Index(4)), None);
    }

    #[test]
    fn dump_format() {
        let t = VarTable::new(["A", "B"]).unwrap();
        let s = State::parse(&t, "!A B").unwrap();
        let c = LabeledClause {
            state: s.clone(),
            path: p(&[1, 2]),
            tag: Tag::Index(2),
            clause: Clause::new([t.lit("A", true).unwrap(), t.lit("B", false).unwrap()]).unwrap(),
        };
        assert_eq!(c.dump(&t), "{!A, B} | [1, 2] | 2 | A ∨ !B");
        assert_eq!(LabeledClause::start(s, Path::empty()).dump(&t), "{!A, B} | [] | * | start");
    }
}
