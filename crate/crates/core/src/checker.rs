//! Satisfaction over finite models.
//!
//! Every world's trajectory under `S` is eventually periodic, so temporal
//! quantifiers range over the first `|prefix| + |cycle|` iterates of its
//! orbit. Extensions are computed bottom-up, one world set per subformula.

use thiserror::Error;

use crate::formula::Formula;
use crate::model::{Model, WorldId, WorldSet};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
}

/// The trajectory `w, S(w), S²(w), ...` as a prefix followed by a cycle
/// repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub prefix: Vec<WorldId>,
    pub cycle: Vec<WorldId>,
}

impl Orbit {
    /// Number of distinct worlds visited.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `S^k(w)`.
    pub fn at(&self, k: usize) -> WorldId {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.cycle[(k - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The first `len()` iterates, each world exactly once.
    pub fn iter(&self) -> impl Iterator<Item = WorldId> + '_ {
        self.prefix.iter().chain(self.cycle.iter()).copied()
    }

    /// The first `n` iterates.
    pub fn unroll(&self, n: usize) -> Vec<WorldId> {
        (0..n).map(|k| self.at(k)).collect()
    }
}

pub fn orbit(m: &Model, w: WorldId) -> Orbit {
    let mut first_seen = vec![usize::MAX; m.len()];
    let mut seq = Vec::new();
    let mut cur = w;
    while first_seen[cur.index()] == usize::MAX {
        first_seen[cur.index()] = seq.len();
        seq.push(cur);
        cur = m.succ(cur);
    }
    let entry = first_seen[cur.index()];
    let cycle = seq.split_off(entry);
    Orbit { prefix: seq, cycle }
}

/// Per-model evaluation context: orbits are computed once and shared by all
/// subformulas.
pub struct Checker<'m> {
    model: &'m Model,
    orbits: Vec<Orbit>,
    reach: Vec<WorldSet>,
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m Model) -> Checker<'m> {
        let orbits: Vec<Orbit> = model.worlds().map(|w| orbit(model, w)).collect();
        let reach = orbits
            .iter()
            .map(|o| {
                let mut s = model.empty_set();
                s.extend(o.iter().map(WorldId::index));
                s
            })
            .collect();
        Checker {
            model,
            orbits,
            reach,
        }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn orbit(&self, w: WorldId) -> &Orbit {
        &self.orbits[w.index()]
    }

    pub fn extension(&self, f: &Formula) -> WorldSet {
        match f {
            Formula::Atom(p) => self.model.atom_extension(p),
            Formula::Bottom => self.model.empty_set(),
            Formula::And(a, b) => {
                let mut s = self.extension(a);
                s.intersect_with(&self.extension(b));
                s
            }
            Formula::Or(a, b) => {
                let mut s = self.extension(a);
                s.union_with(&self.extension(b));
                s
            }
            Formula::Implies(a, b) => self.implies(&self.extension(a), &self.extension(b)),
            Formula::Next(a) => self.next(&self.extension(a)),
            Formula::Eventually(a) => self.eventually(&self.extension(a)),
            Formula::Henceforth(a) => self.henceforth(&self.extension(a)),
            Formula::Until(a, b) => self.until(&self.extension(a), &self.extension(b)),
            Formula::Release(a, b) => self.release(&self.extension(a), &self.extension(b)),
        }
    }

    /// Worlds all of whose `<=`-successors in `a` are in `b`.
    pub fn implies(&self, a: &WorldSet, b: &WorldSet) -> WorldSet {
        let mut bad = a.clone();
        bad.difference_with(b);
        self.collect(|w| self.model.up(w).is_disjoint(&bad))
    }

    pub fn next(&self, a: &WorldSet) -> WorldSet {
        self.collect(|w| a.contains(self.model.succ(w).index()))
    }

    pub fn eventually(&self, a: &WorldSet) -> WorldSet {
        self.collect(|w| !self.reach[w.index()].is_disjoint(a))
    }

    pub fn henceforth(&self, a: &WorldSet) -> WorldSet {
        self.collect(|w| self.reach[w.index()].is_subset(a))
    }

    pub fn until(&self, a: &WorldSet, b: &WorldSet) -> WorldSet {
        self.collect(|w| {
            for x in self.orbits[w.index()].iter() {
                if b.contains(x.index()) {
                    return true;
                }
                if !a.contains(x.index()) {
                    return false;
                }
            }
            false
        })
    }

    pub fn release(&self, a: &WorldSet, b: &WorldSet) -> WorldSet {
        self.collect(|w| {
            for x in self.orbits[w.index()].iter() {
                if !b.contains(x.index()) {
                    return false;
                }
                if a.contains(x.index()) {
                    return true;
                }
            }
            true
        })
    }

    fn collect(&self, pred: impl Fn(WorldId) -> bool) -> WorldSet {
        let mut out = self.model.empty_set();
        for w in self.model.worlds() {
            if pred(w) {
                out.insert(w.index());
            }
        }
        out
    }
}

pub fn extension(m: &Model, f: &Formula) -> WorldSet {
    Checker::new(m).extension(f)
}

pub fn satisfies(m: &Model, w: WorldId, f: &Formula) -> Result<bool, CheckError> {
    if w.index() >= m.len() {
        return Err(CheckError::UnknownWorld(format!("#{}", w.index())));
    }
    Ok(extension(m, f).contains(w.index()))
}

pub fn satisfies_at(m: &Model, world: &str, f: &Formula) -> Result<bool, CheckError> {
    let w = m
        .world(world)
        .ok_or_else(|| CheckError::UnknownWorld(world.to_string()))?;
    satisfies(m, w, f)
}

/// `None` when `f` holds everywhere; otherwise the first falsifying world.
pub fn counter_world(m: &Model, f: &Formula) -> Option<WorldId> {
    let ext = extension(m, f);
    m.worlds().find(|w| !ext.contains(w.index()))
}

pub fn valid_in_model(m: &Model, f: &Formula) -> bool {
    counter_world(m, f).is_none()
}

/// `Err((w, v))` with `w <= v`, `w` satisfying `f` and `v` not.
pub fn check_monotone_extension(m: &Model, f: &Formula) -> Result<(), (WorldId, WorldId)> {
    let ext = extension(m, f);
    for w in ext.ones() {
        if let Some(v) = m.up(WorldId(w)).ones().find(|&v| !ext.contains(v)) {
            return Err((WorldId(w), WorldId(v)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::model::ModelBuilder;

    fn fisher_servi() -> Model {
        ModelBuilder::new()
            .worlds(["w", "v", "u"])
            .order("v", "u")
            .succ("w", "v")
            .succ("v", "v")
            .succ("u", "u")
            .val("p", ["u"])
            .build()
            .unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn orbit_decomposition() {
        let m = fisher_servi();
        let o = orbit(&m, m.world("w").unwrap());
        assert_eq!(o.prefix, vec![m.world("w").unwrap()]);
        assert_eq!(o.cycle, vec![m.world("v").unwrap()]);
        assert_eq!(o.at(5), m.world("v").unwrap());
        let one = ModelBuilder::new().worlds(["w"]).succ("w", "w").build().unwrap();
        let o = orbit(&one, WorldId(0));
        assert!(o.prefix.is_empty());
        assert_eq!(o.cycle, vec![WorldId(0)]);
    }

    #[test]
    fn fisher_servi_clauses() {
        let m = fisher_servi();
        assert!(!satisfies_at(&m, "u", &f("p -> q")).unwrap());
        assert!(!satisfies_at(&m, "v", &f("p -> q")).unwrap());
        assert!(satisfies_at(&m, "w", &f("X p -> X q")).unwrap());
        assert!(satisfies_at(&m, "w", &f("F p -> G q")).unwrap());
        assert!(!satisfies_at(&m, "w", &f("X(p -> q)")).unwrap());
        assert_eq!(m.set_names(&extension(&m, &f("p"))), vec!["u"]);
        assert_eq!(counter_world(&m, &f("(X p -> X q) -> X(p -> q)")), m.world("w"));
        assert_eq!(counter_world(&m, &f("(F p -> G q) -> G(p -> q)")), m.world("w"));
        assert!(valid_in_model(&m, &f("p -> p")));
        assert!(valid_in_model(&m, &f("false -> false")));
        assert_eq!(extension(&m, &f("false")).count_ones(..), 0);
        assert_eq!(satisfies_at(&m, "zz", &f("p")), Err(CheckError::UnknownWorld("zz".into())));
    }

    #[test]
    fn until_and_release_scan_orbits() {
        // a -> b -> c -> b, p at a and b, q at c.
        let m = ModelBuilder::new()
            .worlds(["a", "b", "c"])
            .succ("a", "b")
            .succ("b", "c")
            .succ("c", "b")
            .val("p", ["a", "b"])
            .val("q", ["c"])
            .build()
            .unwrap();
        assert_eq!(m.set_names(&extension(&m, &f("p U q"))), vec!["a", "b", "c"]);
        assert_eq!(m.set_names(&extension(&m, &f("q U p"))), vec!["a", "b", "c"]);
        assert_eq!(m.set_names(&extension(&m, &f("q U (p & q)"))), Vec::<&str>::new());
        assert_eq!(m.set_names(&extension(&m, &f("q R p"))), Vec::<&str>::new());
        assert_eq!(m.set_names(&extension(&m, &f("p R (p | q)"))), vec!["a", "b", "c"]);
        assert_eq!(m.set_names(&extension(&m, &f("(p & q) R q"))), Vec::<&str>::new());
        assert_eq!(m.set_names(&extension(&m, &f("G(p | q)"))), vec!["a", "b", "c"]);
        assert_eq!(m.set_names(&extension(&m, &f("F G p"))), Vec::<&str>::new());
    }

    #[test]
    fn monotone_extensions() {
        let m = fisher_servi();
        assert!(check_monotone_extension(&m, &f("p -> q")).is_ok());
        assert!(check_monotone_extension(&m, &f("p")).is_ok());
        assert!(check_monotone_extension(&m, &f("F p | G ~p")).is_ok());
    }
}
