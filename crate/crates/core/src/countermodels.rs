//! Fixed countermodels, the parametric families `H_n` / `E_n` and the
//! definability formulas, addressable by name.

use std::collections::BTreeMap;
use std::fmt;

use crate::formula::Formula;
use crate::model::{Model, ModelBuilder, WorldSet};

/// Three worlds: `w -> v -> v`, `u -> u`, `v <= u`, `p` only at `u`.
///
/// `v >= S(w)` reaches `u` but nothing above `w` steps to `u`, so the frame
/// is not backward confluent.
pub fn fisher_servi_model() -> Model {
    ModelBuilder::new()
        .worlds(["w", "v", "u"])
        .order("v", "u")
        .succ("w", "v")
        .succ("v", "v")
        .succ("u", "u")
        .val("p", ["u"])
        .build()
        .expect("fisher-servi model is valid")
}

/// Two 2-chains `w <= t` and `v <= u` with `S(w) = v`, `S(t) = u`, both
/// `v` and `u` fixed.
pub fn weak_connectedness_model() -> Model {
    ModelBuilder::new()
        .worlds(["w", "t", "u", "v"])
        .order("v", "u")
        .order("w", "t")
        .succ("w", "v")
        .succ("v", "v")
        .succ("t", "u")
        .succ("u", "u")
        .val("p", ["v", "u"])
        .val("q", ["t", "u"])
        .build()
        .expect("weak-connectedness model is valid")
}

pub fn grid_world(i: usize, j: usize) -> String {
    format!("{i}_{j}")
}

// Worlds (i, j) for i in 0..=n+1, j in {0, 1}, stored at index 2i + j.
fn grid(n: usize, succ: impl Fn(usize, usize) -> (usize, usize), p_at: impl Fn(usize, usize) -> bool) -> Model {
    let cols = n + 2;
    let idx = |i: usize, j: usize| 2 * i + j;
    let mut names = Vec::with_capacity(2 * cols);
    let mut order = Vec::with_capacity(cols);
    let mut next = Vec::with_capacity(2 * cols);
    let mut p = WorldSet::with_capacity(2 * cols);
    for i in 0..cols {
        for j in 0..2 {
            names.push(grid_world(i, j));
            let (si, sj) = succ(i, j);
            next.push(idx(si, sj));
            if p_at(i, j) {
                p.insert(idx(i, j));
            }
        }
        order.push((idx(i, 0), idx(i, 1)));
    }
    let valuation = BTreeMap::from([("p".to_string(), p)]);
    Model::from_parts(names, &order, next, valuation).expect("grid model is valid")
}

/// Here-and-there model on `n + 2` points of time arranged in one cycle;
/// `p` fails only at `(n+1, 0)`.
pub fn ht_family_h(n: usize) -> Model {
    assert!(n >= 1, "H_n needs n >= 1");
    grid(n, |i, j| ((i + 1) % (n + 2), j), |i, j| !(i == n + 1 && j == 0))
}

/// Expanding model: both rows advance to column `n + 1` and then wrap to
/// `(0, 0)`; `p` holds only at `(n+1, 1)`.
pub fn expanding_family_e(n: usize) -> Model {
    assert!(n >= 1, "E_n needs n >= 1");
    grid(
        n,
        |i, j| if i <= n { (i + 1, j) } else { (0, 0) },
        |i, j| i == n + 1 && j == 1,
    )
}

/// An `L_G` formula equivalent to `F p` over here-and-there models.
pub fn diamond_from_box(p: &str) -> Formula {
    let atom = || Formula::atom(p);
    let excluded_middle = || atom().or(atom().negate());
    let stable = atom().implies(excluded_middle().henceforth()).henceforth();
    let settles = excluded_middle()
        .henceforth()
        .next()
        .implies(excluded_middle().or(atom().negate().henceforth().next()))
        .henceforth();
    let conclusion = excluded_middle().henceforth().and(atom().negate().henceforth().negate());
    stable.and(settles).implies(conclusion)
}

/// Which atom the eventuality conjunct of [`until_from_release`] speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventualityReading {
    /// `F q`: the until-witness must eventually appear.
    Goal,
    /// `F p`, the alternative reading.
    Guard,
}

impl EventualityReading {
    pub const BOTH: [EventualityReading; 2] = [EventualityReading::Goal, EventualityReading::Guard];
}

impl fmt::Display for EventualityReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventualityReading::Goal => "F q",
            EventualityReading::Guard => "F p",
        })
    }
}

/// `(q R (p | q)) & D` with `D` the box-only definition of `F q` or `F p`,
/// and every `G` rewritten as `false R _` so the result uses `R` only.
pub fn until_from_release(p: &str, q: &str, reading: EventualityReading) -> Formula {
    let (a, b) = (Formula::atom(p), Formula::atom(q));
    let eventually = match reading {
        EventualityReading::Goal => diamond_from_box(q),
        EventualityReading::Guard => diamond_from_box(p),
    };
    b.clone().release(a.or(b)).and(eventually).henceforth_as_release()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Model(Model),
    Formula(Formula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedArtifact {
    pub name: String,
    pub payload: Payload,
    pub provenance: String,
}

impl NamedArtifact {
    pub fn model(&self) -> Option<&Model> {
        match &self.payload {
            Payload::Model(m) => Some(m),
            Payload::Formula(_) => None,
        }
    }

    pub fn formula(&self) -> Option<&Formula> {
        match &self.payload {
            Payload::Formula(f) => Some(f),
            Payload::Model(_) => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.payload {
            Payload::Model(_) => "model",
            Payload::Formula(_) => "formula",
        }
    }
}

/// Names accepted by [`artifact`], with `<n>` standing for a positive integer.
pub const ARTIFACT_NAMES: [&str; 7] = [
    "fisher-servi",
    "weak-connected",
    "H<n>",
    "E<n>",
    "diamond-from-box",
    "until-from-release",
    "until-from-release-printed",
];

/// Largest `n` accepted for `H<n>` / `E<n>` by name.
pub const MAX_FAMILY_INDEX: usize = 64;

pub fn artifact(name: &str) -> Option<NamedArtifact> {
    let make = |payload, provenance: &str| NamedArtifact {
        name: name.to_string(),
        payload,
        provenance: provenance.to_string(),
    };
    let family_index = |prefix: char| -> Option<usize> {
        let n: usize = name.strip_prefix(prefix)?.parse().ok()?;
        (1..=MAX_FAMILY_INDEX).contains(&n).then_some(n)
    };
    match name {
        "fisher-servi" => Some(make(
            Payload::Model(fisher_servi_model()),
            "expanding, not persistent model refuting (X p -> X q) -> X(p -> q) and (F p -> G q) -> G(p -> q) at w",
        )),
        "weak-connected" => Some(make(
            Payload::Model(weak_connectedness_model()),
            "here-and-there model refuting G(G p -> q) | G(G q -> p) at w",
        )),
        "diamond-from-box" => Some(make(
            Payload::Formula(diamond_from_box("p")),
            "box-only formula equivalent to F p over here-and-there models",
        )),
        "until-from-release" => Some(make(
            Payload::Formula(until_from_release("p", "q", EventualityReading::Goal)),
            "release-only formula compared with p U q over here-and-there models (F q conjunct)",
        )),
        "until-from-release-printed" => Some(make(
            Payload::Formula(until_from_release("p", "q", EventualityReading::Guard)),
            "release-only formula compared with p U q over here-and-there models (F p conjunct)",
        )),
        _ => {
            if let Some(n) = family_index('H') {
                Some(make(
                    Payload::Model(ht_family_h(n)),
                    "here-and-there family where (0_0, 0_1) are until-bisimilar to depth n but differ on G p",
                ))
            } else {
                family_index('E').map(|n| {
                    make(
                        Payload::Model(expanding_family_e(n)),
                        "expanding family where (0_0, 0_1) are box-bisimilar to depth n but differ on F p",
                    )
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{extension, orbit, satisfies_at};
    use crate::formula::{parse_formula, Fragment};
    use crate::model::FrameClass;

    fn holds(m: &Model, w: &str, f: &str) -> bool {
        satisfies_at(m, w, &parse_formula(f).unwrap()).unwrap()
    }

    #[test]
    fn fisher_servi_facts() {
        let m = fisher_servi_model();
        assert!(holds(&m, "u", "p"));
        assert_eq!(m.frame_class(), FrameClass::Expanding);
        assert!(!holds(&m, "w", "(F p -> G q) -> G(p -> q)"));
        assert!(!holds(&m, "w", "(X p -> X q) -> X(p -> q)"));
    }

    #[test]
    fn weak_connectedness_facts() {
        let m = weak_connectedness_model();
        assert!(m.is_here_and_there());
        assert!(!holds(&m, "v", "G p -> q"));
        assert!(!holds(&m, "t", "G q -> p"));
        assert!(!holds(&m, "w", "G(G p -> q) | G(G q -> p)"));
    }

    #[test]
    fn h_family() {
        for n in 1..=4 {
            let m = ht_family_h(n);
            assert_eq!(m.len(), 2 * (n + 2));
            assert!(m.is_here_and_there());
            assert!(holds(&m, "0_1", "G p"));
            assert!(!holds(&m, "0_0", "G p"));
            assert!(holds(&m, "0_0", "F p"));
        }
    }

    #[test]
    fn e_family() {
        for n in 1..=4 {
            let m = expanding_family_e(n);
            assert!(!m.is_backward_confluent());
            assert!(holds(&m, "0_1", "F p"));
            assert!(!holds(&m, "0_0", "F p"));
        }
        let m = expanding_family_e(2);
        let o = orbit(&m, m.world("0_1").unwrap());
        let names = |ws: &[crate::model::WorldId]| ws.iter().map(|&w| m.name(w).to_string()).collect::<Vec<_>>();
        assert_eq!(names(&o.prefix), ["0_1", "1_1", "2_1", "3_1"]);
        assert_eq!(names(&o.cycle), ["0_0", "1_0", "2_0", "3_0"]);
    }

    #[test]
    fn definability_formulas() {
        let d = diamond_from_box("p");
        assert_eq!(d.fragment(), Fragment::Box);
        assert_eq!(
            d,
            parse_formula("(G(p -> G(p | ~p)) & G(X G(p | ~p) -> p | ~p | X G ~p)) -> (G(p | ~p) & ~G ~p)").unwrap()
        );
        // One direction only on E_2.
        let m = expanding_family_e(2);
        let (ed, ef) = (extension(&m, &d), extension(&m, &parse_formula("F p").unwrap()));
        assert!(ef.is_subset(&ed));
        assert_ne!(ed, ef);
        for reading in EventualityReading::BOTH {
            let u = until_from_release("p", "q", reading);
            assert_eq!(u.fragment(), Fragment::Release);
        }
    }

    #[test]
    fn lookup_by_name() {
        for name in ["fisher-servi", "weak-connected", "H3", "E1", "diamond-from-box", "until-from-release"] {
            let a = artifact(name).unwrap();
            assert!(!a.provenance.is_empty());
        }
        assert_eq!(artifact("H3").unwrap().model(), Some(&ht_family_h(3)));
        assert!(artifact("H0").is_none());
        assert!(artifact("Hx").is_none());
        assert!(artifact("nope").is_none());
    }
}
