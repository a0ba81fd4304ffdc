//! The reproduction suite: every validity, countermodel, bisimulation and
//! normal-form claim checked at desk scale, one item at a time.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bisim::{max_family, preservation_check, verify_family, BisimKind};
use crate::checker::{check_monotone_extension, counter_world, extension, satisfies, satisfies_at, Checker};
use crate::countermodels::{
    diamond_from_box, expanding_family_e, fisher_servi_model, ht_family_h, until_from_release,
    weak_connectedness_model, EventualityReading,
};
use crate::formula::{enumerate_formulas, next_normal_form, parse_formula, random_formula, Formula, Fragment};
use crate::model::{FrameClass, Model, WorldId, WorldSet};
use crate::oracle::naive_satisfies;
use crate::search::{check_equivalence, enumerate_models, find_countermodels, random_model, SearchBounds};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemOutcome {
    pub passed: bool,
    pub details: Vec<String>,
}

impl ItemOutcome {
    fn new() -> Self {
        ItemOutcome {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.passed &= ok;
        self.details.push(if ok { detail } else { format!("FAILED: {detail}") });
    }
}

#[derive(Clone, Debug)]
pub struct ItemReport {
    pub id: &'static str,
    pub title: &'static str,
    pub outcome: ItemOutcome,
    pub elapsed: Duration,
}

pub struct Item {
    pub id: &'static str,
    pub title: &'static str,
    run: fn(u64) -> ItemOutcome,
}

impl Item {
    pub fn run(&self, seed: u64) -> ItemReport {
        let start = Instant::now();
        let outcome = (self.run)(seed);
        ItemReport {
            id: self.id,
            title: self.title,
            outcome,
            elapsed: start.elapsed(),
        }
    }
}

pub const ITEMS: [Item; 12] = [
    Item {
        id: "prop1",
        title: "interaction and induction axioms hold on expanding models",
        run: interaction_axioms,
    },
    Item {
        id: "prop2",
        title: "Fisher-Servi axioms fail on expanding but hold on persistent models",
        run: fisher_servi_axioms,
    },
    Item {
        id: "prop3",
        title: "weak connectedness fails on a here-and-there model",
        run: weak_connectedness,
    },
    Item {
        id: "prop4",
        title: "until/release axioms hold on expanding models",
        run: until_release_axioms,
    },
    Item {
        id: "monotonicity",
        title: "extensions are upward closed",
        run: monotonicity,
    },
    Item {
        id: "orbit-bound",
        title: "orbit-bounded checker agrees with naive unrolling",
        run: orbit_bound,
    },
    Item {
        id: "preservation",
        title: "bounded bisimulations preserve short fragment formulas",
        run: preservation,
    },
    Item {
        id: "box-not-until-definable",
        title: "G p is not definable with until (H_n)",
        run: box_not_until_definable,
    },
    Item {
        id: "diamond-not-box-definable",
        title: "F p is not definable with G over expanding models (E_n)",
        run: diamond_not_box_definable,
    },
    Item {
        id: "diamond-from-box",
        title: "F p is G-definable over here-and-there models only",
        run: diamond_from_box_item,
    },
    Item {
        id: "until-from-release",
        title: "p U q is release-definable over here-and-there models",
        run: until_from_release_item,
    },
    Item {
        id: "next-normal-form",
        title: "next-normal form preserves extensions on persistent models",
        run: next_normal_form_item,
    },
];

pub fn item(id: &str) -> Option<&'static Item> {
    ITEMS.iter().find(|i| i.id == id)
}

fn f(s: &str) -> Formula {
    parse_formula(s).expect("suite formula parses")
}

fn verdict_line(name: &str, result: &crate::search::SearchResult) -> String {
    format!("{name}: {} after {} models", result.verdict, result.visited)
}

/// Validities with `X`, `F`, `G` instantiated at `p`, `q`.
pub fn interaction_formulas() -> Vec<Formula> {
    [
        "X false <-> false",
        "X(p & q) <-> X p & X q",
        "X(p | q) <-> X p | X q",
        "X(p -> q) -> (X p -> X q)",
        "G(p -> q) -> (G p -> G q)",
        "G(p -> q) -> (F p -> F q)",
        "F(p | q) -> F p | F q",
        "G p <-> p & X G p",
        "p | X F p <-> F p",
        "G(p -> X p) -> (p -> G p)",
        "(F p -> p) -> (X p -> p)",
    ]
    .into_iter()
    .map(f)
    .collect()
}

pub fn fisher_servi_formulas() -> Vec<Formula> {
    ["(X p -> X q) -> X(p -> q)", "(F p -> G q) -> G(p -> q)"].into_iter().map(f).collect()
}

pub fn until_release_formulas() -> Vec<Formula> {
    [
        "p U q <-> q | (p & X(p U q))",
        "p R q <-> q & (p | X(p R q))",
        "p U q -> F q",
        "G q -> p R q",
        "F p <-> true U p",
        "G p <-> false R p",
        "X(p U q) <-> X p U X q",
        "X(p R q) <-> X p R X q",
    ]
    .into_iter()
    .map(f)
    .collect()
}

fn interaction_axioms(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let formulas = interaction_formulas();
    let bounds = SearchBounds::new(FrameClass::Expanding, 4, ["p", "q"]);
    for (phi, r) in formulas.iter().zip(find_countermodels(&formulas, &bounds)) {
        out.check(r.is_exhausted(), verdict_line(&phi.to_string(), &r));
    }
    out
}

fn fisher_servi_axioms(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let m = fisher_servi_model();
    let formulas = fisher_servi_formulas();
    for phi in &formulas {
        let holds = satisfies_at(&m, "w", phi).expect("w exists");
        out.check(!holds, format!("{phi}: false at w of the fisher-servi model"));
    }
    let bounds = SearchBounds::new(FrameClass::Persistent, 4, ["p", "q"]);
    for (phi, r) in formulas.iter().zip(find_countermodels(&formulas, &bounds)) {
        out.check(r.is_exhausted(), verdict_line(&format!("{phi} over persistent"), &r));
    }
    out
}

fn weak_connectedness(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let m = weak_connectedness_model();
    out.check(
        m.frame_class() == FrameClass::HereAndThere,
        format!("model classified {}", m.frame_class()),
    );
    let phi = f("G(G p -> q) | G(G q -> p)");
    let holds = satisfies_at(&m, "w", &phi).expect("w exists");
    out.check(!holds, format!("{phi}: false at w"));
    out
}

fn until_release_axioms(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let formulas = until_release_formulas();
    let fixpoints = [
        (f("p U q"), f("q | (p & X(p U q))")),
        (f("p R q"), f("q & (p | X(p R q))")),
    ];
    let bounds = SearchBounds::new(FrameClass::Expanding, 4, ["p", "q"]);
    let mut failures = vec![0u64; formulas.len()];
    let mut fixpoint_failures = [0u64; 2];
    let mut visited = 0u64;
    for m in enumerate_models(&bounds) {
        visited += 1;
        let c = Checker::new(&m);
        for (i, phi) in formulas.iter().enumerate() {
            if c.extension(phi) != m.full_set() {
                failures[i] += 1;
            }
        }
        for (i, (a, b)) in fixpoints.iter().enumerate() {
            if c.extension(a) != c.extension(b) {
                fixpoint_failures[i] += 1;
            }
        }
    }
    for (phi, bad) in formulas.iter().zip(&failures) {
        out.check(*bad == 0, format!("{phi}: {bad} of {visited} models refute it"));
    }
    for ((a, b), bad) in fixpoints.iter().zip(fixpoint_failures) {
        out.check(bad == 0, format!("ext({a}) = ext({b}) fails on {bad} of {visited} models"));
    }
    out
}

const RANDOM_PAIRS: usize = 1000;

fn monotonicity(seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..RANDOM_PAIRS {
        let m = random_model(&mut rng, 5, &["p", "q"]);
        let phi = random_formula(&mut rng, 6, &["p", "q"], Fragment::Full);
        if let Err((w, v)) = check_monotone_extension(&m, &phi) {
            bad += 1;
            if bad <= 3 {
                out.details.push(format!("{phi} holds at {} but not at {}", m.name(w), m.name(v)));
            }
        }
    }
    out.check(bad == 0, format!("{bad} of {RANDOM_PAIRS} random pairs not upward closed"));
    out
}

fn orbit_bound(seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x006f_7262_6974);
    let mut bad = 0;
    for _ in 0..RANDOM_PAIRS {
        let m = random_model(&mut rng, 5, &["p", "q"]);
        let phi = random_formula(&mut rng, 6, &["p", "q"], Fragment::Full);
        let disagree = m
            .worlds()
            .any(|w| satisfies(&m, w, &phi).expect("world in range") != naive_satisfies(&m, w, &phi));
        if disagree {
            bad += 1;
        }
    }
    out.check(bad == 0, format!("{bad} of {RANDOM_PAIRS} random pairs disagree"));
    out
}

fn preservation(seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7072_6573);
    for kind in BisimKind::ALL {
        let fragment = kind.fragment();
        let short = enumerate_formulas(2, &["p"], fragment);
        for n in 1..=3 {
            let mut formulas = short.clone();
            formulas.extend((0..200).map(|_| random_formula(&mut rng, n, &["p"], fragment)));
            for (label, m) in [("H", ht_family_h(n)), ("E", expanding_family_e(n))] {
                let fam = max_family(kind, &m, &m, n);
                let violations = verify_family(kind, &fam).map(|v| v.len());
                let disagreements = preservation_check(kind, &fam, &formulas).map(|d| d.len());
                out.check(
                    violations == Ok(0) && disagreements == Ok(0),
                    format!("{kind} on {label}{n}: violations {violations:?}, disagreements {disagreements:?}"),
                );
            }
        }
    }
    out
}

fn endpoint_separation(
    kind: BisimKind,
    family: fn(usize) -> Model,
    label: &str,
    separator: &str,
) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let phi = f(separator);
    for n in 1..=4 {
        let m = family(n);
        let fam = max_family(kind, &m, &m, n);
        let pair = fam.pair_by_name("0_0", "0_1").expect("grid worlds exist");
        let related = fam.contains(n, pair);
        let ext = extension(&m, &phi);
        let separated = ext.contains(pair.0.index()) != ext.contains(pair.1.index());
        out.check(
            related && separated,
            format!(
                "{label}{n}: (0_0,0_1) in Z_{n} of the {kind} family: {related}; {separator} separates them: {separated}"
            ),
        );
    }
    out
}

fn box_not_until_definable(_seed: u64) -> ItemOutcome {
    endpoint_separation(BisimKind::Until, ht_family_h, "H", "G p")
}

fn diamond_not_box_definable(_seed: u64) -> ItemOutcome {
    endpoint_separation(BisimKind::Box, expanding_family_e, "E", "F p")
}

fn diamond_from_box_item(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let (fp, d) = (f("F p"), diamond_from_box("p"));
    let ht = check_equivalence(&fp, &d, &SearchBounds::new(FrameClass::HereAndThere, 6, ["p"]));
    out.check(ht.is_exhausted(), verdict_line("here-and-there, 6 worlds", &ht));
    let exp = check_equivalence(&fp, &d, &SearchBounds::new(FrameClass::Expanding, 8, ["p"]));
    let confirmed = exp.witness.as_ref().is_some_and(|w| {
        satisfies(&w.model, w.world, &fp).ok() != satisfies(&w.model, w.world, &d).ok()
    });
    out.check(exp.is_found() && confirmed, verdict_line("expanding, up to 8 worlds", &exp));
    if let Some(w) = &exp.witness {
        out.details.push(format!(
            "witness at {} of a {}-world model",
            w.model.name(w.world),
            w.model.len()
        ));
    }
    out
}

fn until_from_release_item(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let puq = f("p U q");
    let bounds = SearchBounds::new(FrameClass::HereAndThere, 6, ["p", "q"]);
    let mut any = false;
    for reading in EventualityReading::BOTH {
        let r = check_equivalence(&puq, &until_from_release("p", "q", reading), &bounds);
        any |= r.is_exhausted();
        out.details.push(verdict_line(&format!("reading with {reading}"), &r));
    }
    out.check(any, "at least one reading is equivalent to p U q");
    out
}

fn next_normal_form_item(_seed: u64) -> ItemOutcome {
    let mut out = ItemOutcome::new();
    let sweep = normal_form_sweep(4, FrameClass::Persistent, 4);
    out.check(
        sweep.not_normal == 0,
        format!("{} of {} outputs not in normal form", sweep.not_normal, sweep.formulas),
    );
    out.check(
        sweep.mismatches == 0,
        format!(
            "{} of {} rewritten formulas change extension on some of {} models",
            sweep.mismatches, sweep.rewritten, sweep.models
        ),
    );
    out
}

// ---------------------------------------------------------------------------
// Normal-form sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Op {
    Atom(u8),
    Bottom,
    And,
    Or,
    Implies,
    Next,
    Eventually,
    Henceforth,
    Until,
    Release,
}

/// Hash-consed formula graph; children always precede parents.
#[derive(Default)]
struct FormulaGraph {
    nodes: Vec<(Op, u32, u32)>,
    index: HashMap<(Op, u32, u32), u32>,
}

impl FormulaGraph {
    fn intern(&mut self, node: (Op, u32, u32)) -> u32 {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    fn intern_formula(&mut self, f: &Formula, atoms: &[&str]) -> u32 {
        let node = match f {
            Formula::Atom(p) => {
                let i = atoms.iter().position(|a| a == p).expect("known atom");
                (Op::Atom(i as u8), 0, 0)
            }
            Formula::Bottom => (Op::Bottom, 0, 0),
            Formula::And(a, b) => (Op::And, self.intern_formula(a, atoms), self.intern_formula(b, atoms)),
            Formula::Or(a, b) => (Op::Or, self.intern_formula(a, atoms), self.intern_formula(b, atoms)),
            Formula::Implies(a, b) => (Op::Implies, self.intern_formula(a, atoms), self.intern_formula(b, atoms)),
            Formula::Next(a) => (Op::Next, self.intern_formula(a, atoms), 0),
            Formula::Eventually(a) => (Op::Eventually, self.intern_formula(a, atoms), 0),
            Formula::Henceforth(a) => (Op::Henceforth, self.intern_formula(a, atoms), 0),
            Formula::Until(a, b) => (Op::Until, self.intern_formula(a, atoms), self.intern_formula(b, atoms)),
            Formula::Release(a, b) => (Op::Release, self.intern_formula(a, atoms), self.intern_formula(b, atoms)),
        };
        self.intern(node)
    }
}

/// Every connective of one model as a table over world sets encoded as
/// bitmasks (at most four worlds).
struct ModelTables {
    atoms: Vec<u8>,
    next: [u8; 16],
    eventually: [u8; 16],
    henceforth: [u8; 16],
    implies: [[u8; 16]; 16],
    until: [[u8; 16]; 16],
    release: [[u8; 16]; 16],
}

impl ModelTables {
    fn new(m: &Model, atoms: &[&str]) -> ModelTables {
        let c = Checker::new(m);
        let n = m.len();
        let size = 1usize << n;
        let set = |mask: usize| {
            let mut s = WorldSet::with_capacity(n);
            s.extend((0..n).filter(|&i| mask >> i & 1 == 1));
            s
        };
        let mask = |s: WorldSet| s.ones().fold(0u8, |acc, i| acc | 1 << i);
        let mut t = ModelTables {
            atoms: atoms.iter().map(|a| mask(m.atom_extension(a))).collect(),
            next: [0; 16],
            eventually: [0; 16],
            henceforth: [0; 16],
            implies: [[0; 16]; 16],
            until: [[0; 16]; 16],
            release: [[0; 16]; 16],
        };
        for a in 0..size {
            let sa = set(a);
            t.next[a] = mask(c.next(&sa));
            t.eventually[a] = mask(c.eventually(&sa));
            t.henceforth[a] = mask(c.henceforth(&sa));
            for b in 0..size {
                let sb = set(b);
                t.implies[a][b] = mask(c.implies(&sa, &sb));
                t.until[a][b] = mask(c.until(&sa, &sb));
                t.release[a][b] = mask(c.release(&sa, &sb));
            }
        }
        t
    }

    fn apply(&self, op: Op, a: u8, b: u8) -> u8 {
        let (a, b) = (a as usize, b as usize);
        match op {
            Op::Atom(i) => self.atoms[i as usize],
            Op::Bottom => 0,
            Op::And => (a & b) as u8,
            Op::Or => (a | b) as u8,
            Op::Implies => self.implies[a][b],
            Op::Next => self.next[a],
            Op::Eventually => self.eventually[a],
            Op::Henceforth => self.henceforth[a],
            Op::Until => self.until[a][b],
            Op::Release => self.release[a][b],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepSummary {
    pub formulas: usize,
    pub rewritten: usize,
    pub models: usize,
    pub not_normal: usize,
    pub mismatches: usize,
}

/// Compares each formula of length `<= max_len` over `p`, `q` with its next
/// normal form on every model of `class` with at most `max_worlds <= 4` worlds.
///
/// Formulas are evaluated on batches of models at once: a node's value on a
/// batch is a vector of world-set masks, interned so that equal vectors share
/// one id and each (connective, argument ids) combination is computed once.
pub fn normal_form_sweep(max_len: usize, class: FrameClass, max_worlds: usize) -> SweepSummary {
    assert!(max_worlds <= 4, "world sets are packed into 4-bit masks");
    const ATOMS: [&str; 2] = ["p", "q"];
    let formulas = enumerate_formulas(max_len, &ATOMS, Fragment::Full);
    let mut graph = FormulaGraph::default();
    let mut pairs = Vec::new();
    let mut not_normal = 0;
    for phi in &formulas {
        let nf = next_normal_form(phi);
        if !nf.is_next_normal() {
            not_normal += 1;
        }
        if nf != *phi {
            pairs.push((graph.intern_formula(phi, &ATOMS), graph.intern_formula(&nf, &ATOMS)));
        }
    }
    let total = formulas.len();
    drop(formulas);

    let models: Vec<ModelTables> = enumerate_models(&SearchBounds::new(class, max_worlds, ATOMS))
        .map(|m| ModelTables::new(&m, &ATOMS))
        .collect();
    let mut mismatched = vec![false; pairs.len()];
    const BATCH: usize = 1024;
    for batch in models.chunks(BATCH) {
        let mut values: Vec<Box<[u8]>> = Vec::new();
        let mut value_ids: HashMap<Box<[u8]>, u32> = HashMap::new();
        let mut memo: HashMap<(Op, u32, u32), u32> = HashMap::new();
        let mut node_value = Vec::with_capacity(graph.nodes.len());
        for &(op, a, b) in &graph.nodes {
            let (va, vb) = match op {
                Op::Atom(_) | Op::Bottom => (0, 0),
                Op::Next | Op::Eventually | Op::Henceforth => (node_value[a as usize], 0),
                _ => (node_value[a as usize], node_value[b as usize]),
            };
            let id = *memo.entry((op, va, vb)).or_insert_with(|| {
                let v: Box<[u8]> = batch
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let x = values.get(va as usize).map_or(0, |v| v[k]);
                        let y = values.get(vb as usize).map_or(0, |v| v[k]);
                        t.apply(op, x, y)
                    })
                    .collect();
                if let Some(&id) = value_ids.get(&v) {
                    return id;
                }
                let id = values.len() as u32;
                value_ids.insert(v.clone(), id);
                values.push(v);
                id
            });
            node_value.push(id);
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if node_value[x as usize] != node_value[y as usize] {
                mismatched[i] = true;
            }
        }
    }
    SweepSummary {
        formulas: total,
        rewritten: pairs.len(),
        models: models.len(),
        not_normal,
        mismatches: mismatched.iter().filter(|&&b| b).count(),
    }
}

/// A world where `f` and its normal form disagree, searched over the same
/// models as [`normal_form_sweep`]. Used to report a concrete failure.
pub fn normal_form_counterexample(phi: &Formula, class: FrameClass, max_worlds: usize) -> Option<(Model, WorldId)> {
    let nf = next_normal_form(phi);
    let atoms: Vec<String> = phi.atoms().into_iter().collect();
    enumerate_models(&SearchBounds::new(class, max_worlds, atoms)).find_map(|m| {
        let (a, b) = (extension(&m, phi), extension(&m, &nf));
        let w = m.worlds().find(|w| a.contains(w.index()) != b.contains(w.index()))?;
        Some((m, w))
    })
}

/// The first falsifying world of `phi` in the fisher-servi model, by name.
pub fn fisher_servi_counter_world(phi: &Formula) -> Option<String> {
    let m = fisher_servi_model();
    counter_world(&m, phi).map(|w| m.name(w).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn items_have_unique_ids() {
        let mut ids: Vec<_> = ITEMS.iter().map(|i| i.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), ITEMS.len());
        assert!(item("prop2").is_some());
        assert!(item("prop9").is_none());
    }

    #[test]
    fn small_sweep_is_clean() {
        let s = normal_form_sweep(2, FrameClass::Persistent, 3);
        assert_eq!(s.not_normal, 0);
        assert_eq!(s.mismatches, 0);
        assert!(s.rewritten > 0);
    }

    #[test]
    fn sweep_detects_invalid_rewrites_on_expanding_models() {
        // X(p -> q) -> (X p -> X q) is not an equivalence without backward confluence.
        let s = normal_form_sweep(2, FrameClass::Expanding, 3);
        assert!(s.mismatches > 0);
        let phi = parse_formula("X(p -> q)").unwrap();
        assert!(normal_form_counterexample(&phi, FrameClass::Expanding, 3).is_some());
        assert!(normal_form_counterexample(&phi, FrameClass::Persistent, 3).is_none());
    }

    #[test]
    fn fisher_servi_counter_worlds() {
        for phi in fisher_servi_formulas() {
            assert_eq!(fisher_servi_counter_world(&phi).as_deref(), Some("w"));
        }
    }
}
