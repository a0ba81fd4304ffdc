//! Bounded bisimulations between two models.
//!
//! A family is a descending chain `Z_n ⊆ ... ⊆ Z_0` of world pairs. Every
//! kind requires the basic clauses (atoms, forth/back along `<=`, forth along
//! `S`); the temporal kinds add forth/back clauses over `S`-iterates.
//!
//! Clauses that quantify over all `k ≥ 0` are decided on the first
//! `prefix + 2·cycle` iterates of each orbit. The truth of one clause instance
//! depends only on the current orbit position and the set of positions
//! already visited; that set is stable after `prefix + cycle` steps and the
//! position then repeats with period `cycle`.

use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{orbit, Checker};
use crate::formula::{Formula, Fragment};
use crate::model::{Model, WorldId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BisimKind {
    Next,
    Diamond,
    Box,
    Until,
    Release,
}

impl BisimKind {
    pub const ALL: [BisimKind; 5] = [
        BisimKind::Next,
        BisimKind::Diamond,
        BisimKind::Box,
        BisimKind::Until,
        BisimKind::Release,
    ];

    /// The sublanguage whose short formulas the kind preserves.
    pub fn fragment(self) -> Fragment {
        match self {
            BisimKind::Next => Fragment::Next,
            BisimKind::Diamond => Fragment::Diamond,
            BisimKind::Box => Fragment::Box,
            BisimKind::Until => Fragment::Until,
            BisimKind::Release => Fragment::Release,
        }
    }

    pub fn clauses(self) -> &'static [Clause] {
        use Clause::*;
        match self {
            BisimKind::Next => &[Atoms, ForthImplies, BackImplies, ForthNext],
            BisimKind::Diamond => &[Atoms, ForthImplies, BackImplies, ForthNext, ForthDiamond, BackDiamond],
            BisimKind::Box => &[Atoms, ForthImplies, BackImplies, ForthNext, ForthBox, BackBox],
            BisimKind::Until => &[Atoms, ForthImplies, BackImplies, ForthNext, ForthUntil, BackUntil],
            BisimKind::Release => &[Atoms, ForthImplies, BackImplies, ForthNext, ForthRelease, BackRelease],
        }
    }
}

impl fmt::Display for BisimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BisimKind::Next => "next",
            BisimKind::Diamond => "diamond",
            BisimKind::Box => "box",
            BisimKind::Until => "until",
            BisimKind::Release => "release",
        })
    }
}

impl std::str::FromStr for BisimKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "next" | "X" => Ok(BisimKind::Next),
            "diamond" | "eventually" | "F" => Ok(BisimKind::Diamond),
            "box" | "henceforth" | "G" => Ok(BisimKind::Box),
            "until" | "U" => Ok(BisimKind::Until),
            "release" | "R" => Ok(BisimKind::Release),
            other => Err(format!(
                "unknown bisimulation kind `{other}` (expected next, diamond, box, until or release)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clause {
    Atoms,
    ForthImplies,
    BackImplies,
    ForthNext,
    ForthDiamond,
    BackDiamond,
    ForthBox,
    BackBox,
    ForthUntil,
    BackUntil,
    ForthRelease,
    BackRelease,
}

impl Clause {
    pub fn name(self) -> &'static str {
        match self {
            Clause::Atoms => "Atoms",
            Clause::ForthImplies => "Forth ->",
            Clause::BackImplies => "Back ->",
            Clause::ForthNext => "Forth X",
            Clause::ForthDiamond => "Forth F",
            Clause::BackDiamond => "Back F",
            Clause::ForthBox => "Forth G",
            Clause::BackBox => "Back G",
            Clause::ForthUntil => "Forth U",
            Clause::BackUntil => "Back U",
            Clause::ForthRelease => "Forth R",
            Clause::BackRelease => "Back R",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// What made a clause fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// The atom on which the pair disagrees.
    Atom(String),
    /// A `<=`-successor on `side` with no related partner.
    Above(Side, WorldId),
    /// The successor pair that is not related one level down.
    Successors(WorldId, WorldId),
    /// The universally quantified iterate `k` on `side` that has no match.
    Iterate(Side, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseViolation {
    pub clause: Clause,
    /// Level of the pair; the clause targets `level - 1` (or `level` for atoms).
    pub level: usize,
    pub pair: (WorldId, WorldId),
    pub witness: Witness,
}

impl ClauseViolation {
    /// Re-runs the clause at the reported pair and level.
    pub fn replays(&self, fam: &BisimFamily<'_>) -> bool {
        check_clause(fam, self.clause, self.level, self.pair, IterateBound::Saturation).is_some()
    }

    pub fn describe(&self, left: &Model, right: &Model) -> String {
        let (a, b) = self.pair;
        let witness = match &self.witness {
            Witness::Atom(p) => format!("atom {p}"),
            Witness::Above(Side::Left, v) => format!("left world {} above", left.name(*v)),
            Witness::Above(Side::Right, v) => format!("right world {} above", right.name(*v)),
            Witness::Successors(x, y) => format!("successors ({},{})", left.name(*x), right.name(*y)),
            Witness::Iterate(Side::Left, k) => format!("left iterate k={k}"),
            Witness::Iterate(Side::Right, k) => format!("right iterate k={k}"),
        };
        format!(
            "{} fails at level {} for ({},{}): {}",
            self.clause,
            self.level,
            left.name(a),
            right.name(b),
            witness
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("family has no levels")]
    Empty,
    #[error("family is not descending: level {0} is not contained in the level below it")]
    NotDescending(usize),
    #[error("relation at level {0} does not match the models' sizes")]
    Shape(usize),
    #[error("formula `{formula}` is outside the {kind} fragment {fragment}")]
    Fragment {
        formula: String,
        kind: BisimKind,
        fragment: Fragment,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// A set of world pairs `W1 × W2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRelation {
    right_len: usize,
    bits: FixedBitSet,
}

impl PairRelation {
    pub fn empty(left_len: usize, right_len: usize) -> PairRelation {
        PairRelation {
            right_len,
            bits: FixedBitSet::with_capacity(left_len * right_len),
        }
    }

    pub fn identity(len: usize) -> PairRelation {
        let mut r = PairRelation::empty(len, len);
        for i in 0..len {
            r.insert((WorldId(i), WorldId(i)));
        }
        r
    }

    fn left_len(&self) -> usize {
        if self.right_len == 0 {
            0
        } else {
            self.bits.len() / self.right_len
        }
    }

    pub fn contains(&self, (a, b): (WorldId, WorldId)) -> bool {
        self.bits.contains(a.index() * self.right_len + b.index())
    }

    pub fn insert(&mut self, (a, b): (WorldId, WorldId)) {
        self.bits.insert(a.index() * self.right_len + b.index());
    }

    pub fn remove(&mut self, (a, b): (WorldId, WorldId)) {
        self.bits.set(a.index() * self.right_len + b.index(), false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_subset(&self, other: &PairRelation) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (WorldId, WorldId)> + '_ {
        let r = self.right_len;
        self.bits.ones().map(move |i| (WorldId(i / r), WorldId(i % r)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimFamily<'a> {
    pub left: &'a Model,
    pub right: &'a Model,
    /// `chain[i]` is `Z_i`.
    pub chain: Vec<PairRelation>,
}

impl<'a> BisimFamily<'a> {
    pub fn new(left: &'a Model, right: &'a Model, chain: Vec<PairRelation>) -> Self {
        BisimFamily { left, right, chain }
    }

    /// `Z_0 = ... = Z_depth` all equal to the identity of one model.
    pub fn identity(model: &'a Model, depth: usize) -> Self {
        BisimFamily {
            left: model,
            right: model,
            chain: vec![PairRelation::identity(model.len()); depth + 1],
        }
    }

    /// The `n` of `Z_n`.
    pub fn depth(&self) -> usize {
        self.chain.len().saturating_sub(1)
    }

    pub fn contains(&self, level: usize, pair: (WorldId, WorldId)) -> bool {
        self.chain.get(level).is_some_and(|z| z.contains(pair))
    }

    /// Deepest level whose relation contains the pair.
    pub fn deepest_level(&self, pair: (WorldId, WorldId)) -> Option<usize> {
        (0..self.chain.len()).rev().find(|&i| self.chain[i].contains(pair))
    }

    pub fn pair_by_name(&self, a: &str, b: &str) -> Option<(WorldId, WorldId)> {
        Some((self.left.world(a)?, self.right.world(b)?))
    }

    fn check_shape(&self) -> Result<(), BisimError> {
        if self.chain.is_empty() {
            return Err(BisimError::Empty);
        }
        for (i, z) in self.chain.iter().enumerate() {
            if z.right_len != self.right.len() || z.left_len() != self.left.len() {
                return Err(BisimError::Shape(i));
            }
        }
        for i in 1..self.chain.len() {
            if !self.chain[i].is_subset(&self.chain[i - 1]) {
                return Err(BisimError::NotDescending(i));
            }
        }
        Ok(())
    }
}

/// How many iterates a `for all k` quantifier inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterateBound {
    /// `prefix + 2·cycle` of each world's own orbit.
    Saturation,
    /// A fixed number of iterates for every world.
    Fixed(usize),
}

fn atom_names(left: &Model, right: &Model) -> BTreeSet<String> {
    left.valuation()
        .keys()
        .chain(right.valuation().keys())
        .cloned()
        .collect()
}

fn atoms_witness(fam: &BisimFamily<'_>, (a, b): (WorldId, WorldId)) -> Option<Witness> {
    for p in atom_names(fam.left, fam.right) {
        let l = fam.left.valuation().get(&p).is_some_and(|s| s.contains(a.index()));
        let r = fam.right.valuation().get(&p).is_some_and(|s| s.contains(b.index()));
        if l != r {
            return Some(Witness::Atom(p));
        }
    }
    None
}

fn iterates(m: &Model, bound: IterateBound) -> Vec<Vec<WorldId>> {
    m.worlds()
        .map(|w| {
            let o = orbit(m, w);
            let n = match bound {
                IterateBound::Saturation => o.prefix.len() + 2 * o.cycle.len(),
                IterateBound::Fixed(n) => n,
            };
            o.unroll(n)
        })
        .collect()
}

/// Precomputed data for checking clauses against one target relation `Z`.
struct Target<'f> {
    left: &'f Model,
    right: &'f Model,
    z: &'f PairRelation,
    /// `x1 ↦ x2` if some `v1 >= x1`, `v2 <= x2` has `v1 Z v2`.
    up_down: PairRelation,
    /// `x1 ↦ x2` if some `v1 <= x1`, `v2 >= x2` has `v1 Z v2`.
    down_up: PairRelation,
    left_iterates: Vec<Vec<WorldId>>,
    right_iterates: Vec<Vec<WorldId>>,
}

impl<'f> Target<'f> {
    fn new(left: &'f Model, right: &'f Model, z: &'f PairRelation, bound: IterateBound) -> Self {
        let mut up_down = PairRelation::empty(left.len(), right.len());
        let mut down_up = PairRelation::empty(left.len(), right.len());
        for (v1, v2) in z.pairs() {
            for x1 in left.down(v1).ones() {
                for x2 in right.up(v2).ones() {
                    up_down.insert((WorldId(x1), WorldId(x2)));
                }
            }
            for x1 in left.up(v1).ones() {
                for x2 in right.down(v2).ones() {
                    down_up.insert((WorldId(x1), WorldId(x2)));
                }
            }
        }
        Target {
            left,
            right,
            z,
            up_down,
            down_up,
            left_iterates: iterates(left, bound),
            right_iterates: iterates(right, bound),
        }
    }

    fn check(&self, clause: Clause, (w1, w2): (WorldId, WorldId)) -> Option<Witness> {
        let s1 = &self.left_iterates[w1.index()];
        let s2 = &self.right_iterates[w2.index()];
        let a = |x1: WorldId, x2: WorldId| self.up_down.contains((x1, x2));
        let b = |x1: WorldId, x2: WorldId| self.down_up.contains((x1, x2));
        match clause {
            Clause::Atoms => None,
            Clause::ForthImplies => self
                .left
                .up(w1)
                .ones()
                .map(WorldId)
                .find(|&v1| !self.right.up(w2).ones().any(|v2| self.z.contains((v1, WorldId(v2)))))
                .map(|v| Witness::Above(Side::Left, v)),
            Clause::BackImplies => self
                .right
                .up(w2)
                .ones()
                .map(WorldId)
                .find(|&v2| !self.left.up(w1).ones().any(|v1| self.z.contains((WorldId(v1), v2))))
                .map(|v| Witness::Above(Side::Right, v)),
            Clause::ForthNext => {
                let succ = (self.left.succ(w1), self.right.succ(w2));
                (!self.z.contains(succ)).then_some(Witness::Successors(succ.0, succ.1))
            }
            Clause::ForthDiamond | Clause::ForthUntil => {
                let strict = clause == Clause::ForthUntil;
                all_matched(s1, s2, a, strict).map(|k| Witness::Iterate(Side::Left, k))
            }
            Clause::BackDiamond | Clause::BackUntil => {
                let strict = clause == Clause::BackUntil;
                all_matched(s2, s1, |o, i| b(i, o), strict).map(|k| Witness::Iterate(Side::Right, k))
            }
            Clause::ForthBox | Clause::ForthRelease => {
                let strict = clause == Clause::ForthRelease;
                all_matched(s2, s1, |o, i| a(i, o), strict).map(|k| Witness::Iterate(Side::Right, k))
            }
            Clause::BackBox | Clause::BackRelease => {
                let strict = clause == Clause::BackRelease;
                all_matched(s1, s2, b, strict).map(|k| Witness::Iterate(Side::Left, k))
            }
        }
    }
}

/// For every outer index `ko` there is an inner index `ki` with
/// `rel(outer[ko], inner[ki])` and, when `intermediate` is set, every
/// `ji < ki` has some `jo < ko` with `rel(outer[jo], inner[ji])`.
/// Returns the first unmatched `ko`.
fn all_matched(
    outer: &[WorldId],
    inner: &[WorldId],
    rel: impl Fn(WorldId, WorldId) -> bool,
    intermediate: bool,
) -> Option<usize> {
    for ko in 0..outer.len() {
        let mut found = false;
        for ki in 0..inner.len() {
            if rel(outer[ko], inner[ki]) {
                found = true;
                break;
            }
            if !intermediate {
                continue;
            }
            // inner[ki] becomes an intermediate point for every larger ki.
            if !(0..ko).any(|jo| rel(outer[jo], inner[ki])) {
                break;
            }
        }
        if !found {
            return Some(ko);
        }
    }
    None
}

fn check_clause(
    fam: &BisimFamily<'_>,
    clause: Clause,
    level: usize,
    pair: (WorldId, WorldId),
    bound: IterateBound,
) -> Option<Witness> {
    if clause == Clause::Atoms {
        return atoms_witness(fam, pair);
    }
    if level == 0 || level >= fam.chain.len() {
        return None;
    }
    let target = Target::new(fam.left, fam.right, &fam.chain[level - 1], bound);
    target.check(clause, pair)
}

/// All clause violations of `fam` as a bounded `kind`-bisimulation. Empty
/// iff the family is one.
pub fn verify_family(kind: BisimKind, fam: &BisimFamily<'_>) -> Result<Vec<ClauseViolation>, BisimError> {
    verify_family_with_bound(kind, fam, IterateBound::Saturation)
}

pub fn verify_family_with_bound(
    kind: BisimKind,
    fam: &BisimFamily<'_>,
    bound: IterateBound,
) -> Result<Vec<ClauseViolation>, BisimError> {
    fam.check_shape()?;
    let mut out = Vec::new();
    for (level, z) in fam.chain.iter().enumerate() {
        for pair in z.pairs() {
            if let Some(witness) = atoms_witness(fam, pair) {
                out.push(ClauseViolation {
                    clause: Clause::Atoms,
                    level,
                    pair,
                    witness,
                });
            }
        }
    }
    for level in 1..fam.chain.len() {
        let target = Target::new(fam.left, fam.right, &fam.chain[level - 1], bound);
        for pair in fam.chain[level].pairs() {
            for &clause in &kind.clauses()[1..] {
                if let Some(witness) = target.check(clause, pair) {
                    out.push(ClauseViolation {
                        clause,
                        level,
                        pair,
                        witness,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The greatest depth-`depth` family: `Z_0` is atom agreement and `Z_{i+1}`
/// keeps the pairs of `Z_i` satisfying every clause against `Z_i`.
pub fn max_family<'a>(kind: BisimKind, left: &'a Model, right: &'a Model, depth: usize) -> BisimFamily<'a> {
    max_family_with_bound(kind, left, right, depth, IterateBound::Saturation)
}

pub fn max_family_with_bound<'a>(
    kind: BisimKind,
    left: &'a Model,
    right: &'a Model,
    depth: usize,
    bound: IterateBound,
) -> BisimFamily<'a> {
    let mut fam = BisimFamily::new(left, right, Vec::with_capacity(depth + 1));
    let mut z0 = PairRelation::empty(left.len(), right.len());
    for a in left.worlds() {
        for b in right.worlds() {
            if atoms_witness(&fam, (a, b)).is_none() {
                z0.insert((a, b));
            }
        }
    }
    fam.chain.push(z0);
    for level in 0..depth {
        let prev = &fam.chain[level];
        let target = Target::new(left, right, prev, bound);
        let mut next = prev.clone();
        for pair in prev.pairs() {
            if kind.clauses()[1..].iter().any(|&c| target.check(c, pair).is_some()) {
                next.remove(pair);
            }
        }
        fam.chain.push(next);
    }
    fam
}

/// A pair related at `level` that a short formula tells apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub formula: Formula,
    pub level: usize,
    pub pair: (WorldId, WorldId),
    pub left: bool,
    pub right: bool,
}

/// Checks that every pair of `Z_i` agrees on every given formula of length
/// at most `i`. Formulas longer than the family's depth are skipped.
pub fn preservation_check(
    kind: BisimKind,
    fam: &BisimFamily<'_>,
    formulas: &[Formula],
) -> Result<Vec<Disagreement>, BisimError> {
    fam.check_shape()?;
    for f in formulas {
        if !f.fragment().is_within(kind.fragment()) {
            return Err(BisimError::Fragment {
                formula: f.to_string(),
                kind,
                fragment: kind.fragment(),
            });
        }
    }
    let left = Checker::new(fam.left);
    let right = Checker::new(fam.right);
    let mut out = Vec::new();
    for f in formulas {
        let level = f.length();
        let Some(z) = fam.chain.get(level) else {
            continue;
        };
        let (e1, e2) = (left.extension(f), right.extension(f));
        for pair in z.pairs() {
            let (l, r) = (e1.contains(pair.0.index()), e2.contains(pair.1.index()));
            if l != r {
                out.push(Disagreement {
                    formula: f.clone(),
                    level,
                    pair,
                    left: l,
                    right: r,
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text format: `level i: (w1,w2) (w1',w2') ...`

pub fn serialize_family(fam: &BisimFamily<'_>) -> String {
    let mut out = String::new();
    for (i, z) in fam.chain.iter().enumerate() {
        out.push_str(&format!("level {i}:"));
        for (a, b) in z.pairs() {
            out.push_str(&format!(" ({},{})", fam.left.name(a), fam.right.name(b)));
        }
        out.push('\n');
    }
    out
}

pub fn parse_family<'a>(input: &str, left: &'a Model, right: &'a Model) -> Result<BisimFamily<'a>, BisimError> {
    let mut levels: Vec<Option<PairRelation>> = Vec::new();
    let err = |line: usize, message: String| BisimError::Format { line, message };
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("expected `level i: ...`, found `{line}`")))?;
        let level: usize = head
            .trim()
            .strip_prefix("level")
            .map(str::trim)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(line_no, format!("expected `level <number>`, found `{}`", head.trim())))?;
        let mut z = PairRelation::empty(left.len(), right.len());
        let mut rest = rest.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| err(line_no, format!("expected `(w1,w2)`, found `{rest}`")))?;
            let (inside, tail) = body;
            let (a, b) = inside
                .split_once(',')
                .ok_or_else(|| err(line_no, format!("expected `(w1,w2)`, found `({inside})`")))?;
            let a = left
                .world(a.trim())
                .ok_or_else(|| err(line_no, format!("unknown left world `{}`", a.trim())))?;
            let b = right
                .world(b.trim())
                .ok_or_else(|| err(line_no, format!("unknown right world `{}`", b.trim())))?;
            z.insert((a, b));
            rest = tail.trim_start();
        }
        if levels.len() <= level {
            levels.resize(level + 1, None);
        }
        if levels[level].is_some() {
            return Err(err(line_no, format!("level {level} given twice")));
        }
        levels[level] = Some(z);
    }
    if levels.is_empty() {
        return Err(BisimError::Empty);
    }
    let chain = levels
        .into_iter()
        .enumerate()
        .map(|(i, z)| z.ok_or_else(|| err(0, format!("level {i} is missing"))))
        .collect::<Result<Vec<_>, _>>()?;
    let fam = BisimFamily::new(left, right, chain);
    fam.check_shape()?;
    Ok(fam)
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

    #[test]
    fn identity_is_a_bisimulation_of_every_kind() {
        let m = fisher_servi();
        let fam = BisimFamily::identity(&m, 1);
        for kind in BisimKind::ALL {
            assert_eq!(verify_family(kind, &fam).unwrap(), vec![]);
        }
    }

    #[test]
    fn depth_zero_is_atom_agreement() {
        let m = fisher_servi();
        for kind in BisimKind::ALL {
            let fam = max_family(kind, &m, &m, 0);
            assert_eq!(fam.chain.len(), 1);
            let pairs: Vec<_> = fam.chain[0]
                .pairs()
                .map(|(a, b)| (m.name(a), m.name(b)))
                .collect();
            assert_eq!(pairs, vec![("w", "w"), ("w", "v"), ("v", "w"), ("v", "v"), ("u", "u")]);
        }
    }

    #[test]
    fn detects_non_descending_chain() {
        let m = fisher_servi();
        let mut fam = BisimFamily::identity(&m, 1);
        fam.chain[0] = PairRelation::empty(3, 3);
        assert_eq!(verify_family(BisimKind::Next, &fam), Err(BisimError::NotDescending(1)));
    }

    #[test]
    fn violations_replay() {
        let m = fisher_servi();
        // w and v agree on atoms but S(w) = v, S(v) = v and only v sees u.
        let mut z = PairRelation::empty(3, 3);
        z.insert((m.world("w").unwrap(), m.world("u").unwrap()));
        let fam = BisimFamily::new(&m, &m, vec![z.clone(), z]);
        let violations = verify_family(BisimKind::Next, &fam).unwrap();
        assert!(!violations.is_empty());
        assert!(violations.iter().any(|v| v.clause == Clause::Atoms));
        assert!(violations.iter().all(|v| v.replays(&fam)));
    }

    #[test]
    fn max_family_separates_by_implication() {
        let m = fisher_servi();
        let fam = max_family(BisimKind::Next, &m, &m, 2);
        let (w, v) = (m.world("w").unwrap(), m.world("v").unwrap());
        // v sees u (where p holds) but w does not: Back -> fails at level 1.
        assert!(fam.contains(0, (w, v)));
        assert!(!fam.contains(1, (w, v)));
        assert_eq!(verify_family(BisimKind::Next, &fam).unwrap(), vec![]);
    }

    #[test]
    fn preservation_rejects_formulas_outside_the_fragment() {
        let m = fisher_servi();
        let fam = BisimFamily::identity(&m, 2);
        let err = preservation_check(BisimKind::Diamond, &fam, &[parse_formula("G p").unwrap()]);
        assert!(matches!(err, Err(BisimError::Fragment { .. })));
        let ok = preservation_check(BisimKind::Diamond, &fam, &[parse_formula("F p").unwrap()]);
        assert_eq!(ok, Ok(vec![]));
    }

    #[test]
    fn family_text_round_trip() {
        let m = fisher_servi();
        let fam = max_family(BisimKind::Until, &m, &m, 2);
        let text = serialize_family(&fam);
        assert!(text.starts_with("level 0: (w,w) (w,v)"));
        let back = parse_family(&text, &m, &m).unwrap();
        assert_eq!(back, fam);
        assert!(matches!(
            parse_family("level 1: (w,w)\n", &m, &m),
            Err(BisimError::Format { .. })
        ));
        assert!(matches!(
            parse_family("level 0: (w,zz)\n", &m, &m),
            Err(BisimError::Format { line: 1, .. })
        ));
        assert_eq!(
            parse_family("level 0:\nlevel 1: (w,w)\n", &m, &m).unwrap_err(),
            BisimError::NotDescending(1)
        );
    }

    #[test]
    fn quantifier_matching() {
        let w = |i| WorldId(i);
        let outer = [w(0), w(1)];
        let inner = [w(2), w(3)];
        // Only 1 matches 3; 0 matches nothing.
        let rel = |o: WorldId, i: WorldId| o == w(1) && i == w(3);
        assert_eq!(all_matched(&outer, &inner, rel, false), Some(0));
        let rel = |o: WorldId, i: WorldId| i == w(3) || (o == w(0) && i == w(2));
        assert_eq!(all_matched(&outer, &inner, rel, false), None);
        // With intermediates: ko = 0 needs inner[0] covered by no earlier outer -> must match at ki = 0.
        let rel = |_o: WorldId, i: WorldId| i == w(3);
        assert_eq!(all_matched(&outer, &inner, rel, true), Some(0));
    }
}
