//! Bounded enumeration of finite models and countermodel search.
//!
//! Models are produced one isomorphism class at a time. For each world count
//! the generator lists posets up to isomorphism (with their automorphism
//! groups), then the forward-confluent successor functions that are least in
//! their orbit under the automorphisms, then the valuations that are least
//! under the stabilizer of the successor function. Here-and-there models use
//! a dedicated generator over functions on points of time.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::checker::Checker;
use crate::formula::{Formula, PushRule, PushRules};
use crate::model::{FrameClass, Model, WorldId, WorldSet};

/// Default cap on the number of models visited by one search.
pub const DEFAULT_LIMIT: u64 = 10_000_000;

/// Largest world count the general enumerator accepts.
pub const MAX_ENUMERATED_WORLDS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_worlds: usize,
    pub atoms: Vec<String>,
    pub frame_class: FrameClass,
    pub limit: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("max_worlds must be at least 1")]
    NoWorlds,
    #[error("max_worlds {0} exceeds the enumerator's maximum of {MAX_ENUMERATED_WORLDS}")]
    TooManyWorlds(usize),
    #[error("invalid atom name `{0}`")]
    BadAtom(String),
    #[error("atom `{0}` listed twice")]
    DuplicateAtom(String),
}

impl SearchBounds {
    pub fn new<I, S>(frame_class: FrameClass, max_worlds: usize, atoms: I) -> SearchBounds
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SearchBounds {
            max_worlds,
            atoms: atoms.into_iter().map(Into::into).collect(),
            frame_class,
            limit: None,
            seed: None,
        }
    }

    /// Bounds over exactly the atoms occurring in `formulas`.
    pub fn for_formulas<'f>(
        frame_class: FrameClass,
        max_worlds: usize,
        formulas: impl IntoIterator<Item = &'f Formula>,
    ) -> SearchBounds {
        let atoms: std::collections::BTreeSet<String> =
            formulas.into_iter().flat_map(|f| f.atoms()).collect();
        SearchBounds::new(frame_class, max_worlds, atoms)
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.max_worlds == 0 {
            return Err(BoundsError::NoWorlds);
        }
        if self.max_worlds > MAX_ENUMERATED_WORLDS {
            return Err(BoundsError::TooManyWorlds(self.max_worlds));
        }
        let mut seen = HashSet::new();
        for a in &self.atoms {
            let mut chars = a.chars();
            let ok = chars.next().is_some_and(|c| c.is_ascii_lowercase())
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
                && a != "true"
                && a != "false";
            if !ok {
                return Err(BoundsError::BadAtom(a.clone()));
            }
            if !seen.insert(a) {
                return Err(BoundsError::DuplicateAtom(a.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Found,
    Exhausted,
    LimitReached,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Found => "found",
            Verdict::Exhausted => "exhausted",
            Verdict::LimitReached => "limit-reached",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub model: Model,
    pub world: WorldId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub verdict: Verdict,
    pub witness: Option<Counterexample>,
    pub visited: u64,
}

impl SearchResult {
    pub fn is_exhausted(&self) -> bool {
        self.verdict == Verdict::Exhausted
    }

    pub fn is_found(&self) -> bool {
        self.verdict == Verdict::Found
    }
}

// ---------------------------------------------------------------------------
// Posets up to isomorphism

type Perm = Vec<u8>;

/// A poset in canonical labelling with its automorphism group.
#[derive(Clone, Debug)]
struct CanonPoset {
    n: usize,
    /// Reflexive up-sets.
    up: Vec<u16>,
    /// Strict down-sets.
    below: Vec<u16>,
    /// Strict up-sets.
    above: Vec<u16>,
    strict: Vec<(u8, u8)>,
    autos: Vec<Perm>,
    upsets: Vec<u16>,
}

impl CanonPoset {
    fn from_below(below: &[u16]) -> CanonPoset {
        let n = below.len();
        let mut above = vec![0u16; n];
        let mut strict = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if below[j] >> i & 1 == 1 {
                    above[i] |= 1 << j;
                    strict.push((i as u8, j as u8));
                }
            }
        }
        let up = (0..n).map(|i| above[i] | 1 << i).collect();
        let upsets = (0u32..1 << n)
            .map(|m| m as u16)
            .filter(|&m| (0..n).all(|i| m >> i & 1 == 0 || above[i] & !m == 0))
            .collect();
        CanonPoset {
            n,
            up,
            below: below.to_vec(),
            above,
            strict,
            autos: Vec::new(),
            upsets,
        }
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a] >> b & 1 == 1
    }
}

fn order_code(strict: &[(u8, u8)], n: usize, perm: &[u8]) -> u128 {
    strict
        .iter()
        .fold(0u128, |acc, &(i, j)| acc | 1u128 << (perm[i as usize] as usize * n + perm[j as usize] as usize))
}

/// Colour refinement by strict down/up neighbourhoods; colours are ranks of
/// sorted signatures, hence invariant under relabelling.
fn refine_colours(below: &[u16], above: &[u16]) -> Vec<usize> {
    let n = below.len();
    let mut colour: Vec<usize> = vec![0; n];
    let mut classes = 1;
    loop {
        let sigs: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
            .map(|i| {
                let collect = |mask: u16| {
                    let mut v: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).map(|j| colour[j]).collect();
                    v.sort_unstable();
                    v
                };
                (colour[i], collect(below[i]), collect(above[i]))
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        colour = sigs.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
        if distinct.len() == classes {
            return colour;
        }
        classes = distinct.len();
    }
}

/// Calls `f` with every permutation sending each colour class onto its block
/// of consecutive positions (blocks ordered by colour).
fn for_each_cell_perm(colour: &[usize], mut f: impl FnMut(&[u8])) {
    let n = colour.len();
    let mut start = vec![0usize; n + 1];
    for &c in colour {
        start[c + 1] += 1;
    }
    for c in 0..n {
        start[c + 1] += start[c];
    }
    let mut perm = vec![0u8; n];
    let mut used = vec![false; n];
    fn go(
        i: usize,
        colour: &[usize],
        start: &[usize],
        perm: &mut [u8],
        used: &mut [bool],
        f: &mut dyn FnMut(&[u8]),
    ) {
        if i == colour.len() {
            f(perm);
            return;
        }
        let c = colour[i];
        for pos in start[c]..start[c + 1] {
            if !used[pos] {
                used[pos] = true;
                perm[i] = pos as u8;
                go(i + 1, colour, start, perm, used, f);
                used[pos] = false;
            }
        }
    }
    go(0, colour, &start, &mut perm, &mut used, &mut f);
}

fn canonical_poset(below: &[u16]) -> (u128, CanonPoset) {
    let p = CanonPoset::from_below(below);
    let n = p.n;
    let colour = refine_colours(&p.below, &p.above);
    let mut best: Option<(u128, Perm)> = None;
    for_each_cell_perm(&colour, |perm| {
        let code = order_code(&p.strict, n, perm);
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            best = Some((code, perm.to_vec()));
        }
    });
    let (code, perm) = best.expect("at least one permutation");
    let mut relabelled = vec![0u16; n];
    for &(i, j) in &p.strict {
        relabelled[perm[j as usize] as usize] |= 1 << perm[i as usize];
    }
    (code, CanonPoset::from_below(&relabelled))
}

fn automorphisms(p: &CanonPoset) -> Vec<Perm> {
    let colour = refine_colours(&p.below, &p.above);
    let identity: Perm = (0..p.n as u8).collect();
    let code = order_code(&p.strict, p.n, &identity);
    let mut autos = Vec::new();
    for_each_cell_perm(&colour, |perm| {
        if order_code(&p.strict, p.n, perm) == code {
            autos.push(perm.to_vec());
        }
    });
    autos
}

/// All posets on `n` elements up to isomorphism, in canonical labelling.
fn posets(n: usize) -> Vec<CanonPoset> {
    let mut seen: HashSet<u128> = HashSet::new();
    let mut out = Vec::new();
    let mut below = vec![0u16; n];
    fn extend(
        k: usize,
        below: &mut Vec<u16>,
        seen: &mut HashSet<u128>,
        out: &mut Vec<CanonPoset>,
    ) {
        if k == below.len() {
            let (code, mut p) = canonical_poset(below);
            if seen.insert(code) {
                p.autos = automorphisms(&p);
                out.push(p);
            }
            return;
        }
        // Natural labelling: every element lies above only earlier ones, and
        // its strict down-set is down-closed.
        for mask in 0u16..1 << k {
            let closed = (0..k).all(|i| mask >> i & 1 == 0 || below[i] & !mask == 0);
            if closed {
                below[k] = mask;
                extend(k + 1, below, seen, out);
            }
        }
        below[k] = 0;
    }
    extend(0, &mut below, &mut seen, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Successor functions

/// Lexicographic enumeration of forward-confluent successor functions.
struct SuccessorOdometer {
    succ: Vec<u8>,
    next_candidate: Vec<usize>,
    depth: usize,
    done: bool,
}

impl SuccessorOdometer {
    fn new(n: usize) -> Self {
        SuccessorOdometer {
            succ: vec![0; n],
            next_candidate: vec![0; n + 1],
            depth: 0,
            done: false,
        }
    }

    fn consistent(&self, p: &CanonPoset, k: usize, c: usize) -> bool {
        (0..k).all(|i| {
            let si = self.succ[i] as usize;
            (p.below[k] >> i & 1 == 0 || p.leq(si, c)) && (p.above[k] >> i & 1 == 0 || p.leq(c, si))
        })
    }

    fn advance(&mut self, p: &CanonPoset) -> Option<&[u8]> {
        if self.done {
            return None;
        }
        let n = p.n;
        if self.depth == n {
            self.depth -= 1;
        }
        loop {
            let k = self.depth;
            let found = (self.next_candidate[k]..n).find(|&c| self.consistent(p, k, c));
            match found {
                Some(c) => {
                    self.succ[k] = c as u8;
                    self.next_candidate[k] = c + 1;
                    self.depth += 1;
                    if self.depth == n {
                        return Some(&self.succ);
                    }
                    self.next_candidate[self.depth] = 0;
                }
                None => {
                    if k == 0 {
                        self.done = true;
                        return None;
                    }
                    self.depth -= 1;
                }
            }
        }
    }
}

fn conjugate(g: &[u8], succ: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; succ.len()];
    for (x, &s) in succ.iter().enumerate() {
        out[g[x] as usize] = g[s as usize];
    }
    out
}

/// `Some(stabilizer)` if `succ` is least in its orbit under `group`.
fn canonical_under(group: &[Perm], succ: &[u8]) -> Option<Vec<Perm>> {
    let mut stabilizer = Vec::new();
    for g in group {
        let image = conjugate(g, succ);
        match image.as_slice().cmp(succ) {
            std::cmp::Ordering::Less => return None,
            std::cmp::Ordering::Equal => stabilizer.push(g.clone()),
            std::cmp::Ordering::Greater => {}
        }
    }
    Some(stabilizer)
}

fn backward_confluent(p: &CanonPoset, succ: &[u8]) -> bool {
    (0..p.n).all(|w| {
        let targets = p.up[succ[w] as usize];
        let reached = (0..p.n)
            .filter(|&u| p.up[w] >> u & 1 == 1)
            .fold(0u16, |acc, u| acc | 1 << succ[u]);
        targets & !reached == 0
    })
}

fn permute_mask(g: &[u8], mask: u16) -> u16 {
    (0..g.len())
        .filter(|&i| mask >> i & 1 == 1)
        .fold(0u16, |acc, i| acc | 1 << g[i])
}

/// Odometer over tuples of indices `< base`, least digit last.
struct TupleOdometer {
    digits: Vec<usize>,
    base: usize,
    fresh: bool,
}

impl TupleOdometer {
    fn new(len: usize, base: usize) -> Self {
        TupleOdometer {
            digits: vec![0; len],
            base,
            fresh: true,
        }
    }

    fn advance(&mut self) -> Option<&[usize]> {
        if self.fresh {
            self.fresh = false;
            return Some(&self.digits);
        }
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.base {
                return Some(&self.digits);
            }
            *d = 0;
        }
        None
    }
}

/// `true` if no group element maps the tuple to a lexicographically smaller one.
/// `images[g][x]` is the image of digit value `x` under the `g`-th element.
fn least_tuple(images: &[Vec<usize>], tuple: &[usize]) -> bool {
    images.iter().all(|img| {
        for &x in tuple {
            match img[x].cmp(&x) {
                std::cmp::Ordering::Less => return false,
                std::cmp::Ordering::Greater => return true,
                std::cmp::Ordering::Equal => {}
            }
        }
        true
    })
}

fn world_name(i: usize) -> String {
    format!("w{i}")
}

struct Frame {
    poset: usize,
    succ: Vec<u8>,
    upset_images: Vec<Vec<usize>>,
    valuations: TupleOdometer,
}

struct GeneralGenerator {
    class: FrameClass,
    atoms: Vec<String>,
    max_worlds: usize,
    n: usize,
    posets: Vec<CanonPoset>,
    poset_order: Vec<usize>,
    next_poset: usize,
    successors: Option<(usize, SuccessorOdometer)>,
    frame: Option<Frame>,
    rng: Option<ChaCha8Rng>,
}

impl GeneralGenerator {
    fn new(bounds: &SearchBounds) -> Self {
        GeneralGenerator {
            class: bounds.frame_class,
            atoms: bounds.atoms.clone(),
            max_worlds: bounds.max_worlds.min(MAX_ENUMERATED_WORLDS),
            n: 0,
            posets: Vec::new(),
            poset_order: Vec::new(),
            next_poset: 0,
            successors: None,
            frame: None,
            rng: bounds.seed.map(ChaCha8Rng::seed_from_u64),
        }
    }

    fn build(&self, frame: &Frame, tuple: &[usize]) -> Model {
        let p = &self.posets[frame.poset];
        let names = (0..p.n).map(world_name).collect();
        let order: Vec<(usize, usize)> = p.strict.iter().map(|&(i, j)| (i as usize, j as usize)).collect();
        let succ = frame.succ.iter().map(|&s| s as usize).collect();
        let valuation = self
            .atoms
            .iter()
            .zip(tuple)
            .map(|(a, &u)| {
                let mask = p.upsets[u];
                let mut set = WorldSet::with_capacity(p.n);
                set.extend((0..p.n).filter(|&i| mask >> i & 1 == 1));
                (a.clone(), set)
            })
            .collect::<BTreeMap<_, _>>();
        Model::from_parts(names, &order, succ, valuation).expect("enumerated model is valid")
    }

    fn next_model(&mut self) -> Option<Model> {
        loop {
            if let Some(frame) = &mut self.frame {
                if let Some(tuple) = frame.valuations.advance() {
                    if least_tuple(&frame.upset_images, tuple) {
                        let tuple = tuple.to_vec();
                        let frame = self.frame.as_ref().unwrap();
                        return Some(self.build(frame, &tuple));
                    }
                    continue;
                }
                self.frame = None;
            }
            if let Some((pi, odo)) = &mut self.successors {
                let pi = *pi;
                let p = &self.posets[pi];
                match odo.advance(p) {
                    Some(succ) => {
                        if self.class != FrameClass::Expanding && !backward_confluent(p, succ) {
                            continue;
                        }
                        let Some(stabilizer) = canonical_under(&p.autos, succ) else {
                            continue;
                        };
                        let index_of: BTreeMap<u16, usize> =
                            p.upsets.iter().enumerate().map(|(i, &m)| (m, i)).collect();
                        let upset_images = stabilizer
                            .iter()
                            .filter(|g| g.iter().enumerate().any(|(i, &x)| x as usize != i))
                            .map(|g| p.upsets.iter().map(|&m| index_of[&permute_mask(g, m)]).collect())
                            .collect();
                        self.frame = Some(Frame {
                            poset: pi,
                            succ: succ.to_vec(),
                            upset_images,
                            valuations: TupleOdometer::new(self.atoms.len(), p.upsets.len()),
                        });
                        continue;
                    }
                    None => self.successors = None,
                }
            }
            if self.next_poset < self.poset_order.len() {
                let pi = self.poset_order[self.next_poset];
                self.next_poset += 1;
                self.successors = Some((pi, SuccessorOdometer::new(self.posets[pi].n)));
                continue;
            }
            if self.n >= self.max_worlds {
                return None;
            }
            self.n += 1;
            self.posets = posets(self.n);
            self.poset_order = (0..self.posets.len()).collect();
            if let Some(rng) = &mut self.rng {
                self.poset_order.shuffle(rng);
            }
            self.next_poset = 0;
        }
    }
}

/// Functions on `{0..t}` least under conjugation, with stabilizers.
fn canonical_step_functions(t: usize) -> Vec<(Vec<u8>, Vec<Perm>)> {
    let mut group = Vec::new();
    permutations(t, &mut |g| group.push(g.to_vec()));
    let mut out = Vec::new();
    let mut odo = TupleOdometer::new(t, t);
    while let Some(f) = odo.advance() {
        let f: Vec<u8> = f.iter().map(|&x| x as u8).collect();
        if let Some(stab) = canonical_under(&group, &f) {
            out.push((f, stab));
        }
    }
    out
}

fn permutations(n: usize, f: &mut dyn FnMut(&[u8])) {
    let colour = vec![0usize; n];
    for_each_cell_perm(&colour, |p| f(p));
}

/// Chain `c` is the pair `c_0 <= c_1`; per atom each chain is in state 0
/// (false), 1 (true at `c_1` only) or 2 (true at both).
struct HtGenerator {
    atoms: Vec<String>,
    max_points: usize,
    t: usize,
    steps: Vec<(Vec<u8>, Vec<Perm>)>,
    step_order: Vec<usize>,
    next_step: usize,
    current: Option<(usize, Vec<Vec<usize>>, TupleOdometer)>,
    rng: Option<ChaCha8Rng>,
}

impl HtGenerator {
    fn new(bounds: &SearchBounds) -> Self {
        HtGenerator {
            atoms: bounds.atoms.clone(),
            max_points: bounds.max_worlds / 2,
            t: 0,
            steps: Vec::new(),
            step_order: Vec::new(),
            next_step: 0,
            current: None,
            rng: bounds.seed.map(ChaCha8Rng::seed_from_u64),
        }
    }

    fn build(&self, step: &[u8], tuple: &[usize]) -> Model {
        let t = step.len();
        let mut names = Vec::with_capacity(2 * t);
        let mut succ = Vec::with_capacity(2 * t);
        let mut order = Vec::with_capacity(t);
        for (c, &s) in step.iter().enumerate() {
            names.push(format!("{c}_0"));
            names.push(format!("{c}_1"));
            succ.push(2 * s as usize);
            succ.push(2 * s as usize + 1);
            order.push((2 * c, 2 * c + 1));
        }
        let valuation = self
            .atoms
            .iter()
            .zip(tuple)
            .map(|(a, &code)| {
                let mut set = WorldSet::with_capacity(2 * t);
                let mut code = code;
                for c in 0..t {
                    match code % 3 {
                        2 => set.extend([2 * c, 2 * c + 1]),
                        1 => set.insert(2 * c + 1),
                        _ => {}
                    }
                    code /= 3;
                }
                (a.clone(), set)
            })
            .collect();
        Model::from_parts(names, &order, succ, valuation).expect("here-and-there model is valid")
    }

    fn next_model(&mut self) -> Option<Model> {
        loop {
            if let Some((si, images, odo)) = &mut self.current {
                if let Some(tuple) = odo.advance() {
                    if least_tuple(images, tuple) {
                        let (si, tuple) = (*si, tuple.to_vec());
                        return Some(self.build(&self.steps[si].0, &tuple));
                    }
                    continue;
                }
                self.current = None;
            }
            if self.next_step < self.step_order.len() {
                let si = self.step_order[self.next_step];
                self.next_step += 1;
                let t = self.t;
                let states = 3usize.pow(t as u32);
                let images = self.steps[si]
                    .1
                    .iter()
                    .filter(|g| g.iter().enumerate().any(|(i, &x)| x as usize != i))
                    .map(|g| {
                        (0..states)
                            .map(|code| {
                                let mut out = 0;
                                let mut rest = code;
                                for c in 0..t {
                                    out += (rest % 3) * 3usize.pow(g[c] as u32);
                                    rest /= 3;
                                }
                                out
                            })
                            .collect()
                    })
                    .collect();
                self.current = Some((si, images, TupleOdometer::new(self.atoms.len(), states)));
                continue;
            }
            if self.t >= self.max_points {
                return None;
            }
            self.t += 1;
            self.steps = canonical_step_functions(self.t);
            self.step_order = (0..self.steps.len()).collect();
            if let Some(rng) = &mut self.rng {
                self.step_order.shuffle(rng);
            }
            self.next_step = 0;
        }
    }
}

enum Generator {
    General(Box<GeneralGenerator>),
    HereAndThere(HtGenerator),
}

/// Stream of models of a class, one per isomorphism class, in increasing
/// world count. Stops after `limit` models and raises [`limit_reached`].
///
/// [`limit_reached`]: ModelStream::limit_reached
pub struct ModelStream {
    generator: Generator,
    limit: u64,
    visited: u64,
    limit_reached: bool,
}

impl ModelStream {
    pub fn visited(&self) -> u64 {
        self.visited
    }

    pub fn limit_reached(&self) -> bool {
        self.limit_reached
    }
}

impl Iterator for ModelStream {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        if self.limit_reached {
            return None;
        }
        let m = match &mut self.generator {
            Generator::General(g) => g.next_model(),
            Generator::HereAndThere(g) => g.next_model(),
        }?;
        if self.visited >= self.limit {
            self.limit_reached = true;
            return None;
        }
        self.visited += 1;
        Some(m)
    }
}

pub fn enumerate_models(bounds: &SearchBounds) -> ModelStream {
    let generator = match bounds.frame_class {
        FrameClass::HereAndThere => Generator::HereAndThere(HtGenerator::new(bounds)),
        _ => Generator::General(Box::new(GeneralGenerator::new(bounds))),
    };
    ModelStream {
        generator,
        limit: bounds.limit.unwrap_or(DEFAULT_LIMIT),
        visited: 0,
        limit_reached: false,
    }
}

fn settle(stream: &ModelStream, witness: Option<Counterexample>, visited: u64) -> SearchResult {
    let verdict = match (&witness, stream.limit_reached()) {
        (Some(_), _) => Verdict::Found,
        (None, true) => Verdict::LimitReached,
        (None, false) => Verdict::Exhausted,
    };
    SearchResult {
        verdict,
        witness,
        visited,
    }
}

/// Searches for a model and world falsifying `f`.
pub fn find_countermodel(f: &Formula, bounds: &SearchBounds) -> SearchResult {
    find_countermodels(std::slice::from_ref(f), bounds).pop().unwrap()
}

/// [`find_countermodel`] for several formulas in one enumeration pass. Each
/// result counts the models visited until its own witness was found.
pub fn find_countermodels(formulas: &[Formula], bounds: &SearchBounds) -> Vec<SearchResult> {
    search_batch(formulas.len(), bounds, |checker, i| {
        let ext = checker.extension(&formulas[i]);
        checker.model().worlds().find(|w| !ext.contains(w.index()))
    })
}

/// Searches for a model and world where `f` and `g` disagree.
pub fn check_equivalence(f: &Formula, g: &Formula, bounds: &SearchBounds) -> SearchResult {
    check_equivalences(&[(f.clone(), g.clone())], bounds).pop().unwrap()
}

pub fn check_equivalences(pairs: &[(Formula, Formula)], bounds: &SearchBounds) -> Vec<SearchResult> {
    search_batch(pairs.len(), bounds, |checker, i| {
        let (f, g) = &pairs[i];
        let (ef, eg) = (checker.extension(f), checker.extension(g));
        checker
            .model()
            .worlds()
            .find(|w| ef.contains(w.index()) != eg.contains(w.index()))
    })
}

fn search_batch(
    count: usize,
    bounds: &SearchBounds,
    mut probe: impl FnMut(&Checker<'_>, usize) -> Option<WorldId>,
) -> Vec<SearchResult> {
    let mut stream = enumerate_models(bounds);
    let mut found: Vec<Option<(Counterexample, u64)>> = vec![None; count];
    let mut open = count;
    while open > 0 {
        let Some(model) = stream.next() else { break };
        let checker = Checker::new(&model);
        for (i, slot) in found.iter_mut().enumerate() {
            if slot.is_none() {
                if let Some(world) = probe(&checker, i) {
                    *slot = Some((
                        Counterexample {
                            model: model.clone(),
                            world,
                        },
                        stream.visited(),
                    ));
                    open -= 1;
                }
            }
        }
    }
    let total = stream.visited();
    found
        .into_iter()
        .map(|slot| match slot {
            Some((w, visited)) => settle(&stream, Some(w), visited),
            None => settle(&stream, None, total),
        })
        .collect()
}

/// The push rules whose instances survive exhaustive search over persistent
/// models with up to four worlds and atoms `p`, `q`.
pub fn verify_push_rules() -> PushRules {
    let pairs: Vec<(Formula, Formula)> = PushRule::ALL.iter().map(|r| r.instance()).collect();
    let bounds = SearchBounds::new(FrameClass::Persistent, 4, ["p", "q"]);
    let results = check_equivalences(&pairs, &bounds);
    PushRules::from_rules(
        PushRule::ALL
            .into_iter()
            .zip(results)
            .filter(|(_, r)| r.is_exhausted())
            .map(|(rule, _)| rule),
    )
}

// ---------------------------------------------------------------------------
// Random models

/// A random expanding model with `1..=max_worlds` worlds.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, max_worlds: usize, atoms: &[&str]) -> Model {
    let n = rng.gen_range(1..=max_worlds.max(1));
    // Edges only go from lower to higher index, so the closure is a partial order.
    let mut up: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.35) {
                edges.push((i, j));
                up[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if up[i][k] && up[k][j] {
                    up[i][j] = true;
                }
            }
        }
    }
    let mut succ = vec![0usize; n];
    assert!(random_successor(rng, &up, &mut succ, 0), "a constant successor always exists");
    let valuation = atoms
        .iter()
        .map(|a| {
            let mut set = WorldSet::with_capacity(n);
            for w in 0..n {
                if rng.gen_bool(0.4) {
                    set.extend((0..n).filter(|&v| up[w][v]));
                }
            }
            (a.to_string(), set)
        })
        .collect();
    Model::from_parts((0..n).map(world_name).collect(), &edges, succ, valuation)
        .expect("random model is valid")
}

fn random_successor<R: Rng + ?Sized>(rng: &mut R, up: &[Vec<bool>], succ: &mut [usize], k: usize) -> bool {
    let n = up.len();
    if k == n {
        return true;
    }
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.shuffle(rng);
    for c in candidates {
        let ok = (0..k).all(|i| (!up[i][k] || up[succ[i]][c]) && (!up[k][i] || up[c][succ[i]]));
        if ok {
            succ[k] = c;
            if random_successor(rng, up, succ, k + 1) {
                return true;
            }
        }
    }
    false
}
