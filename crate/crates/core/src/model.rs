//! Finite dynamic posets with monotone valuations.
//!
//! A model is a set of worlds with a partial order `<=`, a successor
//! function `S` that is forward confluent (`w <= v` implies `S(w) <= S(v)`),
//! and a valuation whose atom extensions are upward closed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type WorldSet = FixedBitSet;

/// Dense index of a world inside one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldId(pub usize);

impl WorldId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("world `{0}` is declared twice")]
    DuplicateWorld(String),
    #[error("unknown world `{world}` in {context}")]
    UnknownWorld { world: String, context: &'static str },
    #[error("world `{0}` has no successor")]
    MissingSuccessor(String),
    #[error("world `{0}` is given two different successors")]
    ConflictingSuccessor(String),
    #[error("order is not antisymmetric: `{0}` <= `{1}` and `{1}` <= `{0}`")]
    Antisymmetry(String, String),
    #[error(
        "successor is not forward confluent: `{lower}` <= `{upper}` but S({lower}) = `{lower_succ}` is not below S({upper}) = `{upper_succ}`"
    )]
    ForwardConfluence {
        lower: String,
        upper: String,
        lower_succ: String,
        upper_succ: String,
    },
    #[error("valuation of `{atom}` is not monotone: true at `{lower}` but false at `{upper}` >= `{lower}`")]
    NonMonotone {
        atom: String,
        lower: String,
        upper: String,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameClass {
    Expanding,
    Persistent,
    HereAndThere,
}

impl FrameClass {
    /// `self` is a subclass of `other`.
    pub fn is_within(self, other: FrameClass) -> bool {
        self.rank() >= other.rank()
    }

    fn rank(self) -> u8 {
        match self {
            FrameClass::Expanding => 0,
            FrameClass::Persistent => 1,
            FrameClass::HereAndThere => 2,
        }
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameClass::Expanding => "expanding",
            FrameClass::Persistent => "persistent",
            FrameClass::HereAndThere => "here-and-there",
        })
    }
}

impl std::str::FromStr for FrameClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expanding" | "e" => Ok(FrameClass::Expanding),
            "persistent" | "p" => Ok(FrameClass::Persistent),
            "ht" | "here-and-there" => Ok(FrameClass::HereAndThere),
            other => Err(format!("unknown frame class `{other}` (expected expanding, persistent or ht)")),
        }
    }
}

/// `(lower, upper)` world pairs of a here-and-there decomposition, one per
/// point of time, plus the induced function on point indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HereAndThere {
    pub chains: Vec<(WorldId, WorldId)>,
    pub step: Vec<usize>,
}

/// Named construction input for [`Model::build`].
#[derive(Clone, Debug, Default)]
pub struct ModelBuilder {
    worlds: Vec<String>,
    order: Vec<(String, String)>,
    succ: Vec<(String, String)>,
    valuation: Vec<(String, Vec<String>)>,
}

impl ModelBuilder {
    pub fn new() -> ModelBuilder {
        ModelBuilder::default()
    }

    pub fn worlds<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.worlds.extend(names.into_iter().map(Into::into));
        self
    }

    /// Adds the generator `lower <= upper`.
    pub fn order(mut self, lower: impl Into<String>, upper: impl Into<String>) -> Self {
        self.order.push((lower.into(), upper.into()));
        self
    }

    pub fn succ(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.succ.push((from.into(), to.into()));
        self
    }

    pub fn val<I, S>(mut self, atom: impl Into<String>, worlds: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.valuation
            .push((atom.into(), worlds.into_iter().map(Into::into).collect()));
        self
    }

    pub fn build(self) -> Result<Model, ModelError> {
        let mut index = HashMap::new();
        for (i, w) in self.worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let lookup = |w: &str, context: &'static str| {
            index.get(w).copied().ok_or_else(|| ModelError::UnknownWorld {
                world: w.to_string(),
                context,
            })
        };
        let mut order = Vec::with_capacity(self.order.len());
        for (a, b) in &self.order {
            order.push((lookup(a, "order")?, lookup(b, "order")?));
        }
        let mut succ: Vec<Option<usize>> = vec![None; self.worlds.len()];
        for (a, b) in &self.succ {
            let (i, j) = (lookup(a, "succ")?, lookup(b, "succ")?);
            match succ[i] {
                Some(prev) if prev != j => return Err(ModelError::ConflictingSuccessor(a.clone())),
                _ => succ[i] = Some(j),
            }
        }
        let succ = succ
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| ModelError::MissingSuccessor(self.worlds[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut valuation = BTreeMap::new();
        for (atom, ws) in &self.valuation {
            let set: &mut WorldSet = valuation
                .entry(atom.clone())
                .or_insert_with(|| FixedBitSet::with_capacity(self.worlds.len()));
            for w in ws {
                set.insert(lookup(w, "val")?);
            }
        }
        Model::from_parts(self.worlds, &order, succ, valuation)
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    names: Vec<String>,
    index: HashMap<String, usize>,
    /// `up[w]` = worlds `v` with `w <= v`, reflexive-transitive closure.
    up: Vec<WorldSet>,
    down: Vec<WorldSet>,
    succ: Vec<usize>,
    valuation: BTreeMap<String, WorldSet>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Model) -> bool {
        self.names == other.names
            && self.up == other.up
            && self.succ == other.succ
            && self.valuation == other.valuation
    }
}

impl Eq for Model {}

impl Model {
    /// Index-level constructor: closes the order generators and validates
    /// every model invariant.
    pub fn from_parts(
        names: Vec<String>,
        order_generators: &[(usize, usize)],
        succ: Vec<usize>,
        valuation: BTreeMap<String, WorldSet>,
    ) -> Result<Model, ModelError> {
        let n = names.len();
        if n == 0 {
            return Err(ModelError::NoWorlds);
        }
        let mut index = HashMap::with_capacity(n);
        for (i, w) in names.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let unknown = |context| ModelError::UnknownWorld {
            world: "#index".into(),
            context,
        };
        if succ.len() != n {
            return Err(ModelError::MissingSuccessor(names[succ.len().min(n - 1)].clone()));
        }
        if succ.iter().any(|&s| s >= n) {
            return Err(unknown("succ"));
        }
        let mut up: Vec<WorldSet> = (0..n)
            .map(|i| {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert(i);
                s
            })
            .collect();
        for &(a, b) in order_generators {
            if a >= n || b >= n {
                return Err(unknown("order"));
            }
            up[a].insert(b);
        }
        // Warshall closure on rows.
        for k in 0..n {
            let row_k = up[k].clone();
            for row in up.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        let mut down: Vec<WorldSet> = (0..n).map(|_| FixedBitSet::with_capacity(n)).collect();
        for (i, row) in up.iter().enumerate() {
            for j in row.ones() {
                down[j].insert(i);
            }
        }
        let mut valuation = valuation;
        for set in valuation.values_mut() {
            if set.ones().any(|w| w >= n) {
                return Err(unknown("val"));
            }
            if set.len() != n {
                let mut exact = FixedBitSet::with_capacity(n);
                exact.extend(set.ones());
                *set = exact;
            }
        }
        let model = Model {
            names,
            index,
            up,
            down,
            succ,
            valuation,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks antisymmetry, forward confluence and valuation monotonicity.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.len();
        for i in 0..n {
            for j in self.up[i].ones() {
                if j != i && self.up[j].contains(i) {
                    let (a, b) = (i.min(j), i.max(j));
                    return Err(ModelError::Antisymmetry(
                        self.names[a].clone(),
                        self.names[b].clone(),
                    ));
                }
            }
        }
        for i in 0..n {
            for j in self.up[i].ones() {
                let (si, sj) = (self.succ[i], self.succ[j]);
                if !self.up[si].contains(sj) {
                    return Err(ModelError::ForwardConfluence {
                        lower: self.names[i].clone(),
                        upper: self.names[j].clone(),
                        lower_succ: self.names[si].clone(),
                        upper_succ: self.names[sj].clone(),
                    });
                }
            }
        }
        for (atom, set) in &self.valuation {
            for i in set.ones() {
                if let Some(j) = self.up[i].ones().find(|&j| !set.contains(j)) {
                    return Err(ModelError::NonMonotone {
                        atom: atom.clone(),
                        lower: self.names[i].clone(),
                        upper: self.names[j].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn worlds(&self) -> impl Iterator<Item = WorldId> {
        (0..self.len()).map(WorldId)
    }

    pub fn world(&self, name: &str) -> Option<WorldId> {
        self.index.get(name).copied().map(WorldId)
    }

    pub fn name(&self, w: WorldId) -> &str {
        &self.names[w.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn succ(&self, w: WorldId) -> WorldId {
        WorldId(self.succ[w.0])
    }

    pub fn successor_table(&self) -> &[usize] {
        &self.succ
    }

    /// `w <= v`.
    pub fn leq(&self, w: WorldId, v: WorldId) -> bool {
        self.up[w.0].contains(v.0)
    }

    /// All `v` with `w <= v`.
    pub fn up(&self, w: WorldId) -> &WorldSet {
        &self.up[w.0]
    }

    /// All `v` with `v <= w`.
    pub fn down(&self, w: WorldId) -> &WorldSet {
        &self.down[w.0]
    }

    pub fn valuation(&self) -> &BTreeMap<String, WorldSet> {
        &self.valuation
    }

    /// Extension of an atom; atoms absent from the valuation are false everywhere.
    pub fn atom_extension(&self, atom: &str) -> WorldSet {
        self.valuation
            .get(atom)
            .cloned()
            .unwrap_or_else(|| FixedBitSet::with_capacity(self.len()))
    }

    pub fn empty_set(&self) -> WorldSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> WorldSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    pub fn set_names(&self, set: &WorldSet) -> Vec<&str> {
        set.ones().map(|i| self.names[i].as_str()).collect()
    }

    /// Generating pairs of the order: the covering relation.
    pub fn covering_pairs(&self) -> Vec<(WorldId, WorldId)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in self.up[i].ones() {
                if i == j {
                    continue;
                }
                let between = self.up[i]
                    .ones()
                    .any(|k| k != i && k != j && self.up[k].contains(j));
                if !between {
                    out.push((WorldId(i), WorldId(j)));
                }
            }
        }
        out
    }

    /// A witness `(w, v)` with `v >= S(w)` not reached as `S(u)` for any `u >= w`.
    pub fn backward_confluence_witness(&self) -> Option<(WorldId, WorldId)> {
        for w in 0..self.len() {
            for v in self.up[self.succ[w]].ones() {
                if !self.up[w].ones().any(|u| self.succ[u] == v) {
                    return Some((WorldId(w), WorldId(v)));
                }
            }
        }
        None
    }

    pub fn is_backward_confluent(&self) -> bool {
        self.backward_confluence_witness().is_none()
    }

    /// Decomposes the model into disjoint 2-chains `lower < upper` on which
    /// `S` acts row-wise through one function on chain indices.
    pub fn here_and_there(&self) -> Option<HereAndThere> {
        let n = self.len();
        if !n.is_multiple_of(2) {
            return None;
        }
        let mut chain_of = vec![usize::MAX; n];
        let mut chains = Vec::new();
        for w in 0..n {
            let above = self.up[w].count_ones(..);
            let below = self.down[w].count_ones(..);
            match (below, above) {
                (1, 2) => {
                    let t = self.up[w].ones().find(|&v| v != w)?;
                    if self.down[t].count_ones(..) != 2 || self.up[t].count_ones(..) != 1 {
                        return None;
                    }
                    chain_of[w] = chains.len();
                    chain_of[t] = chains.len();
                    chains.push((WorldId(w), WorldId(t)));
                }
                (2, 1) => {}
                _ => return None,
            }
        }
        if chains.len() * 2 != n {
            return None;
        }
        let mut step = Vec::with_capacity(chains.len());
        for &(lo, hi) in &chains {
            let (slo, shi) = (self.succ[lo.0], self.succ[hi.0]);
            let t = chain_of[slo];
            if chains[t] != (WorldId(slo), WorldId(shi)) {
                return None;
            }
            step.push(t);
        }
        Some(HereAndThere { chains, step })
    }

    pub fn is_here_and_there(&self) -> bool {
        self.here_and_there().is_some()
    }

    /// The smallest of the three frame classes containing this model.
    pub fn frame_class(&self) -> FrameClass {
        if self.is_here_and_there() {
            FrameClass::HereAndThere
        } else if self.is_backward_confluent() {
            FrameClass::Persistent
        } else {
            FrameClass::Expanding
        }
    }

    pub fn belongs_to(&self, class: FrameClass) -> bool {
        self.frame_class().is_within(class)
    }
}

// ---------------------------------------------------------------------------
// Text format

pub fn serialize_model(m: &Model) -> String {
    let mut out = String::new();
    out.push_str("worlds:");
    for name in &m.names {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    let order: Vec<String> = m
        .covering_pairs()
        .into_iter()
        .map(|(a, b)| format!("{} <= {}", m.name(a), m.name(b)))
        .collect();
    out.push_str("order:");
    if !order.is_empty() {
        out.push(' ');
        out.push_str(&order.join(" ; "));
    }
    out.push('\n');
    let succ: Vec<String> = m
        .worlds()
        .map(|w| format!("{} -> {}", m.name(w), m.name(m.succ(w))))
        .collect();
    out.push_str("succ: ");
    out.push_str(&succ.join(" ; "));
    out.push('\n');
    for (atom, set) in &m.valuation {
        out.push_str("val: ");
        out.push_str(atom);
        out.push_str(" @");
        for name in m.set_names(set) {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
    }
    out
}

fn is_world_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.')
}

fn is_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "true"
        && s != "false"
}

pub fn parse_model(input: &str) -> Result<Model, ModelError> {
    let mut builder = ModelBuilder::new();
    let mut saw_worlds = false;
    let fmt_err = |line: usize, message: String| ModelError::Format { line, message };
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| fmt_err(line_no, format!("expected `key: ...`, found `{line}`")))?;
        let rest = rest.trim();
        match key.trim() {
            "worlds" => {
                saw_worlds = true;
                for w in rest.split_whitespace() {
                    if !is_world_name(w) {
                        return Err(fmt_err(line_no, format!("invalid world name `{w}`")));
                    }
                    builder = builder.worlds([w]);
                }
            }
            "order" => {
                for item in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (a, b) = item.split_once("<=").ok_or_else(|| {
                        fmt_err(line_no, format!("expected `a <= b`, found `{item}`"))
                    })?;
                    builder = builder.order(a.trim(), b.trim());
                }
            }
            "succ" => {
                for item in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (a, b) = item.split_once("->").ok_or_else(|| {
                        fmt_err(line_no, format!("expected `a -> b`, found `{item}`"))
                    })?;
                    builder = builder.succ(a.trim(), b.trim());
                }
            }
            "val" => {
                let (atom, ws) = rest.split_once('@').ok_or_else(|| {
                    fmt_err(line_no, format!("expected `atom @ worlds...`, found `{rest}`"))
                })?;
                let atom = atom.trim();
                if !is_atom_name(atom) {
                    return Err(fmt_err(line_no, format!("invalid atom name `{atom}`")));
                }
                if builder.valuation.iter().any(|(a, _)| a == atom) {
                    return Err(fmt_err(line_no, format!("atom `{atom}` valued twice")));
                }
                builder = builder.val(atom, ws.split_whitespace());
            }
            other => return Err(fmt_err(line_no, format!("unknown key `{other}`"))),
        }
    }
    if !saw_worlds {
        return Err(fmt_err(1, "missing `worlds:` line".into()));
    }
    builder.build()
}

impl std::str::FromStr for Model {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_model(self))
    }
}
