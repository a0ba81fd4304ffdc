//! Abstract syntax of the temporal language, its concrete text syntax, and
//! the syntactic measures and rewrites used throughout the crate.
//!
//! Concrete syntax, lowest to highest precedence:
//!
//! ```text
//! a -> b          implication (right-associative)
//! a | b           disjunction (left-associative)
//! a & b           conjunction (left-associative)
//! a U b, a R b    until / release (right-associative)
//! X a, F a, G a   next / eventually / henceforth; ~a is a -> false
//! p, false, true, ( a )
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Bottom,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Henceforth(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    /// `false -> false`.
    pub fn top() -> Formula {
        Formula::Bottom.implies(Formula::Bottom)
    }

    /// `self -> false`.
    pub fn negate(self) -> Formula {
        self.implies(Formula::Bottom)
    }

    pub fn and(self, rhs: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    /// `(self -> rhs) & (rhs -> self)`.
    pub fn iff(self, rhs: Formula) -> Formula {
        self.clone().implies(rhs.clone()).and(rhs.implies(self))
    }

    pub fn next(self) -> Formula {
        Formula::Next(Box::new(self))
    }

    pub fn eventually(self) -> Formula {
        Formula::Eventually(Box::new(self))
    }

    pub fn henceforth(self) -> Formula {
        Formula::Henceforth(Box::new(self))
    }

    pub fn until(self, rhs: Formula) -> Formula {
        Formula::Until(Box::new(self), Box::new(rhs))
    }

    pub fn release(self, rhs: Formula) -> Formula {
        Formula::Release(Box::new(self), Box::new(rhs))
    }

    /// Number of connectives; atoms and `false` count zero.
    pub fn length(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bottom => 0,
            Formula::Next(a) | Formula::Eventually(a) | Formula::Henceforth(a) => 1 + a.length(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => 1 + a.length() + b.length(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Bottom => {}
            Formula::Next(a) | Formula::Eventually(a) | Formula::Henceforth(a) => {
                a.collect_atoms(out)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// The least fragment whose connectives cover every connective used here.
    pub fn fragment(&self) -> Fragment {
        Fragment::least_containing(self.connectives())
    }

    fn connectives(&self) -> u8 {
        match self {
            Formula::Atom(_) | Formula::Bottom => 0,
            Formula::Next(a) => a.connectives(),
            Formula::Eventually(a) => Fragment::DIAMOND | a.connectives(),
            Formula::Henceforth(a) => Fragment::BOX | a.connectives(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.connectives() | b.connectives()
            }
            Formula::Until(a, b) => Fragment::UNTIL | a.connectives() | b.connectives(),
            Formula::Release(a, b) => Fragment::RELEASE | a.connectives() | b.connectives(),
        }
    }

    /// Uniform substitution of formulas for atoms; unmapped atoms stay.
    pub fn instantiate(&self, assignment: &BTreeMap<String, Formula>) -> Formula {
        self.map_atoms(&|p| assignment.get(p).cloned())
    }

    fn map_atoms(&self, f: &dyn Fn(&str) -> Option<Formula>) -> Formula {
        match self {
            Formula::Atom(p) => f(p).unwrap_or_else(|| self.clone()),
            Formula::Bottom => Formula::Bottom,
            Formula::And(a, b) => a.map_atoms(f).and(b.map_atoms(f)),
            Formula::Or(a, b) => a.map_atoms(f).or(b.map_atoms(f)),
            Formula::Implies(a, b) => a.map_atoms(f).implies(b.map_atoms(f)),
            Formula::Next(a) => a.map_atoms(f).next(),
            Formula::Eventually(a) => a.map_atoms(f).eventually(),
            Formula::Henceforth(a) => a.map_atoms(f).henceforth(),
            Formula::Until(a, b) => a.map_atoms(f).until(b.map_atoms(f)),
            Formula::Release(a, b) => a.map_atoms(f).release(b.map_atoms(f)),
        }
    }

    /// Rewrites every `G a` into `false R a`.
    pub fn henceforth_as_release(&self) -> Formula {
        match self {
            Formula::Atom(_) | Formula::Bottom => self.clone(),
            Formula::And(a, b) => a.henceforth_as_release().and(b.henceforth_as_release()),
            Formula::Or(a, b) => a.henceforth_as_release().or(b.henceforth_as_release()),
            Formula::Implies(a, b) => a.henceforth_as_release().implies(b.henceforth_as_release()),
            Formula::Next(a) => a.henceforth_as_release().next(),
            Formula::Eventually(a) => a.henceforth_as_release().eventually(),
            Formula::Henceforth(a) => Formula::Bottom.release(a.henceforth_as_release()),
            Formula::Until(a, b) => a.henceforth_as_release().until(b.henceforth_as_release()),
            Formula::Release(a, b) => a.henceforth_as_release().release(b.henceforth_as_release()),
        }
    }

    /// True when every `X` is applied to an atom, possibly through further `X`s.
    pub fn is_next_normal(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Bottom => true,
            Formula::Next(a) => a.is_next_chain(),
            Formula::Eventually(a) | Formula::Henceforth(a) => a.is_next_normal(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => a.is_next_normal() && b.is_next_normal(),
        }
    }

    fn is_next_chain(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Next(a) => a.is_next_chain(),
            _ => false,
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Sublanguages: Booleans and `X` plus the named temporal connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fragment {
    Next,
    Diamond,
    Box,
    DiamondBox,
    Until,
    Release,
    Full,
}

impl Fragment {
    const DIAMOND: u8 = 1;
    const BOX: u8 = 2;
    const UNTIL: u8 = 4;
    const RELEASE: u8 = 8;

    pub const ALL: [Fragment; 7] = [
        Fragment::Next,
        Fragment::Diamond,
        Fragment::Box,
        Fragment::DiamondBox,
        Fragment::Until,
        Fragment::Release,
        Fragment::Full,
    ];

    fn connectives(self) -> u8 {
        match self {
            Fragment::Next => 0,
            Fragment::Diamond => Self::DIAMOND,
            Fragment::Box => Self::BOX,
            Fragment::DiamondBox => Self::DIAMOND | Self::BOX,
            Fragment::Until => Self::UNTIL,
            Fragment::Release => Self::RELEASE,
            Fragment::Full => Self::DIAMOND | Self::BOX | Self::UNTIL | Self::RELEASE,
        }
    }

    fn least_containing(used: u8) -> Fragment {
        // ALL is ordered so that the first match is the least one.
        Self::ALL
            .into_iter()
            .find(|f| used & !f.connectives() == 0)
            .unwrap_or(Fragment::Full)
    }

    /// Lattice order: `self` is a sublanguage of `other`.
    pub fn is_within(self, other: Fragment) -> bool {
        self.connectives() & !other.connectives() == 0
    }

    pub fn allows_eventually(self) -> bool {
        self.connectives() & Self::DIAMOND != 0
    }

    pub fn allows_henceforth(self) -> bool {
        self.connectives() & Self::BOX != 0
    }

    pub fn allows_until(self) -> bool {
        self.connectives() & Self::UNTIL != 0
    }

    pub fn allows_release(self) -> bool {
        self.connectives() & Self::RELEASE != 0
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Fragment::Next => "L_X",
            Fragment::Diamond => "L_F",
            Fragment::Box => "L_G",
            Fragment::DiamondBox => "L_FG",
            Fragment::Until => "L_U",
            Fragment::Release => "L_R",
            Fragment::Full => "L",
        };
        f.write_str(s)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty formula")]
    Empty,
    #[error("column {column}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        /// 1-based character column.
        column: usize,
        expected: Vec<String>,
        found: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    False,
    True,
    Iff,
    Arrow,
    Or,
    And,
    Until,
    Release,
    Next,
    Eventually,
    Henceforth,
    Not,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("atom `{s}`"),
            Token::False => "`false`".into(),
            Token::True => "`true`".into(),
            Token::Iff => "`<->`".into(),
            Token::Arrow => "`->`".into(),
            Token::Or => "`|`".into(),
            Token::And => "`&`".into(),
            Token::Until => "`U`".into(),
            Token::Release => "`R`".into(),
            Token::Next => "`X`".into(),
            Token::Eventually => "`F`".into(),
            Token::Henceforth => "`G`".into(),
            Token::Not => "`~`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            'a'..='z' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "false" => Token::False,
                    "true" => Token::True,
                    _ => Token::Ident(word),
                };
                out.push((tok, col));
                continue;
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Token::Iff
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Token::Arrow
            }
            '|' => Token::Or,
            '&' => Token::And,
            'U' => Token::Until,
            'R' => Token::Release,
            'X' => Token::Next,
            'F' => Token::Eventually,
            'G' => Token::Henceforth,
            '~' => Token::Not,
            '(' => Token::LParen,
            ')' => Token::RParen,
            other => {
                return Err(ParseError::Syntax {
                    column: col,
                    expected: vec!["a formula token".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        out.push((tok, col));
        i += 1;
    }
    out.push((Token::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, column) = &self.tokens[self.pos];
        ParseError::Syntax {
            column: *column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    /// `a <-> b` abbreviates `(a -> b) & (b -> a)` and does not chain.
    fn equivalence(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implication()?;
        if *self.peek() == Token::Iff {
            self.bump();
            let rhs = self.implication()?;
            return Ok(lhs.iff(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Token::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.bump();
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.binary_temporal()?;
        while *self.peek() == Token::And {
            self.bump();
            lhs = lhs.and(self.binary_temporal()?);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Token::Until => {
                self.bump();
                Ok(lhs.until(self.binary_temporal()?))
            }
            Token::Release => {
                self.bump();
                Ok(lhs.release(self.binary_temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Token::Next => {
                self.bump();
                Ok(self.unary()?.next())
            }
            Token::Eventually => {
                self.bump();
                Ok(self.unary()?.eventually())
            }
            Token::Henceforth => {
                self.bump();
                Ok(self.unary()?.henceforth())
            }
            Token::Not => {
                self.bump();
                Ok(self.unary()?.negate())
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Token::False => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Token::True => {
                self.bump();
                Ok(Formula::top())
            }
            Token::LParen => {
                self.bump();
                let inner = self.equivalence()?;
                if *self.peek() != Token::RParen {
                    return Err(self.error(&["`)`", "a binary operator"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(&["atom", "`false`", "`true`", "`(`", "a unary operator"])),
        }
    }
}

pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let tokens = lex(input)?;
    if tokens.len() == 1 {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.equivalence()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(&["a binary operator", "end of input"]));
    }
    Ok(f)
}

/// Reads one formula per non-empty line; `#` starts a comment.
pub fn parse_formula_list(input: &str) -> Result<Vec<Formula>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        out.push(parse_formula(text).map_err(|e| (i + 1, e))?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Printing

const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_TEMPORAL: u8 = 4;
const PREC_UNARY: u8 = 5;
const PREC_ATOMIC: u8 = 6;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_) | Formula::Bottom => PREC_ATOMIC,
        Formula::Implies(a, b) if **b == Formula::Bottom => {
            if **a == Formula::Bottom {
                PREC_ATOMIC
            } else {
                PREC_UNARY
            }
        }
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        Formula::Until(..) | Formula::Release(..) => PREC_TEMPORAL,
        Formula::Next(_) | Formula::Eventually(_) | Formula::Henceforth(_) => PREC_UNARY,
    }
}

fn write_operand(out: &mut String, f: &Formula, parens: bool) {
    if parens {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_unary(out: &mut String, op: &str, sub: &Formula) {
    out.push_str(op);
    if precedence(sub) >= PREC_UNARY {
        if op != "~" {
            out.push(' ');
        }
        write_formula(out, sub);
    } else {
        write_operand(out, sub, true);
    }
}

fn write_binary(out: &mut String, a: &Formula, op: &str, b: &Formula, prec: u8, right_assoc: bool) {
    let (pa, pb) = (precedence(a), precedence(b));
    let left_parens = if right_assoc { pa <= prec } else { pa < prec };
    let right_parens = if right_assoc { pb < prec } else { pb <= prec };
    write_operand(out, a, left_parens);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write_operand(out, b, right_parens);
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::Atom(p) => out.push_str(p),
        Formula::Bottom => out.push_str("false"),
        Formula::Implies(a, b) if **b == Formula::Bottom => {
            if **a == Formula::Bottom {
                out.push_str("true");
            } else {
                write_unary(out, "~", a);
            }
        }
        Formula::Implies(a, b) => write_binary(out, a, "->", b, PREC_IMPLIES, true),
        Formula::Or(a, b) => write_binary(out, a, "|", b, PREC_OR, false),
        Formula::And(a, b) => write_binary(out, a, "&", b, PREC_AND, false),
        Formula::Until(a, b) => write_binary(out, a, "U", b, PREC_TEMPORAL, true),
        Formula::Release(a, b) => write_binary(out, a, "R", b, PREC_TEMPORAL, true),
        Formula::Next(a) => write_unary(out, "X", a),
        Formula::Eventually(a) => write_unary(out, "F", a),
        Formula::Henceforth(a) => write_unary(out, "G", a),
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

// ---------------------------------------------------------------------------
// Next-normal form

/// Candidate rewrites that push `X` through a connective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PushRule {
    Bottom,
    And,
    Or,
    Implies,
    Eventually,
    Henceforth,
    Until,
    Release,
}

impl PushRule {
    pub const ALL: [PushRule; 8] = [
        PushRule::Bottom,
        PushRule::And,
        PushRule::Or,
        PushRule::Implies,
        PushRule::Eventually,
        PushRule::Henceforth,
        PushRule::Until,
        PushRule::Release,
    ];

    /// The rewrite as a pair `(X applied outside, X pushed inside)` over `p`, `q`.
    pub fn instance(self) -> (Formula, Formula) {
        let p = || Formula::atom("p");
        let q = || Formula::atom("q");
        match self {
            PushRule::Bottom => (Formula::Bottom.next(), Formula::Bottom),
            PushRule::And => (p().and(q()).next(), p().next().and(q().next())),
            PushRule::Or => (p().or(q()).next(), p().next().or(q().next())),
            PushRule::Implies => (p().implies(q()).next(), p().next().implies(q().next())),
            PushRule::Eventually => (p().eventually().next(), p().next().eventually()),
            PushRule::Henceforth => (p().henceforth().next(), p().next().henceforth()),
            PushRule::Until => (p().until(q()).next(), p().next().until(q().next())),
            PushRule::Release => (p().release(q()).next(), p().next().release(q().next())),
        }
    }
}

/// The set of push rules a normal-form rewrite may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushRules {
    enabled: BTreeSet<PushRule>,
}

impl PushRules {
    pub fn all() -> PushRules {
        PushRules {
            enabled: PushRule::ALL.into_iter().collect(),
        }
    }

    pub fn from_rules(rules: impl IntoIterator<Item = PushRule>) -> PushRules {
        PushRules {
            enabled: rules.into_iter().collect(),
        }
    }

    pub fn allows(&self, rule: PushRule) -> bool {
        self.enabled.contains(&rule)
    }

    pub fn rules(&self) -> impl Iterator<Item = PushRule> + '_ {
        self.enabled.iter().copied()
    }

    /// Rules whose instance was confirmed equivalent by exhaustive search over
    /// persistent models with up to four worlds. Computed once per process.
    pub fn verified() -> &'static PushRules {
        static VERIFIED: OnceLock<PushRules> = OnceLock::new();
        VERIFIED.get_or_init(crate::search::verify_push_rules)
    }
}

/// Pushes every `X` down to atoms using the verified rule set.
pub fn next_normal_form(f: &Formula) -> Formula {
    next_normal_form_with(f, PushRules::verified())
}

/// Like [`next_normal_form`], with an explicit rule set. An `X` that would
/// need a disabled rule is left in place.
pub fn next_normal_form_with(f: &Formula, rules: &PushRules) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Bottom => f.clone(),
        Formula::And(a, b) => next_normal_form_with(a, rules).and(next_normal_form_with(b, rules)),
        Formula::Or(a, b) => next_normal_form_with(a, rules).or(next_normal_form_with(b, rules)),
        Formula::Implies(a, b) => {
            next_normal_form_with(a, rules).implies(next_normal_form_with(b, rules))
        }
        Formula::Eventually(a) => next_normal_form_with(a, rules).eventually(),
        Formula::Henceforth(a) => next_normal_form_with(a, rules).henceforth(),
        Formula::Until(a, b) => next_normal_form_with(a, rules).until(next_normal_form_with(b, rules)),
        Formula::Release(a, b) => {
            next_normal_form_with(a, rules).release(next_normal_form_with(b, rules))
        }
        Formula::Next(a) => push_next(next_normal_form_with(a, rules), rules),
    }
}

// `f` is already normalized; returns a normalized equivalent of `X f`.
fn push_next(f: Formula, rules: &PushRules) -> Formula {
    let rule = match &f {
        Formula::Atom(_) | Formula::Next(_) => return f.next(),
        Formula::Bottom => PushRule::Bottom,
        Formula::And(..) => PushRule::And,
        Formula::Or(..) => PushRule::Or,
        Formula::Implies(..) => PushRule::Implies,
        Formula::Eventually(_) => PushRule::Eventually,
        Formula::Henceforth(_) => PushRule::Henceforth,
        Formula::Until(..) => PushRule::Until,
        Formula::Release(..) => PushRule::Release,
    };
    if !rules.allows(rule) {
        return f.next();
    }
    match f {
        Formula::Bottom => Formula::Bottom,
        Formula::And(a, b) => push_next(*a, rules).and(push_next(*b, rules)),
        Formula::Or(a, b) => push_next(*a, rules).or(push_next(*b, rules)),
        Formula::Implies(a, b) => push_next(*a, rules).implies(push_next(*b, rules)),
        Formula::Eventually(a) => push_next(*a, rules).eventually(),
        Formula::Henceforth(a) => push_next(*a, rules).henceforth(),
        Formula::Until(a, b) => push_next(*a, rules).until(push_next(*b, rules)),
        Formula::Release(a, b) => push_next(*a, rules).release(push_next(*b, rules)),
        Formula::Atom(_) | Formula::Next(_) => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Generation

/// Every formula of the fragment with length at most `max_len`, built from the
/// given atoms and `false`. Ordered by length, then constructor.
pub fn enumerate_formulas(max_len: usize, atoms: &[&str], fragment: Fragment) -> Vec<Formula> {
    let mut by_len: Vec<Vec<Formula>> = Vec::with_capacity(max_len + 1);
    let mut leaves: Vec<Formula> = atoms.iter().map(|a| Formula::atom(*a)).collect();
    leaves.push(Formula::Bottom);
    by_len.push(leaves);
    for len in 1..=max_len {
        let mut level = Vec::new();
        for sub in &by_len[len - 1] {
            for op in unary_ops(fragment) {
                level.push(op(sub.clone()));
            }
        }
        for left_len in 0..len {
            let right_len = len - 1 - left_len;
            for a in &by_len[left_len] {
                for b in &by_len[right_len] {
                    for op in binary_ops(fragment) {
                        level.push(op(a.clone(), b.clone()));
                    }
                }
            }
        }
        by_len.push(level);
    }
    by_len.into_iter().flatten().collect()
}

type UnaryOp = fn(Formula) -> Formula;
type BinaryOp = fn(Formula, Formula) -> Formula;

fn unary_ops(fragment: Fragment) -> Vec<UnaryOp> {
    let mut ops: Vec<UnaryOp> = vec![Formula::next];
    if fragment.allows_eventually() {
        ops.push(Formula::eventually);
    }
    if fragment.allows_henceforth() {
        ops.push(Formula::henceforth);
    }
    ops
}

fn binary_ops(fragment: Fragment) -> Vec<BinaryOp> {
    let mut ops: Vec<BinaryOp> = vec![Formula::and, Formula::or, Formula::implies];
    if fragment.allows_until() {
        ops.push(Formula::until);
    }
    if fragment.allows_release() {
        ops.push(Formula::release);
    }
    ops
}

/// A random fragment formula; its length is drawn uniformly from `0..=max_len`.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    max_len: usize,
    atoms: &[&str],
    fragment: Fragment,
) -> Formula {
    let len = rng.gen_range(0..=max_len);
    random_formula_of_length(rng, len, atoms, fragment)
}

pub fn random_formula_of_length<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    atoms: &[&str],
    fragment: Fragment,
) -> Formula {
    if len == 0 {
        let pick = rng.gen_range(0..=atoms.len());
        return match atoms.get(pick) {
            Some(a) => Formula::atom(*a),
            None => Formula::Bottom,
        };
    }
    let unary = unary_ops(fragment);
    let binary = binary_ops(fragment);
    let choice = rng.gen_range(0..unary.len() + binary.len());
    if choice < unary.len() {
        unary[choice](random_formula_of_length(rng, len - 1, atoms, fragment))
    } else {
        let left = rng.gen_range(0..len);
        let a = random_formula_of_length(rng, left, atoms, fragment);
        let b = random_formula_of_length(rng, len - 1 - left, atoms, fragment);
        binary[choice - unary.len()](a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn atom(s: &str) -> Formula {
        Formula::atom(s)
    }

    #[test]
    fn precedence_and_desugaring() {
        assert_eq!(p("F p -> G q"), atom("p").eventually().implies(atom("q").henceforth()));
        assert_eq!(p("~p"), atom("p").implies(Formula::Bottom));
        assert_eq!(p("p U q U r"), atom("p").until(atom("q").until(atom("r"))));
        assert_eq!(p("true"), Formula::Bottom.implies(Formula::Bottom));
        assert_eq!(p("a -> b -> c"), atom("a").implies(atom("b").implies(atom("c"))));
        assert_eq!(p("a | b & c"), atom("a").or(atom("b").and(atom("c"))));
        assert_eq!(p("a & b & c"), atom("a").and(atom("b")).and(atom("c")));
        assert_eq!(p("X p U q"), atom("p").next().until(atom("q")));
        assert_eq!(p("p U q & r"), atom("p").until(atom("q")).and(atom("r")));
        assert_eq!(p("XFp"), atom("p").eventually().next());
        assert_eq!(p("p <-> q -> r"), atom("p").iff(atom("q").implies(atom("r"))));
        assert!(parse_formula("p <-> q <-> r").is_err());
    }

    #[test]
    fn parse_errors_report_position() {
        assert_eq!(parse_formula("   "), Err(ParseError::Empty));
        match parse_formula("p & ") {
            Err(ParseError::Syntax { column, .. }) => assert_eq!(column, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("(p | q") {
            Err(ParseError::Syntax { found, expected, .. }) => {
                assert_eq!(found, "end of input");
                assert!(expected.iter().any(|e| e == "`)`"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_formula("p q").is_err());
        assert!(parse_formula("P").is_err());
        assert!(parse_formula("p $ q").is_err());
    }

    #[test]
    fn printing() {
        assert_eq!(print_formula(&atom("p").negate()), "~p");
        assert_eq!(print_formula(&atom("p").until(atom("q"))), "p U q");
        assert_eq!(print_formula(&atom("p").implies(atom("q")).next()), "X(p -> q)");
        assert_eq!(print_formula(&Formula::top()), "true");
        assert_eq!(print_formula(&p("(a -> b) -> c")), "(a -> b) -> c");
        assert_eq!(print_formula(&p("a & (b & c)")), "a & (b & c)");
        assert_eq!(print_formula(&p("(p U q) U r")), "(p U q) U r");
        assert_eq!(print_formula(&p("X ~p")), "X ~p");
        assert_eq!(print_formula(&p("~(p | q)")), "~(p | q)");
    }

    #[test]
    fn lengths() {
        assert_eq!(atom("p").length(), 0);
        assert_eq!(p("~p").length(), 1);
        assert_eq!(p("G(p -> X p) -> (p -> G p)").length(), 6);
    }

    #[test]
    fn fragments() {
        assert_eq!(p("X p & q").fragment(), Fragment::Next);
        assert_eq!(p("F p").fragment(), Fragment::Diamond);
        assert_eq!(p("G p").fragment(), Fragment::Box);
        assert_eq!(p("F p | G q").fragment(), Fragment::DiamondBox);
        assert_eq!(p("p U q").fragment(), Fragment::Until);
        assert_eq!(p("p R q").fragment(), Fragment::Release);
        assert_eq!(p("p U (G q)").fragment(), Fragment::Full);
        assert!(Fragment::Next.is_within(Fragment::Until));
        assert!(Fragment::Diamond.is_within(Fragment::DiamondBox));
        assert!(!Fragment::Diamond.is_within(Fragment::Until));
        assert!(Fragment::Release.is_within(Fragment::Full));
    }

    #[test]
    fn instantiation() {
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), atom("p"));
        m.insert("b".to_string(), atom("q"));
        assert_eq!(p("G(G a -> b)").instantiate(&m), p("G(G p -> q)"));
        assert_eq!(p("a").instantiate(&BTreeMap::new()), p("a"));
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), p("p & q"));
        assert_eq!(p("F a").instantiate(&m), p("F(p & q)"));
    }

    #[test]
    fn normal_form_with_all_rules() {
        let rules = PushRules::all();
        assert_eq!(next_normal_form_with(&p("X(p & q)"), &rules), p("X p & X q"));
        assert_eq!(next_normal_form_with(&p("p"), &rules), p("p"));
        assert_eq!(next_normal_form_with(&p("X(p -> q)"), &rules), p("X p -> X q"));
        assert_eq!(next_normal_form_with(&p("X X false"), &rules), p("false"));
        assert_eq!(
            next_normal_form_with(&p("X(F p U X G q)"), &rules),
            p("F X p U G X X q")
        );
    }

    #[test]
    fn normal_form_leaves_disabled_rules() {
        let rules = PushRules::from_rules([PushRule::And]);
        let nf = next_normal_form_with(&p("X(p & F q)"), &rules);
        assert_eq!(nf, p("X p & X F q"));
        assert!(!nf.is_next_normal());
    }

    #[test]
    fn enumeration_counts() {
        // Leaves p, q, false; unary X, F, G; five binary connectives.
        let all = enumerate_formulas(1, &["p", "q"], Fragment::Full);
        assert_eq!(all.len(), 3 + 3 * 3 + 5 * 9);
        let next_only = enumerate_formulas(1, &["p"], Fragment::Next);
        assert_eq!(next_only.len(), 2 + 2 + 3 * 4);
        assert!(all.iter().all(|f| f.length() <= 1));
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Bottom),
            "[a-c][a-z0-9_]{0,2}"
                .prop_filter("keyword", |s| s != "true" && s != "false")
                .prop_map(Formula::Atom),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.implies(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.until(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.release(b)),
                inner.clone().prop_map(Formula::next),
                inner.clone().prop_map(Formula::eventually),
                inner.prop_map(Formula::henceforth),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let text = print_formula(&f);
            prop_assert_eq!(parse_formula(&text), Ok(f));
        }

        #[test]
        fn atom_for_atom_substitution_preserves_length(f in arb_formula()) {
            let mut m = BTreeMap::new();
            for a in f.atoms() {
                m.insert(a, Formula::atom("z"));
            }
            prop_assert_eq!(f.instantiate(&m).length(), f.length());
        }

        #[test]
        fn substitution_never_shortens(f in arb_formula(), g in arb_formula()) {
            let mut m = BTreeMap::new();
            if let Some(a) = f.atoms().into_iter().next() {
                m.insert(a, g);
            }
            prop_assert!(f.instantiate(&m).length() >= f.length());
        }

        #[test]
        fn full_rules_give_normal_form(f in arb_formula()) {
            prop_assert!(next_normal_form_with(&f, &PushRules::all()).is_next_normal());
        }
    }
}
