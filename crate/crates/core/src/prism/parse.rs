//! Reader for the PRISM subset produced by the emitter: one `mdp` module with
//! bounded integer variables, labelled commands, action-reward items and
//! labels. The reachable part of the model is explored into an [`MdpGraph`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::emit::{action_tags, EmitMode};
use super::encode::encode_state;
use crate::labels::label_states;
use crate::model::{Atom, DomainSpec, Edge, MdpGraph, Rational, State, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrismError {
    #[error("line {line}: {message}")]
    ParseError { line: u32, message: String },
    #[error("line {line}: unsupported construct `{construct}`")]
    UnsupportedConstruct { line: u32, construct: String },
}

#[derive(Clone, Debug)]
pub struct PrismModel {
    pub vars: Vec<String>,
    /// Valuation of every explored state, index 0 being the initial one.
    pub valuations: Vec<Vec<i64>>,
    pub graph: MdpGraph,
    pub labels: BTreeMap<String, BTreeSet<usize>>,
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Num(Rational),
    Str(String),
    Sym(&'static str),
    Eof,
}

struct Lexed {
    tok: Tok,
    line: u32,
}

const SYMBOLS: &[&str] = &[
    "->", "..", "!=", "<=", ">=", "[", "]", "(", ")", ":", ";", "+", "-", "*", "/", "&", "|", "!",
    "=", "<", ">", "'", ",", "{", "}", "?",
];

fn lex(text: &str) -> Result<Vec<Lexed>, PrismError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line) = (0usize, 1u32);
    'outer: while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && b.get(i + 1) == Some(&b'/') {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Lexed {
                tok: Tok::Ident(text[start..i].to_string()),
                line,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let int: i64 = text[start..i].parse().map_err(|_| PrismError::ParseError {
                line,
                message: "number too large".into(),
            })?;
            let mut value = Rational::from_integer(int);
            if b.get(i) == Some(&b'.') && b.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                let fs = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[fs..i];
                let den = 10i64.checked_pow(digits.len() as u32);
                let num: Option<i64> = digits.parse().ok();
                match (den, num) {
                    (Some(den), Some(num)) => value += Rational::new(num, den),
                    _ => {
                        return Err(PrismError::ParseError {
                            line,
                            message: "decimal literal too long".into(),
                        })
                    }
                }
            }
            out.push(Lexed {
                tok: Tok::Num(value),
                line,
            });
            continue;
        }
        if c == b'"' {
            let start = i + 1;
            i += 1;
            while i < b.len() && b[i] != b'"' && b[i] != b'\n' {
                i += 1;
            }
            if b.get(i) != Some(&b'"') {
                return Err(PrismError::ParseError {
                    line,
                    message: "unterminated string".into(),
                });
            }
            out.push(Lexed {
                tok: Tok::Str(text[start..i].to_string()),
                line,
            });
            i += 1;
            continue;
        }
        for s in SYMBOLS {
            if text[i..].starts_with(s) {
                out.push(Lexed {
                    tok: Tok::Sym(s),
                    line,
                });
                i += s.len();
                continue 'outer;
            }
        }
        return Err(PrismError::ParseError {
            line,
            message: format!("unexpected character `{}`", c as char),
        });
    }
    out.push(Lexed {
        tok: Tok::Eof,
        line,
    });
    Ok(out)
}

#[derive(Clone, Debug)]
enum PExpr {
    Num(Rational),
    Bool(bool),
    Var(usize),
    Not(Box<PExpr>),
    Neg(Box<PExpr>),
    Bin(&'static str, Box<PExpr>, Box<PExpr>),
    Call(bool, Vec<PExpr>),
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum PVal {
    Num(Rational),
    Bool(bool),
}

impl PExpr {
    fn eval(&self, v: &[i64]) -> Option<PVal> {
        Some(match self {
            PExpr::Num(r) => PVal::Num(*r),
            PExpr::Bool(b) => PVal::Bool(*b),
            PExpr::Var(i) => PVal::Num(Rational::from_integer(v[*i])),
            PExpr::Not(e) => match e.eval(v)? {
                PVal::Bool(b) => PVal::Bool(!b),
                _ => return None,
            },
            PExpr::Neg(e) => match e.eval(v)? {
                PVal::Num(n) => PVal::Num(-n),
                _ => return None,
            },
            PExpr::Call(is_max, args) => {
                let mut acc: Option<Rational> = None;
                for a in args {
                    let PVal::Num(x) = a.eval(v)? else {
                        return None;
                    };
                    acc = Some(match acc {
                        None => x,
                        Some(y) if *is_max => y.max(x),
                        Some(y) => y.min(x),
                    });
                }
                PVal::Num(acc?)
            }
            PExpr::Bin(op, l, r) => {
                let (a, b) = (l.eval(v)?, r.eval(v)?);
                match (op, a, b) {
                    (&"&", PVal::Bool(x), PVal::Bool(y)) => PVal::Bool(x && y),
                    (&"|", PVal::Bool(x), PVal::Bool(y)) => PVal::Bool(x || y),
                    (&"=", x, y) => PVal::Bool(x == y),
                    (&"!=", x, y) => PVal::Bool(x != y),
                    (op, PVal::Num(x), PVal::Num(y)) => match *op {
                        "<" => PVal::Bool(x < y),
                        "<=" => PVal::Bool(x <= y),
                        ">" => PVal::Bool(x > y),
                        ">=" => PVal::Bool(x >= y),
                        "+" => PVal::Num(x + y),
                        "-" => PVal::Num(x - y),
                        "*" => PVal::Num(x * y),
                        "/" if !y.is_zero() => PVal::Num(x / y),
                        _ => return None,
                    },
                    _ => return None,
                }
            }
        })
    }

    fn holds(&self, v: &[i64]) -> bool {
        matches!(self.eval(v), Some(PVal::Bool(true)))
    }

    /// `x1=c1 & ... & xn=cn` covering every variable.
    fn full_valuation(&self, nvars: usize) -> Option<Vec<i64>> {
        let mut out = vec![None; nvars];
        fn walk(e: &PExpr, out: &mut Vec<Option<i64>>) -> bool {
            match e {
                PExpr::Bin("&", l, r) => walk(l, out) && walk(r, out),
                PExpr::Bin("=", l, r) => match (&**l, &**r) {
                    (PExpr::Var(i), PExpr::Num(n)) if n.is_integer() => {
                        if out[*i].is_some() {
                            return false;
                        }
                        out[*i] = Some(*n.numer());
                        true
                    }
                    _ => false,
                },
                _ => false,
            }
        }
        if !walk(self, &mut out) {
            return None;
        }
        out.into_iter().collect()
    }
}

struct Command {
    tag: String,
    guard: PExpr,
    updates: Vec<(Rational, Vec<(usize, PExpr)>)>,
}

struct RewardItem {
    tag: String,
    guard: PExpr,
    value: Rational,
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    vars: Vec<(String, i64, i64, i64)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn line(&self) -> u32 {
        self.toks[self.pos].line
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> PrismError {
        PrismError::ParseError {
            line: self.line(),
            message: message.into(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>) -> PrismError {
        PrismError::UnsupportedConstruct {
            line: self.line(),
            construct: construct.into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> Result<(), PrismError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`, found {:?}", self.peek())))
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn kw(&mut self, k: &str) -> Result<(), PrismError> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{k}`, found {:?}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, PrismError> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            other => Err(self.err(format!("expected identifier, found {other:?}"))),
        }
    }

    fn int(&mut self) -> Result<i64, PrismError> {
        let neg = self.eat_sym("-");
        match self.bump() {
            Tok::Num(n) if n.is_integer() => Ok(if neg { -*n.numer() } else { *n.numer() }),
            other => Err(self.err(format!("expected integer, found {other:?}"))),
        }
    }

    fn rational(&mut self) -> Result<Rational, PrismError> {
        let neg = self.eat_sym("-");
        let Tok::Num(n) = self.bump() else {
            return Err(self.err("expected a number"));
        };
        let mut v = n;
        if self.eat_sym("/") {
            let Tok::Num(d) = self.bump() else {
                return Err(self.err("expected a denominator"));
            };
            if d.is_zero() {
                return Err(self.err("division by zero"));
            }
            v /= d;
        }
        Ok(if neg { -v } else { v })
    }

    fn var_index(&self, name: &str) -> Result<usize, PrismError> {
        self.vars
            .iter()
            .position(|v| v.0 == name)
            .ok_or_else(|| self.err(format!("unknown variable `{name}`")))
    }

    fn expr(&mut self) -> Result<PExpr, PrismError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<PExpr, PrismError> {
        const LEVELS: &[&[&str]] = &[
            &["|"],
            &["&"],
            &["=", "!=", "<", "<=", ">", ">="],
            &["+", "-"],
            &["*", "/"],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut l = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) if LEVELS[level].contains(s) => *s,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.binary(level + 1)?;
            l = PExpr::Bin(op, Box::new(l), Box::new(r));
        }
    }

    fn unary(&mut self) -> Result<PExpr, PrismError> {
        if self.eat_sym("!") {
            return Ok(PExpr::Not(Box::new(self.unary()?)));
        }
        if self.eat_sym("-") {
            return Ok(PExpr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(PExpr::Num(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) => {
                self.bump();
                match w.as_str() {
                    "true" => Ok(PExpr::Bool(true)),
                    "false" => Ok(PExpr::Bool(false)),
                    "min" | "max" if self.is_sym("(") => {
                        self.bump();
                        let mut args = vec![self.expr()?];
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                        self.sym(")")?;
                        Ok(PExpr::Call(w == "max", args))
                    }
                    _ if self.is_sym("(") => Err(self.unsupported(format!("function `{w}`"))),
                    _ => Ok(PExpr::Var(self.var_index(&w)?)),
                }
            }
            other => Err(self.err(format!("expected expression, found {other:?}"))),
        }
    }

    fn tag(&mut self) -> Result<String, PrismError> {
        self.sym("[")?;
        let tag = if let Tok::Ident(_) = self.peek() {
            self.ident()?
        } else {
            String::new()
        };
        self.sym("]")?;
        Ok(tag)
    }

    fn command(&mut self) -> Result<Command, PrismError> {
        let line = self.line();
        let tag = self.tag()?;
        let guard = self.expr()?;
        self.sym("->")?;
        let mut updates = Vec::new();
        loop {
            let prob = if matches!(self.peek(), Tok::Num(_)) {
                let p = self.rational()?;
                self.sym(":")?;
                p
            } else {
                Rational::from_integer(1)
            };
            let mut assigns = Vec::new();
            if self.is_kw("true") {
                self.bump();
            } else {
                loop {
                    self.sym("(")?;
                    let name = self.ident()?;
                    let i = self.var_index(&name)?;
                    self.sym("'")?;
                    self.sym("=")?;
                    let e = self.expr()?;
                    self.sym(")")?;
                    assigns.push((i, e));
                    if !self.eat_sym("&") {
                        break;
                    }
                }
            }
            updates.push((prob, assigns));
            if !self.eat_sym("+") {
                break;
            }
        }
        self.sym(";")?;
        let sum = updates.iter().fold(Rational::zero(), |a, (p, _)| a + p);
        if sum != Rational::from_integer(1) || updates.iter().any(|(p, _)| p.is_negative()) {
            return Err(PrismError::ParseError {
                line,
                message: format!(
                    "probabilities of command [{tag}] sum to {}/{}",
                    sum.numer(),
                    sum.denom()
                ),
            });
        }
        Ok(Command {
            tag,
            guard,
            updates,
        })
    }
}

/// Parses an emitted model and explores its reachable states.
pub fn parse_prism_subset(text: &str) -> Result<PrismModel, PrismError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
    };
    match p.peek().clone() {
        Tok::Ident(w) if w == "mdp" || w == "nondeterministic" => {
            p.bump();
        }
        Tok::Ident(w)
            if matches!(
                w.as_str(),
                "dtmc"
                    | "ctmc"
                    | "pta"
                    | "pomdp"
                    | "popta"
                    | "smg"
                    | "probabilistic"
                    | "stochastic"
            ) =>
        {
            return Err(p.unsupported(w));
        }
        other => return Err(p.err(format!("expected model type, found {other:?}"))),
    }

    let mut commands: Vec<Command> = Vec::new();
    let mut rewards: Vec<RewardItem> = Vec::new();
    let mut label_exprs: Vec<(String, PExpr)> = Vec::new();
    let mut seen_module = false;
    let mut seen_rewards = false;
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(w) if w == "module" => {
                if seen_module {
                    return Err(p.unsupported("multiple modules"));
                }
                seen_module = true;
                p.bump();
                p.ident()?;
                while let (Tok::Ident(_), Some(Tok::Sym(":"))) = (
                    p.peek().clone(),
                    p.toks.get(p.pos + 1).map(|t| t.tok.clone()),
                ) {
                    let name = p.ident()?;
                    p.sym(":")?;
                    if p.is_kw("bool") {
                        return Err(p.unsupported("bool"));
                    }
                    p.sym("[")?;
                    let lo = p.int()?;
                    p.sym("..")?;
                    let hi = p.int()?;
                    p.sym("]")?;
                    p.kw("init")?;
                    let init = p.int()?;
                    p.sym(";")?;
                    if lo > hi || init < lo || init > hi {
                        return Err(p.err(format!("bad range for `{name}`")));
                    }
                    if p.vars.iter().any(|v| v.0 == name) {
                        return Err(p.err(format!("duplicate variable `{name}`")));
                    }
                    p.vars.push((name, lo, hi, init));
                }
                while p.is_sym("[") {
                    commands.push(p.command()?);
                }
                p.kw("endmodule")?;
            }
            Tok::Ident(w) if w == "rewards" => {
                if seen_rewards {
                    return Err(p.unsupported("multiple reward structures"));
                }
                seen_rewards = true;
                p.bump();
                if !matches!(p.bump(), Tok::Str(_)) {
                    return Err(p.err("expected reward structure name"));
                }
                while !p.is_kw("endrewards") {
                    if !p.is_sym("[") {
                        return Err(p.unsupported("state reward item"));
                    }
                    let tag = p.tag()?;
                    let guard = p.expr()?;
                    p.sym(":")?;
                    let value = p.rational()?;
                    p.sym(";")?;
                    rewards.push(RewardItem { tag, guard, value });
                }
                p.bump();
            }
            Tok::Ident(w) if w == "label" => {
                p.bump();
                let Tok::Str(name) = p.bump() else {
                    return Err(p.err("expected label name"));
                };
                p.sym("=")?;
                let e = p.expr()?;
                p.sym(";")?;
                label_exprs.push((name, e));
            }
            Tok::Ident(w) => return Err(p.unsupported(w)),
            other => return Err(p.err(format!("unexpected {other:?}"))),
        }
    }
    if !seen_module {
        return Err(p.err("missing module"));
    }
    explore(p.vars, commands, rewards, label_exprs)
}

fn explore(
    vars: Vec<(String, i64, i64, i64)>,
    commands: Vec<Command>,
    rewards: Vec<RewardItem>,
    label_exprs: Vec<(String, PExpr)>,
) -> Result<PrismModel, PrismError> {
    let n = vars.len();
    let mut indexed: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut general: Vec<usize> = Vec::new();
    for (i, c) in commands.iter().enumerate() {
        match c.guard.full_valuation(n) {
            Some(v) => indexed.entry(v).or_default().push(i),
            None => general.push(i),
        }
    }
    let mut rew_indexed: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut rew_general: Vec<usize> = Vec::new();
    for (i, r) in rewards.iter().enumerate() {
        match r.guard.full_valuation(n) {
            Some(v) => rew_indexed.entry(v).or_default().push(i),
            None => rew_general.push(i),
        }
    }

    let init: Vec<i64> = vars.iter().map(|v| v.3).collect();
    let mut valuations = vec![init.clone()];
    let mut index: HashMap<Vec<i64>, usize> = HashMap::from([(init, 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::new();
    let runtime = |message: String| PrismError::ParseError { line: 0, message };

    while let Some(s) = queue.pop_front() {
        let val = valuations[s].clone();
        let mut enabled: Vec<usize> = indexed.get(&val).cloned().unwrap_or_default();
        enabled.extend(
            general
                .iter()
                .copied()
                .filter(|&i| commands[i].guard.holds(&val)),
        );
        enabled.sort_unstable();
        let mut tags_here = BTreeSet::new();
        for ci in enabled {
            let c = &commands[ci];
            if !tags_here.insert(c.tag.clone()) {
                return Err(runtime(format!(
                    "overlapping commands for action [{}] in state {val:?}",
                    c.tag
                )));
            }
            let mut reward = Rational::zero();
            let items = rew_indexed.get(&val).into_iter().flatten().copied().chain(
                rew_general
                    .iter()
                    .copied()
                    .filter(|&i| rewards[i].guard.holds(&val)),
            );
            for ri in items {
                if rewards[ri].tag == c.tag {
                    reward += rewards[ri].value;
                }
            }
            for (bi, (prob, assigns)) in c.updates.iter().enumerate() {
                if prob.is_zero() {
                    continue;
                }
                let mut next = val.clone();
                for (vi, e) in assigns {
                    match e.eval(&val) {
                        Some(PVal::Num(x)) if x.is_integer() => next[*vi] = *x.numer(),
                        _ => return Err(runtime(format!("bad update of `{}`", vars[*vi].0))),
                    }
                    let (name, lo, hi, _) = &vars[*vi];
                    if next[*vi] < *lo || next[*vi] > *hi {
                        return Err(runtime(format!("`{name}` leaves its range")));
                    }
                }
                let dst = match index.get(&next) {
                    Some(&d) => d,
                    None => {
                        let d = valuations.len();
                        index.insert(next.clone(), d);
                        valuations.push(next);
                        queue.push_back(d);
                        d
                    }
                };
                edges.push(Edge {
                    src: s,
                    dst,
                    action: Atom::new(&c.tag, vec![]),
                    branch_idx: bi,
                    branch_prob: *prob,
                    prob: *prob,
                    reward,
                    multiplicity: 1,
                    self_loop: s == dst,
                });
            }
        }
    }

    let states: Vec<State> = valuations
        .iter()
        .map(|v| {
            State::canonicalize(
                vars.iter()
                    .zip(v)
                    .map(|((name, ..), x)| Atom::new(name, vec![Term::int(*x)])),
            )
            .expect("valuation atoms are ground")
        })
        .collect();
    let labels = label_exprs
        .into_iter()
        .map(|(name, e)| {
            let set = valuations
                .iter()
                .enumerate()
                .filter(|(_, v)| e.holds(v))
                .map(|(i, _)| i)
                .collect();
            (name, set)
        })
        .collect();
    Ok(PrismModel {
        vars: vars.into_iter().map(|v| v.0).collect(),
        valuations,
        graph: MdpGraph::new(states, edges),
        labels,
    })
}

type Signature = BTreeMap<String, (BTreeMap<usize, Rational>, Rational)>;

fn signature(
    g: &MdpGraph,
    s: usize,
    tag: impl Fn(&Atom) -> String,
    map: impl Fn(usize) -> usize,
) -> Signature {
    g.choices(s)
        .into_iter()
        .map(|c| {
            let mut dist = BTreeMap::new();
            let mut reward = Rational::zero();
            for e in c.edges {
                *dist.entry(map(e.dst)).or_insert_with(Rational::zero) += e.prob;
                reward += e.prob * e.reward;
            }
            (tag(c.action), (dist, reward))
        })
        .collect()
}

/// Checks that `parsed` is the model `g` was emitted as: same states under
/// the valuation correspondence, same initial state, same distributions,
/// expected rewards and labels. Returns a description of the first
/// difference.
pub fn compare_with_source(
    parsed: &PrismModel,
    g: &MdpGraph,
    d: &DomainSpec,
    mode: EmitMode,
) -> Result<(), String> {
    let source_vals: Vec<Vec<i64>> = match mode {
        EmitMode::Indexed => (0..g.num_states()).map(|i| vec![i as i64]).collect(),
        EmitMode::Factored => g
            .states()
            .iter()
            .map(|s| encode_state(s, &d.statevars))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?,
    };
    if parsed.valuations.len() != g.num_states() {
        return Err(format!(
            "{} states parsed, {} in source",
            parsed.valuations.len(),
            g.num_states()
        ));
    }
    let by_val: HashMap<&[i64], usize> = source_vals
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();
    let to_src: Vec<usize> = parsed
        .valuations
        .iter()
        .map(|v| {
            by_val
                .get(v.as_slice())
                .copied()
                .ok_or_else(|| format!("unknown valuation {v:?}"))
        })
        .collect::<Result<_, _>>()?;
    if to_src.first() != Some(&0) {
        return Err("initial state differs".into());
    }
    let reserved: Vec<String> = parsed.vars.clone();
    let tags = action_tags(g, &reserved);
    for (pi, &si) in to_src.iter().enumerate() {
        let a = signature(&parsed.graph, pi, |h| h.functor.to_string(), |x| to_src[x]);
        let b = signature(g, si, |h| tags[h].clone(), |x| x);
        if a != b {
            return Err(format!("choices of state {si} differ"));
        }
    }
    for l in &d.labels {
        let want = label_states(g, d, l.name.as_str()).map_err(|e| e.to_string())?;
        let got: BTreeSet<usize> = parsed
            .labels
            .get(l.name.as_str())
            .ok_or_else(|| format!("label `{}` missing", l.name))?
            .iter()
            .map(|&i| to_src[i])
            .collect();
        if want != got {
            return Err(format!("label `{}` differs", l.name));
        }
    }
    Ok(())
}
