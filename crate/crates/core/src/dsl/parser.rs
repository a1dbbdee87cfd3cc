//! Recursive-descent parser for MDPL. Syntax errors stop parsing at the first
//! offending token; semantic load errors are collected and reported together.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{CheckedAdd, Zero};

use super::expr::{eval, BinOp, Expr, Field, Func, NoEnv, Value};
use super::lexer::{tokenize, Tok, Token};
use super::{sort_diagnostics, Diagnostic};
use crate::model::domain::{
    ActionSchema, Classifier, DomainSpec, EffectBranch, EffectOp, LabelDef, Pattern, PatternScope,
    RewardRule, RuleKind, Span, StateVarDecl, VerifyClause, DEFAULT_PENALTY,
};
use crate::model::state::State;
use crate::model::term::{fmt_rational, Atom, Rational, Symbol, Term};

type PResult<T> = Result<T, Diagnostic>;

/// Parses and validates an MDPL document.
pub fn parse_domain(text: &str) -> Result<DomainSpec, Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|e| vec![Diagnostic::error(e.span, e.message)])?;
    let mut p = Parser {
        toks,
        pos: 0,
        arities: BTreeMap::new(),
        diags: Vec::new(),
    };
    let parsed = p.document().map_err(|d| vec![d])?;
    let mut diags = p.diags;
    diags.extend(validate_rule_actions(&parsed));
    if diags.iter().any(Diagnostic::is_error) {
        sort_diagnostics(&mut diags);
        return Err(diags);
    }
    Ok(parsed)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    arities: BTreeMap<Symbol, (usize, Span)>,
    diags: Vec<Diagnostic>,
}

fn keyword_is_reserved(word: &str) -> bool {
    matches!(word, "and" | "or" | "not" | "true" | "false")
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(Symbol, Span)> {
        match self.peek().clone() {
            Tok::Ident(w) if !keyword_is_reserved(&w) => {
                let span = self.advance().span;
                Ok((Symbol::new(&w), span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(v) => {
                self.advance();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    /// INT, decimal, or INT/INT, optionally negated.
    fn number(&mut self) -> PResult<Rational> {
        let span = self.span();
        let neg = self.eat(&Tok::Minus);
        let r = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                if *self.peek() == Tok::Slash && matches!(self.peek_at(1), Tok::Int(_)) {
                    self.advance();
                    let Tok::Int(d) = self.advance().tok else {
                        unreachable!()
                    };
                    if d == 0 {
                        return Err(Diagnostic::error(span, "division by zero in literal"));
                    }
                    Rational::new(v, d)
                } else {
                    Rational::from_integer(v)
                }
            }
            Tok::Decimal(a, b) => {
                self.advance();
                decimal_value(&a, &b)
                    .ok_or_else(|| Diagnostic::error(span, "decimal literal out of range"))?
            }
            _ => return Err(self.unexpected("a number")),
        };
        Ok(if neg { -r } else { r })
    }

    fn note_arity(&mut self, atom: &Atom, span: Span) {
        match self.arities.get(&atom.functor) {
            Some(&(n, first)) if n != atom.arity() => self.diags.push(Diagnostic::error(
                span,
                format!(
                    "arity mismatch: `{}` used with {} arguments, but with {} at {}",
                    atom.functor,
                    atom.arity(),
                    n,
                    first
                ),
            )),
            Some(_) => {}
            None => {
                self.arities
                    .insert(atom.functor.clone(), (atom.arity(), span));
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.advance();
                Ok(Term::Var(Symbol::new(&v)))
            }
            Tok::Ident(w) if !keyword_is_reserved(&w) => {
                self.advance();
                Ok(Term::Sym(Symbol::new(&w)))
            }
            Tok::Int(_) | Tok::Decimal(..) | Tok::Minus => Ok(Term::Num(self.number()?)),
            _ => Err(self.unexpected("a term")),
        }
    }

    /// `name` or `name(t, ...)`; `?` marks a value slot when `slot` is given.
    fn atom_with_slot(&mut self, mut slot: Option<&mut Vec<usize>>) -> PResult<(Atom, Span)> {
        let (functor, span) = self.ident("an atom")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                if *self.peek() == Tok::Question {
                    match slot.as_deref_mut() {
                        Some(s) => {
                            self.advance();
                            s.push(args.len());
                            args.push(Term::var("_"));
                        }
                        None => return Err(self.unexpected("a term")),
                    }
                } else {
                    args.push(self.term()?);
                }
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RParen, "`,` or `)`")?;
                break;
            }
        }
        Ok((Atom { functor, args }, span))
    }

    fn atom(&mut self) -> PResult<(Atom, Span)> {
        let (a, span) = self.atom_with_slot(None)?;
        self.note_arity(&a, span);
        Ok((a, span))
    }

    fn atom_list(&mut self) -> PResult<Vec<(Atom, Span)>> {
        let mut out = vec![self.atom()?];
        while self.eat(&Tok::Comma) {
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn document(&mut self) -> PResult<DomainSpec> {
        if !self.at_keyword("domain") {
            return Err(Diagnostic::error(self.span(), "missing domain header"));
        }
        self.advance();
        let (name, _) = self.ident("a domain name")?;
        self.expect(Tok::Semi, "`;`")?;

        let mut facts: Option<State> = None;
        let mut init: Option<State> = None;
        let mut statevars: Vec<StateVarDecl> = Vec::new();
        let mut schemas: Vec<ActionSchema> = Vec::new();
        let mut rewards: Vec<RewardRule> = Vec::new();
        let mut labels: Vec<LabelDef> = Vec::new();
        let mut classifiers: Vec<Classifier> = Vec::new();
        let mut penalty: Option<Rational> = None;

        loop {
            let span = self.span();
            let Tok::Ident(word) = self.peek().clone() else {
                if *self.peek() == Tok::Eof {
                    break;
                }
                return Err(self.unexpected("a section keyword"));
            };
            match word.as_str() {
                "facts" | "init" => {
                    self.advance();
                    let atoms = self.ground_block(&word)?;
                    let slot = if word == "facts" {
                        &mut facts
                    } else {
                        &mut init
                    };
                    if slot.is_some() {
                        self.diags.push(Diagnostic::error(
                            span,
                            format!("duplicate `{word}` section"),
                        ));
                    }
                    *slot = Some(atoms);
                }
                "statevar" => {
                    self.advance();
                    let sv = self.statevar(span)?;
                    if statevars.iter().any(|v| v.name == sv.name) {
                        self.diags.push(Diagnostic::error(
                            span,
                            format!("duplicate statevar `{}`", sv.name),
                        ));
                    }
                    statevars.push(sv);
                }
                "action" => {
                    self.advance();
                    let schema = self.action(span)?;
                    if schemas.iter().any(|s| s.name == schema.name) {
                        self.diags.push(Diagnostic::error(
                            span,
                            format!("duplicate action `{}`", schema.name),
                        ));
                    }
                    schemas.push(schema);
                }
                "reward" => {
                    self.advance();
                    let rule = self.reward(span)?;
                    if rewards.iter().any(|r| r.name == rule.name) {
                        self.diags.push(Diagnostic::error(
                            span,
                            format!("duplicate reward rule `{}`", rule.name),
                        ));
                    }
                    rewards.push(rule);
                }
                "label" => {
                    self.advance();
                    let (name, cond) = self.named_expr("label")?;
                    if labels.iter().any(|l| l.name == name) {
                        self.diags
                            .push(Diagnostic::error(span, format!("duplicate label `{name}`")));
                    }
                    labels.push(LabelDef { name, cond, span });
                }
                "classify" => {
                    self.advance();
                    let (name, cond) = self.named_expr("classifier")?;
                    if classifiers.iter().any(|c| c.name == name) {
                        self.diags.push(Diagnostic::error(
                            span,
                            format!("duplicate classifier `{name}`"),
                        ));
                    }
                    classifiers.push(Classifier { name, cond, span });
                }
                "penalty" => {
                    self.advance();
                    let v = self.number()?;
                    self.expect(Tok::Semi, "`;`")?;
                    if v.is_zero() || v < Rational::zero() {
                        self.diags.push(Diagnostic::error(
                            span,
                            "penalty magnitude must be positive",
                        ));
                    }
                    if penalty.replace(v).is_some() {
                        self.diags
                            .push(Diagnostic::error(span, "duplicate `penalty` declaration"));
                    }
                }
                _ => return Err(self.unexpected("a section keyword")),
            }
        }

        Ok(DomainSpec {
            name,
            facts: facts.unwrap_or_default(),
            init: init.unwrap_or_default(),
            statevars,
            schemas,
            rewards,
            labels,
            classifiers,
            penalty: penalty.unwrap_or_else(|| Rational::from_integer(DEFAULT_PENALTY)),
        })
    }

    fn ground_block(&mut self, what: &str) -> PResult<State> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut atoms = Vec::new();
        if !self.eat(&Tok::RBrace) {
            atoms = self.atom_list()?;
            self.expect(Tok::RBrace, "`,` or `}`")?;
        }
        let mut ground = Vec::new();
        for (a, span) in atoms {
            if a.is_ground() {
                ground.push(a);
            } else {
                self.diags.push(Diagnostic::error(
                    span,
                    format!("`{what}` atom `{a}` must be ground"),
                ));
            }
        }
        Ok(State::canonicalize(ground).expect("only ground atoms remain"))
    }

    fn statevar(&mut self, span: Span) -> PResult<StateVarDecl> {
        let (name, _) = self.ident("a statevar name")?;
        self.expect(Tok::Colon, "`:`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let lo = self.int()?;
        self.expect(Tok::DotDot, "`..`")?;
        let hi = self.int()?;
        self.expect(Tok::RBracket, "`]`")?;
        self.expect_keyword("init")?;
        let init = self.int()?;
        self.expect_keyword("from")?;
        let mut slots = Vec::new();
        let (pattern, pspan) = self.atom_with_slot(Some(&mut slots))?;
        self.note_arity(&pattern, pspan);
        self.expect(Tok::Semi, "`;`")?;

        if lo > hi {
            self.diags
                .push(Diagnostic::error(span, format!("empty range [{lo}..{hi}]")));
        }
        if init < lo || init > hi {
            self.diags.push(Diagnostic::error(
                span,
                format!("init {init} is outside [{lo}..{hi}]"),
            ));
        }
        if slots.len() != 1 {
            self.diags.push(Diagnostic::error(
                pspan,
                format!(
                    "pattern needs exactly one `?` value slot, found {}",
                    slots.len()
                ),
            ));
        }
        if pattern
            .args
            .iter()
            .any(|t| matches!(t, Term::Var(_)) && !t.is_wildcard())
        {
            self.diags.push(Diagnostic::error(
                pspan,
                "statevar patterns may only use constants, `_` and `?`",
            ));
        }
        Ok(StateVarDecl {
            name,
            lo,
            hi,
            init,
            pattern,
            value_pos: slots.first().copied().unwrap_or(0),
            span,
        })
    }

    fn action(&mut self, span: Span) -> PResult<ActionSchema> {
        let (name, _) = self.ident("an action name")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                match self.peek().clone() {
                    Tok::Var(v) if v != "_" => {
                        let pspan = self.advance().span;
                        let v = Symbol::new(&v);
                        if params.contains(&v) {
                            self.diags.push(Diagnostic::error(
                                pspan,
                                format!("duplicate parameter `{v}`"),
                            ));
                        }
                        params.push(v);
                    }
                    _ => return Err(self.unexpected("a parameter variable")),
                }
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RParen, "`,` or `)`")?;
                    break;
                }
            }
        }
        self.expect(Tok::LBrace, "`{`")?;

        let mut static_pre = Vec::new();
        let mut state_pre = Vec::new();
        let mut verify: Vec<(VerifyClause, Span)> = Vec::new();
        let mut branches: Vec<(EffectBranch, Span, Vec<Span>)> = Vec::new();
        let mut seen = BTreeSet::new();
        loop {
            let kspan = self.span();
            let kw = match self.peek() {
                Tok::Ident(w) => w.clone(),
                Tok::RBrace => break,
                _ => {
                    return Err(self.unexpected("`pre-static`, `pre-state`, `verify`, `eff` or `}`"))
                }
            };
            match kw.as_str() {
                "pre-static" | "pre-state" | "verify" => {
                    self.advance();
                    if !seen.insert(kw.clone()) || !branches.is_empty() {
                        self.diags.push(Diagnostic::error(
                            kspan,
                            format!("`{kw}` must appear at most once, before any `eff`"),
                        ));
                    }
                    match kw.as_str() {
                        "pre-static" => static_pre = self.atom_list()?,
                        "pre-state" => state_pre = self.atom_list()?,
                        _ => {
                            verify.push(self.verify_clause()?);
                            while self.eat(&Tok::Comma) {
                                verify.push(self.verify_clause()?);
                            }
                        }
                    }
                    self.expect(Tok::Semi, "`;`")?;
                }
                "eff" => {
                    self.advance();
                    let prob = self.expr()?;
                    self.expect(Tok::LBrace, "`{`")?;
                    let mut ops = Vec::new();
                    let mut op_spans = Vec::new();
                    while !self.eat(&Tok::RBrace) {
                        let is_del = if self.eat_keyword("del") {
                            true
                        } else if self.eat_keyword("add") {
                            false
                        } else {
                            return Err(self.unexpected("`del`, `add` or `}`"));
                        };
                        let (a, aspan) = self.atom()?;
                        self.expect(Tok::Semi, "`;`")?;
                        ops.push(if is_del {
                            EffectOp::Del(a)
                        } else {
                            EffectOp::Add(a)
                        });
                        op_spans.push(aspan);
                    }
                    if ops.is_empty() {
                        self.diags
                            .push(Diagnostic::error(kspan, "effect branch has no operations"));
                    }
                    branches.push((EffectBranch { prob, ops }, kspan, op_spans));
                }
                _ => {
                    return Err(self.unexpected("`pre-static`, `pre-state`, `verify`, `eff` or `}`"))
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        if branches.is_empty() {
            self.diags.push(Diagnostic::error(
                span,
                format!("action `{name}` has no `eff` branch"),
            ));
        }

        self.check_schema_vars(
            &name,
            &params,
            &static_pre,
            &state_pre,
            &verify,
            &branches,
            span,
        );
        self.check_constant_probs(&name, &branches, span);

        Ok(ActionSchema {
            name,
            params,
            static_pre: static_pre.into_iter().map(|(a, _)| a).collect(),
            state_pre: state_pre.into_iter().map(|(a, _)| a).collect(),
            verify: verify.into_iter().map(|(c, _)| c).collect(),
            branches: branches.into_iter().map(|(b, _, _)| b).collect(),
            span,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn check_schema_vars(
        &mut self,
        name: &Symbol,
        params: &[Symbol],
        static_pre: &[(Atom, Span)],
        state_pre: &[(Atom, Span)],
        verify: &[(VerifyClause, Span)],
        branches: &[(EffectBranch, Span, Vec<Span>)],
        span: Span,
    ) {
        let mut bound: BTreeSet<Symbol> = BTreeSet::new();
        for (a, _) in static_pre.iter().chain(state_pre) {
            bound.extend(a.vars());
        }
        for (clause, cspan) in verify {
            let (used, target) = match clause {
                VerifyClause::Bind(v, e) => (e.vars(), Some(v)),
                VerifyClause::Check(e) => (e.vars(), None),
            };
            for v in used.difference(&bound) {
                self.diags.push(Diagnostic::error(
                    *cspan,
                    format!("unbound variable `{v}` in verify clause of `{name}`"),
                ));
            }
            if let Some(v) = target {
                if !bound.insert(v.clone()) {
                    self.diags.push(Diagnostic::error(
                        *cspan,
                        format!("variable `{v}` is already bound in `{name}`"),
                    ));
                }
            }
        }
        for p in params {
            if !bound.contains(p) {
                self.diags.push(Diagnostic::error(
                    span,
                    format!("parameter `{p}` of `{name}` is not bound by a precondition or verify clause"),
                ));
            }
        }
        for (branch, bspan, op_spans) in branches {
            for v in branch.prob.vars().difference(&bound) {
                self.diags.push(Diagnostic::error(
                    *bspan,
                    format!("unbound variable `{v}` in branch probability of `{name}`"),
                ));
            }
            let mut local = bound.clone();
            for a in branch.dels() {
                local.extend(a.vars());
            }
            for (op, ospan) in branch.ops.iter().zip(op_spans) {
                if let EffectOp::Add(a) = op {
                    if a.args.iter().any(Term::is_wildcard) {
                        self.diags.push(Diagnostic::error(
                            *ospan,
                            format!("`_` cannot appear in added atom `{a}`"),
                        ));
                    }
                    for v in a.vars() {
                        if !local.contains(&v) {
                            self.diags.push(Diagnostic::error(
                                *ospan,
                                format!("unbound variable `{v}` in added atom `{a}`"),
                            ));
                        }
                    }
                }
            }
        }
    }

    fn check_constant_probs(
        &mut self,
        name: &Symbol,
        branches: &[(EffectBranch, Span, Vec<Span>)],
        span: Span,
    ) {
        if branches.is_empty() || !branches.iter().all(|(b, _, _)| b.prob.is_constant()) {
            return;
        }
        let mut sum = Rational::zero();
        for (b, bspan, _) in branches {
            match eval(&b.prob, &NoEnv).and_then(|v| v.as_num()) {
                Ok(p) => {
                    if p < Rational::zero() || p > Rational::from_integer(1) {
                        self.diags.push(Diagnostic::error(
                            *bspan,
                            format!("branch probability {} is outside [0,1]", fmt_rational(&p)),
                        ));
                    }
                    match sum.checked_add(&p) {
                        Some(s) => sum = s,
                        None => return,
                    }
                }
                Err(e) => {
                    self.diags.push(Diagnostic::error(
                        *bspan,
                        format!("cannot evaluate branch probability of `{name}`: {e}"),
                    ));
                    return;
                }
            }
        }
        if sum != Rational::from_integer(1) {
            self.diags.push(Diagnostic::error(
                span,
                format!("branch probabilities sum to {}", fmt_rational(&sum)),
            ));
        }
    }

    fn verify_clause(&mut self) -> PResult<(VerifyClause, Span)> {
        let span = self.span();
        if let (Tok::Var(v), Tok::Assign) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.advance();
            self.advance();
            if v == "_" {
                return Err(Diagnostic::error(span, "cannot bind `_`"));
            }
            let e = self.expr()?;
            return Ok((VerifyClause::Bind(Symbol::new(&v), e), span));
        }
        Ok((VerifyClause::Check(self.expr()?), span))
    }

    fn reward(&mut self, span: Span) -> PResult<RewardRule> {
        let kind = if self.eat_keyword("necessary") {
            RuleKind::Necessary
        } else if self.eat_keyword("sufficient") {
            RuleKind::Sufficient
        } else {
            return Err(self.unexpected("`necessary` or `sufficient`"));
        };
        let (name, _) = self.ident("a rule name")?;
        let mut patterns = Vec::new();
        if self.eat_keyword("match") {
            loop {
                let scope = if self.eat_keyword("cur") {
                    PatternScope::Cur
                } else if self.eat_keyword("next") {
                    PatternScope::Next
                } else if self.eat_keyword("action") {
                    PatternScope::Action
                } else {
                    return Err(self.unexpected("`cur`, `next` or `action`"));
                };
                self.expect(Tok::Colon, "`:`")?;
                let (atom, aspan) = if scope == PatternScope::Action {
                    self.atom_with_slot(None)?
                } else {
                    self.atom()?
                };
                patterns.push((Pattern { scope, atom }, aspan));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let guard = if self.eat_keyword("when") {
            Some(self.expr()?)
        } else {
            None
        };
        let require = if self.eat_keyword("require") {
            Some(self.expr()?)
        } else {
            None
        };
        let value = if self.eat_keyword("value") {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(Tok::Semi, "`;`")?;

        match kind {
            RuleKind::Necessary => {
                if require.is_none() {
                    self.diags.push(Diagnostic::error(
                        span,
                        format!("necessary rule `{name}` needs a `require` condition"),
                    ));
                }
                if value.is_some() {
                    self.diags.push(Diagnostic::error(
                        span,
                        format!("necessary rule `{name}` cannot carry a `value`"),
                    ));
                }
            }
            RuleKind::Sufficient => {
                if value.is_none() {
                    self.diags.push(Diagnostic::error(
                        span,
                        format!("sufficient rule `{name}` needs a `value`"),
                    ));
                }
                if require.is_some() {
                    self.diags.push(Diagnostic::error(
                        span,
                        format!("sufficient rule `{name}` cannot carry a `require` condition"),
                    ));
                }
            }
        }
        let mut bound = BTreeSet::new();
        for (p, _) in &patterns {
            bound.extend(p.atom.vars());
        }
        for e in [&guard, &require, &value].into_iter().flatten() {
            for v in e.vars().difference(&bound) {
                self.diags.push(Diagnostic::error(
                    span,
                    format!("unbound variable `{v}` in rule `{name}`"),
                ));
            }
        }
        Ok(RewardRule {
            kind,
            name,
            patterns: patterns.into_iter().map(|(p, _)| p).collect(),
            guard,
            require,
            value,
            span,
        })
    }

    fn named_expr(&mut self, what: &str) -> PResult<(Symbol, Expr)> {
        let (name, span) = self.ident(&format!("a {what} name"))?;
        self.expect(Tok::Eq, "`=`")?;
        let e = self.expr()?;
        self.expect(Tok::Semi, "`;`")?;
        for v in e.vars() {
            self.diags.push(Diagnostic::error(
                span,
                format!("{what} `{name}` cannot use variable `{v}`"),
            ));
        }
        Ok((name, e))
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut l = self.and_expr()?;
        while self.eat_keyword("or") {
            let r = self.and_expr()?;
            l = Expr::bin(BinOp::Or, l, r);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut l = self.not_expr()?;
        while self.eat_keyword("and") {
            let r = self.not_expr()?;
            l = Expr::bin(BinOp::And, l, r);
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_keyword("not") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let mut l = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Eq => BinOp::Eq,
                Tok::Ne => BinOp::Ne,
                Tok::Ge => BinOp::Ge,
                Tok::Gt => BinOp::Gt,
                _ => return Ok(l),
            };
            self.advance();
            let r = self.add_expr()?;
            l = Expr::bin(op, l, r);
        }
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(l),
            };
            self.advance();
            let r = self.mul_expr()?;
            l = Expr::bin(op, l, r);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(l),
            };
            self.advance();
            let r = self.unary()?;
            l = Expr::bin(op, l, r);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::int(v))
            }
            Tok::Decimal(a, b) => {
                self.advance();
                let r = decimal_value(&a, &b)
                    .ok_or_else(|| Diagnostic::error(span, "decimal literal out of range"))?;
                Ok(Expr::num(r))
            }
            Tok::Var(v) => {
                self.advance();
                Ok(Expr::Var(Symbol::new(&v)))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(w) => match (w.as_str(), self.peek_at(1)) {
                ("true", _) => {
                    self.advance();
                    Ok(Expr::Lit(Value::Bool(true)))
                }
                ("false", _) => {
                    self.advance();
                    Ok(Expr::Lit(Value::Bool(false)))
                }
                ("has", Tok::LParen) => {
                    self.advance();
                    self.advance();
                    let (a, _) = self.atom()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Has(a))
                }
                ("cur" | "next" | "action", Tok::Dot) => {
                    self.advance();
                    self.advance();
                    let (field, fspan) = self.ident("a field name")?;
                    let f = match w.as_str() {
                        "cur" => Field::Cur(field),
                        "next" => Field::Next(field),
                        _ => action_field(field.as_str()).ok_or_else(|| {
                            Diagnostic::error(
                                fspan,
                                format!(
                                    "unknown action field `{field}`, expected `name` or `argK`"
                                ),
                            )
                        })?,
                    };
                    Ok(Expr::Field(f))
                }
                (name, Tok::LParen) if Func::from_name(name).is_some() => {
                    let func = Func::from_name(name).expect("checked");
                    self.advance();
                    self.advance();
                    let mut args = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`,` or `)`")?;
                    let ok = match func {
                        Func::Abs => args.len() == 1,
                        Func::Min | Func::Max => args.len() >= 2,
                    };
                    if !ok {
                        return Err(Diagnostic::error(
                            span,
                            format!("wrong number of arguments for `{name}`"),
                        ));
                    }
                    Ok(Expr::Call(func, args))
                }
                (name, _) if !keyword_is_reserved(name) => {
                    self.advance();
                    Ok(Expr::Ident(Symbol::new(name)))
                }
                _ => Err(self.unexpected("an expression")),
            },
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn action_field(name: &str) -> Option<Field> {
    if name == "name" {
        return Some(Field::ActionName);
    }
    let k: usize = name.strip_prefix("arg")?.parse().ok()?;
    (k >= 1).then_some(Field::ActionArg(k))
}

fn decimal_value(int: &str, frac: &str) -> Option<Rational> {
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let whole: i64 = int.parse().ok()?;
    let part: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().ok()?
    };
    let num = whole.checked_mul(den)?.checked_add(part)?;
    Some(Rational::new(num, den))
}

/// Action patterns in reward rules must name a declared schema with the
/// right number of arguments.
fn validate_rule_actions(d: &DomainSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for rule in &d.rewards {
        for p in rule
            .patterns
            .iter()
            .filter(|p| p.scope == PatternScope::Action)
        {
            match d.schemas.iter().find(|s| s.name == p.atom.functor) {
                None => out.push(Diagnostic::error(
                    rule.span,
                    format!(
                        "rule `{}` matches unknown action `{}`",
                        rule.name, p.atom.functor
                    ),
                )),
                Some(s) if s.params.len() != p.atom.arity() => out.push(Diagnostic::error(
                    rule.span,
                    format!(
                        "arity mismatch: action `{}` has {} parameters, pattern has {}",
                        s.name,
                        s.params.len(),
                        p.atom.arity()
                    ),
                )),
                Some(_) => {}
            }
        }
    }
    out
}

/// Parses a single expression; used by tests and tools.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostic> {
    let toks = tokenize(text).map_err(|e| Diagnostic::error(e.span, e.message))?;
    let mut p = Parser {
        toks,
        pos: 0,
        arities: BTreeMap::new(),
        diags: Vec::new(),
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        parse_domain(text)
            .unwrap_err()
            .into_iter()
            .map(|d| d.message)
            .collect()
    }

    #[test]
    fn empty_document_lacks_header() {
        assert_eq!(errors(""), vec!["missing domain header".to_string()]);
    }

    #[test]
    fn constant_probabilities_must_sum_to_one() {
        let text = "domain d;\ninit { p(0) }\naction a { pre-state p(0); eff 0.6 { del p(0); add p(1); } eff 0.3 { del p(0); add p(2); } }\n";
        assert_eq!(
            errors(text),
            vec!["branch probabilities sum to 9/10".to_string()]
        );
    }

    #[test]
    fn arity_is_fixed_per_functor() {
        let text = "domain d;\nfacts { q(1), q(1,2) }\n";
        let errs = errors(text);
        assert_eq!(errs.len(), 1);
        assert!(errs[0].starts_with("arity mismatch"), "{errs:?}");
    }

    #[test]
    fn unbound_variables_are_rejected() {
        let text = "domain d;\ninit { p(0) }\naction a { pre-state p(X); eff Q { add p(Y); } }\n";
        let errs = errors(text);
        assert!(
            errs.iter().any(|e| e.contains("`Q` in branch probability")),
            "{errs:?}"
        );
        assert!(
            errs.iter().any(|e| e.contains("`Y` in added atom")),
            "{errs:?}"
        );
    }

    #[test]
    fn duplicate_statevars_are_rejected() {
        let text = "domain d;\ninit { p(0) }\nstatevar v : [0..1] init 0 from p(?);\nstatevar v : [0..1] init 0 from p(?);\n";
        assert_eq!(errors(text), vec!["duplicate statevar `v`".to_string()]);
    }

    #[test]
    fn del_variables_may_feed_adds() {
        let text = "domain d;\ninit { position(1,0), position(2,0), bi }\naction place { pre-state bi; eff 0.75 { del position(P,0); add position(P,1); } eff 0.25 { del bi; add bo; } }\n";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.schemas[0].branches.len(), 2);
        assert_eq!(
            d.schemas[0].branches[0].prob,
            Expr::num(Rational::new(3, 4))
        );
    }

    #[test]
    fn verify_clauses_keep_order() {
        let text = "domain d;\ninit { section(0) }\naction proceed { pre-state section(S); verify Pno := 1 - S/10, NS := S + 1, S < 5; eff Pno { del section(S); add section(NS); } eff 1 - Pno { del section(S); add section(S); } }\n";
        let d = parse_domain(text).unwrap();
        let v = &d.schemas[0].verify;
        assert!(matches!(&v[0], VerifyClause::Bind(n, _) if n.as_str() == "Pno"));
        assert!(matches!(&v[2], VerifyClause::Check(_)));
    }

    #[test]
    fn expression_precedence() {
        let e = parse_expr("1 - S/10 < 2 and not x = 1 or true").unwrap();
        assert_eq!(e.to_string(), "1 - S / 10 < 2 and not x = 1 or true");
        let Expr::Bin(BinOp::Or, l, _) = e else {
            panic!()
        };
        assert!(matches!(*l, Expr::Bin(BinOp::And, _, _)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let errs = parse_domain("domain d;\ninit { p(0) \n").unwrap_err();
        assert_eq!(errs[0].span, Span { line: 3, col: 1 });
    }
}
