//! Arithmetic and boolean expressions used by verify clauses, branch
//! probabilities, reward rules, labels and classifiers.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};

use crate::error::EvalError;
use crate::model::term::{decimal_string, fmt_rational, Atom, Bindings, Rational, Symbol, Term};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Value {
    Num(Rational),
    Sym(Symbol),
    Bool(bool),
}

impl Value {
    pub fn as_num(&self) -> Result<Rational, EvalError> {
        match self {
            Value::Num(r) => Ok(*r),
            other => Err(EvalError::Type(format!(
                "expected a number, found `{other}`"
            ))),
        }
    }

    pub fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::Type(format!(
                "expected a boolean, found `{other}`"
            ))),
        }
    }

    pub fn from_term(t: &Term) -> Result<Value, EvalError> {
        match t {
            Term::Num(r) => Ok(Value::Num(*r)),
            Term::Sym(s) => Ok(Value::Sym(s.clone())),
            Term::Var(v) => Err(EvalError::Unbound(v.to_string())),
        }
    }

    pub fn into_term(self) -> Result<Term, EvalError> {
        match self {
            Value::Num(r) => Ok(Term::Num(r)),
            Value::Sym(s) => Ok(Term::Sym(s)),
            Value::Bool(b) => Err(EvalError::Type(format!("cannot bind boolean `{b}`"))),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(r) => f.write_str(&fmt_rational(r)),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Ge | BinOp::Gt => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Func {
    Abs,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "abs" => Some(Func::Abs),
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            _ => None,
        }
    }
}

/// Access to the transition being scored or the state being labelled.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Field {
    Cur(Symbol),
    Next(Symbol),
    ActionName,
    /// 1-based argument of the grounded action head.
    ActionArg(usize),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Cur(v) => write!(f, "cur.{v}"),
            Field::Next(v) => write!(f, "next.{v}"),
            Field::ActionName => f.write_str("action.name"),
            Field::ActionArg(k) => write!(f, "action.arg{k}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Lit(Value),
    /// Bare lowercase identifier: a state variable in labels, a symbol elsewhere.
    Ident(Symbol),
    Var(Symbol),
    Field(Field),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// Membership of a ground atom in the current state.
    Has(Atom),
}

impl Expr {
    pub fn num(r: Rational) -> Expr {
        Expr::Lit(Value::Num(r))
    }

    pub fn int(v: i64) -> Expr {
        Expr::num(Rational::from_integer(v))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    /// Named variables referenced anywhere in the expression.
    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Has(a) => out.extend(a.vars()),
            _ => {}
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) | Expr::Not(e) => e.visit(f),
            Expr::Bin(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }

    pub fn is_constant(&self) -> bool {
        let mut constant = true;
        self.visit(&mut |e| {
            if matches!(
                e,
                Expr::Var(_) | Expr::Field(_) | Expr::Has(_) | Expr::Ident(_)
            ) {
                constant = false;
            }
        });
        constant
    }
}

/// Context an expression is evaluated in.
pub trait Env {
    fn var(&self, name: &Symbol) -> Option<Value>;

    fn ident(&self, name: &Symbol) -> Result<Value, EvalError> {
        Ok(Value::Sym(name.clone()))
    }

    fn field(&self, field: &Field) -> Result<Value, EvalError> {
        Err(EvalError::Unavailable(field.to_string()))
    }

    fn has(&self, atom: &Atom) -> Result<bool, EvalError> {
        Err(EvalError::Unavailable(format!("has({atom})")))
    }
}

impl Env for Bindings {
    fn var(&self, name: &Symbol) -> Option<Value> {
        self.get(name).and_then(|t| Value::from_term(t).ok())
    }
}

/// Empty environment for constant expressions.
pub struct NoEnv;

impl Env for NoEnv {
    fn var(&self, _: &Symbol) -> Option<Value> {
        None
    }
}

pub fn eval(e: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Lit(v) => v.clone(),
        Expr::Ident(s) => env.ident(s)?,
        Expr::Var(v) => env
            .var(v)
            .ok_or_else(|| EvalError::Unbound(v.to_string()))?,
        Expr::Field(f) => env.field(f)?,
        Expr::Neg(inner) => {
            let r = eval(inner, env)?.as_num()?;
            Value::Num(
                Rational::zero()
                    .checked_sub(&r)
                    .ok_or(EvalError::Overflow)?,
            )
        }
        Expr::Not(inner) => Value::Bool(!eval(inner, env)?.as_bool()?),
        Expr::Bin(op, l, r) => eval_bin(*op, l, r, env)?,
        Expr::Call(func, args) => {
            let nums = args
                .iter()
                .map(|a| eval(a, env)?.as_num())
                .collect::<Result<Vec<_>, _>>()?;
            match (func, nums.as_slice()) {
                (Func::Abs, [x]) => Value::Num(x.abs()),
                (Func::Min, [first, rest @ ..]) => {
                    Value::Num(rest.iter().fold(*first, |a, b| a.min(*b)))
                }
                (Func::Max, [first, rest @ ..]) => {
                    Value::Num(rest.iter().fold(*first, |a, b| a.max(*b)))
                }
                _ => {
                    return Err(EvalError::Type(format!(
                        "wrong number of arguments for `{}`",
                        func.name()
                    )))
                }
            }
        }
        Expr::Has(atom) => Value::Bool(env.has(atom)?),
    })
}

fn eval_bin(op: BinOp, l: &Expr, r: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    match op {
        BinOp::And => {
            if !eval(l, env)?.as_bool()? {
                return Ok(Value::Bool(false));
            }
            return Ok(Value::Bool(eval(r, env)?.as_bool()?));
        }
        BinOp::Or => {
            if eval(l, env)?.as_bool()? {
                return Ok(Value::Bool(true));
            }
            return Ok(Value::Bool(eval(r, env)?.as_bool()?));
        }
        _ => {}
    }
    let a = eval(l, env)?;
    let b = eval(r, env)?;
    match op {
        BinOp::Eq => Ok(Value::Bool(a == b)),
        BinOp::Ne => Ok(Value::Bool(a != b)),
        BinOp::Lt | BinOp::Le | BinOp::Ge | BinOp::Gt => {
            let (x, y) = (a.as_num()?, b.as_num()?);
            Ok(Value::Bool(match op {
                BinOp::Lt => x < y,
                BinOp::Le => x <= y,
                BinOp::Ge => x >= y,
                _ => x > y,
            }))
        }
        _ => {
            let (x, y) = (a.as_num()?, b.as_num()?);
            let out = match op {
                BinOp::Add => x.checked_add(&y),
                BinOp::Sub => x.checked_sub(&y),
                BinOp::Mul => x.checked_mul(&y),
                _ => {
                    if y.is_zero() {
                        return Err(EvalError::DivisionByZero);
                    }
                    x.checked_div(&y)
                }
            };
            out.map(Value::Num).ok_or(EvalError::Overflow)
        }
    }
}

/// Evaluates `e` to an exact rational under `bindings`.
pub fn eval_expr(e: &Expr, bindings: &Bindings) -> Result<Rational, EvalError> {
    eval(e, bindings)?.as_num()
}

pub fn eval_bool(e: &Expr, env: &dyn Env) -> Result<bool, EvalError> {
    eval(e, env)?.as_bool()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, 0, f)
    }
}

fn write_expr(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Lit(Value::Num(r)) => {
            if r.is_integer() && !r.is_negative() {
                write!(f, "{}", r.numer())
            } else if let Some(d) = decimal_string(r).filter(|_| !r.is_negative()) {
                f.write_str(&d)
            } else {
                write!(f, "({}/{})", r.numer(), r.denom())
            }
        }
        Expr::Lit(v) => write!(f, "{v}"),
        Expr::Ident(s) | Expr::Var(s) => write!(f, "{s}"),
        Expr::Field(fl) => write!(f, "{fl}"),
        Expr::Neg(inner) => {
            f.write_str("-")?;
            write_expr(inner, 7, f)
        }
        Expr::Not(inner) => {
            f.write_str("not ")?;
            write_expr(inner, 3, f)
        }
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let paren = p <= parent;
            if paren {
                f.write_str("(")?;
            }
            // left-associative: the left operand may share our precedence
            write_expr(l, p - 1, f)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(r, p, f)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(a, 0, f)?;
            }
            f.write_str(")")
        }
        Expr::Has(a) => write!(f, "has({a})"),
    }
}
