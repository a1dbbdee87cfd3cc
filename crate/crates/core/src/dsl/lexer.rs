use crate::model::domain::Span;
use crate::model::term::Symbol;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    /// Lowercase-initial name, including keywords and `pre-static`/`pre-state`.
    Ident(String),
    /// Uppercase- or underscore-initial name.
    Var(String),
    Int(i64),
    /// Digits before and after the point, kept verbatim for exact parsing.
    Decimal(String, String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Assign,
    DotDot,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    Question,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Decimal(a, b) => format!("`{a}.{b}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::DotDot => "..",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Question => "?",
            _ => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let span = Span { line, col };
        let peek = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let mut word: String = chars[start..i].iter().collect();
            if word == "pre" && chars.get(i) == Some(&'-') {
                for kw in ["static", "state"] {
                    let end = i + 1 + kw.len();
                    let follows = chars
                        .get(end)
                        .is_none_or(|ch| !(ch.is_ascii_alphanumeric() || *ch == '_'));
                    if end <= chars.len()
                        && chars[i + 1..end].iter().copied().eq(kw.chars())
                        && follows
                    {
                        for _ in 0..=kw.len() {
                            bump!();
                        }
                        word = format!("pre-{kw}");
                        break;
                    }
                }
            }
            out.push(Token {
                tok: if Symbol::is_variable_name(&word) {
                    Tok::Var(word)
                } else {
                    Tok::Ident(word)
                },
                span,
            });
            continue;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let int: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                bump!();
                let fstart = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let frac: String = chars[fstart..i].iter().collect();
                out.push(Token {
                    tok: Tok::Decimal(int, frac),
                    span,
                });
            } else {
                let v = int.parse::<i64>().map_err(|_| LexError {
                    span,
                    message: format!("integer literal `{int}` is too large"),
                })?;
                out.push(Token {
                    tok: Tok::Int(v),
                    span,
                });
            }
            continue;
        } else {
            let (tok, len) = match (c, peek) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('.', Some('.')) => (Tok::DotDot, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                (';', _) => (Tok::Semi, 1),
                (':', _) => (Tok::Colon, 1),
                ('.', _) => (Tok::Dot, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('=', _) => (Tok::Eq, 1),
                ('?', _) => (Tok::Question, 1),
                _ => {
                    return Err(LexError {
                        span,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            for _ in 0..len {
                bump!();
            }
            tok
        };
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
