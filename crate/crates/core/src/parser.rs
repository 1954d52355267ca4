//! Parser for the chain-specification file format.
//!
//! A specification is a sequence of sections, one per line by convention
//! (the parser itself is token-oriented and accepts any whitespace layout):
//!
//! ```text
//! class <name> finite { <label>: <height>, ... }
//! class <name> family k from <k0> height <expr> [mult <expr>]
//! edges complete_minus_D | edges pairs { (<class>,<class>), ... }
//! forbid { (<label>,<label>), ... }
//! root <label>
//! ```
//!
//! Heights of finite vertices are constant expressions (no `k`), evaluated
//! at parse time. Comments run from `#` to the end of the line.

use crate::expr::WeightExpr;
use crate::model::{ClassDecl, ClassKind, EdgeDecl, EdgeMode, FiniteVertex, RftSpec, VertexRef};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate vertex label `{label}`")]
    DuplicateLabel { label: String },
    #[error("duplicate class name `{name}`")]
    DuplicateClass { name: String },
    #[error("non-positive height for vertex `{label}`")]
    NonPositiveHeight { label: String },
    #[error("height expression is invalid: {0}")]
    BadHeight(String),
    #[error("unknown identifier `{name}` at {line}:{col} (only `k` is allowed in expressions)")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("section `{0}` appears more than once")]
    DuplicateSection(String),
    #[error("missing required section `{0}`")]
    MissingSection(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                bump(&mut chars);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        let tok = match c {
            '{' => {
                bump(&mut chars);
                Tok::LBrace
            }
            '}' => {
                bump(&mut chars);
                Tok::RBrace
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            ':' => {
                bump(&mut chars);
                Tok::Colon
            }
            '+' => {
                bump(&mut chars);
                Tok::Plus
            }
            '-' => {
                bump(&mut chars);
                Tok::Minus
            }
            '*' => {
                bump(&mut chars);
                Tok::Star
            }
            '/' => {
                bump(&mut chars);
                Tok::Slash
            }
            '^' => {
                bump(&mut chars);
                Tok::Caret
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("malformed number `{s}`"),
                })?;
                Tok::Number(v)
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        toks.push(Spanned { tok, line: tl, col: tc });
    }
    toks.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let s = self.peek();
        Err(ParseError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    /// Vertex labels are identifiers, bare integers, or `-` followed by an
    /// integer (families of negative indices use labels like `-4`).
    fn label(&mut self) -> Result<String, ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            Tok::Number(v) => {
                self.next();
                Ok(format_label(v))
            }
            Tok::Minus => {
                self.next();
                match self.peek().tok.clone() {
                    Tok::Number(v) => {
                        self.next();
                        Ok(format!("-{}", format_label(v)))
                    }
                    _ => self.err("expected a number after `-` in a label"),
                }
            }
            _ => self.err("expected a vertex label"),
        }
    }

    // expression grammar: expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<WeightExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    lhs = WeightExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    lhs = WeightExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<WeightExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    lhs = WeightExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.next();
                    lhs = WeightExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<WeightExpr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(WeightExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<WeightExpr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            // right-associative, and `2^-k` is allowed
            let e = self.unary()?;
            return Ok(WeightExpr::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<WeightExpr, ParseError> {
        let sp = self.peek().clone();
        match sp.tok {
            Tok::Number(v) => {
                self.next();
                Ok(WeightExpr::Num(v))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                match name.as_str() {
                    "k" => Ok(WeightExpr::Var),
                    "ln" | "abs" | "floor" | "exp" => {
                        self.expect(Tok::LParen, "`(` after function name")?;
                        let arg = Box::new(self.expr()?);
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(match name.as_str() {
                            "ln" => WeightExpr::Ln(arg),
                            "abs" => WeightExpr::Abs(arg),
                            "floor" => WeightExpr::Floor(arg),
                            _ => WeightExpr::Exp(arg),
                        })
                    }
                    _ => Err(ParseError::UnknownIdentifier {
                        name,
                        line: sp.line,
                        col: sp.col,
                    }),
                }
            }
            _ => self.err("expected a number, `k`, a function call, or `(`"),
        }
    }
}

fn format_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Parse a bare expression (used by tests and the expression round-trip).
pub fn parse_expr(text: &str) -> Result<WeightExpr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return p.err("trailing input after expression");
    }
    Ok(e)
}

/// Parse a full chain specification and run structural validation.
pub fn parse_spec(text: &str) -> Result<RftSpec, crate::Error> {
    let spec = parse_spec_unvalidated(text)?;
    spec.validate()?;
    Ok(spec)
}

/// Parse without validation; exposed for tests that build pathological specs.
pub fn parse_spec_unvalidated(text: &str) -> Result<RftSpec, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut classes: Vec<ClassDecl> = Vec::new();
    let mut edges: Option<EdgeMode> = None;
    let mut forbidden: Option<Vec<(VertexRef, VertexRef)>> = None;
    let mut root: Option<String> = None;

    loop {
        match p.peek().tok.clone() {
            Tok::Eof => break,
            Tok::Ident(kw) => match kw.as_str() {
                "class" => {
                    p.next();
                    let decl = parse_class(&mut p)?;
                    if classes.iter().any(|c| c.name == decl.name) {
                        return Err(ParseError::DuplicateClass { name: decl.name });
                    }
                    classes.push(decl);
                }
                "edges" => {
                    if edges.is_some() {
                        return Err(ParseError::DuplicateSection("edges".into()));
                    }
                    p.next();
                    edges = Some(parse_edges(&mut p)?);
                }
                "forbid" => {
                    if forbidden.is_some() {
                        return Err(ParseError::DuplicateSection("forbid".into()));
                    }
                    p.next();
                    forbidden = Some(parse_forbid(&mut p)?);
                }
                "root" => {
                    if root.is_some() {
                        return Err(ParseError::DuplicateSection("root".into()));
                    }
                    p.next();
                    root = Some(p.label()?);
                }
                _ => return p.err(format!("unknown section `{kw}`")),
            },
            _ => return p.err("expected a section keyword"),
        }
    }

    let edges = edges.ok_or_else(|| ParseError::MissingSection("edges".into()))?;
    let root = root.ok_or_else(|| ParseError::MissingSection("root".into()))?;
    if classes.is_empty() {
        return Err(ParseError::MissingSection("class".into()));
    }
    Ok(RftSpec {
        classes,
        edges: EdgeDecl {
            mode: edges,
            forbidden: forbidden.unwrap_or_default(),
        },
        root,
    })
}

fn parse_class(p: &mut Parser) -> Result<ClassDecl, ParseError> {
    let name = p.ident("class name")?;
    match p.peek().tok.clone() {
        Tok::Ident(kind) if kind == "finite" => {
            p.next();
            p.expect(Tok::LBrace, "`{`")?;
            let mut vertices = Vec::new();
            loop {
                if p.peek().tok == Tok::RBrace {
                    p.next();
                    break;
                }
                let label = p.label()?;
                p.expect(Tok::Colon, "`:` after vertex label")?;
                let height_expr = p.expr()?;
                if height_expr.contains_var() {
                    return Err(ParseError::BadHeight(format!(
                        "height of `{label}` must be constant (no `k`)"
                    )));
                }
                let height = height_expr
                    .eval(0)
                    .map_err(|e| ParseError::BadHeight(e.to_string()))?;
                if height <= 0.0 {
                    return Err(ParseError::NonPositiveHeight { label });
                }
                vertices.push(FiniteVertex { label, height });
                if p.peek().tok == Tok::Comma {
                    p.next();
                }
            }
            Ok(ClassDecl {
                name,
                kind: ClassKind::Finite(vertices),
            })
        }
        Tok::Ident(kind) if kind == "family" => {
            p.next();
            p.expect_kw("k")?;
            p.expect_kw("from")?;
            let k0 = match p.peek().tok.clone() {
                Tok::Number(v) if v.fract() == 0.0 => {
                    p.next();
                    v as i64
                }
                _ => return p.err("expected an integer start index"),
            };
            p.expect_kw("height")?;
            let height = p.expr()?;
            let mult = match p.peek().tok.clone() {
                Tok::Ident(s) if s == "mult" => {
                    p.next();
                    Some(p.expr()?)
                }
                _ => None,
            };
            Ok(ClassDecl {
                name,
                kind: ClassKind::Family { k0, height, mult },
            })
        }
        _ => p.err("expected `finite` or `family`"),
    }
}

fn parse_edges(p: &mut Parser) -> Result<EdgeMode, ParseError> {
    match p.peek().tok.clone() {
        Tok::Ident(s) if s == "complete_minus_D" => {
            p.next();
            Ok(EdgeMode::CompleteMinusD)
        }
        Tok::Ident(s) if s == "pairs" => {
            p.next();
            p.expect(Tok::LBrace, "`{`")?;
            let mut pairs = BTreeSet::new();
            loop {
                if p.peek().tok == Tok::RBrace {
                    p.next();
                    break;
                }
                p.expect(Tok::LParen, "`(`")?;
                let a = p.ident("class name")?;
                p.expect(Tok::Comma, "`,`")?;
                let b = p.ident("class name")?;
                p.expect(Tok::RParen, "`)`")?;
                pairs.insert((a, b));
                if p.peek().tok == Tok::Comma {
                    p.next();
                }
            }
            Ok(EdgeMode::Pairs(pairs))
        }
        _ => p.err("expected `complete_minus_D` or `pairs`"),
    }
}

fn parse_forbid(p: &mut Parser) -> Result<Vec<(VertexRef, VertexRef)>, ParseError> {
    p.expect(Tok::LBrace, "`{`")?;
    let mut out = Vec::new();
    loop {
        if p.peek().tok == Tok::RBrace {
            p.next();
            break;
        }
        p.expect(Tok::LParen, "`(`")?;
        let a = p.label()?;
        p.expect(Tok::Comma, "`,`")?;
        let b = p.label()?;
        p.expect(Tok::RParen, "`)`")?;
        out.push((VertexRef::Label(a), VertexRef::Label(b)));
        if p.peek().tok == Tok::Comma {
            p.next();
        }
    }
    Ok(out)
}

/// Render a specification in the canonical on-disk format. Parsing the
/// output yields a structurally equal [`RftSpec`].
pub fn pretty_print(spec: &RftSpec) -> String {
    let mut s = String::new();
    for class in &spec.classes {
        match &class.kind {
            ClassKind::Finite(vs) => {
                let body = vs
                    .iter()
                    .map(|v| format!("{}: {:?}", v.label, v.height))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(s, "class {} finite {{ {} }}", class.name, body);
            }
            ClassKind::Family { k0, height, mult } => {
                let _ = write!(s, "class {} family k from {} height {}", class.name, k0, height);
                if let Some(m) = mult {
                    let _ = write!(s, " mult {m}");
                }
                s.push('\n');
            }
        }
    }
    match &spec.edges.mode {
        EdgeMode::CompleteMinusD => s.push_str("edges complete_minus_D\n"),
        EdgeMode::Pairs(pairs) => {
            let body = pairs
                .iter()
                .map(|(a, b)| format!("({a},{b})"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(s, "edges pairs {{ {body} }}");
        }
    }
    if !spec.edges.forbidden.is_empty() {
        let body = spec
            .edges
            .forbidden
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(s, "forbid {{ {body} }}");
    }
    let _ = writeln!(s, "root {}", spec.root);
    s
}
