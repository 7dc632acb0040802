//! A small closed-form expression language.
//!
//! Nonlinearities `f(u1, u2)`, weights `g(s)`, envelopes `Phi(s)` and custom
//! kernels `k(t, s)` are all written in this grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?          right-associative
//! atom  := number | variable | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp log sqrt abs` (one argument) and `min max` (two).
//! There is no implicit multiplication, so `2u1` is rejected.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("no binding supplied for variable `{0}`")]
    Unbound(String),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Syntax tree node. Variables are stored as indices into the declared
/// variable list of the owning [`Expression`].
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Pi,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, _, _) => op.precedence(),
            Node::Neg(_) => 3,
            Node::Num(x) if x.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        let v = match self {
            Node::Num(x) => *x,
            Node::Var(i) => values[*i],
            Node::Pi => std::f64::consts::PI,
            Node::Neg(x) => -x.eval(values)?,
            Node::Binary(op, l, r) => {
                let a = l.eval(values)?;
                let b = r.eval(values)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(ExprError::Domain(format!("division by zero ({a} / 0)")));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(ExprError::Domain(format!(
                                "negative base {a} with non-integer exponent {b}"
                            )));
                        }
                        a.powf(b)
                    }
                }
            }
            Node::Call(f, args) => {
                let x = args[0].eval(values)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x < 0.0 {
                            return Err(ExprError::Domain(format!("log of negative argument {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(ExprError::Domain(format!(
                                "sqrt of negative argument {x}"
                            )));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Min => x.min(args[1].eval(values)?),
                    Func::Max => x.max(args[1].eval(values)?),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain(format!("non-finite result {v}")))
        }
    }

    fn fmt_with(&self, vars: &[String], out: &mut String) {
        match self {
            Node::Num(x) => out.push_str(&format!("{x}")),
            Node::Var(i) => out.push_str(&vars[*i]),
            Node::Pi => out.push_str("pi"),
            Node::Neg(x) => {
                out.push('-');
                x.fmt_child(vars, out, x.precedence() < 3);
            }
            Node::Binary(op, l, r) => {
                let p = op.precedence();
                let (left_paren, right_paren) = if *op == BinOp::Pow {
                    (l.precedence() <= p, r.precedence() < 3)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                l.fmt_child(vars, out, left_paren);
                if *op == BinOp::Pow {
                    out.push('^');
                } else {
                    out.push(' ');
                    out.push_str(op.symbol());
                    out.push(' ');
                }
                r.fmt_child(vars, out, right_paren);
            }
            Node::Call(f, args) => {
                out.push_str(f.name());
                out.push('(');
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    a.fmt_with(vars, out);
                }
                out.push(')');
            }
        }
    }

    fn fmt_child(&self, vars: &[String], out: &mut String, paren: bool) {
        if paren {
            out.push('(');
            self.fmt_with(vars, out);
            out.push(')');
        } else {
            self.fmt_with(vars, out);
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Var(i) => Some(*i),
            Node::Neg(x) => x.max_var(),
            Node::Binary(_, l, r) => l.max_var().max(r.max_var()),
            Node::Call(_, args) => args.iter().filter_map(Node::max_var).max(),
            _ => None,
        }
    }
}

/// A parsed expression together with its declared variable set.
///
/// Immutable after construction; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Vec<String>,
}

impl Expression {
    pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Self, ExprError> {
        let vars: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        let root = Parser::new(source, &vars).parse()?;
        Ok(Expression { root, vars })
    }

    /// Builds an expression from a tree. Variable indices must be valid.
    pub fn from_node(root: Node, variables: &[&str]) -> Self {
        let vars: Vec<String> = variables.iter().map(|v| v.to_string()).collect();
        if let Some(i) = root.max_var() {
            assert!(i < vars.len(), "variable index {i} out of range");
        }
        Expression { root, vars }
    }

    pub fn constant(value: f64, variables: &[&str]) -> Self {
        Self::from_node(Node::Num(value), variables)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Positional evaluation: `values[i]` binds the i-th declared variable.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        if values.len() != self.vars.len() {
            return Err(ExprError::Arity {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        self.root.eval(values)
    }

    /// Evaluation with named bindings.
    pub fn eval_named(&self, bindings: &[(&str, f64)]) -> Result<f64, ExprError> {
        let values = self
            .vars
            .iter()
            .map(|name| {
                bindings
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| ExprError::Unbound(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.root.eval(&values)
    }

    /// True when the tree is a bare literal.
    pub fn as_constant(&self) -> Option<f64> {
        match self.root {
            Node::Num(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.root.fmt_with(&self.vars, &mut out);
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    vars: &'a [String],
    lex_error: Option<ExprError>,
}

impl<'a> Parser<'a> {
    fn new(source: &str, vars: &'a [String]) -> Self {
        let (tokens, lex_error) = match tokenize(source) {
            Ok(t) => (t, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        Parser {
            tokens,
            pos: 0,
            vars,
            lex_error,
        }
    }

    fn parse(mut self) -> Result<Node, ExprError> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        if self.tokens.len() == 1 {
            return Err(ExprError::Syntax {
                pos: 0,
                msg: "empty expression".into(),
            });
        }
        let node = self.expr()?;
        match self.peek() {
            Token::End => Ok(node),
            t => Err(self.error(format!("unexpected {}", describe(t)))),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: String) -> ExprError {
        ExprError::Syntax {
            pos: self.offset(),
            msg,
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Op('+') => BinOp::Add,
                Token::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Op('*') => BinOp::Mul,
                Token::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if *self.peek() == Token::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Token::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let at = self.offset();
        match self.bump() {
            Token::Num(x) => Ok(Node::Num(x)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    let func = Func::lookup(&name).ok_or_else(|| ExprError::Syntax {
                        pos: at,
                        msg: format!("unknown function `{name}`"),
                    })?;
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Token::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Token::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Syntax {
                            pos: at,
                            msg: format!(
                                "`{}` takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                if name == "pi" {
                    return Ok(Node::Pi);
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if Func::lookup(&name).is_some() {
                    return Err(ExprError::Syntax {
                        pos: at,
                        msg: format!("function `{name}` used without arguments"),
                    });
                }
                Err(ExprError::UnknownVariable { name, pos: at })
            }
            t => Err(ExprError::Syntax {
                pos: at,
                msg: format!("unexpected {}", describe(&t)),
            }),
        }
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let found = describe(self.peek());
            Err(self.error(format!("expected {what}, found {found}")))
        }
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Num(x) => format!("number {x}"),
        Token::Ident(s) => format!("identifier `{s}`"),
        Token::Op(c) => format!("operator `{c}`"),
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
        Token::Comma => "`,`".into(),
        Token::End => "end of input".into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '+' | '-' | '*' | '/' | '^' => {
                out.push((Token::Op(c), start));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, start));
                i += 1;
            }
            ',' => {
                out.push((Token::Comma, start));
                i += 1;
            }
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push((Token::Num(value), start));
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(ExprError::Syntax {
                        pos: i,
                        msg: "implicit multiplication is not supported".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push((Token::End, src.len()));
    Ok(out)
}
