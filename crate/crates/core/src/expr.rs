//! Integrand expressions in one variable `x`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr   := expr ('+' | '-') expr          left-associative
//!         | expr ('*' | '/') expr          left-associative
//!         | '-' expr                       binds looser than '^'
//!         | expr '^' expr                  right-associative
//!         | number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | tan | exp | ln | sqrt | abs
//! ```
//!
//! So `-2^2 = -4`, `2^3^2 = 512` and `2^-1 = 0.5`. Evaluation uses plain
//! `f64` semantics: `1/0` and `ln(-1)` produce non-finite values rather than
//! errors.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    /// Byte offset of the error, when it has one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => Some(*offset),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    /// (left binding power, right binding power)
    fn binding(self) -> (u8, u8) {
        match self {
            BinOp::Add | BinOp::Sub => (1, 2),
            BinOp::Mul | BinOp::Div => (3, 4),
            BinOp::Pow => (8, 7),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Ln, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::E => "e",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Number(f64),
    Const(NamedConst),
    Var,
    Neg(Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

impl ExprAst {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExprAst::Number(v) => *v,
            ExprAst::Const(c) => c.value(),
            ExprAst::Var => x,
            ExprAst::Neg(e) => -e.eval(x),
            ExprAst::Binary(op, l, r) => {
                let (l, r) = (l.eval(x), r.eval(x));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            ExprAst::Call(f, arg) => f.apply(arg.eval(x)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ExprAst::Number(_) | ExprAst::Const(_) | ExprAst::Var => 1,
            ExprAst::Neg(e) | ExprAst::Call(_, e) => 1 + e.depth(),
            ExprAst::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

/// Fully parenthesized rendering that parses back to the same tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Number(v) => write!(f, "{v:?}"),
            ExprAst::Const(c) => f.write_str(c.name()),
            ExprAst::Var => f.write_str("x"),
            ExprAst::Neg(e) => write!(f, "(-{e})"),
            ExprAst::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            ExprAst::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// Evaluates a parsed expression at `x`.
pub fn eval_ast(ast: &ExprAst, x: f64) -> f64 {
    ast.eval(x)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(BinOp),
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Op(BinOp::Add),
            b'-' => Tok::Op(BinOp::Sub),
            b'*' => Tok::Op(BinOp::Mul),
            b'/' => Tok::Op(BinOp::Div),
            b'^' => Tok::Op(BinOp::Pow),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent: e or E followed by optional sign and at least one digit
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
                let lexeme = &text[start..i];
                let v = lexeme.parse::<f64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number '{lexeme}'"),
                })?;
                out.push(Token { tok: Tok::Num(v), offset: start });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        };
        i += 1;
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

/// Binding power of unary minus: above `*` and `/`, below `^`.
const PREFIX_NEG: u8 = 5;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::RParen, .. }) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.syntax(self.here(), "expected ')'"),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<ExprAst, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek() {
                Some(Token { tok: Tok::Op(op), .. }) => *op,
                Some(Token { tok: Tok::RParen, .. }) | None => break,
                Some(t) => return self.syntax(t.offset, "expected an operator"),
            };
            let (lbp, rbp) = op.binding();
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(rbp)?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<ExprAst, ParseError> {
        let Some(token) = self.peek().cloned() else {
            return self.syntax(self.end, "unexpected end of input");
        };
        self.pos += 1;
        match token.tok {
            Tok::Num(v) => Ok(ExprAst::Number(v)),
            Tok::Op(BinOp::Sub) => Ok(ExprAst::Neg(Box::new(self.expr(PREFIX_NEG)?))),
            Tok::Op(op) => self.syntax(token.offset, format!("unexpected operator '{}'", op.symbol())),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::RParen => self.syntax(token.offset, "unexpected ')'"),
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(ExprAst::Var),
                "pi" => Ok(ExprAst::Const(NamedConst::Pi)),
                "e" => Ok(ExprAst::Const(NamedConst::E)),
                _ => {
                    let func = Func::ALL
                        .into_iter()
                        .find(|f| f.name() == name)
                        .ok_or(ParseError::UnknownIdentifier {
                            offset: token.offset,
                            name: name.clone(),
                        })?;
                    match self.peek() {
                        Some(Token { tok: Tok::LParen, .. }) => self.pos += 1,
                        _ => return self.syntax(self.here(), format!("expected '(' after {name}")),
                    }
                    let arg = self.expr(0)?;
                    self.expect_rparen()?;
                    Ok(ExprAst::Call(func, Box::new(arg)))
                }
            },
        }
    }
}

pub fn parse(text: &str) -> Result<ExprAst, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
    };
    let ast = parser.expr(0)?;
    if let Some(t) = parser.peek() {
        return Err(ParseError::Syntax {
            offset: t.offset,
            message: "unexpected ')'".into(),
        });
    }
    Ok(ast)
}
