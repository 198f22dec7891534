//! Small exact expression language for function oracles.
//!
//! Grammar: `+ - * /`, parentheses, implicit multiplication (`5a`,
//! `2(a+b)`), rational literals, and the functions `floor`, `ceil`, `min`,
//! `max`. Variables are single letters: `a, b, c, …` name coordinates
//! 0, 1, 2, …; `x, y, z` name coordinates 0, 1, 2; in rank one `n` and `s`
//! also name coordinate 0.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(BigRational),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Floor(Box<Node>),
    Ceil(Box<Node>),
    Min(Vec<Node>),
    Max(Vec<Node>),
}

/// A parsed expression over `rank` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    rank: usize,
    root: Node,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(text.parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse(format!(
                "unexpected character {c:?} at column {} in {s:?}",
                i + 1
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    rank: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn error(&self, msg: &str) -> Error {
        let col = self
            .toks
            .get(self.pos)
            .map_or(self.src.chars().count(), |(c, _)| *c);
        Error::Parse(format!("{msg} at column {} in {:?}", col + 1, self.src))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Op('('))) {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.atom()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Node::Num(BigRational::from_integer(n)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "floor" | "ceil" | "min" | "max" => {
                        self.expect('(')?;
                        let mut args = vec![self.expr()?];
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                        self.function(&name, args)
                    }
                    _ => {
                        self.pos -= 1;
                        let v = self.variable(&name)?;
                        self.pos += 1;
                        Ok(Node::Var(v))
                    }
                }
            }
            _ => Err(self.error("expected a number, variable or '('")),
        }
    }

    fn function(&self, name: &str, mut args: Vec<Node>) -> Result<Node> {
        match name {
            "floor" | "ceil" if args.len() != 1 => {
                Err(self.error(&format!("{name} takes one argument")))
            }
            "floor" => Ok(Node::Floor(Box::new(args.remove(0)))),
            "ceil" => Ok(Node::Ceil(Box::new(args.remove(0)))),
            "min" => Ok(Node::Min(args)),
            _ => Ok(Node::Max(args)),
        }
    }

    fn variable(&self, name: &str) -> Result<usize> {
        let mut chars = name.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(self.error(&format!("unknown identifier {name:?}")));
        };
        let idx = match c {
            'x' | 'y' | 'z' => c as usize - 'x' as usize,
            'n' | 's' if self.rank == 1 => 0,
            _ => c as usize - 'a' as usize,
        };
        if idx >= self.rank {
            return Err(self.error(&format!(
                "variable {name:?} is out of range for rank {}",
                self.rank
            )));
        }
        Ok(idx)
    }
}

impl Expr {
    pub fn parse(source: &str, rank: usize) -> Result<Expr> {
        let toks = tokenize(source)?;
        let mut p = Parser {
            src: source,
            toks,
            pos: 0,
            rank,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr {
            source: source.to_string(),
            rank,
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: point.len(),
            });
        }
        eval(&self.root, point)
    }

    pub fn eval_int(&self, point: &[BigInt]) -> Result<BigRational> {
        let p: Vec<BigRational> = point.iter().map(arith::rat_int).collect();
        self.eval(&p)
    }
}

fn eval(node: &Node, p: &[BigRational]) -> Result<BigRational> {
    Ok(match node {
        Node::Num(n) => n.clone(),
        Node::Var(i) => p[*i].clone(),
        Node::Neg(a) => -eval(a, p)?,
        Node::Add(a, b) => eval(a, p)? + eval(b, p)?,
        Node::Sub(a, b) => eval(a, p)? - eval(b, p)?,
        Node::Mul(a, b) => eval(a, p)? * eval(b, p)?,
        Node::Div(a, b) => {
            let d = eval(b, p)?;
            if d.is_zero() {
                return Err(Error::Oracle("division by zero".into()));
            }
            eval(a, p)? / d
        }
        Node::Floor(a) => BigRational::from_integer(arith::floor(&eval(a, p)?)),
        Node::Ceil(a) => BigRational::from_integer(arith::ceil(&eval(a, p)?)),
        Node::Min(args) => fold(args, p, |a, b| a.min(b))?,
        Node::Max(args) => fold(args, p, |a, b| a.max(b))?,
    })
}

fn fold(
    args: &[Node],
    p: &[BigRational],
    pick: impl Fn(BigRational, BigRational) -> BigRational,
) -> Result<BigRational> {
    let mut acc = eval(&args[0], p)?;
    for a in &args[1..] {
        acc = pick(acc, eval(a, p)?);
    }
    Ok(acc)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
