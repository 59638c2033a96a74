//! Text syntax for nonlinear dynamics: `x0*cos(u0) + 0.5*x1^2`.
//!
//! Grammar (`^` binds tighter than unary minus and is right-associative):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | x<i> | u<i> | name '(' args ')' | '(' sum ')'
//! ```

use std::fmt;

use opaque_core::nonlinear::Expr;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut end = self.pos;
        let digits = |c: &char| c.is_ascii_digit() || *c == '.';
        while self.chars.get(end).is_some_and(digits) {
            end += 1;
        }
        if matches!(self.chars.get(end), Some('e' | 'E')) {
            let mut j = end + 1;
            if matches!(self.chars.get(j), Some('+' | '-')) {
                j += 1;
            }
            if self.chars.get(j).is_some_and(|c| c.is_ascii_digit()) {
                end = j;
                while self.chars.get(end).is_some_and(|c| c.is_ascii_digit()) {
                    end += 1;
                }
            }
        }
        let text: String = self.chars[start..end].iter().collect();
        let v: f64 = text.parse().map_err(|_| self.error(format!("invalid number '{text}'")))?;
        self.pos = end;
        Ok(Expr::Const(v))
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        if let Some(e) = variable(&word) {
            return Ok(e);
        }
        let arity = match word.as_str() {
            "sin" | "cos" | "exp" | "tanh" => 1,
            "pow" => 2,
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            _ => {
                self.pos = start;
                return Err(self.error(format!("unknown name '{word}'")));
            }
        };
        if !self.eat('(') {
            return Err(self.error(format!("expected '(' after {word}")));
        }
        let mut args = vec![self.sum()?];
        while args.len() < arity {
            if !self.eat(',') {
                return Err(self.error(format!("{word} takes {arity} arguments")));
            }
            args.push(self.sum()?);
        }
        if !self.eat(')') {
            return Err(self.error("expected ')'"));
        }
        let a = Box::new(args.remove(0));
        Ok(match word.as_str() {
            "sin" => Expr::Sin(a),
            "cos" => Expr::Cos(a),
            "exp" => Expr::Exp(a),
            "tanh" => Expr::Tanh(a),
            _ => Expr::Pow(a, Box::new(args.remove(0))),
        })
    }
}

fn variable(word: &str) -> Option<Expr> {
    let (head, idx) = word.split_at(1);
    if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let i: usize = idx.parse().ok()?;
    match head {
        "x" => Some(Expr::X(i)),
        "u" => Some(Expr::U(i)),
        _ => None,
    }
}
