//! A small rule language for base machines `B(w, a)`.
//!
//! Integers only. Variables: `len` (|w|), `alen` (|a|); bit lookups `w[i]`
//! and `a[i]` are 0-based and read 0 out of range. Functions: `log2(x)`
//! (floor, with `log2(0) = 0`). Operators from loosest to tightest:
//! `||`, `&&`, `^` (xor), comparisons, `+ -`, `* / %`, unary `! -`.
//! A rule accepts when it evaluates to a non-zero value.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule error at column {column}: {msg}")]
pub struct ExprError {
    pub column: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Or,
    And,
    Xor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Num(i64),
    Len,
    AdviceLen,
    WordBit(Box<Node>),
    AdviceBit(Box<Node>),
    Log2(Box<Node>),
    Not(Box<Node>),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Rule {
    source: String,
    root: Node,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rule({})", self.source)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl FromStr for Rule {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let root = p.or()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Rule { source: s.trim().to_string(), root })
    }
}

impl Rule {
    pub fn accepts(&self, w: &[bool], a: &[bool]) -> bool {
        eval(&self.root, w, a) != 0
    }

    pub fn evaluate(&self, w: &[bool], a: &[bool]) -> i64 {
        eval(&self.root, w, a)
    }
}

fn bit(bits: &[bool], i: i64) -> i64 {
    usize::try_from(i).ok().and_then(|i| bits.get(i)).map_or(0, |&b| b as i64)
}

fn eval(n: &Node, w: &[bool], a: &[bool]) -> i64 {
    match n {
        Node::Num(v) => *v,
        Node::Len => w.len() as i64,
        Node::AdviceLen => a.len() as i64,
        Node::WordBit(i) => bit(w, eval(i, w, a)),
        Node::AdviceBit(i) => bit(a, eval(i, w, a)),
        Node::Log2(x) => {
            let v = eval(x, w, a);
            if v <= 0 {
                0
            } else {
                63 - v.leading_zeros() as i64
            }
        }
        Node::Not(x) => (eval(x, w, a) == 0) as i64,
        Node::Neg(x) => eval(x, w, a).wrapping_neg(),
        Node::Bin(op, l, r) => {
            let x = eval(l, w, a);
            // short-circuit keeps rules total on guarded lookups
            match op {
                BinOp::Or if x != 0 => return 1,
                BinOp::And if x == 0 => return 0,
                _ => {}
            }
            let y = eval(r, w, a);
            match op {
                BinOp::Or | BinOp::And => (y != 0) as i64,
                BinOp::Xor => x ^ y,
                BinOp::Eq => (x == y) as i64,
                BinOp::Ne => (x != y) as i64,
                BinOp::Lt => (x < y) as i64,
                BinOp::Le => (x <= y) as i64,
                BinOp::Gt => (x > y) as i64,
                BinOp::Ge => (x >= y) as i64,
                BinOp::Add => x.wrapping_add(y),
                BinOp::Sub => x.wrapping_sub(y),
                BinOp::Mul => x.wrapping_mul(y),
                // division by zero yields zero so every rule is total
                BinOp::Div => x.checked_div(y).unwrap_or(0),
                BinOp::Rem => x.checked_rem(y).unwrap_or(0),
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError { column: self.pos + 1, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ExprError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{tok}`")))
        }
    }

    fn or(&mut self) -> Result<Node, ExprError> {
        let mut l = self.and()?;
        while self.eat("||") {
            l = Node::Bin(BinOp::Or, Box::new(l), Box::new(self.and()?));
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Node, ExprError> {
        let mut l = self.xor()?;
        while self.eat("&&") {
            l = Node::Bin(BinOp::And, Box::new(l), Box::new(self.xor()?));
        }
        Ok(l)
    }

    fn xor(&mut self) -> Result<Node, ExprError> {
        let mut l = self.cmp()?;
        while self.eat("^") {
            l = Node::Bin(BinOp::Xor, Box::new(l), Box::new(self.cmp()?));
        }
        Ok(l)
    }

    fn cmp(&mut self) -> Result<Node, ExprError> {
        let l = self.sum()?;
        let op = if self.eat("==") {
            BinOp::Eq
        } else if self.eat("!=") {
            BinOp::Ne
        } else if self.eat("<=") {
            BinOp::Le
        } else if self.eat(">=") {
            BinOp::Ge
        } else if self.eat("<") {
            BinOp::Lt
        } else if self.eat(">") {
            BinOp::Gt
        } else {
            return Ok(l);
        };
        Ok(Node::Bin(op, Box::new(l), Box::new(self.sum()?)))
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut l = self.product()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(l);
            };
            l = Node::Bin(op, Box::new(l), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut l = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else if self.eat("%") {
                BinOp::Rem
            } else {
                return Ok(l);
            };
            l = Node::Bin(op, Box::new(l), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        // `!=` never starts an operand, so a lone `!` is negation
        if self.eat("!") {
            return Ok(Node::Not(Box::new(self.unary()?)));
        }
        if self.eat("-") {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        if self.eat("(") {
            let e = self.or()?;
            self.expect(")")?;
            return Ok(e);
        }
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let tok = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if tok.is_empty() {
            return Err(self.error("expected a number, variable or `(`"));
        }
        if tok.bytes().all(|b| b.is_ascii_digit()) {
            return tok.parse().map(Node::Num).map_err(|_| ExprError { column: start + 1, msg: "number too large".into() });
        }
        match tok {
            "len" => Ok(Node::Len),
            "alen" => Ok(Node::AdviceLen),
            "w" | "a" => {
                self.expect("[")?;
                let i = self.or()?;
                self.expect("]")?;
                Ok(if tok == "w" { Node::WordBit(Box::new(i)) } else { Node::AdviceBit(Box::new(i)) })
            }
            "log2" => {
                self.expect("(")?;
                let x = self.or()?;
                self.expect(")")?;
                Ok(Node::Log2(Box::new(x)))
            }
            _ => Err(ExprError { column: start + 1, msg: format!("unknown name `{tok}`") }),
        }
    }
}
