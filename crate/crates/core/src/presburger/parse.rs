use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{Atom, Formula};
use crate::linear::LinearTerm;
use crate::num::Int;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(Int),
    Ident(String),
    LParen,
    RParen,
    Dot,
    Bang,
    Wedge,
    Vee,
    Pipe,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
            t => format!("`{}`", tok_text(t)),
        }
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Dot => ".",
        Tok::Bang => "!",
        Tok::Wedge => "/\\",
        Tok::Vee => "\\/",
        Tok::Pipe => "|",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Eq => "=",
        Tok::Ge => ">=",
        Tok::Gt => ">",
        Tok::Ne => "!=",
        _ => "?",
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = (line, col);
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '.' => (Tok::Dot, 1),
            '|' => (Tok::Pipe, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '*' => (Tok::Star, 1),
            '!' if next == Some('=') => (Tok::Ne, 2),
            '!' => (Tok::Bang, 1),
            '/' if next == Some('\\') => (Tok::Wedge, 2),
            '\\' if next == Some('/') => (Tok::Vee, 2),
            '<' if next == Some('=') => (Tok::Le, 2),
            '<' => (Tok::Lt, 1),
            '>' if next == Some('=') => (Tok::Ge, 2),
            '>' => (Tok::Gt, 1),
            '=' => (Tok::Eq, 1),
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                (Tok::Int(s.parse().expect("digits")), j - i)
            }
            a if a.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => return Err(SyntaxError { line, column: col, message: format!("unexpected character `{other}`") }),
        };
        out.push(Spanned { tok, line: start.0, column: start.1 });
        i += len;
        col += len;
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "E" | "A" | "true" | "false")
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    bound: Vec<String>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError { line: s.line, column: s.column, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok_text(&t))))
        }
    }

    fn quantifier_ahead(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "E" || s == "A") && matches!(self.peek_at(1), Tok::Ident(_))
    }

    fn formula(&mut self) -> PResult<Formula> {
        if self.quantifier_ahead() {
            return self.quantified();
        }
        self.disjunction()
    }

    fn quantified(&mut self) -> PResult<Formula> {
        let q = match self.bump() {
            Tok::Ident(s) => s,
            _ => unreachable!(),
        };
        let var_pos = self.pos;
        let v = match self.bump() {
            Tok::Ident(s) if !is_reserved(&s) => s,
            _ => {
                self.pos = var_pos;
                return Err(self.unexpected("a variable name"));
            }
        };
        if self.bound.contains(&v) {
            self.pos = var_pos;
            return Err(self.error_here(format!("variable `{v}` is already bound")));
        }
        self.expect(Tok::Dot)?;
        self.bound.push(v.clone());
        let body = self.formula();
        self.bound.pop();
        let body = body?;
        Ok(if q == "E" { Formula::exists(&v, body) } else { Formula::forall(&v, body) })
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Vee {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::Wedge {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::Bang {
            self.bump();
            let inner = self.unary()?;
            return Ok(Formula::Not(Box::new(inner)));
        }
        if self.quantifier_ahead() {
            return self.quantified();
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                return Ok(Formula::True);
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                return Ok(Formula::False);
            }
            _ => {}
        }
        let start = self.pos;
        match self.comparison() {
            Ok(f) => Ok(f),
            Err(e) if *self.toks[start].tok_ref() == Tok::LParen => {
                let far = self.pos;
                self.pos = start;
                self.bump();
                match self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f)) {
                    Ok(f) => Ok(f),
                    Err(e2) => {
                        // Report whichever attempt got further.
                        if self.pos >= far {
                            Err(e2)
                        } else {
                            Err(e)
                        }
                    }
                }
            }
            Err(e) => Err(e),
        }
    }

    fn comparison(&mut self) -> PResult<Formula> {
        // Divisibility: integer literal (optionally negated) followed by `|`.
        let neg = *self.peek() == Tok::Minus;
        let off = usize::from(neg);
        if let (Tok::Int(m), Tok::Pipe) = (self.peek_at(off).clone(), self.peek_at(off + 1)) {
            self.pos += off + 2;
            let t = self.term()?;
            let m = if neg { -m } else { m };
            let m = m.abs();
            return Ok(if m.is_zero() {
                Formula::eq0(t)
            } else if m.is_one() {
                Formula::True
            } else {
                Formula::atom(Atom::Div(m, t))
            });
        }
        let lhs = self.term()?;
        let op = self.peek().clone();
        let mk: fn(LinearTerm, LinearTerm) -> Formula = match op {
            Tok::Lt => |a, b| Formula::geq(b.sub(&a).add_constant(&-Int::one())),
            Tok::Le => |a, b| Formula::geq(b.sub(&a)),
            Tok::Eq => |a, b| Formula::eq0(a.sub(&b)),
            Tok::Ge => |a, b| Formula::geq(a.sub(&b)),
            Tok::Gt => |a, b| Formula::geq(a.sub(&b).add_constant(&-Int::one())),
            Tok::Ne => |a, b| Formula::Not(Box::new(Formula::eq0(a.sub(&b)))),
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(mk(lhs, rhs))
    }

    fn term(&mut self) -> PResult<LinearTerm> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> PResult<LinearTerm> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let pos = self.pos;
            let rhs = self.factor()?;
            acc = if acc.is_constant() {
                rhs.scale(acc.constant_part())
            } else if rhs.is_constant() {
                acc.scale(rhs.constant_part())
            } else {
                self.pos = pos;
                return Err(self.error_here("products of two variables are not linear"));
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> PResult<LinearTerm> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            Tok::Int(v) => {
                self.bump();
                Ok(LinearTerm::constant(v))
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(LinearTerm::var(&s))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}

impl Spanned {
    fn tok_ref(&self) -> &Tok {
        &self.tok
    }
}

/// Parses formula text. Comparisons are normalized on the way in.
pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, bound: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses a bare linear term such as `2*s - 1`.
pub fn parse_term(text: &str) -> Result<LinearTerm, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, bound: Vec::new() };
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    #[test]
    fn exists_with_product() {
        let f = parse("E x. a = 2*x").unwrap();
        let t = LinearTerm::var("a").sub(&LinearTerm::monomial("x", 2));
        assert_eq!(f, Formula::exists("x", Formula::eq0(t)));
    }

    #[test]
    fn comparisons_are_normalized() {
        let f = parse("0 <= l /\\ l < 5").unwrap();
        let upper = LinearTerm::monomial("l", -1).add_constant(&int(4));
        assert_eq!(f, Formula::And(vec![Formula::geq(LinearTerm::var("l")), Formula::geq(upper)]));
    }

    #[test]
    fn dangling_comparison_is_an_error() {
        let e = parse("l < ").unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
    }

    #[test]
    fn precedence() {
        let f = parse("!x = 0 /\\ y >= 0 \\/ z >= 0").unwrap();
        match f {
            Formula::Or(v) => {
                assert_eq!(v.len(), 2);
                assert!(matches!(&v[0], Formula::And(w) if matches!(w[0], Formula::Not(_))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse("E x. x >= 0 /\\ x <= a \\/ a = 1").unwrap();
        assert!(matches!(f, Formula::Exists(_, ref b) if matches!(**b, Formula::Or(_))));
    }

    #[test]
    fn parenthesized_terms_and_formulas() {
        let f = parse("(x + 1) >= 0 /\\ (y = 0 \\/ 3 | y)").unwrap();
        assert!(matches!(f, Formula::And(ref v) if matches!(v[1], Formula::Or(_))));
        assert!(parse("(x >= 0").is_err());
    }

    #[test]
    fn rejects_nonlinear_and_rebinding() {
        assert!(parse("x*y >= 0").is_err());
        assert!(parse("E x. E x. x = 0").is_err());
        assert!(parse("(E x. x = 0) /\\ E x. x = 1").is_ok());
    }

    #[test]
    fn multiline_positions() {
        let e = parse("x >= 0 /\\\n  y >= ?").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
    }

    #[test]
    fn print_parse_round_trip() {
        for text in [
            "E x. a - 2*x = 0",
            "!(x >= 0 /\\ y = 0) \\/ 3 | x + y - 1",
            "A y. (E x. x - y >= 0) /\\ y >= 0",
            "(x >= 0 \\/ y >= 0) /\\ z = 0",
        ] {
            let f = parse(text).unwrap();
            let again = parse(&f.to_string()).unwrap();
            assert_eq!(f, again, "{text} printed as {f}");
        }
    }
}
