//! Text syntax for lattice expressions.
//!
//! Grammar:
//! ```text
//! EXPR := TERM ('+' TERM)*
//! TERM := [count '*'] ATOM [ '(' int ')' ]
//! ATOM := 'U' | 'A' nat | '<' even-int '>' | 'gram' '[' '[' int,... ']' ,... ']'
//! ```
//! `2*U + A2`, `U(2)`, `<-6> + <-2>` and `gram [[0,1],[1,0]]` are all valid.
//! Blocks are assembled in listed order; `(m)` rescales the preceding atom.

use crate::lattice::{build_lattice, LatRef, LatticeTerm};
use crate::{Error, Result};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { src: s.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.bump() {
            Some(x) if x == c => Ok(()),
            _ => Err(self.err(format!("expected '{}'", c))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { at: self.pos, msg: msg.into() }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|e| self.err(format!("bad integer: {}", e)))
    }

    fn natural(&mut self) -> Result<usize> {
        let v = self.integer()?;
        if v < 0 {
            return Err(self.err("expected a nonnegative integer"));
        }
        Ok(v as usize)
    }
}

/// Parse a lattice expression into its term list.
pub fn parse_terms(input: &str) -> Result<Vec<(LatticeTerm, usize)>> {
    let mut cur = Cursor::new(input);
    let mut terms = Vec::new();
    loop {
        terms.push(parse_term(&mut cur)?);
        cur.skip_ws();
        if cur.pos >= cur.src.len() {
            break;
        }
        cur.expect('+')?;
    }
    Ok(terms)
}

/// Parse and build the lattice.
pub fn parse_lattice(input: &str) -> Result<LatRef> {
    build_lattice(&parse_terms(input)?)
}

fn parse_term(cur: &mut Cursor) -> Result<(LatticeTerm, usize)> {
    cur.skip_ws();
    // optional count prefix
    let mut count = 1usize;
    if cur.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
        let save = cur.pos;
        let n = cur.natural()?;
        if cur.eat('*') {
            count = n;
        } else {
            cur.pos = save;
            return Err(cur.err("expected '*' after multiplicity"));
        }
    }
    let atom = match cur.peek() {
        Some('U') | Some('u') => {
            cur.pos += 1;
            let scale = parse_rescale(cur)?;
            LatticeTerm::U(scale)
        }
        Some('A') | Some('a') => {
            cur.pos += 1;
            let n = cur.natural()?;
            let scale = parse_rescale(cur)?;
            LatticeTerm::A(n, scale)
        }
        Some('<') => {
            cur.pos += 1;
            let d = cur.integer()?;
            cur.expect('>')?;
            if d % 2 != 0 {
                return Err(cur.err("rank-1 entry must be even"));
            }
            LatticeTerm::Rank1(d)
        }
        Some('g') => {
            for c in "gram".chars() {
                if cur.bump() != Some(c) {
                    return Err(cur.err("expected 'gram'"));
                }
            }
            let rows = parse_matrix(cur)?;
            let scale = parse_rescale(cur)?;
            LatticeTerm::Gram(rows, scale)
        }
        _ => return Err(cur.err("expected U, A<n>, <d> or gram [[...]]")),
    };
    Ok((atom, count))
}

fn parse_rescale(cur: &mut Cursor) -> Result<i64> {
    if cur.eat('(') {
        let m = cur.integer()?;
        cur.expect(')')?;
        if m == 0 {
            return Err(cur.err("rescale by zero"));
        }
        Ok(m)
    } else {
        Ok(1)
    }
}

fn parse_matrix(cur: &mut Cursor) -> Result<Vec<Vec<i64>>> {
    cur.expect('[')?;
    let mut rows = Vec::new();
    loop {
        cur.expect('[')?;
        let mut row = Vec::new();
        loop {
            row.push(cur.integer()?);
            if !cur.eat(',') {
                break;
            }
        }
        cur.expect(']')?;
        rows.push(row);
        if !cur.eat(',') {
            break;
        }
    }
    cur.expect(']')?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gram_u;
    use crate::matrix::IntMat;

    #[test]
    fn parse_simple() {
        let u = parse_lattice("U").unwrap();
        assert_eq!(u.gram(), &gram_u());
        let l = parse_lattice("2*U + A2").unwrap();
        assert_eq!(l.rank(), 6);
        assert_eq!(l.signature(), (2, 4));
        let l = parse_lattice("2*U + <-6> + <-2>").unwrap();
        assert_eq!(l.rank(), 6);
        assert_eq!(l.det().to_string(), "12");
    }

    #[test]
    fn parse_rescaled() {
        let u2 = parse_lattice("U(2)").unwrap();
        assert_eq!(u2.gram(), &IntMat::from_rows(&[vec![0, 2], vec![2, 0]]));
        let l = parse_lattice("2*U(2) + A2").unwrap();
        assert_eq!(l.rank(), 6);
        let a22 = parse_lattice("A2(2)").unwrap();
        assert_eq!(a22.gram(), &IntMat::from_rows(&[vec![-4, -2], vec![-2, -4]]));
    }

    #[test]
    fn parse_gram_literal() {
        let l = parse_lattice("gram [[0,1],[1,0]]").unwrap();
        assert_eq!(l.gram(), &gram_u());
        let l = parse_lattice("U + gram [[-2,-1],[-1,-2]]").unwrap();
        assert_eq!(l.rank(), 4);
    }

    #[test]
    fn parse_errors_carry_location() {
        let e = parse_lattice("U + ").unwrap_err();
        match e {
            Error::Parse { .. } => {}
            other => panic!("expected parse error, got {:?}", other),
        }
        assert!(parse_lattice("<3>").is_err()); // odd
        assert!(parse_lattice("B2").is_err());
        assert!(parse_lattice("2U").is_err()); // multiplicity needs '*'
    }

    #[test]
    fn vector_syntax() {
        let v = parse_vector("(1,-1,0,0,0)").unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], crate::matrix::rat(1));
        let v = parse_vector("(1/2, 3, -2/4)").unwrap();
        assert_eq!(v[2], crate::matrix::Rat::new(crate::matrix::int(-1), crate::matrix::int(2)));
        assert!(parse_vector("1,2").is_err());
    }
}

/// Parse a vector literal `(a, b, c, ...)` with rational entries `p` or
/// `p/q`.
pub fn parse_vector(input: &str) -> Result<Vec<crate::matrix::Rat>> {
    let mut cur = Cursor::new(input);
    cur.expect('(')?;
    let mut out = Vec::new();
    loop {
        let num = cur.integer()?;
        let mut den = 1i64;
        if cur.eat('/') {
            den = cur.integer()?;
            if den == 0 {
                return Err(cur.err("zero denominator"));
            }
        }
        out.push(crate::matrix::Rat::new(crate::matrix::int(num), crate::matrix::int(den)));
        if !cur.eat(',') {
            break;
        }
    }
    cur.expect(')')?;
    cur.skip_ws();
    if cur.pos != cur.src.len() {
        return Err(cur.err("trailing input after vector"));
    }
    Ok(out)
}
