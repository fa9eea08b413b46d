//! Text literals for functions and base modules.
//!
//! Function literals:
//!
//! ```text
//! poly:[c0, c1, ...]
//! rat:[n0, n1, ...]/[d0, d1, ...]
//! ```
//!
//! where each coefficient is a real number (`-0.5`, `1e-3`) or a complex
//! number written `re+imi` / `re-imi` (`1.5-0.5i`); a bare imaginary part
//! (`2i`, `-i`) is also accepted. Whitespace is insignificant.
//!
//! Module literals: `hardy`, `bergman`, `bergman(alpha=0.5)`.

use std::fmt;

use num_complex::Complex;

use crate::holofun::HoloFun;
use crate::poly::Poly;
use crate::rkhs::ModuleKind;
use crate::scalar::Real;

/// A literal that failed to parse. `column` is 1-based and counts characters
/// of the original input, including whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralError {
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for LiteralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {} (at `{}`)", self.column, self.message, self.token)
    }
}

impl std::error::Error for LiteralError {}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        let chars = src
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        Self { chars, pos: 0, src }
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(i, _)| i + 1)
            .unwrap_or_else(|| self.src.chars().count() + 1)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn rest(&self) -> String {
        self.chars[self.pos..].iter().map(|&(_, c)| c).take(16).collect()
    }

    fn error(&self, message: impl Into<String>) -> LiteralError {
        let token = self.rest();
        LiteralError {
            column: self.column(),
            token: if token.is_empty() { "<end of input>".into() } else { token },
            message: message.into(),
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().map(|&(_, c)| c).eq(s.chars());
        if matches {
            self.pos += n;
        }
        matches
    }

    fn expect(&mut self, c: char) -> Result<(), LiteralError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }
}

fn parse_real(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_signed_unit(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(s),
    }
}

/// Parses a single coefficient such as `-0.5`, `1.5-0.5i`, `2i`.
pub fn parse_complex(token: &str) -> Option<Complex<f64>> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return parse_real(&s).map(|x| Complex::new(x, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_real(&body[..k])?;
            let im = parse_signed_unit(&body[k..])?;
            Some(Complex::new(re, im))
        }
        None => parse_signed_unit(body).map(|im| Complex::new(0.0, im)),
    }
}

fn parse_list<T: Real>(cur: &mut Cursor<'_>) -> Result<Vec<Complex<T>>, LiteralError> {
    cur.expect('[')?;
    let mut out = Vec::new();
    loop {
        let start = cur.pos;
        let col = cur.column();
        while let Some(c) = cur.peek() {
            if c == ',' || c == ']' {
                break;
            }
            cur.pos += 1;
        }
        let token: String = cur.chars[start..cur.pos].iter().map(|&(_, c)| c).collect();
        let value = parse_complex(&token).ok_or_else(|| LiteralError {
            column: col,
            token: if token.is_empty() { "<empty>".into() } else { token.clone() },
            message: "invalid coefficient".into(),
        })?;
        out.push(Complex::new(T::lit(value.re), T::lit(value.im)));
        match cur.peek() {
            Some(',') => cur.pos += 1,
            Some(']') => {
                cur.pos += 1;
                return Ok(out);
            }
            _ => return Err(cur.error("unterminated coefficient list, expected `]`")),
        }
    }
}

/// Parses a function literal.
pub fn parse_function<T: Real>(src: &str) -> Result<HoloFun<T>, LiteralError> {
    let mut cur = Cursor::new(src);
    let f = if cur.eat_str("poly:") {
        HoloFun::polynomial(parse_list(&mut cur)?)
    } else if cur.eat_str("rat:") {
        let col = cur.column();
        let num = parse_list(&mut cur)?;
        cur.expect('/')?;
        let den = parse_list(&mut cur)?;
        HoloFun::from_parts(Poly::new(num), Poly::new(den)).map_err(|e| LiteralError {
            column: col,
            token: src.trim().to_string(),
            message: e.to_string(),
        })?
    } else {
        return Err(cur.error("expected `poly:` or `rat:`"));
    };
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok(f)
}

/// Parses a base-module literal.
pub fn parse_module<T: Real>(src: &str) -> Result<ModuleKind<T>, LiteralError> {
    let mut cur = Cursor::new(src);
    let kind = if cur.eat_str("hardy") {
        ModuleKind::Hardy
    } else if cur.eat_str("bergman") {
        if cur.eat_str("(") {
            if !cur.eat_str("alpha=") {
                return Err(cur.error("expected `alpha=`"));
            }
            let col = cur.column();
            let start = cur.pos;
            while cur.peek().is_some_and(|c| c != ')') {
                cur.pos += 1;
            }
            let token: String = cur.chars[start..cur.pos].iter().map(|&(_, c)| c).collect();
            cur.expect(')')?;
            let alpha = parse_real(&token).ok_or_else(|| LiteralError {
                column: col,
                token: token.clone(),
                message: "invalid weight".into(),
            })?;
            ModuleKind::weighted_bergman(T::lit(alpha)).map_err(|e| LiteralError {
                column: col,
                token,
                message: e.to_string(),
            })?
        } else {
            ModuleKind::bergman()
        }
    } else {
        return Err(cur.error("expected `hardy` or `bergman`"));
    };
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok(kind)
}

impl<T: Real> std::str::FromStr for HoloFun<T> {
    type Err = LiteralError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_function(s)
    }
}

impl<T: Real> std::str::FromStr for ModuleKind<T> {
    type Err = LiteralError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_module(s)
    }
}
