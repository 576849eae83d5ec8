//! The stack-spec and raising-expression mini-languages.
//!
//! ```text
//! spec    := bg(degree=<n>; gens=<perm>|<perm>...; field=<field>)
//!          | mu(<l>) | wps(<a0>,<a1>,...) | prod(<spec>,<spec>,...)
//! field   := Q | split | U(<e>; <g1>,<g2>,...)
//! raising := term ('+' term)*            -- one term per product factor
//! term    := builtin:index | builtin:quasitoric | builtin:zero
//!          | table:{<label>:<rational>,...} | file:<path.json>
//!          | boxplus(<raising>,<raising>,...)
//! ```
//!
//! Whitespace is ignored between tokens. Every error carries a byte offset.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::galois::FieldDescriptor;
use crate::group::FiniteGroup;
use crate::perm::{parse_permutation_at, GroupElement};
use crate::sector::{parse_rational, split_top_level, RaisingFunction, StackDescriptor};
use crate::Q;

#[derive(Clone, Debug, PartialEq)]
pub enum StackSpec {
    Bg {
        degree: usize,
        gens: Vec<GroupElement>,
        field: FieldDescriptor,
    },
    Mu(u64),
    Wps(Vec<u64>),
    Prod(Vec<StackSpec>),
}

impl fmt::Display for StackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackSpec::Bg { degree, gens, field } => {
                let g: Vec<String> = gens.iter().map(ToString::to_string).collect();
                write!(f, "bg(degree={degree}; gens={}; field={field})", g.join("|"))
            }
            StackSpec::Mu(l) => write!(f, "mu({l})"),
            StackSpec::Wps(a) => {
                let w: Vec<String> = a.iter().map(u64::to_string).collect();
                write!(f, "wps({})", w.join(","))
            }
            StackSpec::Prod(fs) => {
                let p: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "prod({})", p.join(","))
            }
        }
    }
}

impl StackSpec {
    /// Builds the descriptor, generating groups up to `order_bound` elements.
    pub fn to_descriptor(&self, order_bound: usize) -> Result<StackDescriptor> {
        let d = match self {
            StackSpec::Bg { degree, gens, field } => StackDescriptor::bg(
                FiniteGroup::generate_bounded(*degree, gens, order_bound)?,
                field.clone(),
            ),
            StackSpec::Mu(l) => StackDescriptor::Mu(*l),
            StackSpec::Wps(a) => StackDescriptor::Wps(a.clone()),
            StackSpec::Prod(fs) => StackDescriptor::Product(
                fs.iter()
                    .map(|f| f.to_descriptor(order_bound))
                    .collect::<Result<_>>()?,
            ),
        };
        d.validate()?;
        Ok(d)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: pos,
            message: msg.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, ch: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            self.err(self.pos, format!("expected '{}'", ch as char))
        }
    }

    fn ident(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        (start, &self.src[start..self.pos])
    }

    fn number(&mut self) -> Result<(usize, u64)> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a nonnegative integer");
        }
        match self.src[start..self.pos].parse() {
            Ok(v) => Ok((start, v)),
            Err(_) => self.err(start, "integer out of range"),
        }
    }

    /// Position of the `)` closing the group opened just before `self.pos`.
    fn matching_close(&self) -> Result<usize> {
        let bytes = self.src.as_bytes();
        let mut depth = 0i32;
        for (k, &b) in bytes.iter().enumerate().skip(self.pos) {
            match b {
                b'(' | b'[' | b'{' => depth += 1,
                b')' | b']' | b'}' if depth > 0 => depth -= 1,
                b')' => return Ok(k),
                b']' | b'}' => return self.err(k, "unbalanced bracket"),
                _ => {}
            }
        }
        self.err(bytes.len(), "missing ')'")
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err(self.pos, "unexpected trailing input");
        }
        Ok(())
    }
}

/// Parses a stack spec such as `prod(wps(2,3), mu(2))`.
pub fn parse_stack_spec(text: &str) -> Result<StackSpec> {
    let mut c = Cursor::new(text);
    let spec = parse_spec(&mut c, 0)?;
    c.finish()?;
    Ok(spec)
}

const MAX_DEPTH: usize = 64;

fn parse_spec(c: &mut Cursor, depth: usize) -> Result<StackSpec> {
    if depth > MAX_DEPTH {
        return c.err(c.pos, "nesting too deep");
    }
    let (start, name) = c.ident();
    match name {
        "mu" => {
            c.expect(b'(')?;
            let (at, l) = c.number()?;
            if l == 0 {
                return c.err(at, "mu(l) needs l >= 1");
            }
            c.expect(b')')?;
            Ok(StackSpec::Mu(l))
        }
        "wps" => {
            c.expect(b'(')?;
            let mut weights = Vec::new();
            loop {
                let (at, a) = c.number()?;
                if a == 0 {
                    return c.err(at, "weights must be positive");
                }
                weights.push(a);
                if !c.eat(b',') {
                    break;
                }
            }
            c.expect(b')')?;
            Ok(StackSpec::Wps(weights))
        }
        "prod" => {
            c.expect(b'(')?;
            let mut factors = vec![parse_spec(c, depth + 1)?];
            while c.eat(b',') {
                factors.push(parse_spec(c, depth + 1)?);
            }
            c.expect(b')')?;
            Ok(StackSpec::Prod(factors))
        }
        "bg" => {
            c.expect(b'(')?;
            let close = c.matching_close()?;
            let body_start = c.pos;
            let spec = parse_bg_body(&c.src[body_start..close], body_start)?;
            c.pos = close + 1;
            Ok(spec)
        }
        "" => c.err(start, "expected bg, mu, wps or prod"),
        other => c.err(start, format!("unknown stack '{other}'")),
    }
}

fn parse_bg_body(body: &str, base: usize) -> Result<StackSpec> {
    let err = |pos: usize, msg: &str| Error::Parse {
        offset: pos,
        message: msg.to_string(),
    };
    let mut degree: Option<(usize, usize)> = None;
    let mut gens_text: Option<(usize, &str)> = None;
    let mut field: Option<FieldDescriptor> = None;
    let mut offset = 0;
    for part in split_top_level_on(body, b';') {
        let pos = base + offset;
        offset += part.len() + 1;
        let trimmed = part.trim_start();
        let lead = pos + part.len() - trimmed.len();
        if trimmed.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(err(lead, "expected 'key=value'"));
        };
        let value_pos = lead + key.len() + 1;
        match key.trim() {
            "degree" => {
                let d: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| err(value_pos, "degree must be a positive integer"))?;
                if d == 0 || d > 64 {
                    return Err(err(value_pos, "degree must lie in 1..=64"));
                }
                degree = Some((value_pos, d));
            }
            "gens" => gens_text = Some((value_pos, value)),
            "field" => field = Some(parse_field(value, value_pos)?),
            other => return Err(err(lead, &format!("unknown bg field '{other}'"))),
        }
    }
    let (_, degree) = degree.ok_or_else(|| err(base, "missing 'degree='"))?;
    let mut gens = Vec::new();
    if let Some((pos, text)) = gens_text {
        let mut off = 0;
        for g in split_top_level_on(text, b'|') {
            if !g.trim().is_empty() {
                gens.push(parse_permutation_at(g.trim(), degree, pos + off + (g.len() - g.trim_start().len()))?);
            }
            off += g.len() + 1;
        }
    }
    Ok(StackSpec::Bg {
        degree,
        gens,
        field: field.unwrap_or(FieldDescriptor::Rationals),
    })
}

fn split_top_level_on(s: &str, sep: u8) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, b) in s.bytes().enumerate() {
        match b {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            _ if b == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// `Q`, `split` or `U(e; g1,g2,...)`.
pub fn parse_field(text: &str, base: usize) -> Result<FieldDescriptor> {
    let mut c = Cursor::new(text);
    let (start, name) = c.ident();
    let shift = |e: Error| match e {
        Error::Parse { offset, message } => Error::Parse {
            offset: offset + base,
            message,
        },
        other => Error::Parse {
            offset: base,
            message: other.to_string(),
        },
    };
    let fd = match name {
        "Q" => FieldDescriptor::Rationals,
        "split" => FieldDescriptor::Split,
        "U" => {
            (|| {
                c.expect(b'(')?;
                let (at, e) = c.number()?;
                c.expect(b';')?;
                let mut gens = Vec::new();
                if !c.eat(b')') {
                    loop {
                        gens.push(c.number()?.1);
                        if !c.eat(b',') {
                            break;
                        }
                    }
                    c.expect(b')')?;
                }
                FieldDescriptor::units(e, gens).map_err(|err| Error::Parse {
                    offset: at,
                    message: err.to_string(),
                })
            })()
            .map_err(shift)?
        }
        _ => {
            return Err(Error::Parse {
                offset: base + start,
                message: "expected Q, split or U(e; g1,...)".into(),
            })
        }
    };
    c.finish().map_err(shift)?;
    Ok(fd)
}

/// A raising-function expression, evaluated against a stack.
#[derive(Clone, Debug, PartialEq)]
pub enum RaisingExpr {
    Index,
    QuasiToric,
    Zero,
    Table(Vec<(String, Q)>),
    File(String),
    Boxplus(Vec<RaisingExpr>),
}

impl fmt::Display for RaisingExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RaisingExpr::Index => write!(f, "builtin:index"),
            RaisingExpr::QuasiToric => write!(f, "builtin:quasitoric"),
            RaisingExpr::Zero => write!(f, "builtin:zero"),
            RaisingExpr::Table(rows) => {
                let r: Vec<String> = rows.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                write!(f, "table:{{{}}}", r.join(","))
            }
            RaisingExpr::File(p) => write!(f, "file:{p}"),
            RaisingExpr::Boxplus(terms) => {
                let t: Vec<String> = terms.iter().map(ToString::to_string).collect();
                write!(f, "boxplus({})", t.join(","))
            }
        }
    }
}

pub fn parse_raising(text: &str) -> Result<RaisingExpr> {
    let mut c = Cursor::new(text);
    let e = parse_sum(&mut c, 0)?;
    c.finish()?;
    Ok(e)
}

fn parse_sum(c: &mut Cursor, depth: usize) -> Result<RaisingExpr> {
    let mut terms = vec![parse_term(c, depth)?];
    while c.eat(b'+') {
        terms.push(parse_term(c, depth)?);
    }
    Ok(if terms.len() == 1 {
        terms.pop().expect("one term")
    } else {
        RaisingExpr::Boxplus(terms)
    })
}

fn parse_term(c: &mut Cursor, depth: usize) -> Result<RaisingExpr> {
    if depth > MAX_DEPTH {
        return c.err(c.pos, "nesting too deep");
    }
    let (start, name) = c.ident();
    match name {
        "builtin" => {
            c.expect(b':')?;
            let (at, which) = c.ident();
            match which {
                "index" => Ok(RaisingExpr::Index),
                "quasitoric" | "quasi_toric" => Ok(RaisingExpr::QuasiToric),
                "zero" => Ok(RaisingExpr::Zero),
                _ => c.err(at, "expected index, quasitoric or zero"),
            }
        }
        "table" => {
            c.expect(b':')?;
            c.expect(b'{')?;
            let body_start = c.pos;
            let close = c.matching_close_brace()?;
            let body = &c.src[body_start..close];
            let mut rows = Vec::new();
            let mut off = body_start;
            for entry in split_top_level(body) {
                let here = off;
                off += entry.len() + 1;
                if entry.trim().is_empty() {
                    if body.trim().is_empty() {
                        continue;
                    }
                    return c.err(here, "empty table entry");
                }
                let Some((label, value)) = entry.rsplit_once(':') else {
                    return c.err(here, "expected '<label>:<rational>'");
                };
                let v = parse_rational(value).map_err(|_| Error::Parse {
                    offset: here + label.len() + 1,
                    message: format!("'{}' is not a rational number", value.trim()),
                })?;
                if v < Q::zero() {
                    return c.err(here + label.len() + 1, "raising values must be nonnegative");
                }
                rows.push((label.trim().to_string(), v));
            }
            c.pos = close + 1;
            Ok(RaisingExpr::Table(rows))
        }
        "file" => {
            c.expect(b':')?;
            let from = c.pos;
            let rest = &c.src[from..];
            let len = rest
                .bytes()
                .position(|b| matches!(b, b'+' | b',' | b')'))
                .unwrap_or(rest.len());
            let path = rest[..len].trim();
            if path.is_empty() {
                return c.err(from, "expected a file path");
            }
            c.pos = from + len;
            Ok(RaisingExpr::File(path.to_string()))
        }
        "boxplus" => {
            c.expect(b'(')?;
            let mut terms = vec![parse_sum(c, depth + 1)?];
            while c.eat(b',') {
                terms.push(parse_sum(c, depth + 1)?);
            }
            c.expect(b')')?;
            Ok(RaisingExpr::Boxplus(terms))
        }
        "" => c.err(start, "expected builtin:, table:, file: or boxplus("),
        other => c.err(start, format!("unknown raising source '{other}'")),
    }
}

impl Cursor<'_> {
    fn matching_close_brace(&self) -> Result<usize> {
        let bytes = self.src.as_bytes();
        let mut depth = 0i32;
        for (k, &b) in bytes.iter().enumerate().skip(self.pos) {
            match b {
                b'{' | b'(' | b'[' => depth += 1,
                b'}' if depth == 0 => return Ok(k),
                b'}' | b')' | b']' if depth > 0 => depth -= 1,
                b')' | b']' => return self.err(k, "unbalanced bracket"),
                _ => {}
            }
        }
        self.err(bytes.len(), "missing '}'")
    }
}

impl RaisingExpr {
    /// Evaluates against `stack`; a sum of terms is the ⊞-product over factors.
    pub fn evaluate(&self, stack: &StackDescriptor) -> Result<RaisingFunction> {
        match self {
            RaisingExpr::Zero => RaisingFunction::zero(stack),
            RaisingExpr::Index => match stack {
                StackDescriptor::BG { .. } => RaisingFunction::index(stack),
                _ => Err(Error::Raising(format!("builtin:index needs a bg stack, got {stack}"))),
            },
            RaisingExpr::QuasiToric => match stack {
                StackDescriptor::Wps(a) => RaisingFunction::quasi_toric(a),
                _ => Err(Error::Raising(format!("builtin:quasitoric needs a wps stack, got {stack}"))),
            },
            RaisingExpr::Table(rows) => table_on(stack, rows.iter().map(|(k, v)| (k.as_str(), *v))),
            RaisingExpr::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{path}: {e}")))?;
                let map: BTreeMap<String, String> = serde_json::from_str(&text)
                    .map_err(|e| Error::Raising(format!("{path}: {e}")))?;
                let rows = map
                    .iter()
                    .map(|(k, v)| Ok((k.as_str(), parse_rational(v)?)))
                    .collect::<Result<Vec<_>>>()?;
                table_on(stack, rows)
            }
            RaisingExpr::Boxplus(terms) => {
                let StackDescriptor::Product(factors) = stack else {
                    return Err(Error::Raising(format!(
                        "a sum of {} raising terms needs a product stack, got {stack}",
                        terms.len()
                    )));
                };
                if factors.len() != terms.len() {
                    return Err(Error::Raising(format!(
                        "{} raising terms for {} factors",
                        terms.len(),
                        factors.len()
                    )));
                }
                let parts = terms
                    .iter()
                    .zip(factors)
                    .map(|(t, f)| t.evaluate(f))
                    .collect::<Result<Vec<_>>>()?;
                RaisingFunction::boxplus_on(stack, &parts)
            }
        }
    }
}

fn table_on<'a>(stack: &StackDescriptor, rows: impl IntoIterator<Item = (&'a str, Q)>) -> Result<RaisingFunction> {
    let mut map = BTreeMap::new();
    for (key, v) in rows {
        let label = stack.resolve_label(key)?;
        if let Some(old) = map.insert(label.clone(), v) {
            if old != v {
                return Err(Error::Raising(format!("conflicting values for sector {label}")));
            }
        }
    }
    RaisingFunction::for_stack(stack, map)
}
