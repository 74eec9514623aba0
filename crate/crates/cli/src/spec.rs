//! The mini-language for series, sets, partitions and maps.
//!
//! ```text
//! expr := name | name '(' args ')' | number | '[' [expr {',' expr}] ']'
//! args := arg {',' arg}        arg := expr | (nothing)
//! number := ['-'] digits ['/' digits]
//! ```
//!
//! Numbers keep their literal text, so bit strings such as `0011` survive a
//! round trip. An empty argument is only meaningful as an empty bit string, as
//! in `periodic(,10)`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecExpr {
    Call { name: String, args: Vec<SpecExpr> },
    Number(String),
    List(Vec<SpecExpr>),
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Series,
    Set,
    Partition,
    Map,
    Word,
}

/// Every name the language knows, with its result kind and admissible arities.
pub const BUILDERS: &[(&str, Kind, &[usize])] = &[
    ("altharmonic", Kind::Series, &[0]),
    ("basel", Kind::Series, &[0]),
    ("telescoping", Kind::Series, &[0]),
    ("zero", Kind::Series, &[0]),
    ("perturb", Kind::Series, &[2]),
    ("scale", Kind::Series, &[2]),
    ("flip", Kind::Series, &[2]),
    ("restrict", Kind::Series, &[2]),
    ("add", Kind::Series, &[2]),
    ("alternating_on", Kind::Series, &[1]),
    ("alternating_on_two", Kind::Series, &[3]),
    ("split_witness", Kind::Series, &[1, 2]),
    ("covm_from_y", Kind::Series, &[2]),
    ("ac_from_f", Kind::Series, &[2]),
    ("diagonal_defeat", Kind::Series, &[3]),
    ("two_set_defeat", Kind::Series, &[3, 4]),
    ("evens", Kind::Set, &[0]),
    ("odds", Kind::Set, &[0]),
    ("omega", Kind::Set, &[0]),
    ("empty", Kind::Set, &[0]),
    ("mod", Kind::Set, &[2]),
    ("periodic", Kind::Set, &[2]),
    ("finite", Kind::Set, &[1]),
    ("union", Kind::Set, &[2]),
    ("inter", Kind::Set, &[2]),
    ("diff", Kind::Set, &[2]),
    ("sdiff", Kind::Set, &[2]),
    ("compl", Kind::Set, &[1]),
    ("blocks", Kind::Set, &[2]),
    ("range", Kind::Set, &[1]),
    ("singletons", Kind::Partition, &[0]),
    ("uniform", Kind::Partition, &[1]),
    ("triangular", Kind::Partition, &[0]),
    ("geometric", Kind::Partition, &[0]),
    ("bounds", Kind::Partition, &[1]),
    ("runs", Kind::Partition, &[1]),
    ("d_bound", Kind::Partition, &[2, 3]),
    ("identity", Kind::Map, &[0]),
    ("linear", Kind::Map, &[2]),
    ("table", Kind::Map, &[1]),
    ("enum", Kind::Map, &[1]),
    ("ac_decay", Kind::Map, &[2]),
    ("even", Kind::Word, &[0]),
    ("odd", Kind::Word, &[0]),
];

pub fn builder(name: &str) -> Option<(Kind, &'static [usize])> {
    BUILDERS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, k, a)| (*k, *a))
}

/// Parse errors; offsets are 1-based character positions, so an error at the
/// end of the input points one past its last character.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown builder `{name}` at offset {offset}")]
    UnknownBuilder { offset: usize, name: String },
    #[error("`{name}` at offset {offset} takes {expected} argument(s), got {got}")]
    Arity {
        offset: usize,
        name: String,
        expected: String,
        got: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownBuilder { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

pub fn parse_spec(text: &str) -> Result<SpecExpr, ParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.syntax("trailing input"));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos + 1,
            message: message.to_string(),
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

    fn expr(&mut self) -> Result<SpecExpr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some('[') => {
                self.pos += 1;
                let items = self.sequence(']', false)?;
                Ok(SpecExpr::List(items))
            }
            Some(c) if c == '-' || c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.call(),
            Some(c) => Err(self.syntax(&format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<SpecExpr, ParseError> {
        let start = self.pos;
        if self.chars[self.pos] == '-' {
            self.pos += 1;
        }
        self.digits()?;
        if self.chars.get(self.pos) == Some(&'/') {
            self.pos += 1;
            self.digits()?;
        }
        Ok(SpecExpr::Number(
            self.chars[start..self.pos].iter().collect(),
        ))
    }

    fn digits(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.syntax("expected digits"));
        }
        Ok(())
    }

    fn call(&mut self) -> Result<SpecExpr, ParseError> {
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        let args = if self.peek() == Some('(') {
            self.pos += 1;
            self.sequence(')', true)?
        } else {
            Vec::new()
        };
        let offset = start + 1;
        let Some((_, arities)) = builder(&name) else {
            return Err(ParseError::UnknownBuilder { offset, name });
        };
        if !arities.contains(&args.len()) {
            let expected = arities
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(" or ");
            return Err(ParseError::Arity {
                offset,
                name,
                expected,
                got: args.len(),
            });
        }
        Ok(SpecExpr::Call { name, args })
    }

    /// Items up to `close`; `()` and `[]` are empty, and inside calls an item may
    /// be empty.
    fn sequence(&mut self, close: char, allow_empty: bool) -> Result<Vec<SpecExpr>, ParseError> {
        let mut items = Vec::new();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            match self.peek() {
                Some(c) if allow_empty && (c == ',' || c == close) => items.push(SpecExpr::Empty),
                _ => items.push(self.expr()?),
            }
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(items);
                }
                None => return Err(self.syntax("unexpected end of input")),
                Some(c) => {
                    return Err(self.syntax(&format!("expected `,` or `{close}`, found `{c}`")))
                }
            }
        }
    }
}

impl fmt::Display for SpecExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, items: &[SpecExpr]) -> fmt::Result {
            for (k, e) in items.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            Ok(())
        }
        match self {
            SpecExpr::Call { name, args } if args.is_empty() => f.write_str(name),
            SpecExpr::Call { name, args } => {
                write!(f, "{name}(")?;
                join(f, args)?;
                f.write_str(")")
            }
            SpecExpr::Number(t) => f.write_str(t),
            SpecExpr::List(items) => {
                f.write_str("[")?;
                join(f, items)?;
                f.write_str("]")
            }
            SpecExpr::Empty => Ok(()),
        }
    }
}
