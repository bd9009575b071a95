use std::fmt;

/// Failure to read a state or program from its text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input where the problem was detected.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    WrongSlotCount { expected: usize, found: usize },
    BadIndex(String),
    UnknownColor(char),
    Capacity(String),
    HatOnEmpty(usize),
    DuplicateObject(char),
    DuplicateEntity(String),
    LengthMismatch { entities: usize, locations: usize },
    BadSpan(String),
    UnknownFunction(String),
    Arity { function: &'static str, expected: usize, found: usize },
    OutOfRange(String),
    UnknownFraction(String),
    EmptyProgram,
}

impl ParseError {
    pub fn new(position: usize, kind: ParseErrorKind) -> Self {
        Self { position, kind }
    }

    pub(crate) fn shifted(mut self, by: usize) -> Self {
        self.position += by;
        self
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            Syntax(m) => write!(f, "syntax error: {m}"),
            WrongSlotCount { expected, found } => write!(f, "expected {expected} slots, found {found}"),
            BadIndex(m) => write!(f, "bad index: {m}"),
            UnknownColor(c) => write!(f, "unknown color code `{c}`"),
            Capacity(m) => write!(f, "{m}"),
            HatOnEmpty(p) => write!(f, "hat on empty position {p}"),
            DuplicateObject(o) => write!(f, "duplicate object {o}"),
            DuplicateEntity(e) => write!(f, "duplicate entity `{e}`"),
            LengthMismatch { entities, locations } => {
                write!(f, "{entities} entities but {locations} locations")
            }
            BadSpan(m) => write!(f, "bad span: {m}"),
            UnknownFunction(n) => write!(f, "unknown function `{n}`"),
            Arity { function, expected, found } => {
                write!(f, "{function} takes {expected} argument(s), found {found}")
            }
            OutOfRange(m) => write!(f, "literal out of range: {m}"),
            UnknownFraction(m) => write!(f, "unknown fraction `{m}`"),
            EmptyProgram => write!(f, "program has no actions"),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.kind)
    }
}

impl std::error::Error for ParseError {}
