//! S-expression reader with source positions.

use super::ParseError;

/// Line/column of a token, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_atom)
    }
}

pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

/// Reads exactly one top-level list. Symbols are lower-cased (PDDL is
/// case-insensitive); `;` starts a comment running to end of line.
pub fn read_one(text: &str) -> Result<SExpr, ParseError> {
    let mut reader = Reader::new(text);
    reader.skip_ws();
    let start = reader.pos();
    let Some(c) = reader.peek() else {
        return Err(syntax(start, "expected `(`, found end of input"));
    };
    if c != '(' {
        return Err(syntax(start, format!("expected `(`, found `{c}`")));
    }
    let expr = reader.read_expr()?;
    reader.skip_ws();
    if let Some(c) = reader.peek() {
        return Err(syntax(reader.pos(), format!("unexpected `{c}` after definition")));
    }
    Ok(expr)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read_expr(&mut self) -> Result<SExpr, ParseError> {
        self.skip_ws();
        let pos = self.pos();
        match self.peek() {
            None => Err(syntax(pos, "unexpected end of input")),
            Some(')') => Err(syntax(pos, "unbalanced `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(syntax(pos, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, pos));
                        }
                        Some(_) => items.push(self.read_expr()?),
                    }
                }
            }
            Some(_) => {
                let mut sym = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.push(c.to_ascii_lowercase());
                    self.bump();
                }
                Ok(SExpr::Atom(sym, pos))
            }
        }
    }
}
