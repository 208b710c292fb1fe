// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Text syntax for terms: `functor(arg,...)`, variables start with an
//! uppercase letter or `_` (a lone `_` is anonymous), integers, quoted atoms
//! `'I'`, and list sugar `[a,b|T]` for `cons/2` and `nil`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::SyntaxError;
use crate::terms::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Punct(&'static str),
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Atom(a) => format!("`{a}`"),
            Tok::Var(v) => format!("`{v}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Punct(p) => format!("`{p}`"),
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\'' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(SyntaxError::Parse { line: start_line, msg: "unterminated quoted atom".into() })
                        }
                        Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                            s.push('\'');
                            i += 2;
                        }
                        Some('\'') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Atom(s), start_line));
            }
            '-' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((Tok::Punct("-->"), line));
                i += 3;
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| SyntaxError::Parse { line, msg: format!("integer `{text}` out of range") })?;
                out.push((Tok::Int(n), line));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                if c.is_uppercase() || c == '_' {
                    out.push((Tok::Var(text), line));
                } else {
                    out.push((Tok::Atom(text), line));
                }
            }
            _ => {
                let p = match c {
                    '(' => "(",
                    ')' => ")",
                    '[' => "[",
                    ']' => "]",
                    ',' => ",",
                    '|' => "|",
                    '.' => ".",
                    '*' => "*",
                    ':' => ":",
                    '=' => "=",
                    '/' => "/",
                    other => {
                        return Err(SyntaxError::Parse { line, msg: format!("unexpected character `{other}`") })
                    }
                };
                out.push((Tok::Punct(p), line));
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Clause-local variable numbering.
#[derive(Default, Debug)]
pub(crate) struct VarScope {
    names: BTreeMap<String, u32>,
    next: u32,
}

impl VarScope {
    pub(crate) fn var(&mut self, name: &str) -> Term {
        if name == "_" {
            self.next += 1;
            return Term::var(self.next - 1);
        }
        if let Some(&id) = self.names.get(name) {
            return Term::var(id);
        }
        let id = self.next;
        self.next += 1;
        self.names.insert(name.to_string(), id);
        Term::var(id)
    }

    pub(crate) fn count(&self) -> u32 {
        self.next
    }
}

pub(crate) struct TokenStream<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
}

impl<'a> TokenStream<'a> {
    pub(crate) fn new(toks: &'a [(Tok, usize)]) -> Self {
        TokenStream { toks, pos: 0 }
    }

    pub(crate) fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub(crate) fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    pub(crate) fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse { line: self.line(), msg: msg.into() }
    }

    pub(crate) fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    pub(crate) fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected `{p}`, found {}", t.describe()))),
            None => Err(self.error(format!("expected `{p}`, found end of input"))),
        }
    }

    pub(crate) fn term(&mut self, scope: &mut VarScope) -> Result<Term, SyntaxError> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(scope.var(v)),
            Some(Tok::Int(i)) => Ok(Term::Int(*i)),
            Some(Tok::Atom(a)) => {
                if self.is_punct("(") {
                    self.pos += 1;
                    let mut args = Vec::new();
                    loop {
                        args.push(self.term(scope)?);
                        if self.is_punct(",") {
                            self.pos += 1;
                        } else {
                            self.expect(")")?;
                            break;
                        }
                    }
                    Ok(Term::app(a, args))
                } else {
                    Ok(Term::atom(a))
                }
            }
            Some(Tok::Punct("[")) => {
                if self.is_punct("]") {
                    self.pos += 1;
                    return Ok(Term::nil());
                }
                let mut items = Vec::new();
                loop {
                    items.push(self.term(scope)?);
                    if self.is_punct(",") {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let tail = if self.is_punct("|") {
                    self.pos += 1;
                    self.term(scope)?
                } else {
                    Term::nil()
                };
                self.expect("]")?;
                Ok(Term::list(items, tail))
            }
            Some(t) => {
                self.pos -= 1;
                Err(self.error(format!("expected a term, found {}", t.describe())))
            }
            None => Err(self.error("expected a term, found end of input")),
        }
    }
}

/// Parse a single term. Returns the term and its number of variables
/// (numbered `0..n` in order of appearance).
pub fn parse_term(src: &str) -> Result<(Term, u32), SyntaxError> {
    let toks = tokenize(src)?;
    let mut ts = TokenStream::new(&toks);
    let mut scope = VarScope::default();
    let t = ts.term(&mut scope)?;
    if ts.is_punct(".") {
        ts.next();
    }
    if !ts.at_end() {
        return Err(ts.error("trailing input after term"));
    }
    Ok((t, scope.count()))
}
