//! Reader for the s-expression exchange format.
//!
//! ```text
//! concept    := NAME | TOP | BOTTOM | (and C C+) | (or C C+) | (not C)
//!             | (all R C) | (some R C) | (atleast n R) | (atmost n R)
//! role       := PNAME | (and PNAME+)
//! statement  := (implies C D) | (define-concept A D) | (define-primitive A D)
//!             | (instance a C) | (related a b R)
//! ```
//!
//! `;` starts a line comment. n-ary `and`/`or` fold to the left.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::encodings::{define_concept, define_primitive};
use crate::syntax::{
    Assertion, Concept, ConceptName, IndividualName, KnowledgeBase, Role, RoleName, DEFAULT_NUMBER_CAP,
    RESERVED_INDIVIDUAL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("number {value} exceeds the cap {cap}")]
    NumberCap { value: String, cap: u64 },
    #[error("`{token}` is used both as {first} name and as {second} name")]
    NamespaceClash {
        token: String,
        first: &'static str,
        second: &'static str,
    },
    #[error("`{0}` is a reserved name")]
    ReservedName(String),
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Largest number accepted in `atleast`/`atmost`.
    pub number_cap: u64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            number_cap: DEFAULT_NUMBER_CAP,
        }
    }
}

#[derive(Debug)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        kind: ParseErrorKind::Syntax(msg.into()),
    })
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), pos));
            }
            ')' => {
                chars.next();
                col += 1;
                let Some((items, open)) = stack.pop() else {
                    return err(pos, "unbalanced `)`");
                };
                let list = Sexp::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let mut tok = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                    col += 1;
                }
                let atom = Sexp::Atom(tok, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => return err(pos, "bare atom at top level; statements must be parenthesised"),
                }
            }
        }
    }
    if let Some((_, open)) = stack.pop() {
        return err(open, "unclosed `(`");
    }
    Ok(top)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Namespace {
    Concept,
    Role,
    Individual,
}

impl Namespace {
    fn label(self) -> &'static str {
        match self {
            Namespace::Concept => "a concept",
            Namespace::Role => "a role",
            Namespace::Individual => "an individual",
        }
    }
}

struct Reader {
    opts: ParseOptions,
    seen: BTreeMap<String, Namespace>,
}

impl Reader {
    fn claim(&mut self, token: &str, ns: Namespace, pos: Pos) -> Result<(), ParseError> {
        match self.seen.get(token) {
            Some(&prev) if prev != ns => Err(ParseError {
                pos,
                kind: ParseErrorKind::NamespaceClash {
                    token: token.to_string(),
                    first: prev.label(),
                    second: ns.label(),
                },
            }),
            Some(_) => Ok(()),
            None => {
                self.seen.insert(token.to_string(), ns);
                Ok(())
            }
        }
    }

    fn atom<'a>(&self, s: &'a Sexp, what: &str) -> Result<(&'a str, Pos), ParseError> {
        match s {
            Sexp::Atom(t, p) => Ok((t, *p)),
            Sexp::List(_, p) => err(*p, format!("expected {what}, found a list")),
        }
    }

    fn concept_name(&mut self, tok: &str, pos: Pos) -> Result<ConceptName, ParseError> {
        let name = ConceptName::new(tok).or_else(|_| err(pos, format!("invalid concept name `{tok}`")))?;
        self.claim(tok, Namespace::Concept, pos)?;
        Ok(name)
    }

    fn role_name(&mut self, s: &Sexp) -> Result<RoleName, ParseError> {
        let (tok, pos) = self.atom(s, "a role name")?;
        let name = RoleName::new(tok).or_else(|_| err(pos, format!("invalid role name `{tok}`")))?;
        self.claim(tok, Namespace::Role, pos)?;
        Ok(name)
    }

    fn individual(&mut self, s: &Sexp) -> Result<IndividualName, ParseError> {
        let (tok, pos) = self.atom(s, "an individual name")?;
        if tok == RESERVED_INDIVIDUAL {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::ReservedName(tok.to_string()),
            });
        }
        let name = IndividualName::new(tok).or_else(|_| err(pos, format!("invalid individual name `{tok}`")))?;
        self.claim(tok, Namespace::Individual, pos)?;
        Ok(name)
    }

    fn role(&mut self, s: &Sexp) -> Result<Role, ParseError> {
        match s {
            Sexp::Atom(..) => Ok(Role::atomic(self.role_name(s)?)),
            Sexp::List(items, pos) => {
                match items.first() {
                    Some(Sexp::Atom(h, _)) if h == "and" => {}
                    _ => return err(*pos, "a compound role must have the form (and P ...)"),
                }
                if items.len() < 2 {
                    return err(*pos, "(and ...) role needs at least one role name");
                }
                let names = items[1..]
                    .iter()
                    .map(|i| self.role_name(i))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Role::new(names).expect("nonempty"))
            }
        }
    }

    fn number(&self, s: &Sexp) -> Result<u64, ParseError> {
        let (tok, pos) = self.atom(s, "a number")?;
        if tok.is_empty() || !tok.chars().all(|c| c.is_ascii_digit()) {
            return err(pos, format!("expected a nonnegative integer, found `{tok}`"));
        }
        let cap_err = || ParseError {
            pos,
            kind: ParseErrorKind::NumberCap {
                value: tok.to_string(),
                cap: self.opts.number_cap,
            },
        };
        let n: u64 = tok.parse().map_err(|_| cap_err())?;
        if n > self.opts.number_cap {
            return Err(cap_err());
        }
        Ok(n)
    }

    fn concept(&mut self, s: &Sexp) -> Result<Concept, ParseError> {
        let (items, pos) = match s {
            Sexp::Atom(tok, pos) => {
                return match tok.as_str() {
                    "TOP" => Ok(Concept::Top),
                    "BOTTOM" => Ok(Concept::Bottom),
                    _ => Ok(Concept::Name(self.concept_name(tok, *pos)?)),
                }
            }
            Sexp::List(items, pos) => (items, *pos),
        };
        let Some(Sexp::Atom(head, _)) = items.first() else {
            return err(pos, "expected a concept constructor");
        };
        let args = &items[1..];
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                err(pos, format!("`{head}` takes {n} argument(s), found {}", args.len()))
            }
        };
        match head.as_str() {
            "and" | "or" => {
                if args.len() < 2 {
                    return err(pos, format!("`{head}` needs at least two concepts"));
                }
                let mut acc = self.concept(&args[0])?;
                for a in &args[1..] {
                    let c = self.concept(a)?;
                    acc = if head == "and" {
                        Concept::and(acc, c)
                    } else {
                        Concept::or(acc, c)
                    };
                }
                Ok(acc)
            }
            "not" => {
                arity(1)?;
                Ok(Concept::not(self.concept(&args[0])?))
            }
            "all" | "some" => {
                arity(2)?;
                let r = self.role(&args[0])?;
                let c = self.concept(&args[1])?;
                Ok(if head == "all" {
                    Concept::all(r, c)
                } else {
                    Concept::some(r, c)
                })
            }
            "atleast" | "atmost" => {
                arity(2)?;
                let n = self.number(&args[0])?;
                let r = self.role(&args[1])?;
                Ok(if head == "atleast" {
                    Concept::AtLeast(n, r)
                } else {
                    Concept::AtMost(n, r)
                })
            }
            other => err(pos, format!("unknown concept constructor `{other}`")),
        }
    }

    fn statement(&mut self, s: &Sexp, kb: &mut KnowledgeBase) -> Result<(), ParseError> {
        let Sexp::List(items, pos) = s else {
            return err(s.pos(), "expected a statement");
        };
        let pos = *pos;
        let Some(Sexp::Atom(head, _)) = items.first() else {
            return err(pos, "expected a statement keyword");
        };
        let args = &items[1..];
        let want = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                err(pos, format!("`{head}` takes {n} arguments, found {}", args.len()))
            }
        };
        match head.as_str() {
            "implies" => {
                want(2)?;
                let lhs = self.concept(&args[0])?;
                let rhs = self.concept(&args[1])?;
                kb.tbox.insert(crate::syntax::Inclusion::new(lhs, rhs));
            }
            "define-concept" | "define-primitive" => {
                want(2)?;
                let (tok, p) = self.atom(&args[0], "a concept name")?;
                let a = self.concept_name(tok, p)?;
                let d = self.concept(&args[1])?;
                if head == "define-concept" {
                    kb.tbox.extend(define_concept(a, d));
                } else {
                    kb.tbox.insert(define_primitive(a, d));
                }
            }
            "instance" => {
                want(2)?;
                let a = self.individual(&args[0])?;
                let c = self.concept(&args[1])?;
                kb.abox.insert(Assertion::ConceptMember(a, c));
            }
            "related" => {
                want(3)?;
                let a = self.individual(&args[0])?;
                let b = self.individual(&args[1])?;
                let r = self.role(&args[2])?;
                kb.abox.insert(Assertion::RoleMember(a, b, r));
            }
            other => return err(pos, format!("unknown statement `{other}`")),
        }
        Ok(())
    }
}

/// Parses a knowledge base with default options.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    parse_kb_with(text, ParseOptions::default())
}

pub fn parse_kb_with(text: &str, opts: ParseOptions) -> Result<KnowledgeBase, ParseError> {
    let mut reader = Reader {
        opts,
        seen: BTreeMap::new(),
    };
    let mut kb = KnowledgeBase::new();
    for s in read_sexps(text)? {
        reader.statement(&s, &mut kb)?;
    }
    Ok(kb)
}

/// Parses a single concept expression.
pub fn parse_concept(text: &str) -> Result<Concept, ParseError> {
    let mut reader = Reader {
        opts: ParseOptions::default(),
        seen: BTreeMap::new(),
    };
    // wrap so that a bare name is accepted
    let wrapped = format!("({text}\n)");
    let mut top = read_sexps(&wrapped)?;
    let start = Pos { line: 1, col: 1 };
    match top.pop() {
        Some(Sexp::List(mut items, _)) if items.len() == 1 && top.is_empty() => {
            let item = items.pop().unwrap();
            reader.concept(&item)
        }
        _ => err(start, "expected exactly one concept"),
    }
}
