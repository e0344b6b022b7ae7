//! Terms over a single binary operation, identities between them, and the
//! text syntax used everywhere else in the crate.
//!
//! Concrete syntax:
//!
//! ```text
//! identity := term "=" term
//! term     := factor ("*" factor)*      -- left-associative
//! factor   := variable | "(" term ")"
//! variable := 'a'..='z'
//! ```
//!
//! Square brackets and braces are accepted as extra grouping pairs so that
//! identities can be transcribed with the bracket style of printed algebra.
//! Rendering is always fully parenthesized with round brackets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A syntax error, with the 0-based character offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("illegal character {ch:?} at position {pos}")]
    IllegalChar { pos: usize, ch: char },
    #[error("unclosed {open:?} opened at position {pos}")]
    Unclosed { pos: usize, open: char },
    #[error("unmatched closing {close:?} at position {pos}")]
    UnmatchedClose { pos: usize, close: char },
    #[error("{close:?} at position {pos} does not match {open:?}")]
    MismatchedClose { pos: usize, open: char, close: char },
    #[error("dangling '*' at position {pos}")]
    DanglingOperator { pos: usize },
    #[error("expected a term at position {pos}")]
    EmptyTerm { pos: usize },
    #[error("expected '=' at position {pos}")]
    MissingEquals { pos: usize },
    #[error("unexpected {ch:?} at position {pos}")]
    Trailing { pos: usize, ch: char },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("path {path} is not valid for the term")]
pub struct InvalidPath {
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(char),
    Prod(Box<Term>, Box<Term>),
}

impl Term {
    /// Variable leaf. Panics if `name` is not a lowercase ASCII letter.
    pub fn var(name: char) -> Term {
        assert!(name.is_ascii_lowercase(), "variable names are a-z, got {name:?}");
        Term::Var(name)
    }

    pub fn prod(left: Term, right: Term) -> Term {
        Term::Prod(Box::new(left), Box::new(right))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Number of nodes (leaves and products).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Prod(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn vars(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<char>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Prod(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// Simultaneous substitution; unmapped variables stay as they are.
    pub fn substitute(&self, s: &Substitution) -> Term {
        match self {
            Term::Var(v) => s.get(*v).cloned().unwrap_or_else(|| self.clone()),
            Term::Prod(l, r) => Term::prod(l.substitute(s), r.substitute(s)),
        }
    }

    pub fn subterm_at(&self, path: &Path) -> Result<&Term, InvalidPath> {
        let mut cur = self;
        for d in path.iter() {
            cur = match (cur, d) {
                (Term::Prod(l, _), Dir::L) => l,
                (Term::Prod(_, r), Dir::R) => r,
                (Term::Var(_), _) => return Err(path.invalid()),
            };
        }
        Ok(cur)
    }

    pub fn replace_at(&self, path: &Path, new: Term) -> Result<Term, InvalidPath> {
        fn go(t: &Term, dirs: &[Dir], new: Term) -> Option<Term> {
            match dirs.split_first() {
                None => Some(new),
                Some((d, rest)) => match t {
                    Term::Var(_) => None,
                    Term::Prod(l, r) => Some(match d {
                        Dir::L => Term::prod(go(l, rest, new)?, (**r).clone()),
                        Dir::R => Term::prod((**l).clone(), go(r, rest, new)?),
                    }),
                },
            }
        }
        go(self, &path.0, new).ok_or_else(|| path.invalid())
    }

    /// Every valid path, in pre-order (node before its left subtree before its right subtree).
    pub fn positions(&self) -> Vec<Path> {
        fn go(t: &Term, cur: &mut Vec<Dir>, out: &mut Vec<Path>) {
            out.push(Path(cur.clone()));
            if let Term::Prod(l, r) = t {
                cur.push(Dir::L);
                go(l, cur, out);
                cur.pop();
                cur.push(Dir::R);
                go(r, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Prod(l, r) => write!(f, "({l}*{r})"),
        }
    }
}

impl FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let t = p.term()?;
        p.expect_end()?;
        Ok(t)
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    text.parse()
}

pub fn parse_identity(text: &str) -> Result<Identity, ParseError> {
    text.parse()
}

pub fn render(term: &Term) -> String {
    term.render()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    L,
    R,
}

/// Position inside a term: a walk of left/right moves from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<Dir>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn new(dirs: Vec<Dir>) -> Path {
        Path(dirs)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Dir> + '_ {
        self.0.iter().copied()
    }

    pub fn child(&self, d: Dir) -> Path {
        let mut v = self.0.clone();
        v.push(d);
        Path(v)
    }

    fn invalid(&self) -> InvalidPath {
        InvalidPath {
            path: self.to_string(),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(".");
        }
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(match d {
                Dir::L => "L",
                Dir::R => "R",
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed path {0:?}: expected \".\" or L/R letters joined by dots")]
pub struct PathParseError(pub String);

impl FromStr for Path {
    type Err = PathParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "." {
            return Ok(Path::root());
        }
        s.split('.')
            .map(|part| match part {
                "L" | "l" => Ok(Dir::L),
                "R" | "r" => Ok(Dir::R),
                _ => Err(PathParseError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Path)
    }
}

/// Finite map from variable names to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution(BTreeMap<char, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: char, term: Term) -> Option<Term> {
        self.0.insert(var, term)
    }

    pub fn get(&self, var: char) -> Option<&Term> {
        self.0.get(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &Term)> {
        self.0.iter().map(|(v, t)| (*v, t))
    }

    /// The substitution equivalent to applying `self` and then `then`.
    pub fn then(&self, then: &Substitution) -> Substitution {
        let mut out: BTreeMap<char, Term> = self
            .0
            .iter()
            .map(|(v, t)| (*v, t.substitute(then)))
            .collect();
        for (v, t) in &then.0 {
            out.entry(*v).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }

    /// Drop bindings of the form `v ↦ v`.
    pub fn without_trivial(&self) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(v, t)| **t != Term::Var(**v))
                .map(|(v, t)| (*v, t.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(char, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (char, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}={t}")?;
        }
        Ok(())
    }
}

/// An equation between two terms, read as universally quantified.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity {
    lhs: Term,
    rhs: Term,
    vars: BTreeSet<char>,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Identity {
        let mut vars = lhs.vars();
        vars.extend(rhs.vars());
        Identity { lhs, rhs, vars }
    }

    pub fn lhs(&self) -> &Term {
        &self.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.rhs
    }

    /// Variables of both sides, sorted.
    pub fn vars(&self) -> &BTreeSet<char> {
        &self.vars
    }

    pub fn substitute(&self, s: &Substitution) -> Identity {
        Identity::new(self.lhs.substitute(s), self.rhs.substitute(s))
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl FromStr for Identity {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let lhs = p.term()?;
        match p.peek() {
            Some((_, '=')) => {
                p.bump();
            }
            Some((pos, _)) => return Err(p.unexpected_after_term(pos)),
            None => return Err(ParseError::MissingEquals { pos: p.end_pos() }),
        }
        let rhs = p.term()?;
        p.expect_end()?;
        Ok(Identity::new(lhs, rhs))
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    idx: usize,
    len: usize,
    /// Open brackets awaiting their partner: (position, char).
    open: Vec<(usize, char)>,
}

impl Parser {
    fn new(text: &str) -> Parser {
        let len = text.chars().count();
        Parser {
            chars: text
                .chars()
                .enumerate()
                .filter(|(_, c)| !c.is_whitespace())
                .collect(),
            idx: 0,
            len,
            open: Vec::new(),
        }
    }

    fn peek(&self) -> Option<(usize, char)> {
        self.chars.get(self.idx).copied()
    }

    fn bump(&mut self) {
        self.idx += 1;
    }

    fn end_pos(&self) -> usize {
        self.len
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.factor()?;
        while let Some((pos, '*')) = self.peek() {
            self.bump();
            match self.peek() {
                None | Some((_, '=' | ')' | ']' | '}' | '*')) => {
                    return Err(ParseError::DanglingOperator { pos })
                }
                _ => {}
            }
            let rhs = self.factor()?;
            acc = Term::prod(acc, rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            None => Err(ParseError::EmptyTerm { pos: self.end_pos() }),
            Some((_, c)) if c.is_ascii_lowercase() => {
                self.bump();
                Ok(Term::Var(c))
            }
            Some((pos, open @ ('(' | '[' | '{'))) => {
                self.bump();
                self.open.push((pos, open));
                let t = self.term()?;
                match self.peek() {
                    Some((cpos, close @ (')' | ']' | '}'))) => {
                        if close != closer(open) {
                            return Err(ParseError::MismatchedClose {
                                pos: cpos,
                                open,
                                close,
                            });
                        }
                        self.bump();
                        self.open.pop();
                        Ok(t)
                    }
                    Some((cpos, _)) => Err(self.unexpected_after_term(cpos)),
                    None => Err(ParseError::Unclosed { pos, open }),
                }
            }
            Some((pos, '=' | ')' | ']' | '}' | '*')) => Err(ParseError::EmptyTerm { pos }),
            Some((pos, ch)) => Err(ParseError::IllegalChar { pos, ch }),
        }
    }

    fn unexpected_after_term(&self, pos: usize) -> ParseError {
        let ch = self.chars[self.idx].1;
        if ch.is_ascii_lowercase() || matches!(ch, '(' | '[' | '{') {
            // juxtaposition is not a product
            ParseError::Trailing { pos, ch }
        } else if matches!(ch, ')' | ']' | '}') && self.open.is_empty() {
            ParseError::UnmatchedClose { pos, close: ch }
        } else if ch == '=' {
            match self.open.last() {
                Some(&(opos, open)) => ParseError::Unclosed { pos: opos, open },
                None => ParseError::Trailing { pos, ch },
            }
        } else {
            ParseError::IllegalChar { pos, ch }
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some((pos, _)) => Err(self.unexpected_after_term(pos)),
        }
    }
}

fn closer(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        _ => '}',
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    fn v(c: char) -> Term {
        Term::var(c)
    }

    #[test]
    fn parses_left_self_distributive_identity() {
        let id = parse_identity("(x*x)*(y*z) = (x*y)*(x*z)").unwrap();
        assert_eq!(
            id.lhs(),
            &Term::prod(Term::prod(v('x'), v('x')), Term::prod(v('y'), v('z')))
        );
        assert_eq!(
            id.rhs(),
            &Term::prod(Term::prod(v('x'), v('y')), Term::prod(v('x'), v('z')))
        );
        assert_eq!(id.vars().iter().collect::<String>(), "xyz");
    }

    #[test]
    fn reflexive_identity() {
        let id = parse_identity("x = x").unwrap();
        assert_eq!(id.lhs(), &v('x'));
        assert_eq!(id.rhs(), &v('x'));
        assert_eq!(id.vars().len(), 1);
    }

    #[test]
    fn star_is_left_associative() {
        let id = parse_identity("x*y*z = (x*y)*z").unwrap();
        assert_eq!(id.lhs(), id.rhs());
    }

    #[test]
    fn brackets_group_like_parens() {
        assert_eq!(t("[x*y]*{z*(u*v)}"), t("(x*y)*(z*(u*v))"));
    }

    #[test]
    fn whitespace_ignored() {
        assert_eq!(t(" ( x *  y ) * z "), t("(x*y)*z"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            parse_identity("(x*y = x"),
            Err(ParseError::Unclosed { pos: 0, open: '(' })
        );
        assert_eq!(
            parse_identity("x*y) = x"),
            Err(ParseError::UnmatchedClose { pos: 3, close: ')' })
        );
        assert_eq!(
            parse_identity("x* = y"),
            Err(ParseError::DanglingOperator { pos: 1 })
        );
        assert_eq!(
            parse_identity("x*y*"),
            Err(ParseError::DanglingOperator { pos: 3 })
        );
        assert_eq!(parse_identity(" = y"), Err(ParseError::EmptyTerm { pos: 1 }));
        assert_eq!(parse_identity("x = "), Err(ParseError::EmptyTerm { pos: 4 }));
        assert_eq!(
            parse_identity("x+y = y"),
            Err(ParseError::IllegalChar { pos: 1, ch: '+' })
        );
        assert_eq!(
            parse_identity("X = y"),
            Err(ParseError::IllegalChar { pos: 0, ch: 'X' })
        );
        assert_eq!(parse_identity("x*y"), Err(ParseError::MissingEquals { pos: 3 }));
        assert_eq!(
            parse_identity("xy = y"),
            Err(ParseError::Trailing { pos: 1, ch: 'y' })
        );
        assert_eq!(
            parse_identity("(x*y] = y"),
            Err(ParseError::MismatchedClose {
                pos: 4,
                open: '(',
                close: ']'
            })
        );
        assert!(parse_identity("x = y = z").is_err());
        assert!(parse_identity("()").is_err());
    }

    #[test]
    fn render_examples() {
        assert_eq!(v('x').render(), "x");
        assert_eq!(
            Term::prod(v('x'), Term::prod(v('y'), v('z'))).render(),
            "(x*(y*z))"
        );
        let id = parse_identity("(x*(x*x))*(u*v) = (x*u)*((x*x)*v)").unwrap();
        assert_eq!(render(id.lhs()), "((x*(x*x))*(u*v))");
        assert_eq!(id.to_string(), "((x*(x*x))*(u*v)) = ((x*u)*((x*x)*v))");
    }

    #[test]
    fn substitute_examples() {
        let s: Substitution = [('z', t("w*w"))].into_iter().collect();
        assert_eq!(
            t("(w*(w*w))*(z*v)").substitute(&s),
            t("(w*(w*w))*((w*w)*v)")
        );
        let s: Substitution = [('y', v('u'))].into_iter().collect();
        assert_eq!(t("(x*u)*(y*u)").substitute(&s), t("(x*u)*(u*u)"));
        let x = t("(a*(b*c))*a");
        assert_eq!(x.substitute(&Substitution::new()), x);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let s: Substitution = [('x', v('y')), ('y', v('x'))].into_iter().collect();
        assert_eq!(t("x*y").substitute(&s), t("y*x"));
    }

    #[test]
    fn subterm_and_replace() {
        let x = t("x*(y*z)");
        let r = Path::new(vec![Dir::R]);
        assert_eq!(x.subterm_at(&r).unwrap(), &t("y*z"));
        assert_eq!(x.subterm_at(&Path::root()).unwrap(), &x);
        assert!(v('x').subterm_at(&Path::new(vec![Dir::L])).is_err());

        assert_eq!(x.replace_at(&r, v('w')).unwrap(), t("x*w"));
        assert_eq!(x.replace_at(&Path::root(), v('q')).unwrap(), v('q'));
        let err = v('x').replace_at(&r, v('y')).unwrap_err();
        assert_eq!(err.to_string(), "path R is not valid for the term");
    }

    #[test]
    fn path_text() {
        assert_eq!(Path::root().to_string(), ".");
        let p: Path = "R.L".parse().unwrap();
        assert_eq!(p, Path::new(vec![Dir::R, Dir::L]));
        assert_eq!(p.to_string(), "R.L");
        assert!("R..L".parse::<Path>().is_err());
        assert!("".parse::<Path>().is_err());
    }

    #[test]
    fn positions_are_preorder() {
        let ps: Vec<String> = t("(x*y)*z").positions().iter().map(|p| p.to_string()).collect();
        assert_eq!(ps, [".", "L", "L.L", "L.R", "R"]);
    }
}
