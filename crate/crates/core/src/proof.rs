//! Checking equational proofs: chains of rewrite steps, each an instance of a
//! given identity applied at one position, optionally closed by a syntactic
//! cancellation, and compared with the claimed conclusion up to renaming.
//!
//! Script text format, one directive per line (`#` starts a comment line):
//!
//! ```text
//! given <name>
//! start <term>
//! = <term> by <name> [fwd|rev] [at <path>] [with v=<term>,...]
//! cancel left|right
//! qed <identity>
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::magma::{check_identity, CayleyTable, Check};
use crate::term::{Identity, ParseError, Path, Substitution, Term};
use crate::variety::{builtin, VarietyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("rule {0:?} is not among the given identities")]
    UnknownRule(String),
    #[error("no instance of {rule} rewrites the term into the next one")]
    NoJustification { rule: String },
    #[error("cannot cancel: {0} is a variable, not a product")]
    CancelShape(Term),
    #[error("cannot cancel {side}: common factor differs ({left} vs {right})")]
    CancelMismatch {
        side: Cancellation,
        left: Term,
        right: Term,
    },
    #[error("unknown builtin script {0:?}; valid names: theorem, corollary-to-i2, corollary-to-i3")]
    UnknownScript(String),
    #[error("table {table} does not satisfy the given identity {rule}")]
    AuditPrecondition { table: usize, rule: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Reverse => "rev",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cancellation {
    Left,
    Right,
}

impl fmt::Display for Cancellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cancellation::Left => "left",
            Cancellation::Right => "right",
        })
    }
}

/// One rewrite step. Unset hints are searched for; set hints must be met exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub to: Term,
    pub by: String,
    pub direction: Option<Direction>,
    pub at: Option<Path>,
    pub with: Option<Substitution>,
}

impl ProofStep {
    pub fn new(to: Term, by: impl Into<String>) -> ProofStep {
        ProofStep {
            to,
            by: by.into(),
            direction: None,
            at: None,
            with: None,
        }
    }

    /// The step pinned to a previously found justification.
    pub fn pinned(to: Term, j: &Justification) -> ProofStep {
        ProofStep {
            to,
            by: j.rule.clone(),
            direction: Some(j.direction),
            at: Some(j.path.clone()),
            with: Some(j.substitution.clone()),
        }
    }
}

/// How a step was verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Justification {
    pub rule: String,
    pub direction: Direction,
    pub path: Path,
    pub substitution: Substitution,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} at {}", self.rule, self.direction, self.path)?;
        let shown = self.substitution.without_trivial();
        if !shown.is_empty() {
            write!(f, " with {shown}")?;
        }
        Ok(())
    }
}

/// Named identities usable as rewrite rules.
pub type Rules = BTreeMap<String, Identity>;

/// Bind pattern variables so that `pattern` instantiates to `target`, extending `theta`.
fn match_into(pattern: &Term, target: &Term, theta: &mut Substitution) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => match theta.get(*v) {
            Some(bound) => bound == target,
            None => {
                theta.insert(*v, target.clone());
                true
            }
        },
        (Term::Prod(pl, pr), Term::Prod(tl, tr)) => {
            match_into(pl, tl, theta) && match_into(pr, tr, theta)
        }
        (Term::Prod(..), Term::Var(_)) => false,
    }
}

/// Find the first (path in pre-order, forward before reverse) instance of the
/// rule that turns `from` into `step.to`.
pub fn check_step(from: &Term, step: &ProofStep, rules: &Rules) -> Result<Justification, ProofError> {
    let rule = rules
        .get(&step.by)
        .ok_or_else(|| ProofError::UnknownRule(step.by.clone()))?;
    let directions: &[Direction] = match step.direction {
        Some(Direction::Forward) => &[Direction::Forward],
        Some(Direction::Reverse) => &[Direction::Reverse],
        None => &[Direction::Forward, Direction::Reverse],
    };
    let paths = match &step.at {
        Some(p) => vec![p.clone()],
        None => from.positions(),
    };
    for path in paths {
        let Ok(sub) = from.subterm_at(&path) else {
            continue;
        };
        let Ok(to_sub) = step.to.subterm_at(&path) else {
            continue;
        };
        for &direction in directions {
            let (src, dst) = match direction {
                Direction::Forward => (rule.lhs(), rule.rhs()),
                Direction::Reverse => (rule.rhs(), rule.lhs()),
            };
            let mut theta = step.with.clone().unwrap_or_default();
            if !match_into(src, sub, &mut theta) || !match_into(dst, to_sub, &mut theta) {
                continue;
            }
            // outside the rewritten position both terms must agree
            if step.to.replace_at(&path, sub.clone()).as_ref() != Ok(from) {
                continue;
            }
            return Ok(Justification {
                rule: step.by.clone(),
                direction,
                path,
                substitution: theta,
            });
        }
    }
    Err(ProofError::NoJustification {
        rule: step.by.clone(),
    })
}

/// Syntactic cancellation of a common left or right factor.
pub fn cancel(lhs: &Term, rhs: &Term, side: Cancellation) -> Result<Identity, ProofError> {
    let (Term::Prod(ll, lr), Term::Prod(rl, rr)) = (lhs, rhs) else {
        let var = if lhs.is_var() { lhs } else { rhs };
        return Err(ProofError::CancelShape(var.clone()));
    };
    match side {
        Cancellation::Left if ll == rl => Ok(Identity::new((**lr).clone(), (**rr).clone())),
        Cancellation::Right if lr == rr => Ok(Identity::new((**ll).clone(), (**rl).clone())),
        Cancellation::Left => Err(ProofError::CancelMismatch {
            side,
            left: (**ll).clone(),
            right: (**rl).clone(),
        }),
        Cancellation::Right => Err(ProofError::CancelMismatch {
            side,
            left: (**lr).clone(),
            right: (**rr).clone(),
        }),
    }
}

/// Equality up to a bijective renaming of variables applied to both sides at once.
pub fn alpha_equal(a: &Identity, b: &Identity) -> bool {
    fn walk(s: &Term, t: &Term, fwd: &mut BTreeMap<char, char>, bwd: &mut BTreeMap<char, char>) -> bool {
        match (s, t) {
            (Term::Var(x), Term::Var(y)) => {
                *fwd.entry(*x).or_insert(*y) == *y && *bwd.entry(*y).or_insert(*x) == *x
            }
            (Term::Prod(sl, sr), Term::Prod(tl, tr)) => walk(sl, tl, fwd, bwd) && walk(sr, tr, fwd, bwd),
            _ => false,
        }
    }
    let (mut fwd, mut bwd) = (BTreeMap::new(), BTreeMap::new());
    walk(a.lhs(), b.lhs(), &mut fwd, &mut bwd) && walk(a.rhs(), b.rhs(), &mut fwd, &mut bwd)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofScript {
    pub given: Vec<String>,
    pub start: Term,
    pub steps: Vec<ProofStep>,
    pub cancellation: Option<Cancellation>,
    pub conclusion: Identity,
}

impl ProofScript {
    /// Start term followed by every step's target.
    pub fn terms(&self) -> Vec<&Term> {
        std::iter::once(&self.start)
            .chain(self.steps.iter().map(|s| &s.to))
            .collect()
    }

    pub fn final_term(&self) -> &Term {
        self.steps.last().map_or(&self.start, |s| &s.to)
    }

    fn rules(&self) -> Rules {
        self.given
            .iter()
            .filter_map(|n| builtin(n).ok().map(|id| (n.clone(), id)))
            .collect()
    }
}

impl fmt::Display for ProofScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.given {
            writeln!(f, "given {g}")?;
        }
        writeln!(f, "start {}", self.start)?;
        for s in &self.steps {
            write!(f, "= {} by {}", s.to, s.by)?;
            if let Some(d) = s.direction {
                write!(f, " {d}")?;
            }
            if let Some(p) = &s.at {
                write!(f, " at {p}")?;
            }
            if let Some(w) = &s.with {
                if !w.is_empty() {
                    write!(f, " with {w}")?;
                }
            }
            writeln!(f)?;
        }
        if let Some(c) = self.cancellation {
            writeln!(f, "cancel {c}")?;
        }
        writeln!(f, "qed {}", self.conclusion)
    }
}

/// Where a script failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailurePoint {
    /// 1-based step index.
    Step(usize),
    Cancellation,
    Conclusion,
}

impl fmt::Display for FailurePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailurePoint::Step(i) => write!(f, "step {i}"),
            FailurePoint::Cancellation => f.write_str("cancellation"),
            FailurePoint::Conclusion => f.write_str("conclusion"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid {
        justifications: Vec<Justification>,
        derived: Identity,
    },
    Invalid {
        at: FailurePoint,
        reason: String,
        justifications: Vec<Justification>,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }

    pub fn justifications(&self) -> &[Justification] {
        match self {
            Verdict::Valid { justifications, .. } | Verdict::Invalid { justifications, .. } => justifications,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.justifications().iter().enumerate() {
            writeln!(f, "step {}: {j}", i + 1)?;
        }
        match self {
            Verdict::Valid { derived, .. } => {
                writeln!(f, "derived: {derived}")?;
                writeln!(f, "valid")
            }
            Verdict::Invalid { at, reason, .. } => writeln!(f, "invalid at {at}: {reason}"),
        }
    }
}

pub fn check_script(script: &ProofScript) -> Verdict {
    let rules = script.rules();
    let mut justifications = Vec::new();
    let invalid = |at, reason: String, justifications| Verdict::Invalid {
        at,
        reason,
        justifications,
    };
    if script.steps.is_empty() && script.cancellation.is_none() {
        return invalid(
            FailurePoint::Conclusion,
            "script has neither steps nor a cancellation".into(),
            justifications,
        );
    }
    let mut cur = &script.start;
    for (i, step) in script.steps.iter().enumerate() {
        match check_step(cur, step, &rules) {
            Ok(j) => justifications.push(j),
            Err(e) => return invalid(FailurePoint::Step(i + 1), e.to_string(), justifications),
        }
        cur = &step.to;
    }
    let derived = match script.cancellation {
        None => Identity::new(script.start.clone(), cur.clone()),
        Some(side) => match cancel(&script.start, cur, side) {
            Ok(id) => id,
            Err(e) => return invalid(FailurePoint::Cancellation, e.to_string(), justifications),
        },
    };
    if !alpha_equal(&derived, &script.conclusion) {
        return invalid(
            FailurePoint::Conclusion,
            format!("derived {derived} is not a renaming of {}", script.conclusion),
            justifications,
        );
    }
    Verdict::Valid {
        justifications,
        derived,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Audit {
    Pass,
    /// Terms `pair - 1` and `pair` of the chain differ on a table.
    Fail {
        pair: usize,
        table: usize,
        check: Check,
    },
}

/// Evaluate each consecutive pair of chain terms on every table. Only a
/// necessary condition: a valid script always passes.
pub fn semantic_audit(script: &ProofScript, tables: &[CayleyTable]) -> Result<Audit, ProofError> {
    for (ti, table) in tables.iter().enumerate() {
        for name in &script.given {
            let holds = builtin(name)
                .map(|id| check_identity(table, &id).holds())
                .unwrap_or(false);
            if !holds {
                return Err(ProofError::AuditPrecondition {
                    table: ti,
                    rule: name.clone(),
                });
            }
        }
    }
    let terms = script.terms();
    for (pair, w) in terms.windows(2).enumerate() {
        let eq = Identity::new(w[0].clone(), w[1].clone());
        for (ti, table) in tables.iter().enumerate() {
            let check = check_identity(table, &eq);
            if !check.holds() {
                return Ok(Audit::Fail {
                    pair: pair + 1,
                    table: ti,
                    check,
                });
            }
        }
    }
    Ok(Audit::Pass)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Term { line: usize, source: ParseError },
    #[error("line {line}: {source}")]
    Name { line: usize, source: VarietyError },
    #[error("missing {0} line")]
    Missing(&'static str),
}

impl FromStr for ProofScript {
    type Err = ScriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_script(s)
    }
}

pub fn parse_script(text: &str) -> Result<ProofScript, ScriptError> {
    let mut given = Vec::new();
    let mut start = None;
    let mut steps = Vec::new();
    let mut cancellation = None;
    let mut conclusion = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let syntax = |msg: &str| ScriptError::Syntax {
            line,
            msg: msg.to_string(),
        };
        let term = |t: &str| t.parse::<Term>().map_err(|source| ScriptError::Term { line, source });
        let name = |n: &str| {
            builtin(n)
                .map(|_| n.to_string())
                .map_err(|source| ScriptError::Name { line, source })
        };
        if conclusion.is_some() {
            return Err(syntax("nothing may follow qed"));
        }
        let (keyword, rest) = match l.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (l, ""),
        };
        match keyword {
            "given" => given.push(name(rest)?),
            "start" => {
                if start.is_some() {
                    return Err(syntax("duplicate start"));
                }
                start = Some(term(rest)?);
            }
            "=" => {
                if start.is_none() {
                    return Err(syntax("step before start"));
                }
                if cancellation.is_some() {
                    return Err(syntax("step after cancel"));
                }
                steps.push(parse_step(rest, line)?);
            }
            "cancel" => {
                if cancellation.is_some() {
                    return Err(syntax("duplicate cancel"));
                }
                cancellation = Some(match rest {
                    "left" => Cancellation::Left,
                    "right" => Cancellation::Right,
                    _ => return Err(syntax("expected cancel left or cancel right")),
                });
            }
            "qed" => {
                conclusion = Some(
                    rest.parse::<Identity>()
                        .map_err(|source| ScriptError::Term { line, source })?,
                );
            }
            _ => return Err(syntax(&format!("unknown directive {keyword:?}"))),
        }
    }
    Ok(ProofScript {
        given,
        start: start.ok_or(ScriptError::Missing("start"))?,
        steps,
        cancellation,
        conclusion: conclusion.ok_or(ScriptError::Missing("qed"))?,
    })
}

fn parse_step(rest: &str, line: usize) -> Result<ProofStep, ScriptError> {
    let syntax = |msg: String| ScriptError::Syntax { line, msg };
    let words: Vec<&str> = rest.split_whitespace().collect();
    let by = words
        .iter()
        .position(|w| *w == "by")
        .ok_or_else(|| syntax("step needs \"by <name>\"".into()))?;
    let to: Term = words[..by]
        .join(" ")
        .parse()
        .map_err(|source| ScriptError::Term { line, source })?;
    let rule = words
        .get(by + 1)
        .ok_or_else(|| syntax("missing rule name after \"by\"".into()))?;
    builtin(rule).map_err(|source| ScriptError::Name { line, source })?;
    let mut step = ProofStep::new(to, *rule);
    let mut i = by + 2;
    while i < words.len() {
        match words[i] {
            "fwd" | "rev" if step.direction.is_none() => {
                step.direction = Some(if words[i] == "fwd" {
                    Direction::Forward
                } else {
                    Direction::Reverse
                });
                i += 1;
            }
            "at" if step.at.is_none() => {
                let p = words
                    .get(i + 1)
                    .ok_or_else(|| syntax("missing path after \"at\"".into()))?;
                step.at = Some(p.parse().map_err(|e: crate::term::PathParseError| syntax(e.to_string()))?);
                i += 2;
            }
            "with" if step.with.is_none() => {
                let body = words[i + 1..].join(" ");
                let mut theta = Substitution::new();
                for binding in body.split(',').map(str::trim).filter(|b| !b.is_empty()) {
                    let (v, t) = binding
                        .split_once('=')
                        .ok_or_else(|| syntax(format!("binding {binding:?} needs v=<term>")))?;
                    let v = v.trim();
                    let var = match v.chars().collect::<Vec<_>>().as_slice() {
                        [c] if c.is_ascii_lowercase() => *c,
                        _ => return Err(syntax(format!("{v:?} is not a variable"))),
                    };
                    let t: Term = t.parse().map_err(|source| ScriptError::Term { line, source })?;
                    if theta.insert(var, t).is_some() {
                        return Err(syntax(format!("variable {var} bound twice")));
                    }
                }
                step.with = Some(theta);
                break;
            }
            w => return Err(syntax(format!("unexpected {w:?} in step"))),
        }
    }
    Ok(step)
}

pub const BUILTIN_SCRIPTS: [&str; 3] = ["theorem", "corollary-to-i2", "corollary-to-i3"];

const THEOREM: &str = "\
# left cancellation with i2 and i3 gives i1
given i2
given i3
start (x*(x*z))*((x*x)*(y*z))
= (x*(x*x))*((x*z)*(y*z)) by i3
= (x*(x*x))*((x*y)*(z*z)) by i2
= (x*(x*y))*((x*x)*(z*z)) by i3
= (x*(x*y))*((x*z)*(x*z)) by i2
= (x*(x*z))*((x*y)*(x*z)) by i2
cancel left
qed (x*x)*(y*z) = (x*y)*(x*z)
";

const COROLLARY_TO_I2: &str = "\
# the corollary identity at z = w*w, then right cancellation
given corollary
start ((x*y)*(u*u))*((w*(w*w))*((w*w)*v))
= ((x*u)*(y*u))*((w*(w*w))*((w*w)*v)) by corollary fwd at . with z=(w*w)
cancel right
qed (y*z)*(x*x) = (y*x)*(z*x)
";

const COROLLARY_TO_I3: &str = "\
# the corollary identity at y = u, then left cancellation
given corollary
start ((x*u)*(u*u))*((w*(w*w))*(z*v))
= ((x*u)*(u*u))*((w*z)*((w*w)*v)) by corollary fwd at . with y=u
cancel left
qed (x*(x*x))*(u*v) = (x*u)*((x*x)*v)
";

pub fn builtin_script(name: &str) -> Result<ProofScript, ProofError> {
    let text = match name {
        "theorem" => THEOREM,
        "corollary-to-i2" => COROLLARY_TO_I2,
        "corollary-to-i3" => COROLLARY_TO_I3,
        _ => return Err(ProofError::UnknownScript(name.to_string())),
    };
    Ok(parse_script(text).expect("builtin scripts parse"))
}
