//! Finite groupoids given by their Cayley tables, term evaluation, and
//! universal identity checking.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::term::{Identity, Term};

/// Largest supported order; row and column checks use one `u64` mask.
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("empty table text")]
    Empty,
    #[error("line {line}: {token:?} is not a non-negative integer")]
    NotAnInteger { line: usize, token: String },
    #[error("order must be between 1 and {MAX_ORDER}, got {0}")]
    BadOrder(usize),
    #[error("row {row}: expected {expected} entries, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("entry {value} at row {row}, column {col} is out of range for order {order}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {0} is not assigned")]
    Unassigned(char),
    #[error("variable {var} is assigned {value}, outside a table of order {order}")]
    OutOfRange { var: char, value: usize, order: usize },
}

/// Operation table of a groupoid on `0..order`; `get(i, j)` is `i * j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CayleyTable {
    order: usize,
    entries: Vec<u8>,
}

impl CayleyTable {
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<CayleyTable, TableError> {
        let order = rows.len();
        if order == 0 || order > MAX_ORDER {
            return Err(TableError::BadOrder(order));
        }
        let mut entries = Vec::with_capacity(order * order);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != order {
                return Err(TableError::Ragged {
                    row,
                    expected: order,
                    found: r.len(),
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= order {
                    return Err(TableError::OutOfRange {
                        row,
                        col,
                        value,
                        order,
                    });
                }
                entries.push(value as u8);
            }
        }
        Ok(CayleyTable { order, entries })
    }

    /// Build a table from its row-major entry sequence.
    pub fn from_entries(order: usize, entries: Vec<u8>) -> Result<CayleyTable, TableError> {
        if order == 0 || order > MAX_ORDER {
            return Err(TableError::BadOrder(order));
        }
        if entries.len() != order * order {
            return Err(TableError::RowCount {
                expected: order,
                found: entries.len() / order,
            });
        }
        if let Some(pos) = entries.iter().position(|&e| e as usize >= order) {
            return Err(TableError::OutOfRange {
                row: pos / order,
                col: pos % order,
                value: entries[pos] as usize,
                order,
            });
        }
        Ok(CayleyTable { order, entries })
    }

    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> usize) -> Result<CayleyTable, TableError> {
        let rows: Vec<Vec<usize>> = (0..order)
            .map(|i| (0..order).map(|j| f(i, j)).collect())
            .collect();
        CayleyTable::from_rows(&rows)
    }

    /// All-zero table; used as scratch space by the enumerator.
    pub(crate) fn zeroed(order: usize) -> CayleyTable {
        CayleyTable {
            order,
            entries: vec![0; order * order],
        }
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [u8] {
        &mut self.entries
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.order + j] as usize
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    /// Isomorphic copy under `perm`: the result maps `perm[i] * perm[j]` to `perm[i * j]`.
    pub fn relabel(&self, perm: &[usize]) -> CayleyTable {
        assert_eq!(perm.len(), self.order, "permutation length must equal the order");
        let n = self.order;
        let mut entries = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[perm[i] * n + perm[j]] = perm[self.get(i, j)] as u8;
            }
        }
        CayleyTable { order: n, entries }
    }

    pub fn cancellation_profile(&self) -> CancellationProfile {
        let n = self.order;
        let full = full_mask(n);
        let left = (0..n).all(|i| {
            let m = (0..n).fold(0u64, |m, j| m | 1 << self.get(i, j));
            m == full
        });
        let right = (0..n).all(|j| {
            let m = (0..n).fold(0u64, |m, i| m | 1 << self.get(i, j));
            m == full
        });
        CancellationProfile {
            left_cancellative: left,
            right_cancellative: right,
            quasigroup: left && right,
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for CayleyTable {
    /// The table file format: the order, then one line per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.order)?;
        for i in 0..self.order {
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl FromStr for CayleyTable {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_table(s)
    }
}

/// Parse the table file format. Blank lines are ignored.
pub fn load_table(text: &str) -> Result<CayleyTable, TableError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or(TableError::Empty)?;
    let order = parse_int(line, header)?;
    if order == 0 || order > MAX_ORDER {
        return Err(TableError::BadOrder(order));
    }
    let mut rows = Vec::with_capacity(order);
    for (line, text) in lines {
        let row = text
            .split_whitespace()
            .map(|tok| parse_int(line, tok))
            .collect::<Result<Vec<_>, _>>()?;
        if rows.len() == order {
            return Err(TableError::RowCount {
                expected: order,
                found: rows.len() + 1,
            });
        }
        if row.len() != order {
            return Err(TableError::Ragged {
                row: rows.len(),
                expected: order,
                found: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.len() != order {
        return Err(TableError::RowCount {
            expected: order,
            found: rows.len(),
        });
    }
    CayleyTable::from_rows(&rows)
}

/// Parse a stream of tables separated by blank lines.
pub fn load_tables(text: &str) -> Result<Vec<CayleyTable>, TableError> {
    let mut out = Vec::new();
    let mut block = String::new();
    for line in text.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !block.is_empty() {
                out.push(load_table(&block)?);
                block.clear();
            }
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    Ok(out)
}

fn parse_int(line: usize, token: &str) -> Result<usize, TableError> {
    token.parse().map_err(|_| TableError::NotAnInteger {
        line,
        token: token.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CancellationProfile {
    pub left_cancellative: bool,
    pub right_cancellative: bool,
    pub quasigroup: bool,
}

/// Values for variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<char, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: char, value: usize) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: char) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, usize)> + '_ {
        self.0.iter().map(|(v, e)| (*v, *e))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(char, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (char, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}={e}")?;
        }
        Ok(())
    }
}

pub fn evaluate(table: &CayleyTable, term: &Term, a: &Assignment) -> Result<usize, EvalError> {
    match term {
        Term::Var(v) => {
            let value = a.get(*v).ok_or(EvalError::Unassigned(*v))?;
            if value >= table.order() {
                return Err(EvalError::OutOfRange {
                    var: *v,
                    value,
                    order: table.order(),
                });
            }
            Ok(value)
        }
        Term::Prod(l, r) => Ok(table.get(evaluate(table, l, a)?, evaluate(table, r, a)?)),
    }
}

/// Outcome of checking an identity on a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Holds,
    Counterexample {
        assignment: Assignment,
        lhs: usize,
        rhs: usize,
    },
}

impl Check {
    pub fn holds(&self) -> bool {
        matches!(self, Check::Holds)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Holds => f.write_str("holds"),
            Check::Counterexample {
                assignment,
                lhs,
                rhs,
            } => write!(f, "counterexample {assignment} lhs={lhs} rhs={rhs}"),
        }
    }
}

/// Check `id` under every assignment of its variables into the table, in
/// lexicographic order of values for the sorted variable names. The first
/// failure is returned, so counterexamples are the least ones.
pub fn check_identity(table: &CayleyTable, id: &Identity) -> Check {
    let domain: Vec<u8> = (0..table.order() as u8).collect();
    CompiledIdentity::new(id).check_on(table, &domain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Load(u8),
    Mul,
}

/// Postfix program for a term, with variables numbered by their sorted position.
#[derive(Debug, Clone)]
struct Program {
    ops: Vec<Op>,
    depth: usize,
}

impl Program {
    fn compile(term: &Term, vars: &[char]) -> Program {
        fn go(t: &Term, vars: &[char], ops: &mut Vec<Op>, height: usize, depth: &mut usize) {
            *depth = (*depth).max(height + 1);
            match t {
                Term::Var(v) => {
                    let idx = vars.iter().position(|w| w == v).expect("variable list covers term");
                    ops.push(Op::Load(idx as u8));
                }
                Term::Prod(l, r) => {
                    go(l, vars, ops, height, depth);
                    go(r, vars, ops, height + 1, depth);
                    ops.push(Op::Mul);
                }
            }
        }
        let mut ops = Vec::with_capacity(term.size());
        let mut depth = 0;
        go(term, vars, &mut ops, 0, &mut depth);
        Program { ops, depth }
    }

    #[inline]
    fn run(&self, table: &CayleyTable, values: &[u8], stack: &mut [u8]) -> u8 {
        let n = table.order();
        let e = table.entries();
        let mut sp = 0;
        for op in &self.ops {
            match *op {
                Op::Load(i) => {
                    stack[sp] = values[i as usize];
                    sp += 1;
                }
                Op::Mul => {
                    sp -= 1;
                    let r = stack[sp] as usize;
                    let l = stack[sp - 1] as usize;
                    stack[sp - 1] = e[l * n + r];
                }
            }
        }
        stack[0]
    }
}

/// An identity compiled for repeated checking against many tables.
#[derive(Debug, Clone)]
pub struct CompiledIdentity {
    vars: Vec<char>,
    lhs: Program,
    rhs: Program,
}

impl CompiledIdentity {
    pub fn new(id: &Identity) -> CompiledIdentity {
        let vars: Vec<char> = id.vars().iter().copied().collect();
        CompiledIdentity {
            lhs: Program::compile(id.lhs(), &vars),
            rhs: Program::compile(id.rhs(), &vars),
            vars,
        }
    }

    pub fn vars(&self) -> &[char] {
        &self.vars
    }

    pub fn holds(&self, table: &CayleyTable) -> bool {
        let domain: Vec<u8> = (0..table.order() as u8).collect();
        self.first_failure(table, &domain).is_none()
    }

    /// Check with every variable ranging over `domain` (sorted ascending).
    pub fn check_on(&self, table: &CayleyTable, domain: &[u8]) -> Check {
        match self.first_failure(table, domain) {
            None => Check::Holds,
            Some((values, lhs, rhs)) => Check::Counterexample {
                assignment: self
                    .vars
                    .iter()
                    .zip(values)
                    .map(|(v, e)| (*v, e as usize))
                    .collect(),
                lhs: lhs as usize,
                rhs: rhs as usize,
            },
        }
    }

    fn first_failure(&self, table: &CayleyTable, domain: &[u8]) -> Option<(Vec<u8>, u8, u8)> {
        let k = self.vars.len();
        if domain.is_empty() && k > 0 {
            return None;
        }
        let mut stack = vec![0u8; self.lhs.depth.max(self.rhs.depth)];
        let mut idx = vec![0usize; k];
        let mut values: Vec<u8> = vec![domain.first().copied().unwrap_or(0); k];
        loop {
            let l = self.lhs.run(table, &values, &mut stack);
            let r = self.rhs.run(table, &values, &mut stack);
            if l != r {
                return Some((values, l, r));
            }
            // odometer, last variable fastest
            let mut pos = k;
            loop {
                if pos == 0 {
                    return None;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < domain.len() {
                    values[pos] = domain[idx[pos]];
                    break;
                }
                idx[pos] = 0;
                values[pos] = domain[0];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_identity;

    fn z3() -> CayleyTable {
        load_table("3\n0 1 2\n1 2 0\n2 0 1").unwrap()
    }

    fn zero2() -> CayleyTable {
        load_table("2\n0 0\n0 0").unwrap()
    }

    fn t4_sigma() -> CayleyTable {
        let sigma = [1, 0, 2, 3];
        CayleyTable::from_fn(4, |i, j| (i + sigma[j]) % 4).unwrap()
    }

    fn a(pairs: &[(char, usize)]) -> Assignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn load_examples() {
        let t = z3();
        assert_eq!(t.order(), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.get(i, j), (i + j) % 3);
            }
        }
        let one = load_table("1\n0").unwrap();
        assert_eq!(one.order(), 1);
        assert_eq!(
            load_table("2\n0 2\n1 0"),
            Err(TableError::OutOfRange {
                row: 0,
                col: 1,
                value: 2,
                order: 2
            })
        );
    }

    #[test]
    fn load_errors() {
        assert_eq!(load_table(""), Err(TableError::Empty));
        assert_eq!(load_table("0"), Err(TableError::BadOrder(0)));
        assert!(matches!(load_table("2\n0 1\n1"), Err(TableError::Ragged { row: 1, .. })));
        assert!(matches!(
            load_table("2\n0 x\n1 0"),
            Err(TableError::NotAnInteger { line: 2, .. })
        ));
        assert!(matches!(load_table("2\n0 1"), Err(TableError::RowCount { .. })));
        assert!(matches!(
            load_table("1\n0\n0"),
            Err(TableError::RowCount { .. })
        ));
        assert!(matches!(load_table("-1"), Err(TableError::NotAnInteger { .. })));
    }

    #[test]
    fn text_format_is_bit_exact() {
        assert_eq!(z3().to_text(), "3\n0 1 2\n1 2 0\n2 0 1\n");
        assert_eq!(load_table(&z3().to_text()).unwrap(), z3());
    }

    #[test]
    fn load_many() {
        let text = format!("{}\n{}\n{}", z3(), zero2(), "1\n0\n");
        let ts = load_tables(&text).unwrap();
        assert_eq!(ts, vec![z3(), zero2(), load_table("1\n0").unwrap()]);
    }

    #[test]
    fn evaluate_examples() {
        let x_y: Term = "x*y".parse().unwrap();
        assert_eq!(evaluate(&z3(), &x_y, &a(&[('x', 1), ('y', 2)])), Ok(0));
        let cube: Term = "x*(x*x)".parse().unwrap();
        assert_eq!(evaluate(&z3(), &cube, &a(&[('x', 1)])), Ok(0));
        let t: Term = "(x*y)*(y*x)".parse().unwrap();
        assert_eq!(evaluate(&zero2(), &t, &a(&[('x', 1), ('y', 0)])), Ok(0));
        assert_eq!(
            evaluate(&z3(), &x_y, &a(&[('x', 1)])),
            Err(EvalError::Unassigned('y'))
        );
        assert!(matches!(
            evaluate(&z3(), &x_y, &a(&[('x', 1), ('y', 3)])),
            Err(EvalError::OutOfRange { var: 'y', .. })
        ));
    }

    #[test]
    fn check_identity_examples() {
        let medial = parse_identity("(w*x)*(y*z) = (w*y)*(x*z)").unwrap();
        let i1 = parse_identity("(x*x)*(y*z) = (x*y)*(x*z)").unwrap();
        assert_eq!(check_identity(&z3(), &medial), Check::Holds);
        assert_eq!(check_identity(&z3(), &i1), Check::Holds);
        // least counterexample, frozen from a brute-force oracle over all 256 assignments
        assert_eq!(
            check_identity(&t4_sigma(), &medial),
            Check::Counterexample {
                assignment: a(&[('w', 0), ('x', 0), ('y', 1), ('z', 0)]),
                lhs: 3,
                rhs: 0
            }
        );
    }

    #[test]
    fn other_t4_sigma_counterexample() {
        let medial = parse_identity("(w*x)*(y*z) = (w*y)*(x*z)").unwrap();
        let asg = a(&[('w', 0), ('x', 0), ('y', 2), ('z', 0)]);
        let t = t4_sigma();
        assert_eq!(evaluate(&t, medial.lhs(), &asg), Ok(0));
        assert_eq!(evaluate(&t, medial.rhs(), &asg), Ok(2));
    }

    #[test]
    fn identity_without_variables_on_one_side() {
        // x = y fails whenever the order exceeds one
        let id = parse_identity("x = y").unwrap();
        assert!(check_identity(&load_table("1\n0").unwrap(), &id).holds());
        assert_eq!(
            check_identity(&z3(), &id).to_string(),
            "counterexample x=0 y=1 lhs=0 rhs=1"
        );
    }

    #[test]
    fn cancellation_examples() {
        let p = z3().cancellation_profile();
        assert!(p.left_cancellative && p.right_cancellative && p.quasigroup);
        let p = zero2().cancellation_profile();
        assert!(!p.left_cancellative && !p.right_cancellative && !p.quasigroup);
        let p = load_table("2\n0 1\n0 1").unwrap().cancellation_profile();
        assert_eq!(
            p,
            CancellationProfile {
                left_cancellative: true,
                right_cancellative: false,
                quasigroup: false
            }
        );
    }

    #[test]
    fn relabel_is_an_isomorphism() {
        let t = t4_sigma();
        let perm = [2, 0, 3, 1];
        let r = t.relabel(&perm);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r.get(perm[i], perm[j]), perm[t.get(i, j)]);
            }
        }
    }
}
