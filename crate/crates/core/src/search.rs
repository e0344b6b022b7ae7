//! Exhaustive enumeration of small Cayley tables, counterexample search,
//! canonical forms, and the two verification campaigns.
//!
//! Tables are produced by a depth-first fill of the cells in row-major order,
//! trying values in increasing order, so the visit order is the lexicographic
//! order of the flattened entry sequence. Cancellation constraints prune on
//! partial rows (left) and partial columns (right) using one bitmask per line.
//!
//! Parallel runs split the space on the choice of the first row. Each branch
//! is scanned independently and results are merged in branch order, which
//! makes every report identical to the sequential scan.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::magma::{CayleyTable, CompiledIdentity};
use crate::variety::{builtin, is_trimedial, VarietyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("order {order} is outside the supported range 1..={max} for {what}")]
    OrderOutOfGuard {
        order: usize,
        max: usize,
        what: &'static str,
    },
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error("identity {0} is both required and refuted")]
    Conflict(String),
    #[error("witness limit must be at least 1")]
    ZeroLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    None,
    LeftCancellative,
    RightCancellative,
    Quasigroup,
}

impl Structure {
    pub const ALL: [Structure; 4] = [
        Structure::None,
        Structure::LeftCancellative,
        Structure::RightCancellative,
        Structure::Quasigroup,
    ];

    /// Largest order `enumerate` accepts for this structure.
    pub fn max_order(self) -> usize {
        match self {
            Structure::Quasigroup => 7,
            _ => 6,
        }
    }

    fn rows_injective(self) -> bool {
        matches!(self, Structure::LeftCancellative | Structure::Quasigroup)
    }

    fn cols_injective(self) -> bool {
        matches!(self, Structure::RightCancellative | Structure::Quasigroup)
    }

    pub fn name(self) -> &'static str {
        match self {
            Structure::None => "none",
            Structure::LeftCancellative => "left",
            Structure::RightCancellative => "right",
            Structure::Quasigroup => "quasigroup",
        }
    }

    /// Whether a complete table has this structure.
    pub fn admits(self, table: &CayleyTable) -> bool {
        let p = table.cancellation_profile();
        match self {
            Structure::None => true,
            Structure::LeftCancellative => p.left_cancellative,
            Structure::RightCancellative => p.right_cancellative,
            Structure::Quasigroup => p.quasigroup,
        }
    }

    fn guard(self, order: usize) -> Result<(), SearchError> {
        if order == 0 || order > self.max_order() {
            return Err(SearchError::OrderOutOfGuard {
                order,
                max: self.max_order(),
                what: self.name(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown structure {0:?}; expected none, left, right, or quasigroup")]
pub struct StructureParseError(pub String);

impl FromStr for Structure {
    type Err = StructureParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Structure::None),
            "left" | "left_cancellative" => Ok(Structure::LeftCancellative),
            "right" | "right_cancellative" => Ok(Structure::RightCancellative),
            "quasigroup" => Ok(Structure::Quasigroup),
            _ => Err(StructureParseError(s.to_string())),
        }
    }
}

/// Depth-first cell filler.
struct Filler {
    n: usize,
    structure: Structure,
    table: CayleyTable,
    row_masks: Vec<u64>,
    col_masks: Vec<u64>,
}

impl Filler {
    fn new(n: usize, structure: Structure) -> Filler {
        Filler {
            n,
            structure,
            table: CayleyTable::zeroed(n),
            row_masks: vec![0; n],
            col_masks: vec![0; n],
        }
    }

    /// Fix the first row; returns false if it violates the structure.
    fn preset_row(&mut self, row: &[u8]) -> bool {
        for (j, &v) in row.iter().enumerate() {
            let bit = 1u64 << v;
            if self.structure.rows_injective() && self.row_masks[0] & bit != 0 {
                return false;
            }
            self.table.entries_mut()[j] = v;
            self.row_masks[0] |= bit;
            self.col_masks[j] |= bit;
        }
        true
    }

    fn fill<F>(&mut self, cell: usize, end: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&CayleyTable) -> ControlFlow<()>,
    {
        if cell == end {
            return visit(&self.table);
        }
        let (i, j) = (cell / self.n, cell % self.n);
        let rows = self.structure.rows_injective();
        let cols = self.structure.cols_injective();
        for v in 0..self.n {
            let bit = 1u64 << v;
            if (rows && self.row_masks[i] & bit != 0) || (cols && self.col_masks[j] & bit != 0) {
                continue;
            }
            self.table.entries_mut()[cell] = v as u8;
            self.row_masks[i] |= bit;
            self.col_masks[j] |= bit;
            let flow = self.fill(cell + 1, end, visit);
            self.row_masks[i] &= !bit;
            self.col_masks[j] &= !bit;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Visit every table of order `n` with the given structure, in lexicographic
/// order of entries. Returns the number of tables visited.
pub fn enumerate(
    n: usize,
    structure: Structure,
    mut visitor: impl FnMut(&CayleyTable),
) -> Result<u64, SearchError> {
    try_enumerate(n, structure, |t| {
        visitor(t);
        ControlFlow::Continue(())
    })
}

/// Like [`enumerate`], but the visitor may stop the scan early. The count
/// includes the table on which the visitor returned `Break`.
pub fn try_enumerate(
    n: usize,
    structure: Structure,
    mut visitor: impl FnMut(&CayleyTable) -> ControlFlow<()>,
) -> Result<u64, SearchError> {
    structure.guard(n)?;
    let mut count = 0u64;
    let mut filler = Filler::new(n, structure);
    let _ = filler.fill(0, n * n, &mut |t| {
        count += 1;
        visitor(t)
    });
    Ok(count)
}

/// The subtree of tables sharing one first row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    order: usize,
    structure: Structure,
    first_row: Vec<u8>,
}

impl Branch {
    pub fn first_row(&self) -> &[u8] {
        &self.first_row
    }

    /// Scan the branch in lexicographic order; returns tables visited.
    pub fn scan(&self, mut visitor: impl FnMut(&CayleyTable) -> ControlFlow<()>) -> u64 {
        let n = self.order;
        let mut filler = Filler::new(n, self.structure);
        let ok = filler.preset_row(&self.first_row);
        debug_assert!(ok);
        let mut count = 0u64;
        let _ = filler.fill(n, n * n, &mut |t| {
            count += 1;
            visitor(t)
        });
        count
    }
}

/// Top-level branches of the enumeration, in lexicographic order.
pub fn branches(n: usize, structure: Structure) -> Result<Vec<Branch>, SearchError> {
    structure.guard(n)?;
    let mut filler = Filler::new(n, structure);
    let mut rows = Vec::new();
    let _ = filler.fill(0, n, &mut |t| {
        rows.push(t.entries()[..n].to_vec());
        ControlFlow::Continue(())
    });
    Ok(rows
        .into_iter()
        .map(|first_row| Branch {
            order: n,
            structure,
            first_row,
        })
        .collect())
}

/// Apply `f` to every branch, using `workers` threads (0 = all available
/// cores). Results come back in branch order.
pub fn map_branches<R, F>(branches: &[Branch], workers: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, &Branch) -> R + Sync + Send,
{
    if workers == 1 || branches.len() <= 1 {
        return branches.iter().enumerate().map(|(i, b)| f(i, b)).collect();
    }
    let run = || branches.par_iter().enumerate().map(|(i, b)| f(i, b)).collect();
    if workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(run)
    }
}

/// Structure plus required and refuted registry identities.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub structure: Structure,
    satisfies: Vec<(String, CompiledIdentity)>,
    refutes: Vec<(String, CompiledIdentity)>,
}

impl Constraint {
    pub fn new<S: AsRef<str>>(
        structure: Structure,
        satisfies: &[S],
        refutes: &[S],
    ) -> Result<Constraint, SearchError> {
        let compile = |names: &[S]| -> Result<Vec<(String, CompiledIdentity)>, SearchError> {
            names
                .iter()
                .map(|n| {
                    let id = builtin(n.as_ref())?;
                    Ok((n.as_ref().to_string(), CompiledIdentity::new(&id)))
                })
                .collect()
        };
        let satisfies = compile(satisfies)?;
        let refutes = compile(refutes)?;
        if let Some((name, _)) = satisfies
            .iter()
            .find(|(s, _)| refutes.iter().any(|(r, _)| r == s))
        {
            return Err(SearchError::Conflict(name.clone()));
        }
        Ok(Constraint {
            structure,
            satisfies,
            refutes,
        })
    }

    pub fn satisfies(&self) -> impl Iterator<Item = &str> {
        self.satisfies.iter().map(|(n, _)| n.as_str())
    }

    pub fn refutes(&self) -> impl Iterator<Item = &str> {
        self.refutes.iter().map(|(n, _)| n.as_str())
    }

    /// Identity part of the match test; the structure is guaranteed by the enumerator.
    pub fn identities_match(&self, table: &CayleyTable) -> bool {
        self.satisfies.iter().all(|(_, id)| id.holds(table))
            && self.refutes.iter().all(|(_, id)| !id.holds(table))
    }

    pub fn matches(&self, table: &CayleyTable) -> bool {
        self.structure.admits(table) && self.identities_match(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderStats {
    pub order: usize,
    pub visited: u64,
    pub matched: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub orders: Vec<OrderStats>,
    pub witnesses: Vec<CayleyTable>,
    pub exhausted: bool,
}

impl SearchReport {
    pub fn total_matched(&self) -> u64 {
        self.orders.iter().map(|o| o.matched).sum()
    }

    /// Replace the witnesses by their canonical forms, dropping isomorphic repeats
    /// while keeping first-occurrence order.
    pub fn dedup_canonical(&mut self) -> Result<(), SearchError> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for w in &self.witnesses {
            let c = canonical_form(w)?;
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        self.witnesses = out;
        Ok(())
    }
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.orders {
            writeln!(f, "order: {} visited: {} matched: {}", o.order, o.visited, o.matched)?;
        }
        writeln!(f, "exhausted: {}", self.exhausted)?;
        writeln!(f, "witnesses: {}", self.witnesses.len())?;
        for w in &self.witnesses {
            writeln!(f)?;
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

struct BranchScan {
    /// Tables examined.
    visited: u64,
    /// Matches with the 1-based visit index at which each was found.
    matches: Vec<(u64, CayleyTable)>,
    /// A further table existed after the scan stopped on its limit.
    more: bool,
}

/// Scan orders `1..=max_order` for tables matching `c`, stopping once `limit`
/// witnesses have been collected (`None` = no limit).
pub fn search(
    max_order: usize,
    c: &Constraint,
    limit: Option<usize>,
    workers: usize,
) -> Result<SearchReport, SearchError> {
    if limit == Some(0) {
        return Err(SearchError::ZeroLimit);
    }
    c.structure.guard(max_order)?;
    let mut report = SearchReport {
        orders: Vec::new(),
        witnesses: Vec::new(),
        exhausted: true,
    };
    for n in 1..=max_order {
        let remaining = limit.map(|l| l - report.witnesses.len());
        let bs = branches(n, c.structure)?;
        // lowest branch that found `remaining` matches on its own
        let cutoff = AtomicUsize::new(usize::MAX);
        let scans = map_branches(&bs, workers, |idx, b| {
            let mut scan = BranchScan {
                visited: 0,
                matches: Vec::new(),
                more: false,
            };
            b.scan(|t| {
                if idx > cutoff.load(Ordering::Relaxed) {
                    return ControlFlow::Break(());
                }
                if remaining.is_some_and(|r| scan.matches.len() == r) {
                    scan.more = true;
                    return ControlFlow::Break(());
                }
                scan.visited += 1;
                if c.identities_match(t) {
                    scan.matches.push((scan.visited, t.clone()));
                    if remaining == Some(scan.matches.len()) {
                        cutoff.fetch_min(idx, Ordering::Relaxed);
                    }
                }
                ControlFlow::Continue(())
            });
            scan
        });

        let mut stats = OrderStats {
            order: n,
            visited: 0,
            matched: 0,
        };
        let mut stopped = false;
        for (idx, scan) in scans.into_iter().enumerate() {
            let want = remaining.map(|r| r - stats.matched as usize);
            match want {
                Some(w) if scan.matches.len() >= w => {
                    let at = scan.matches[w - 1].0;
                    let more = scan.more || scan.visited > at;
                    stats.visited += at;
                    stats.matched += w as u64;
                    report
                        .witnesses
                        .extend(scan.matches.into_iter().take(w).map(|(_, t)| t));
                    // exhausted only if nothing at all follows the last witness
                    let last_branch = idx + 1 == bs.len();
                    stopped = !(n == max_order && last_branch && !more);
                    break;
                }
                _ => {
                    stats.visited += scan.visited;
                    stats.matched += scan.matches.len() as u64;
                    report.witnesses.extend(scan.matches.into_iter().map(|(_, t)| t));
                }
            }
        }
        report.orders.push(stats);
        if stopped || remaining.is_some_and(|r| stats.matched as usize == r) {
            report.exhausted = !stopped;
            break;
        }
    }
    Ok(report)
}

/// Lexicographically least relabeling of `table` (rows, columns and entries
/// permuted together).
pub fn canonical_form(table: &CayleyTable) -> Result<CayleyTable, SearchError> {
    const MAX: usize = 8;
    let n = table.order();
    if n > MAX {
        return Err(SearchError::OrderOutOfGuard {
            order: n,
            max: MAX,
            what: "canonical form",
        });
    }
    let mut best: Vec<u8> = table.entries().to_vec();
    let mut inv = vec![0usize; n];
    let mut cand = vec![0u8; n * n];
    for perm in (0..n).permutations(n) {
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        // build the relabeled table cell by cell, abandoning it once it exceeds `best`
        let mut less = false;
        let mut worse = false;
        'cells: for a in 0..n {
            for b in 0..n {
                let v = perm[table.get(inv[a], inv[b])] as u8;
                let k = a * n + b;
                cand[k] = v;
                if !less {
                    if v > best[k] {
                        worse = true;
                        break 'cells;
                    }
                    less = v < best[k];
                }
            }
        }
        if less && !worse {
            best.copy_from_slice(&cand);
        }
    }
    Ok(CayleyTable::from_entries(n, best).expect("relabeling preserves range"))
}

/// Per-order figures of the theorem campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TheoremOrder {
    pub order: usize,
    /// Left-cancellative tables examined.
    pub visited: u64,
    /// Of those, tables satisfying i2 and i3.
    pub premises: u64,
    /// Of those, tables violating i1.
    pub witnesses: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub orders: Vec<TheoremOrder>,
    pub witnesses: Vec<CayleyTable>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }

    /// The same scan expressed as a search report.
    pub fn search_report(&self) -> SearchReport {
        SearchReport {
            orders: self
                .orders
                .iter()
                .map(|o| OrderStats {
                    order: o.order,
                    visited: o.visited,
                    matched: o.witnesses,
                })
                .collect(),
            witnesses: self.witnesses.clone(),
            exhausted: true,
        }
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.orders {
            writeln!(
                f,
                "order: {} left_cancellative: {} i2_and_i3: {} witnesses: {}",
                o.order, o.visited, o.premises, o.witnesses
            )?;
        }
        writeln!(
            f,
            "theorem: {}",
            if self.passed() { "confirmed" } else { "refuted" }
        )?;
        for w in &self.witnesses {
            writeln!(f)?;
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Default order guard of [`verify_theorem`]; `force` raises it by one.
pub const THEOREM_MAX_ORDER: usize = 4;

/// Look for left-cancellative tables satisfying i2 and i3 but not i1.
pub fn verify_theorem(max_order: usize, force: bool, workers: usize) -> Result<TheoremReport, SearchError> {
    let max = if force { THEOREM_MAX_ORDER + 1 } else { THEOREM_MAX_ORDER };
    if max_order == 0 || max_order > max {
        return Err(SearchError::OrderOutOfGuard {
            order: max_order,
            max,
            what: "theorem verification",
        });
    }
    let i1 = CompiledIdentity::new(&builtin("i1")?);
    let i2 = CompiledIdentity::new(&builtin("i2")?);
    let i3 = CompiledIdentity::new(&builtin("i3")?);
    let mut report = TheoremReport {
        orders: Vec::new(),
        witnesses: Vec::new(),
    };
    for n in 1..=max_order {
        let bs = branches(n, Structure::LeftCancellative)?;
        let parts = map_branches(&bs, workers, |_, b| {
            let mut premises = 0u64;
            let mut found = Vec::new();
            let visited = b.scan(|t| {
                if i2.holds(t) && i3.holds(t) {
                    premises += 1;
                    if !i1.holds(t) {
                        found.push(t.clone());
                    }
                }
                ControlFlow::Continue(())
            });
            (visited, premises, found)
        });
        let mut o = TheoremOrder {
            order: n,
            visited: 0,
            premises: 0,
            witnesses: 0,
        };
        for (visited, premises, found) in parts {
            o.visited += visited;
            o.premises += premises;
            o.witnesses += found.len() as u64;
            report.witnesses.extend(found);
        }
        report.orders.push(o);
    }
    Ok(report)
}

/// Per-order set sizes of the equivalence campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivalenceOrder {
    pub order: usize,
    pub quasigroups: u64,
    /// Tables satisfying i1, i2 and i3.
    pub s123: u64,
    pub kepka: u64,
    pub corollary: u64,
    pub trimedial: u64,
    pub medial: u64,
    /// The four sets coincide.
    pub sets_equal: bool,
    pub medial_within_trimedial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub orders: Vec<EquivalenceOrder>,
    /// Quasigroups on which the four memberships disagree, or medial but not trimedial.
    pub discrepancies: Vec<CayleyTable>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.orders
            .iter()
            .all(|o| o.sets_equal && o.medial_within_trimedial)
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.orders {
            writeln!(
                f,
                "order: {} quasigroups: {} i1_i2_i3: {} kepka: {} corollary: {} trimedial: {} medial: {} equal: {} medial_in_trimedial: {}",
                o.order,
                o.quasigroups,
                o.s123,
                o.kepka,
                o.corollary,
                o.trimedial,
                o.medial,
                o.sets_equal,
                o.medial_within_trimedial
            )?;
        }
        writeln!(
            f,
            "equivalences: {}",
            if self.passed() { "confirmed" } else { "refuted" }
        )?;
        for w in &self.discrepancies {
            writeln!(f)?;
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

pub const EQUIVALENCES_MAX_ORDER: usize = 5;

#[derive(Default)]
struct Tally {
    quasigroups: u64,
    s123: u64,
    kepka: u64,
    corollary: u64,
    trimedial: u64,
    medial: u64,
    unequal: bool,
    medial_outside: bool,
    discrepancies: Vec<CayleyTable>,
}

/// Compare the three-identity, single-identity, corollary and subgroupoid
/// definitions of trimediality on every quasigroup up to `max_order`.
pub fn verify_equivalences(max_order: usize, workers: usize) -> Result<EquivalenceReport, SearchError> {
    if max_order == 0 || max_order > EQUIVALENCES_MAX_ORDER {
        return Err(SearchError::OrderOutOfGuard {
            order: max_order,
            max: EQUIVALENCES_MAX_ORDER,
            what: "equivalence verification",
        });
    }
    let compile = |name: &str| builtin(name).map(|id| CompiledIdentity::new(&id));
    let (i1, i2, i3) = (compile("i1")?, compile("i2")?, compile("i3")?);
    let (kepka, corollary, medial) = (compile("kepka")?, compile("corollary")?, compile("medial")?);

    let mut report = EquivalenceReport {
        orders: Vec::new(),
        discrepancies: Vec::new(),
    };
    for n in 1..=max_order {
        let bs = branches(n, Structure::Quasigroup)?;
        let tallies = map_branches(&bs, workers, |_, b| {
            let mut t = Tally::default();
            b.scan(|q| {
                let in123 = i1.holds(q) && i2.holds(q) && i3.holds(q);
                let ink = kepka.holds(q);
                let inc = corollary.holds(q);
                let intri = is_trimedial(q).is_trimedial();
                let inmed = medial.holds(q);
                t.quasigroups += 1;
                t.s123 += in123 as u64;
                t.kepka += ink as u64;
                t.corollary += inc as u64;
                t.trimedial += intri as u64;
                t.medial += inmed as u64;
                let agree = in123 == ink && ink == inc && inc == intri;
                t.unequal |= !agree;
                t.medial_outside |= inmed && !intri;
                if !agree || (inmed && !intri) {
                    t.discrepancies.push(q.clone());
                }
                ControlFlow::Continue(())
            });
            t
        });
        let mut o = EquivalenceOrder {
            order: n,
            quasigroups: 0,
            s123: 0,
            kepka: 0,
            corollary: 0,
            trimedial: 0,
            medial: 0,
            sets_equal: true,
            medial_within_trimedial: true,
        };
        for t in tallies {
            o.quasigroups += t.quasigroups;
            o.s123 += t.s123;
            o.kepka += t.kepka;
            o.corollary += t.corollary;
            o.trimedial += t.trimedial;
            o.medial += t.medial;
            o.sets_equal &= !t.unequal;
            o.medial_within_trimedial &= !t.medial_outside;
            report.discrepancies.extend(t.discrepancies);
        }
        report.orders.push(o);
    }
    Ok(report)
}
