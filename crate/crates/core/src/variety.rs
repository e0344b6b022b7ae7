//! Named identities, generated subgroupoids, and the medial / trimedial predicates.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::magma::{Assignment, CancellationProfile, CayleyTable, Check, CompiledIdentity};
use crate::term::Identity;

/// The builtin identities, in report order.
pub const REGISTRY: [(&str, &str); 6] = [
    ("medial", "(w*x)*(y*z) = (w*y)*(x*z)"),
    ("i1", "(x*x)*(y*z) = (x*y)*(x*z)"),
    ("i2", "(y*z)*(x*x) = (y*x)*(z*x)"),
    ("i3", "(x*(x*x))*(u*v) = (x*u)*((x*x)*v)"),
    (
        "kepka",
        "((x*x)*(y*z))*(((x*y)*(u*u))*((w*(w*w))*(z*v))) = ((x*y)*(x*z))*(((x*u)*(y*u))*((w*z)*((w*w)*v)))",
    ),
    (
        "corollary",
        "((x*y)*(u*u))*((w*(w*w))*(z*v)) = ((x*u)*(y*u))*((w*z)*((w*w)*v))",
    ),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarietyError {
    #[error("unknown identity {name:?}; valid names: {}", REGISTRY.map(|(n, _)| n).join(", "))]
    UnknownName { name: String },
    #[error("element {element} is out of range for order {order}")]
    OutOfRange { element: usize, order: usize },
    #[error("subset is not closed: {a}*{b} = {product} is outside it")]
    NotClosed { a: usize, b: usize, product: usize },
}

fn parsed_registry() -> &'static [(&'static str, Identity)] {
    static PARSED: OnceLock<Vec<(&'static str, Identity)>> = OnceLock::new();
    PARSED.get_or_init(|| {
        REGISTRY
            .iter()
            .map(|(name, text)| (*name, text.parse().expect("registry identities parse")))
            .collect()
    })
}

pub fn registry_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _)| *n)
}

pub fn builtin(name: &str) -> Result<Identity, VarietyError> {
    parsed_registry()
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, id)| id.clone())
        .ok_or_else(|| VarietyError::UnknownName {
            name: name.to_string(),
        })
}

/// A set of table elements, stored as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u64);

impl Subset {
    pub fn empty() -> Subset {
        Subset(0)
    }

    pub fn full(order: usize) -> Subset {
        Subset(crate::magma::full_mask(order))
    }

    pub fn from_elements(elements: impl IntoIterator<Item = usize>) -> Subset {
        Subset(elements.into_iter().fold(0, |m, e| {
            assert!(e < 64, "element {e} exceeds the supported order");
            m | 1 << e
        }))
    }

    pub fn mask(&self) -> u64 {
        self.0
    }

    pub fn contains(&self, e: usize) -> bool {
        e < 64 && self.0 >> e & 1 == 1
    }

    pub fn insert(&mut self, e: usize) -> bool {
        let fresh = !self.contains(e);
        self.0 |= 1 << e;
        fresh
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in ascending order.
    pub fn elements(&self) -> Vec<usize> {
        (0..64).filter(|&e| self.contains(e)).collect()
    }

    fn check_range(&self, order: usize) -> Result<(), VarietyError> {
        match self.elements().into_iter().find(|&e| e >= order) {
            Some(element) => Err(VarietyError::OutOfRange { element, order }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed element list {0:?}")]
pub struct SubsetParseError(pub String);

impl FromStr for Subset {
    type Err = SubsetParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SubsetParseError(s.to_string());
        let mut out = Subset::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let e: usize = part.parse().map_err(|_| err())?;
            if e >= 64 {
                return Err(err());
            }
            out.insert(e);
        }
        Ok(out)
    }
}

/// Least subset containing `seed` and closed under the product.
pub fn subgroupoid_closure(table: &CayleyTable, seed: Subset) -> Result<Subset, VarietyError> {
    seed.check_range(table.order())?;
    Ok(closure_unchecked(table, seed))
}

fn closure_unchecked(table: &CayleyTable, seed: Subset) -> Subset {
    let mut set = seed;
    let mut members = seed.elements();
    let mut next = 0;
    // every pair (a, b) with both indices < next has been multiplied
    while next < members.len() {
        let a = members[next];
        for i in 0..=next {
            let b = members[i];
            for p in [table.get(a, b), table.get(b, a)] {
                if set.insert(p) {
                    members.push(p);
                }
            }
        }
        next += 1;
    }
    set
}

fn medial() -> &'static CompiledIdentity {
    static MEDIAL: OnceLock<CompiledIdentity> = OnceLock::new();
    MEDIAL.get_or_init(|| CompiledIdentity::new(&builtin("medial").unwrap()))
}

/// Check the medial identity with every variable ranging over `s` only.
pub fn is_medial_on(table: &CayleyTable, s: Subset) -> Result<Check, VarietyError> {
    s.check_range(table.order())?;
    let elems = s.elements();
    for &a in &elems {
        for &b in &elems {
            let product = table.get(a, b);
            if !s.contains(product) {
                return Err(VarietyError::NotClosed { a, b, product });
            }
        }
    }
    let domain: Vec<u8> = elems.iter().map(|&e| e as u8).collect();
    Ok(medial().check_on(table, &domain))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trimediality {
    Trimedial,
    Witness {
        seed: Subset,
        closure: Subset,
        assignment: Assignment,
        lhs: usize,
        rhs: usize,
    },
}

impl Trimediality {
    pub fn is_trimedial(&self) -> bool {
        matches!(self, Trimediality::Trimedial)
    }
}

/// Seeds of size 1, 2, then 3, each size in lexicographic order.
pub fn small_seeds(order: usize) -> impl Iterator<Item = Subset> {
    let singles = (0..order).map(|a| Subset::from_elements([a]));
    let pairs = (0..order).flat_map(move |a| (a + 1..order).map(move |b| Subset::from_elements([a, b])));
    let triples = (0..order).flat_map(move |a| {
        (a + 1..order).flat_map(move |b| (b + 1..order).map(move |c| Subset::from_elements([a, b, c])))
    });
    singles.chain(pairs).chain(triples)
}

/// Whether every subgroupoid generated by at most three elements is medial.
/// On failure the first failing seed is reported with its least counterexample.
pub fn is_trimedial(table: &CayleyTable) -> Trimediality {
    // closures already known to be medial
    let mut passed: HashSet<Subset> = HashSet::new();
    for seed in small_seeds(table.order()) {
        let closure = closure_unchecked(table, seed);
        if passed.contains(&closure) {
            continue;
        }
        match is_medial_on(table, closure).expect("closures are closed") {
            Check::Holds => {
                passed.insert(closure);
            }
            Check::Counterexample {
                assignment,
                lhs,
                rhs,
            } => {
                return Trimediality::Witness {
                    seed,
                    closure,
                    assignment,
                    lhs,
                    rhs,
                }
            }
        }
    }
    Trimediality::Trimedial
}

/// Everything `classify` knows about a table. Field order is the report order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub order: usize,
    pub profile: CancellationProfile,
    /// Registry name and whether it holds, in registry order.
    pub identities: Vec<(&'static str, bool)>,
    pub trimedial: bool,
}

impl PropertyReport {
    pub fn holds(&self, name: &str) -> Option<bool> {
        self.identities.iter().find(|(n, _)| *n == name).map(|(_, h)| *h)
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order: {}", self.order)?;
        writeln!(f, "left_cancellative: {}", self.profile.left_cancellative)?;
        writeln!(f, "right_cancellative: {}", self.profile.right_cancellative)?;
        writeln!(f, "quasigroup: {}", self.profile.quasigroup)?;
        for (name, holds) in &self.identities {
            writeln!(f, "{name}: {}", if *holds { "holds" } else { "fails" })?;
        }
        writeln!(f, "trimedial: {}", self.trimedial)
    }
}

pub fn classify(table: &CayleyTable) -> PropertyReport {
    PropertyReport {
        order: table.order(),
        profile: table.cancellation_profile(),
        identities: parsed_registry()
            .iter()
            .map(|(name, id)| (*name, CompiledIdentity::new(id).holds(table)))
            .collect(),
        trimedial: is_trimedial(table).is_trimedial(),
    }
}
