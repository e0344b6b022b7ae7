#![allow(dead_code)]

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use trimedial::{load_table, CayleyTable, Identity, Structure, Substitution, Term};

pub fn z3() -> CayleyTable {
    load_table("3\n0 1 2\n1 2 0\n2 0 1").unwrap()
}

pub fn zero2() -> CayleyTable {
    load_table("2\n0 0\n0 0").unwrap()
}

/// i*j = i + σ(j) mod 4 with σ swapping 0 and 1.
pub fn t4_sigma() -> CayleyTable {
    let sigma = [1, 0, 2, 3];
    CayleyTable::from_fn(4, |i, j| (i + sigma[j]) % 4).unwrap()
}

pub fn t(s: &str) -> Term {
    s.parse().unwrap()
}

/// Independent generate-and-filter: every table whose rows are all permutations
/// (or arbitrary tuples), filtered by column injectivity where required, in
/// lexicographic order.
pub fn generate_and_filter(n: usize, structure: Structure) -> Vec<CayleyTable> {
    let rows: Vec<Vec<usize>> = match structure {
        Structure::LeftCancellative | Structure::Quasigroup => (0..n).permutations(n).collect(),
        _ => (0..n).map(|_| 0..n).multi_cartesian_product().collect(),
    };
    let tables = (0..n).map(|_| rows.iter()).multi_cartesian_product().map(|rs| {
        let rs: Vec<Vec<usize>> = rs.into_iter().cloned().collect();
        CayleyTable::from_rows(&rs).unwrap()
    });
    let cols_ok = |t: &CayleyTable| {
        (0..n).all(|j| (0..n).map(|i| t.get(i, j)).collect::<std::collections::HashSet<_>>().len() == n)
    };
    match structure {
        Structure::RightCancellative | Structure::Quasigroup => tables.filter(cols_ok).collect(),
        _ => tables.collect(),
    }
}

pub fn all_quasigroups(n: usize) -> Vec<CayleyTable> {
    let mut out = Vec::new();
    trimedial::enumerate(n, Structure::Quasigroup, |t| out.push(t.clone())).unwrap();
    out
}

pub fn random_term<R: Rng>(rng: &mut R, vars: &[char], depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        Term::var(*vars.choose(rng).unwrap())
    } else {
        Term::prod(random_term(rng, vars, depth - 1), random_term(rng, vars, depth - 1))
    }
}

pub fn random_table<R: Rng>(rng: &mut R, n: usize) -> CayleyTable {
    let entries = (0..n * n).map(|_| rng.gen_range(0..n as u8)).collect();
    CayleyTable::from_entries(n, entries).unwrap()
}

pub fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn random_substitution<R: Rng>(rng: &mut R, domain: &[char], vars: &[char], depth: u32) -> Substitution {
    let mut out = Substitution::new();
    for v in domain {
        if rng.gen_bool(0.7) {
            out.insert(*v, random_term(rng, vars, depth));
        }
    }
    out
}

/// Naive double-loop check: every assignment, no early exit, no compilation.
pub fn naive_holds(table: &CayleyTable, id: &Identity) -> bool {
    fn eval(tab: &CayleyTable, t: &Term, vars: &[char], vals: &[usize]) -> usize {
        match t {
            Term::Var(v) => vals[vars.iter().position(|w| w == v).unwrap()],
            Term::Prod(l, r) => tab.get(eval(tab, l, vars, vals), eval(tab, r, vars, vals)),
        }
    }
    let vars: Vec<char> = id.vars().iter().copied().collect();
    let n = table.order();
    let mut all = true;
    for vals in (0..vars.len()).map(|_| 0..n).multi_cartesian_product() {
        all &= eval(table, id.lhs(), &vars, &vals) == eval(table, id.rhs(), &vars, &vals);
    }
    all
}
