//! Prime spectrum of a finitely presented commutative monoid, computed as
//! the set of characters M -> {0,1}, plus the universal semilattice M^sl
//! and the map alpha from semilattice classes to primes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monoid::{EqualityVerdict, MonoidElement, MonoidPresentation};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("presentation has {0} generators, exceeding the enumeration cap {1}")]
    CapExceeded(usize, usize),
    #[error("zero-set union {0:#b} is not a valid character")]
    UnionNotPrime(u64),
    #[error("equality budget exhausted while testing membership of `{0}`")]
    BudgetExhausted(String),
    #[error("semilattice enumeration did not close within cap {0}")]
    SemilatticeTooLarge(usize),
    #[error(transparent)]
    Monoid(#[from] crate::monoid::MonoidError),
}

pub type Result<T> = std::result::Result<T, SpectrumError>;

/// A monoid homomorphism M -> {0,1} (multiplication is min), stored as the
/// set of generator indices mapped to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Character {
    pub zero_mask: u64,
}

impl Character {
    /// Does the zero-set define a homomorphism? For every relation (u, v)
    /// the two sides must vanish together.
    pub fn is_valid(zero_mask: u64, m: &MonoidPresentation) -> bool {
        m.relations().iter().all(|(u, v)| {
            (u.support_mask() & zero_mask == 0) == (v.support_mask() & zero_mask == 0)
        })
    }

    pub fn zero_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |i| self.zero_mask & (1 << i) != 0)
    }
}

/// The prime ideal chi^-1(0) of a character: all elements whose support
/// meets the zero-set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub character: Character,
}

impl PrimeIdeal {
    pub fn from_mask(zero_mask: u64) -> Self {
        PrimeIdeal {
            character: Character { zero_mask },
        }
    }

    pub fn zero_mask(&self) -> u64 {
        self.character.zero_mask
    }

    pub fn is_empty(&self) -> bool {
        self.zero_mask() == 0
    }

    /// Membership of an element: since the character is a homomorphism, it
    /// is constant on congruence classes, so the free support suffices.
    pub fn contains(&self, f: &MonoidElement) -> bool {
        f.support_mask() & self.zero_mask() != 0
    }

    pub fn subset_of(&self, other: &PrimeIdeal) -> bool {
        self.zero_mask() & !other.zero_mask() == 0
    }

    /// Generator indices in the prime.
    pub fn generator_indices(&self) -> BTreeSet<usize> {
        self.character.zero_indices().collect()
    }
}

/// Spec(M) as a finite lattice of primes ordered by containment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecLattice {
    pub primes: Vec<PrimeIdeal>,
    /// order[i][j] = true iff primes[i] is contained in primes[j]
    pub order: Vec<Vec<bool>>,
}

impl SpecLattice {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn index_of(&self, p: &PrimeIdeal) -> Option<usize> {
        self.primes.iter().position(|q| q == p)
    }

    /// The minimal prime (the empty zero-set, always valid).
    pub fn bottom(&self) -> PrimeIdeal {
        self.primes[0]
    }

    /// The maximal prime: the union of all zero-sets.
    pub fn top(&self) -> PrimeIdeal {
        let mask = self.primes.iter().fold(0u64, |m, p| m | p.zero_mask());
        PrimeIdeal::from_mask(mask)
    }

    /// Hasse diagram in DOT format, primes ordered by bitmask.
    pub fn to_dot(&self, m: &MonoidPresentation) -> String {
        let label = |p: &PrimeIdeal| -> String {
            let names: Vec<&str> = p
                .generator_indices()
                .into_iter()
                .map(|i| m.generator_names()[i].as_str())
                .collect();
            if names.is_empty() {
                "()".to_string()
            } else {
                format!("({})", names.join(","))
            }
        };
        let n = self.primes.len();
        let mut out = String::from("digraph spec {\n  rankdir=BT;\n");
        for (i, p) in self.primes.iter().enumerate() {
            out.push_str(&format!("  n{} [label=\"{}\"];\n", i, label(p)));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j || !self.order[i][j] {
                    continue;
                }
                // covering edge: no intermediate prime strictly between
                let covered = (0..n)
                    .any(|l| l != i && l != j && self.order[i][l] && self.order[l][j]);
                if !covered {
                    out.push_str(&format!("  n{} -> n{};\n", i, j));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Enumerate Spec(M): every zero-set of generators compatible with the
/// relations, ordered by bitmask.
pub fn spec(m: &MonoidPresentation, cap: usize) -> Result<SpecLattice> {
    let k = m.generator_count();
    if k > cap || k > 63 {
        return Err(SpectrumError::CapExceeded(k, cap.min(63)));
    }
    let mut primes = Vec::new();
    for mask in 0u64..(1u64 << k) {
        if Character::is_valid(mask, m) {
            primes.push(PrimeIdeal::from_mask(mask));
        }
    }
    let n = primes.len();
    let mut order = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            order[i][j] = primes[i].subset_of(&primes[j]);
        }
    }
    Ok(SpecLattice { primes, order })
}

/// Join of the containment order: union of zero-sets.
pub fn prime_union(p: &PrimeIdeal, q: &PrimeIdeal, m: &MonoidPresentation) -> Result<PrimeIdeal> {
    let mask = p.zero_mask() | q.zero_mask();
    if !Character::is_valid(mask, m) {
        return Err(SpectrumError::UnionNotPrime(mask));
    }
    Ok(PrimeIdeal::from_mask(mask))
}

/// Meet: the union of all primes of the lattice lying below both arguments.
pub fn prime_meet(p: &PrimeIdeal, q: &PrimeIdeal, lattice: &SpecLattice) -> Result<PrimeIdeal> {
    let mut mask = 0u64;
    for r in &lattice.primes {
        if r.subset_of(p) && r.subset_of(q) {
            mask |= r.zero_mask();
        }
    }
    let result = PrimeIdeal::from_mask(mask);
    if lattice.index_of(&result).is_none() {
        return Err(SpectrumError::UnionNotPrime(mask));
    }
    Ok(result)
}

/// D(f): the primes not containing f. Membership is support-based, but a
/// budget-limited scan over f's class guards against a support that only
/// rewrites into the zero-set.
pub fn basic_open(
    lattice: &SpecLattice,
    f: &MonoidElement,
    m: &MonoidPresentation,
    budget: u64,
) -> Result<Vec<PrimeIdeal>> {
    m.check_element(f)?;
    // characters are constant on classes, so one representative suffices;
    // still canonicalize so callers can pass any word.
    let rep = m.canonical_form(f, budget);
    Ok(lattice
        .primes
        .iter()
        .copied()
        .filter(|p| !p.contains(&rep))
        .collect())
}

/// M^sl: add g^2 = g for every generator. In a commutative monoid
/// idempotent generators make every element idempotent.
pub fn universal_semilattice(m: &MonoidPresentation) -> MonoidPresentation {
    let k = m.generator_count();
    let mut relations = m.relations().to_vec();
    for i in 0..k {
        relations.push((m.generator(i).pow(2), m.generator(i)));
    }
    MonoidPresentation::new(m.generator_names().to_vec(), relations)
        .expect("extending a valid presentation preserves validity")
}

/// Canonical representatives of M^sl, enumerated over square-free exponent
/// vectors (every class contains one since g^2 = g).
pub fn semilattice_elements(
    m: &MonoidPresentation,
    cap: usize,
    budget: u64,
) -> Result<Vec<MonoidElement>> {
    let sl = universal_semilattice(m);
    let k = sl.generator_count();
    if k > cap.min(63) {
        return Err(SpectrumError::CapExceeded(k, cap.min(63)));
    }
    let mut reps: BTreeSet<MonoidElement> = BTreeSet::new();
    for mask in 0u64..(1u64 << k) {
        let exps: Vec<u32> = (0..k).map(|i| ((mask >> i) & 1) as u32).collect();
        let e = MonoidElement::new(exps);
        reps.insert(sl.canonical_form(&e, budget));
    }
    Ok(reps.into_iter().collect())
}

/// alpha(f): the largest prime avoiding f, computed as the union of all
/// primes q with f not in q.
pub fn alpha(
    m: &MonoidPresentation,
    f: &MonoidElement,
    lattice: &SpecLattice,
    budget: u64,
) -> Result<PrimeIdeal> {
    let open = basic_open(lattice, f, m, budget)?;
    let mut mask = 0u64;
    for q in &open {
        mask |= q.zero_mask();
    }
    let p = PrimeIdeal::from_mask(mask);
    if lattice.index_of(&p).is_none() {
        return Err(SpectrumError::UnionNotPrime(mask));
    }
    Ok(p)
}

/// Spot-check the prime law ab in p => a in p or b in p on random pairs.
pub fn check_prime_law(
    p: &PrimeIdeal,
    m: &MonoidPresentation,
    samples: &[(MonoidElement, MonoidElement)],
) -> bool {
    samples.iter().all(|(a, b)| {
        match m.multiply(a, b) {
            Ok(ab) => !p.contains(&ab) || p.contains(a) || p.contains(b),
            Err(_) => true,
        }
    })
}

/// Definitive idempotency check in the extended presentation, used by the
/// semilattice invariant tests.
pub fn is_idempotent(sl: &MonoidPresentation, e: &MonoidElement, budget: u64) -> EqualityVerdict {
    match sl.multiply(e, e) {
        Ok(sq) => sl
            .are_equal(&sq, e, budget)
            .unwrap_or(EqualityVerdict::UnknownWithinBound(budget)),
        Err(_) => EqualityVerdict::UnknownWithinBound(budget),
    }
}
