//! Finitely presented commutative monoids: elements as exponent vectors,
//! a budgeted word-problem oracle, units, reduction and ideal arithmetic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MonoidError {
    #[error("exponent vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("units undecided within budget {0}")]
    UnitsUndecided(u64),
    #[error("empty generating set")]
    EmptyGeneratingSet,
    #[error("ideal membership undecided within budget {0}")]
    MembershipUndecided(u64),
}

pub type Result<T> = std::result::Result<T, MonoidError>;

/// An element of a presented commutative monoid, written as the exponent
/// vector of a word in the generators. Equality of the underlying words is
/// decided by [`MonoidPresentation::are_equal`], not by `==`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonoidElement {
    exponents: Vec<u32>,
}

impl MonoidElement {
    pub fn new(exponents: Vec<u32>) -> Self {
        MonoidElement { exponents }
    }

    pub fn identity(k: usize) -> Self {
        MonoidElement {
            exponents: vec![0; k],
        }
    }

    /// The generator with index `i` in a presentation with `k` generators.
    pub fn generator(i: usize, k: usize) -> Self {
        let mut exponents = vec![0; k];
        exponents[i] = 1;
        MonoidElement { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn total_degree(&self) -> u64 {
        self.exponents.iter().map(|&e| e as u64).sum()
    }

    /// Indices of generators occurring in the word.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    pub fn support_mask(&self) -> u64 {
        self.support().fold(0u64, |m, i| m | (1 << i))
    }

    /// Componentwise divisibility of the underlying free words.
    pub fn divides(&self, other: &MonoidElement) -> bool {
        self.exponents
            .iter()
            .zip(&other.exponents)
            .all(|(a, b)| a <= b)
    }

    pub fn pow(&self, n: u32) -> MonoidElement {
        MonoidElement {
            exponents: self.exponents.iter().map(|&e| e * n).collect(),
        }
    }

    fn checked_sub_add(&self, sub: &MonoidElement, add: &MonoidElement) -> Option<MonoidElement> {
        if !sub.divides(self) {
            return None;
        }
        let exponents = self
            .exponents
            .iter()
            .zip(&sub.exponents)
            .zip(&add.exponents)
            .map(|((&e, &s), &a)| e - s + a)
            .collect();
        Some(MonoidElement { exponents })
    }
}

/// Graded-lexicographic order; the canonical form of a class is its minimum.
impl Ord for MonoidElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exponents.cmp(&other.exponents))
    }
}

impl PartialOrd for MonoidElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Verdict of the budgeted word-problem oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqualityVerdict {
    Equal,
    Distinct,
    UnknownWithinBound(u64),
}

impl EqualityVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqualityVerdict::Equal)
    }

    pub fn is_definitive(&self) -> bool {
        !matches!(self, EqualityVerdict::UnknownWithinBound(_))
    }
}

/// Structural shape of a presentation, detected once at construction. Free
/// and inverse-pair presentations admit exact equality tests; everything
/// else goes through the budgeted search.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Structure {
    /// No relations at all.
    Free,
    /// Every relation is `g*h = 1` (possibly `g*g = 1`), with each generator
    /// in at most one such pair. Equality reduces to an integer vector.
    FreeWithInverses { partner: Vec<Option<usize>> },
    General,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonoidPresentation {
    generators: Vec<String>,
    relations: Vec<(MonoidElement, MonoidElement)>,
    #[serde(skip, default = "default_structure")]
    structure: std::cell::OnceCell<Structure>,
}

fn default_structure() -> std::cell::OnceCell<Structure> {
    std::cell::OnceCell::new()
}

impl PartialEq for MonoidPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators
            && normalized_relations(&self.relations) == normalized_relations(&other.relations)
    }
}

impl Eq for MonoidPresentation {}

fn normalized_relations(
    relations: &[(MonoidElement, MonoidElement)],
) -> Vec<(MonoidElement, MonoidElement)> {
    let mut rels: Vec<_> = relations
        .iter()
        .map(|(u, v)| {
            if u <= v {
                (u.clone(), v.clone())
            } else {
                (v.clone(), u.clone())
            }
        })
        .collect();
    rels.sort();
    rels
}

impl MonoidPresentation {
    pub fn new(
        generators: Vec<String>,
        relations: Vec<(MonoidElement, MonoidElement)>,
    ) -> Result<Self> {
        let k = generators.len();
        let mut seen = HashSet::new();
        for g in &generators {
            if !seen.insert(g.clone()) {
                return Err(MonoidError::DuplicateGenerator(g.clone()));
            }
        }
        for (u, v) in &relations {
            for side in [u, v] {
                if side.len() != k {
                    return Err(MonoidError::DimensionMismatch {
                        expected: k,
                        got: side.len(),
                    });
                }
            }
        }
        Ok(MonoidPresentation {
            generators,
            relations,
            structure: std::cell::OnceCell::new(),
        })
    }

    /// Free commutative monoid on the given generator names.
    pub fn free(generators: Vec<String>) -> Self {
        MonoidPresentation::new(generators, Vec::new()).expect("free presentation is valid")
    }

    /// The trivial monoid (no generators).
    pub fn trivial() -> Self {
        MonoidPresentation::free(Vec::new())
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn relations(&self) -> &[(MonoidElement, MonoidElement)] {
        &self.relations
    }

    pub fn identity(&self) -> MonoidElement {
        MonoidElement::identity(self.generator_count())
    }

    pub fn generator(&self, i: usize) -> MonoidElement {
        MonoidElement::generator(i, self.generator_count())
    }

    pub fn is_free(&self) -> bool {
        self.relations.is_empty()
    }

    fn structure(&self) -> &Structure {
        self.structure.get_or_init(|| self.detect_structure())
    }

    fn detect_structure(&self) -> Structure {
        if self.relations.is_empty() {
            return Structure::Free;
        }
        let k = self.generator_count();
        let mut partner: Vec<Option<usize>> = vec![None; k];
        for (u, v) in &self.relations {
            let (word, id) = if v.is_identity() {
                (u, v)
            } else if u.is_identity() {
                (v, u)
            } else {
                return Structure::General;
            };
            debug_assert!(id.is_identity());
            if word.total_degree() != 2 {
                return Structure::General;
            }
            let supp: Vec<usize> = word.support().collect();
            let (a, b) = match supp.len() {
                1 => (supp[0], supp[0]),
                2 => (supp[0], supp[1]),
                _ => return Structure::General,
            };
            for (x, y) in [(a, b), (b, a)] {
                match partner[x] {
                    None => partner[x] = Some(y),
                    Some(p) if p == y => {}
                    Some(_) => return Structure::General,
                }
            }
        }
        Structure::FreeWithInverses { partner }
    }

    /// Exact normal form for free-with-inverses presentations: cancel each
    /// inverse pair into a canonical nonnegative vector.
    fn inverse_pair_reduce(&self, a: &MonoidElement, partner: &[Option<usize>]) -> MonoidElement {
        let mut exps: Vec<u32> = a.exponents().to_vec();
        for (i, p) in partner.iter().enumerate() {
            match p {
                Some(j) if *j == i => {
                    // self-inverse generator: order two
                    exps[i] %= 2;
                }
                Some(j) if *j > i => {
                    let d = exps[i].min(exps[*j]);
                    exps[i] -= d;
                    exps[*j] -= d;
                }
                _ => {}
            }
        }
        MonoidElement::new(exps)
    }

    pub fn check_element(&self, a: &MonoidElement) -> Result<()> {
        if a.len() != self.generator_count() {
            return Err(MonoidError::DimensionMismatch {
                expected: self.generator_count(),
                got: a.len(),
            });
        }
        Ok(())
    }

    /// Free commutative multiplication; quotient semantics live in
    /// [`are_equal`](Self::are_equal).
    pub fn multiply(&self, a: &MonoidElement, b: &MonoidElement) -> Result<MonoidElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        let exponents = a
            .exponents()
            .iter()
            .zip(b.exponents())
            .map(|(&x, &y)| x + y)
            .collect();
        Ok(MonoidElement::new(exponents))
    }

    /// One-step rewrites of `x`: for every relation `(u, v)`, replace an
    /// occurrence of `u` by `v` and vice versa.
    fn neighbors(&self, x: &MonoidElement) -> Vec<MonoidElement> {
        let mut out = Vec::new();
        for (u, v) in &self.relations {
            if let Some(y) = x.checked_sub_add(u, v) {
                out.push(y);
            }
            if let Some(y) = x.checked_sub_add(v, u) {
                out.push(y);
            }
        }
        out
    }

    /// Budgeted word-problem oracle: bidirectional breadth-first search over
    /// single-relation rewrites. `Equal` and `Distinct` are definitive.
    pub fn are_equal(
        &self,
        a: &MonoidElement,
        b: &MonoidElement,
        budget: u64,
    ) -> Result<EqualityVerdict> {
        self.check_element(a)?;
        self.check_element(b)?;
        if budget == 0 {
            return Err(MonoidError::ZeroBudget);
        }
        match self.structure() {
            Structure::Free => {
                return Ok(if a == b {
                    EqualityVerdict::Equal
                } else {
                    EqualityVerdict::Distinct
                });
            }
            Structure::FreeWithInverses { partner } => {
                let partner = partner.clone();
                return Ok(
                    if self.inverse_pair_reduce(a, &partner)
                        == self.inverse_pair_reduce(b, &partner)
                    {
                        EqualityVerdict::Equal
                    } else {
                        EqualityVerdict::Distinct
                    },
                );
            }
            Structure::General => {}
        }
        if a == b {
            return Ok(EqualityVerdict::Equal);
        }
        let mut seen_a: HashSet<MonoidElement> = HashSet::from([a.clone()]);
        let mut seen_b: HashSet<MonoidElement> = HashSet::from([b.clone()]);
        let mut frontier_a = vec![a.clone()];
        let mut frontier_b = vec![b.clone()];
        let mut steps: u64 = 0;
        loop {
            // Expand the smaller live frontier first.
            let expand_a = match (frontier_a.is_empty(), frontier_b.is_empty()) {
                (true, true) => return Ok(EqualityVerdict::Distinct),
                (true, false) => false,
                (false, true) => true,
                (false, false) => frontier_a.len() <= frontier_b.len(),
            };
            let (frontier, seen, other_seen) = if expand_a {
                (&mut frontier_a, &mut seen_a, &seen_b)
            } else {
                (&mut frontier_b, &mut seen_b, &seen_a)
            };
            let mut next = Vec::new();
            for x in frontier.drain(..) {
                for y in self.neighbors(&x) {
                    if other_seen.contains(&y) {
                        return Ok(EqualityVerdict::Equal);
                    }
                    if seen.insert(y.clone()) {
                        steps += 1;
                        next.push(y);
                    }
                }
                if steps >= budget {
                    return Ok(EqualityVerdict::UnknownWithinBound(budget));
                }
            }
            *frontier = next;
            // One class fully explored without meeting the other: disjoint.
            if (expand_a && frontier_a.is_empty()) || (!expand_a && frontier_b.is_empty()) {
                return Ok(EqualityVerdict::Distinct);
            }
        }
    }

    /// Best-first exploration of the equivalence class of `a`, smallest
    /// elements first. Returns the visited elements (sorted ascending) and
    /// whether the class was exhausted within the budget.
    pub fn explore_class(&self, a: &MonoidElement, budget: u64) -> (Vec<MonoidElement>, bool) {
        match self.structure() {
            Structure::Free => return (vec![a.clone()], true),
            _ => {}
        }
        let mut seen: HashSet<MonoidElement> = HashSet::from([a.clone()]);
        let mut heap: BinaryHeap<std::cmp::Reverse<MonoidElement>> =
            BinaryHeap::from([std::cmp::Reverse(a.clone())]);
        let mut visited = Vec::new();
        let mut exhausted = true;
        while let Some(std::cmp::Reverse(x)) = heap.pop() {
            visited.push(x.clone());
            if visited.len() as u64 >= budget {
                exhausted = heap.is_empty();
                break;
            }
            for y in self.neighbors(&x) {
                if seen.insert(y.clone()) {
                    heap.push(std::cmp::Reverse(y));
                }
            }
        }
        visited.sort();
        (visited, exhausted)
    }

    /// Graded-lexicographic minimum of the budget-explored class: a
    /// deterministic representative used for hashing carriers.
    pub fn canonical_form(&self, a: &MonoidElement, budget: u64) -> MonoidElement {
        match self.structure() {
            Structure::Free => a.clone(),
            Structure::FreeWithInverses { partner } => {
                let partner = partner.clone();
                self.inverse_pair_reduce(a, &partner)
            }
            Structure::General => {
                let (visited, _) = self.explore_class(a, budget);
                visited.into_iter().next().unwrap_or_else(|| a.clone())
            }
        }
    }

    /// Is the element a unit, i.e. does `f * e = 1` have a solution? Sound
    /// positive answers always; definitive negative only when the class of
    /// the identity is exhausted.
    pub fn is_unit(&self, f: &MonoidElement, budget: u64) -> EqualityVerdict {
        if f.is_identity() {
            return EqualityVerdict::Equal;
        }
        match self.structure() {
            Structure::Free => EqualityVerdict::Distinct,
            Structure::FreeWithInverses { partner } => {
                let partner = partner.clone();
                if f.support().all(|i| partner[i].is_some()) {
                    EqualityVerdict::Equal
                } else {
                    EqualityVerdict::Distinct
                }
            }
            Structure::General => {
                let (class, exhausted) = self.explore_class(&self.identity(), budget);
                if class.iter().any(|x| f.divides(x)) {
                    EqualityVerdict::Equal
                } else if exhausted {
                    EqualityVerdict::Distinct
                } else {
                    EqualityVerdict::UnknownWithinBound(budget)
                }
            }
        }
    }

    /// The generators that are invertible, together with a definitiveness
    /// flag (partial answers come from budget exhaustion).
    pub fn units(&self, budget: u64) -> UnitsReport {
        let k = self.generator_count();
        match self.structure() {
            Structure::Free => UnitsReport {
                units: BTreeSet::new(),
                definitive: true,
            },
            Structure::FreeWithInverses { partner } => UnitsReport {
                units: (0..k).filter(|&i| partner[i].is_some()).collect(),
                definitive: true,
            },
            Structure::General => {
                let (class, exhausted) = self.explore_class(&self.identity(), budget);
                let mut units = BTreeSet::new();
                for x in &class {
                    for i in x.support() {
                        units.insert(i);
                    }
                }
                UnitsReport {
                    definitive: exhausted || units.len() == k,
                    units,
                }
            }
        }
    }

    /// M/M^x: add the relation `g = 1` for every unit generator.
    pub fn reduced_monoid(&self, budget: u64) -> Result<MonoidPresentation> {
        let report = self.units(budget);
        if !report.definitive {
            return Err(MonoidError::UnitsUndecided(budget));
        }
        let mut relations = self.relations.clone();
        for &i in &report.units {
            relations.push((self.generator(i), self.identity()));
        }
        MonoidPresentation::new(self.generators.clone(), relations)
    }

    /// Does `m` lie in the ideal generated by the listed elements?
    /// Membership holds iff some element of `m`'s class is divisible by a
    /// generator of the ideal.
    pub fn ideal_membership(
        &self,
        ideal: &Ideal,
        m: &MonoidElement,
        budget: u64,
    ) -> Result<EqualityVerdict> {
        self.check_element(m)?;
        if budget == 0 {
            return Err(MonoidError::ZeroBudget);
        }
        match self.structure() {
            Structure::Free => {
                let member = ideal.generators.iter().any(|g| g.divides(m));
                return Ok(if member {
                    EqualityVerdict::Equal
                } else {
                    EqualityVerdict::Distinct
                });
            }
            Structure::FreeWithInverses { partner } => {
                // divide out invertible coordinates, then compare the rest
                let partner = partner.clone();
                let mr = self.inverse_pair_reduce(m, &partner);
                let member = ideal.generators.iter().any(|g| {
                    let gr = self.inverse_pair_reduce(g, &partner);
                    let ok = gr
                        .support()
                        .filter(|&i| partner[i].is_none())
                        .collect::<Vec<_>>()
                        .into_iter()
                        .all(|i| gr.exponents()[i] <= mr.exponents()[i]);
                    ok
                });
                return Ok(if member {
                    EqualityVerdict::Equal
                } else {
                    EqualityVerdict::Distinct
                });
            }
            Structure::General => {}
        }
        let (class, exhausted) = self.explore_class(m, budget);
        for x in &class {
            if ideal.generators.iter().any(|g| g.divides(x)) {
                return Ok(EqualityVerdict::Equal);
            }
        }
        Ok(if exhausted {
            EqualityVerdict::Distinct
        } else {
            EqualityVerdict::UnknownWithinBound(budget)
        })
    }

    /// Sublist of the input in which no element lies in the ideal generated
    /// by the others.
    pub fn minimal_ideal_generators(
        &self,
        elements: &[MonoidElement],
        budget: u64,
    ) -> Result<Ideal> {
        if elements.is_empty() {
            return Err(MonoidError::EmptyGeneratingSet);
        }
        let mut sorted: Vec<MonoidElement> = elements.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut kept: Vec<MonoidElement> = Vec::new();
        for (i, e) in sorted.iter().enumerate() {
            let others: Vec<MonoidElement> = kept
                .iter()
                .chain(sorted[i + 1..].iter())
                .cloned()
                .collect();
            if others.is_empty() {
                kept.push(e.clone());
                continue;
            }
            let ideal = Ideal {
                generators: others,
            };
            match self.ideal_membership(&ideal, e, budget)? {
                EqualityVerdict::Equal => {}
                EqualityVerdict::Distinct => kept.push(e.clone()),
                EqualityVerdict::UnknownWithinBound(b) => {
                    return Err(MonoidError::MembershipUndecided(b))
                }
            }
        }
        Ok(Ideal { generators: kept })
    }

    /// Enumerate the whole monoid as canonical representatives, if it is
    /// finite and closes within `cap` elements.
    pub fn enumerate_elements(&self, cap: usize, budget: u64) -> Option<Vec<MonoidElement>> {
        let mut reps: BTreeSet<MonoidElement> = BTreeSet::new();
        let id = self.canonical_form(&self.identity(), budget);
        reps.insert(id.clone());
        let mut frontier = vec![id];
        while let Some(x) = frontier.pop() {
            for i in 0..self.generator_count() {
                let y = self.multiply(&x, &self.generator(i)).ok()?;
                let y = self.canonical_form(&y, budget);
                if reps.insert(y.clone()) {
                    if reps.len() > cap {
                        return None;
                    }
                    frontier.push(y);
                }
            }
        }
        Some(reps.into_iter().collect())
    }

    /// Format an element as a word in the generator names.
    pub fn format_element(&self, a: &MonoidElement) -> String {
        if a.is_identity() {
            return "1".to_string();
        }
        let parts: Vec<String> = a
            .support()
            .map(|i| {
                let e = a.exponents()[i];
                if e == 1 {
                    self.generators[i].clone()
                } else {
                    format!("{}^{}", self.generators[i], e)
                }
            })
            .collect();
        parts.join("*")
    }
}

#[derive(Debug, Clone)]
pub struct UnitsReport {
    pub units: BTreeSet<usize>,
    pub definitive: bool,
}

/// A right (= two-sided, here) ideal given by a finite generating set; the
/// ideal is the union of the `g * M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ideal {
    pub generators: Vec<MonoidElement>,
}

impl Ideal {
    pub fn new(generators: Vec<MonoidElement>) -> Self {
        Ideal { generators }
    }
}

/// A localization S^-1 M realized as a presentation extension: one formal
/// inverse generator per inverted element that is not already a unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizedMonoid {
    base: MonoidPresentation,
    inverted: Vec<MonoidElement>,
    presentation: MonoidPresentation,
    /// index of the formal-inverse generator per inverted element;
    /// `None` when the element was already invertible.
    inverse_gens: Vec<Option<usize>>,
}

impl LocalizedMonoid {
    /// Invert the listed elements of `base`.
    pub fn new(base: &MonoidPresentation, inverted: &[MonoidElement], budget: u64) -> Result<Self> {
        let mut gens = base.generator_names().to_vec();
        let mut inverse_gens = Vec::new();
        let mut pending: Vec<(usize, MonoidElement)> = Vec::new();
        let mut seen: HashMap<MonoidElement, usize> = HashMap::new();
        for f in inverted {
            base.check_element(f)?;
            if base.is_unit(f, budget).is_equal() {
                inverse_gens.push(None);
                continue;
            }
            if let Some(&idx) = seen.get(f) {
                inverse_gens.push(Some(idx));
                continue;
            }
            let idx = gens.len();
            let name = format!("{}^-1", base.format_element(f));
            gens.push(name);
            seen.insert(f.clone(), idx);
            inverse_gens.push(Some(idx));
            pending.push((idx, f.clone()));
        }
        let total = gens.len();
        let pad = |e: &MonoidElement| -> MonoidElement {
            let mut v = e.exponents().to_vec();
            v.resize(total, 0);
            MonoidElement::new(v)
        };
        let mut relations: Vec<(MonoidElement, MonoidElement)> = base
            .relations()
            .iter()
            .map(|(u, v)| (pad(u), pad(v)))
            .collect();
        for (idx, f) in &pending {
            let mut w = pad(f);
            let mut exps = w.exponents().to_vec();
            exps[*idx] += 1;
            w = MonoidElement::new(exps);
            relations.push((w, MonoidElement::identity(total)));
        }
        let presentation = MonoidPresentation::new(gens, relations)?;
        Ok(LocalizedMonoid {
            base: base.clone(),
            inverted: inverted.to_vec(),
            presentation,
            inverse_gens,
        })
    }

    /// Localize at the generators with the given indices.
    pub fn at_generators(
        base: &MonoidPresentation,
        indices: &BTreeSet<usize>,
        budget: u64,
    ) -> Result<Self> {
        let elems: Vec<MonoidElement> = indices
            .iter()
            .map(|&i| base.generator(i))
            .collect();
        LocalizedMonoid::new(base, &elems, budget)
    }

    pub fn base(&self) -> &MonoidPresentation {
        &self.base
    }

    pub fn inverted(&self) -> &[MonoidElement] {
        &self.inverted
    }

    pub fn presentation(&self) -> &MonoidPresentation {
        &self.presentation
    }

    /// Index of the formal inverse of the `i`-th inverted element, if one
    /// was added.
    pub fn inverse_gen(&self, i: usize) -> Option<usize> {
        self.inverse_gens[i]
    }

    /// Image of a base element in the localized presentation.
    pub fn embed(&self, a: &MonoidElement) -> MonoidElement {
        let mut v = a.exponents().to_vec();
        v.resize(self.presentation.generator_count(), 0);
        MonoidElement::new(v)
    }

    /// The fraction m / prod(inverted[i]^powers[i]).
    pub fn fraction(&self, m: &MonoidElement, powers: &[u32]) -> MonoidElement {
        assert_eq!(powers.len(), self.inverted.len());
        let mut v = self.embed(m).exponents().to_vec();
        for (i, &p) in powers.iter().enumerate() {
            if p == 0 {
                continue;
            }
            match self.inverse_gens[i] {
                Some(idx) => v[idx] += p,
                None => {
                    // element was already a unit; nothing to divide formally
                    // (its inverse exists among base words, so fraction
                    // equality is still decided by the oracle). We multiply
                    // by nothing here, which is only correct for genuinely
                    // invertible elements: m/u = m * u^-1, and the oracle
                    // sees u as a unit.
                }
            }
        }
        MonoidElement::new(v)
    }

    /// Fraction equality m1/s1 = m2/s2 via the oracle on the extended
    /// presentation.
    pub fn fractions_equal(
        &self,
        m1: &MonoidElement,
        s1: &[u32],
        m2: &MonoidElement,
        s2: &[u32],
        budget: u64,
    ) -> Result<EqualityVerdict> {
        let a = self.fraction(m1, s1);
        let b = self.fraction(m2, s2);
        self.presentation.are_equal(&a, &b, budget)
    }
}
