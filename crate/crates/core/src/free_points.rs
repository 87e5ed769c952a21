//! Points of the topos of M-sets for free commutative monoids on finite or
//! countable bases, described by integer-or-minus-infinity valued functions
//! on the basis with a finitely describable tail. Includes the subset map
//! gamma, the submodules A(f) of the universal group, and hidden-point
//! detection.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::UnionFind;

#[derive(Debug, Error)]
pub enum SigmaError {
    #[error("functions are over different bases")]
    BasisMismatch,
    #[error("invalid tail: {0}")]
    InvalidTail(String),
    #[error("index {0} out of range for a finite basis of size {1}")]
    IndexOutOfRange(usize, usize),
    #[error("window results disagree between w={0} and w={1}")]
    Unstable(u32, u32),
}

pub type Result<T> = std::result::Result<T, SigmaError>;

/// An integer extended with minus infinity; addition is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtInt {
    NegInf,
    Int(i64),
}

impl ExtInt {
    pub fn add(self, other: ExtInt) -> ExtInt {
        match (self, other) {
            (ExtInt::Int(a), ExtInt::Int(b)) => ExtInt::Int(a + b),
            _ => ExtInt::NegInf,
        }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, ExtInt::NegInf)
    }

    /// v >= self, where v is an ordinary integer.
    pub fn at_most(&self, v: i64) -> bool {
        match self {
            ExtInt::NegInf => true,
            ExtInt::Int(c) => *c <= v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Finite(Vec<String>),
    Countable,
}

impl Basis {
    pub fn size(&self) -> Option<usize> {
        match self {
            Basis::Finite(v) => Some(v.len()),
            Basis::Countable => None,
        }
    }
}

/// Eventual behavior beyond the exception set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    Const(ExtInt),
    /// value at index n is a*n + b, with a < 0
    Affine { a: i64, b: i64 },
}

impl Tail {
    pub fn eval(&self, n: usize) -> ExtInt {
        match self {
            Tail::Const(c) => *c,
            Tail::Affine { a, b } => ExtInt::Int(a * n as i64 + b),
        }
    }
}

/// A function basis -> Z u {-inf} that is positive at only finitely many
/// indices, stored as finite exceptions over a describable tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaFunction {
    basis: Basis,
    exceptions: BTreeMap<usize, ExtInt>,
    tail: Tail,
}

impl SigmaFunction {
    pub fn new(basis: Basis, exceptions: BTreeMap<usize, ExtInt>, tail: Tail) -> Result<Self> {
        match tail {
            Tail::Const(ExtInt::Int(c)) if c > 0 => {
                return Err(SigmaError::InvalidTail(format!(
                    "constant tail {} is positive",
                    c
                )))
            }
            Tail::Affine { a, .. } if a >= 0 => {
                return Err(SigmaError::InvalidTail(format!(
                    "affine tail slope {} is not negative",
                    a
                )))
            }
            _ => {}
        }
        let mut f = SigmaFunction {
            basis,
            exceptions,
            tail,
        };
        if let Basis::Finite(names) = &f.basis {
            let n = names.len();
            if let Some(&k) = f.exceptions.keys().find(|&&k| k >= n) {
                return Err(SigmaError::IndexOutOfRange(k, n));
            }
            // finite bases keep everything in the exception map
            for i in 0..n {
                let v = f.tail.eval(i);
                f.exceptions.entry(i).or_insert(v);
            }
            f.tail = Tail::Const(ExtInt::Int(0));
        }
        Ok(f)
    }

    /// The all-zero function (the unit of the addition).
    pub fn zero(basis: Basis) -> Self {
        SigmaFunction::new(basis, BTreeMap::new(), Tail::Const(ExtInt::Int(0)))
            .expect("zero tail is valid")
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn exceptions(&self) -> &BTreeMap<usize, ExtInt> {
        &self.exceptions
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn eval(&self, p: usize) -> ExtInt {
        match self.exceptions.get(&p) {
            Some(v) => *v,
            None => self.tail.eval(p),
        }
    }

    /// Indices where the tail (not overridden by an exception) is positive:
    /// only an affine tail with positive intercept contributes, finitely.
    fn positive_tail_indices(&self) -> Vec<usize> {
        match self.tail {
            Tail::Const(_) => Vec::new(),
            Tail::Affine { a, b } => {
                let mut out = Vec::new();
                let mut n = 0usize;
                while a * n as i64 + b > 0 {
                    if !self.exceptions.contains_key(&n) {
                        out.push(n);
                    }
                    n += 1;
                }
                out
            }
        }
    }
}

/// Canonical data determining the equivalence class: the exact -inf locus
/// and the eventual integer behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ClassKey {
    basis: Basis,
    /// exceptional -inf indices where the tail is finite, or exceptional
    /// finite indices where the tail is -inf
    locus_exceptions: BTreeSet<usize>,
    tail: Tail,
}

fn class_key(f: &SigmaFunction) -> ClassKey {
    let tail_inf = matches!(f.tail, Tail::Const(ExtInt::NegInf));
    let locus_exceptions = f
        .exceptions
        .iter()
        .filter(|(_, v)| v.is_neg_inf() != tail_inf)
        .map(|(&k, _)| k)
        .collect();
    // two finite tails are eventually equal only if identical; normalize
    // nothing else
    ClassKey {
        basis: f.basis.clone(),
        locus_exceptions,
        tail: match f.basis {
            // on a finite basis only the -inf locus matters
            Basis::Finite(_) => Tail::Const(ExtInt::Int(0)),
            Basis::Countable => f.tail,
        },
    }
}

/// Same -inf locus exactly, and equal values at all but finitely many
/// indices.
pub fn equivalent(f: &SigmaFunction, g: &SigmaFunction) -> Result<bool> {
    if f.basis != g.basis {
        return Err(SigmaError::BasisMismatch);
    }
    Ok(class_key(f) == class_key(g))
}

/// An equivalence class, held by a canonical representative: integer
/// exceptions agreeing with the tail pattern are dropped, surviving finite
/// values over a -inf tail are set to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaClass {
    rep: SigmaFunction,
}

impl SigmaClass {
    pub fn of(f: &SigmaFunction) -> SigmaClass {
        let tail_inf = matches!(f.tail, Tail::Const(ExtInt::NegInf));
        let mut exceptions = BTreeMap::new();
        for (&k, &v) in &f.exceptions {
            if v.is_neg_inf() == tail_inf {
                continue;
            }
            let norm = if v.is_neg_inf() {
                ExtInt::NegInf
            } else {
                ExtInt::Int(0)
            };
            exceptions.insert(k, norm);
        }
        let basis = f.basis.clone();
        let tail = f.tail;
        let rep = match &basis {
            Basis::Finite(_) => {
                SigmaFunction::new(basis, exceptions, Tail::Const(ExtInt::Int(0))).expect("valid")
            }
            Basis::Countable => SigmaFunction::new(basis, exceptions, tail).expect("valid"),
        };
        SigmaClass { rep }
    }

    pub fn representative(&self) -> &SigmaFunction {
        &self.rep
    }
}

/// Pointwise sum, with -inf absorbing.
pub fn add(f: &SigmaFunction, g: &SigmaFunction) -> Result<SigmaFunction> {
    if f.basis != g.basis {
        return Err(SigmaError::BasisMismatch);
    }
    let tail = match (f.tail, g.tail) {
        (Tail::Const(ExtInt::NegInf), _) | (_, Tail::Const(ExtInt::NegInf)) => {
            Tail::Const(ExtInt::NegInf)
        }
        (Tail::Const(ExtInt::Int(c)), Tail::Const(ExtInt::Int(d))) => {
            Tail::Const(ExtInt::Int(c + d))
        }
        (Tail::Const(ExtInt::Int(c)), Tail::Affine { a, b })
        | (Tail::Affine { a, b }, Tail::Const(ExtInt::Int(c))) => Tail::Affine { a, b: b + c },
        (Tail::Affine { a: a1, b: b1 }, Tail::Affine { a: a2, b: b2 }) => Tail::Affine {
            a: a1 + a2,
            b: b1 + b2,
        },
    };
    let mut exceptions = BTreeMap::new();
    let keys: BTreeSet<usize> = f
        .exceptions
        .keys()
        .chain(g.exceptions.keys())
        .copied()
        .collect();
    for k in keys {
        exceptions.insert(k, f.eval(k).add(g.eval(k)));
    }
    SigmaFunction::new(f.basis.clone(), exceptions, tail)
}

/// A finite-support integer vector: an element of the universal group of
/// the free monoid on the basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct LaurentElement {
    coords: BTreeMap<usize, i64>,
}

impl LaurentElement {
    pub fn new(coords: BTreeMap<usize, i64>) -> Self {
        let coords = coords.into_iter().filter(|(_, v)| *v != 0).collect();
        LaurentElement { coords }
    }

    pub fn identity() -> Self {
        LaurentElement::default()
    }

    pub fn valuation(&self, p: usize) -> i64 {
        self.coords.get(&p).copied().unwrap_or(0)
    }

    pub fn coords(&self) -> &BTreeMap<usize, i64> {
        &self.coords
    }

    pub fn add(&self, other: &LaurentElement) -> LaurentElement {
        let mut coords = self.coords.clone();
        for (&k, &v) in &other.coords {
            *coords.entry(k).or_insert(0) += v;
        }
        LaurentElement::new(coords)
    }

    pub fn shift(&self, p: usize, delta: i64) -> LaurentElement {
        let mut coords = self.coords.clone();
        *coords.entry(p).or_insert(0) += delta;
        LaurentElement::new(coords)
    }
}

/// Membership in A(f): every coordinate at least f there. Finitely checkable
/// since x has finite support, f has finitely many exceptions, and the tail
/// is positive at finitely many indices.
pub fn member(x: &LaurentElement, f: &SigmaFunction) -> Result<bool> {
    if let Basis::Finite(names) = &f.basis {
        if let Some((&k, _)) = x.coords.iter().find(|(&k, _)| k >= names.len()) {
            return Err(SigmaError::IndexOutOfRange(k, names.len()));
        }
    }
    let mut indices: BTreeSet<usize> = x.coords.keys().copied().collect();
    indices.extend(f.exceptions.keys().copied());
    indices.extend(f.positive_tail_indices());
    Ok(indices.into_iter().all(|p| f.eval(p).at_most(x.valuation(p))))
}

/// A finitely describable subset of the basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetDesc {
    Finite(BTreeSet<usize>),
    /// all indices except the listed ones
    Cofinite(BTreeSet<usize>),
}

/// gamma(T): zero on T, -inf off T.
pub fn gamma_of_subset(basis: Basis, t: &SubsetDesc) -> Result<SigmaClass> {
    let f = match t {
        SubsetDesc::Finite(inside) => {
            let exceptions = inside.iter().map(|&k| (k, ExtInt::Int(0))).collect();
            SigmaFunction::new(basis, exceptions, Tail::Const(ExtInt::NegInf))?
        }
        SubsetDesc::Cofinite(excluded) => {
            let exceptions = excluded.iter().map(|&k| (k, ExtInt::NegInf)).collect();
            SigmaFunction::new(basis, exceptions, Tail::Const(ExtInt::Int(0)))?
        }
    };
    Ok(SigmaClass::of(&f))
}

/// A class is hidden when no representative takes values in {0, -inf}
/// only: exactly when the eventual behavior is a strictly negative integer
/// at infinitely many indices.
pub fn is_hidden(c: &SigmaClass) -> bool {
    let f = c.representative();
    match f.basis {
        Basis::Finite(_) => false,
        Basis::Countable => match f.tail {
            Tail::Affine { .. } => true,
            Tail::Const(ExtInt::Int(v)) => v < 0,
            Tail::Const(ExtInt::NegInf) => false,
        },
    }
}

/// Multiplier b with x -> x + b carrying A(f) onto A(g), for equivalent f
/// and g: b differs from zero only where the two finite values differ.
pub fn iso_multiplier(f: &SigmaFunction, g: &SigmaFunction) -> Result<Option<LaurentElement>> {
    if !equivalent(f, g)? {
        return Ok(None);
    }
    let mut coords = BTreeMap::new();
    let keys: BTreeSet<usize> = f
        .exceptions
        .keys()
        .chain(g.exceptions.keys())
        .copied()
        .collect();
    for k in keys {
        if let (ExtInt::Int(a), ExtInt::Int(b)) = (f.eval(k), g.eval(k)) {
            coords.insert(k, b - a);
        }
    }
    Ok(Some(LaurentElement::new(coords)))
}

/// Elements of A(f) with all coordinates in [max(f(p), -w), w] and support
/// inside the first `dim` indices.
fn window_carrier(f: &SigmaFunction, dim: usize, w: u32) -> Vec<LaurentElement> {
    let w = w as i64;
    let lo: Vec<i64> = (0..dim)
        .map(|p| match f.eval(p) {
            ExtInt::NegInf => -w,
            ExtInt::Int(c) => c.max(-w),
        })
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = lo.clone();
    if cur.iter().any(|&l| l > w) {
        return out;
    }
    loop {
        let coords: BTreeMap<usize, i64> = cur
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i, v))
            .collect();
        out.push(LaurentElement::new(coords));
        let mut i = 0;
        loop {
            if i == dim {
                return out;
            }
            if cur[i] < w {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

fn tensor_truncation_once(f: &SigmaFunction, g: &SigmaFunction, dim: usize, w: u32) -> bool {
    let h = match add(f, g) {
        Ok(h) => h,
        Err(_) => return false,
    };
    let ca = window_carrier(f, dim, w);
    let cb = window_carrier(g, dim, w);
    let index_a: HashMap<&LaurentElement, usize> =
        ca.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let index_b: HashMap<&LaurentElement, usize> =
        cb.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let (na, nb) = (ca.len(), cb.len());
    if na == 0 || nb == 0 {
        return false;
    }
    let idx = |i: usize, j: usize| i * nb + j;
    let mut uf = UnionFind::new(na * nb);
    for i in 0..na {
        for j in 0..nb {
            for p in 0..dim {
                let a2 = ca[i].shift(p, 1);
                let b2 = cb[j].shift(p, 1);
                if let (Some(&i2), Some(&j2)) = (index_a.get(&a2), index_b.get(&b2)) {
                    uf.union(idx(i2, j), idx(i, j2));
                }
            }
        }
    }
    // compare classes with the sum carrier on the inner window
    let inner = (w / 2) as i64;
    let in_inner = |x: &LaurentElement, hf: &SigmaFunction| {
        (0..dim).all(|p| {
            let v = x.valuation(p);
            let lo = match hf.eval(p) {
                ExtInt::NegInf => -inner,
                ExtInt::Int(c) => c.max(-inner),
            };
            v >= lo && v <= inner
        })
    };
    let mut class_value: HashMap<usize, LaurentElement> = HashMap::new();
    let mut value_class: HashMap<LaurentElement, usize> = HashMap::new();
    for i in 0..na {
        for j in 0..nb {
            let root = uf.find(idx(i, j));
            let sum = ca[i].add(&cb[j]);
            if let Some(prev) = class_value.get(&root) {
                if *prev != sum {
                    return false;
                }
            } else {
                class_value.insert(root, sum.clone());
            }
            if in_inner(&sum, &h) {
                if let Some(&other) = value_class.get(&sum) {
                    if other != root {
                        return false;
                    }
                } else {
                    value_class.insert(sum, root);
                }
            }
        }
    }
    // surjectivity onto the inner window of A(f+g)
    window_carrier(&h, dim, w / 2)
        .into_iter()
        .filter(|x| in_inner(x, &h))
        .all(|x| value_class.contains_key(&x))
}

/// Windowed check that A(f) tensored with A(g) over the free monoid is
/// A(f+g): the union-find tensor classes on truncated carriers biject with
/// the truncated sum carrier via addition. Run at two consecutive windows;
/// disagreement is reported as instability.
pub fn tensor_truncation_check(f: &SigmaFunction, g: &SigmaFunction, w: u32) -> Result<bool> {
    if f.basis() != g.basis() {
        return Err(SigmaError::BasisMismatch);
    }
    let dim = match f.basis().size() {
        Some(n) => n,
        None => {
            return Err(SigmaError::InvalidTail(
                "truncation checks need a finite basis".into(),
            ))
        }
    };
    let first = tensor_truncation_once(f, g, dim, w);
    let second = tensor_truncation_once(f, g, dim, w + 1);
    if first != second {
        return Err(SigmaError::Unstable(w, w + 1));
    }
    Ok(first)
}

/// Windowed filteredness of A(f): the carrier is nonempty; the monoid
/// action is cancellative so equalizers are trivial; and any two window
/// elements have the coordinatewise minimum as a common ancestor.
pub fn filtered_truncation_check(f: &SigmaFunction, w: u32) -> Result<bool> {
    let dim = match f.basis().size() {
        Some(n) => n,
        None => {
            return Err(SigmaError::InvalidTail(
                "truncation checks need a finite basis".into(),
            ))
        }
    };
    // nonempty: the positive part of f is a member
    let mut coords = BTreeMap::new();
    for (&k, v) in f.exceptions() {
        if let ExtInt::Int(c) = v {
            if *c > 0 {
                coords.insert(k, *c);
            }
        }
    }
    let witness = LaurentElement::new(coords);
    if !member(&witness, f)? {
        return Ok(false);
    }
    let carrier = window_carrier(f, dim, w);
    if carrier.is_empty() {
        return Ok(false);
    }
    for x1 in &carrier {
        for x2 in &carrier {
            let mut coords = BTreeMap::new();
            for p in 0..dim {
                let m = x1.valuation(p).min(x2.valuation(p));
                if m != 0 {
                    coords.insert(p, m);
                }
            }
            let d = LaurentElement::new(coords);
            // d must lie in A(f) and reach both by monoid action
            if !member(&d, f)? {
                return Ok(false);
            }
            for x in [x1, x2] {
                if (0..dim).any(|p| x.valuation(p) < d.valuation(p)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
