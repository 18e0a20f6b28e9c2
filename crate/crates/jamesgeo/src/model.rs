//! Shared vocabulary types: exponents, sparse sequences, coordinate
//! functionals, direct sums, and increasing index tuples.
//!
//! Vectors and functionals are sparse maps in canonical form: an exactly-zero
//! coefficient is never stored, so support-based predicates (`precedes`,
//! block splitting) are unambiguous. All types are immutable values.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("exponent must be finite and satisfy p > 1, got p = {0}")]
    InvalidExponent(f64),
    #[error("{0} must be nonzero: support predicates are undefined for the zero element")]
    ZeroArgument(&'static str),
    #[error("cut positions must be strictly increasing")]
    NonIncreasingCuts,
    #[error("direct sum needs at least one component")]
    EmptyDirectSum,
    #[error("direct sum shapes differ (component count or exponents)")]
    ComponentMismatch,
    #[error("vertex tuple must be nonempty and strictly increasing")]
    BadVertex,
}

/// An exponent `p > 1` together with its conjugate `q = p/(p-1)`.
///
/// `q` is always derived from `p`, never stored, so `1/p + 1/q == 1` holds to
/// machine precision by construction.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent {
    p: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, ModelError> {
        if !p.is_finite() || p <= 1.0 {
            return Err(ModelError::InvalidExponent(p));
        }
        Ok(Exponent { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn q(self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn conjugate(self) -> Exponent {
        Exponent { p: self.q() }
    }
}

impl TryFrom<f64> for Exponent {
    type Error = ModelError;
    fn try_from(p: f64) -> Result<Self, ModelError> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(e: Exponent) -> f64 {
        e.p
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

fn insert_canonical(map: &mut BTreeMap<usize, f64>, idx: usize, value: f64) {
    assert!(value.is_finite(), "non-finite coefficient at index {idx}");
    let slot = map.entry(idx).or_insert(0.0);
    *slot += value;
    if *slot == 0.0 {
        map.remove(&idx);
    }
}

macro_rules! sparse_entries_impl {
    ($ty:ident, $unit:ident) => {
        impl $ty {
            pub fn zero() -> Self {
                Self {
                    entries: BTreeMap::new(),
                }
            }

            /// Basis element at `index` with coefficient 1.
            pub fn $unit(index: usize) -> Self {
                Self::from_entries([(index, 1.0)])
            }

            /// Builds from `(index, coefficient)` pairs; repeated indices are
            /// summed and exact zeros purged, keeping the canonical form.
            pub fn from_entries(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
                let mut entries = BTreeMap::new();
                for (idx, value) in pairs {
                    insert_canonical(&mut entries, idx, value);
                }
                Self { entries }
            }

            pub fn coeff(&self, index: usize) -> f64 {
                self.entries.get(&index).copied().unwrap_or(0.0)
            }

            pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
                self.entries.iter().map(|(&i, &v)| (i, v))
            }

            pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
                self.entries.keys().copied()
            }

            pub fn nnz(&self) -> usize {
                self.entries.len()
            }

            pub fn is_zero(&self) -> bool {
                self.entries.is_empty()
            }

            pub fn min_support(&self) -> Option<usize> {
                self.entries.keys().next().copied()
            }

            pub fn max_support(&self) -> Option<usize> {
                self.entries.keys().next_back().copied()
            }

            pub fn scaled(&self, c: f64) -> Self {
                Self::from_entries(self.entries().map(|(i, v)| (i, c * v)))
            }

            /// Restriction to indices in `[lo, hi]` (inclusive).
            pub fn restricted(&self, lo: usize, hi: usize) -> Self {
                Self {
                    entries: self
                        .entries
                        .range(lo..=hi)
                        .map(|(&i, &v)| (i, v))
                        .collect(),
                }
            }

            /// Keeps indices `<= n` (the basis projection P_n).
            pub fn truncated_above(&self, n: usize) -> Self {
                Self {
                    entries: self.entries.range(..=n).map(|(&i, &v)| (i, v)).collect(),
                }
            }

            /// Keeps indices `> n`.
            pub fn tail_above(&self, n: usize) -> Self {
                Self {
                    entries: self
                        .entries
                        .range(n + 1..)
                        .map(|(&i, &v)| (i, v))
                        .collect(),
                }
            }

            /// Same coefficients shifted down by `by` (support must allow it).
            pub fn shifted_down(&self, by: usize) -> Self {
                Self {
                    entries: self.entries().map(|(i, v)| (i - by, v)).collect(),
                }
            }

            pub fn shifted_up(&self, by: usize) -> Self {
                Self {
                    entries: self.entries().map(|(i, v)| (i + by, v)).collect(),
                }
            }

            pub fn l1(&self) -> f64 {
                self.entries.values().map(|v| v.abs()).sum()
            }

            pub fn linf(&self) -> f64 {
                self.entries
                    .values()
                    .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            }

            fn merge(&self, other: &Self, sign: f64) -> Self {
                let mut entries = self.entries.clone();
                for (i, v) in other.entries() {
                    insert_canonical(&mut entries, i, sign * v);
                }
                Self { entries }
            }
        }

        impl Add<&$ty> for &$ty {
            type Output = $ty;
            fn add(self, other: &$ty) -> $ty {
                self.merge(other, 1.0)
            }
        }

        impl Sub<&$ty> for &$ty {
            type Output = $ty;
            fn sub(self, other: &$ty) -> $ty {
                self.merge(other, -1.0)
            }
        }

        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scaled(-1.0)
            }
        }

        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, c: f64) -> $ty {
                self.scaled(c)
            }
        }
    };
}

/// A finitely supported real sequence: coefficients on the canonical basis
/// `(e_n)`, indexed from 0. The universal carrier for `J_p` elements.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqVector {
    entries: BTreeMap<usize, f64>,
}

sparse_entries_impl!(SeqVector, unit);

/// A finitely supported coefficient sequence on the coordinate functionals
/// `(e_n^*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    entries: BTreeMap<usize, f64>,
}

sparse_entries_impl!(DualFunctional, unit_star);

impl SeqVector {
    /// Reinterprets the coefficients as a functional (formal transpose).
    pub fn as_functional(&self) -> DualFunctional {
        DualFunctional {
            entries: self.entries.clone(),
        }
    }
}

impl DualFunctional {
    /// Pairing `<f, x> = sum f(n) x(n)`.
    pub fn apply(&self, x: &SeqVector) -> f64 {
        self.entries().map(|(i, v)| v * x.coeff(i)).sum()
    }

    /// Reinterprets the coefficients as a primal direction.
    pub fn as_vector(&self) -> SeqVector {
        SeqVector {
            entries: self.entries.clone(),
        }
    }
}

/// Support-ordering access shared by vectors and functionals.
pub trait Supported {
    fn support_bounds(&self) -> Option<(usize, usize)>;
}

impl Supported for SeqVector {
    fn support_bounds(&self) -> Option<(usize, usize)> {
        Some((self.min_support()?, self.max_support()?))
    }
}

impl Supported for DualFunctional {
    fn support_bounds(&self) -> Option<(usize, usize)> {
        Some((self.min_support()?, self.max_support()?))
    }
}

/// `a ≺ b`: the supports are finite, disjoint and consecutive — every index
/// of `a` lies strictly below every index of `b`.
///
/// Undefined (an error) when either argument is zero.
pub fn precedes<T: Supported>(a: &T, b: &T) -> Result<bool, ModelError> {
    let (_, a_max) = a
        .support_bounds()
        .ok_or(ModelError::ZeroArgument("first argument of precedes"))?;
    let (b_min, _) = b
        .support_bounds()
        .ok_or(ModelError::ZeroArgument("second argument of precedes"))?;
    Ok(a_max < b_min)
}

/// Splits `f` at the given strictly increasing cut positions into successive
/// blocks `f_1 ≺ f_2 ≺ ...` whose sum is `f`. A cut at position `c` separates
/// indices `< c` from indices `>= c`. Empty blocks are dropped.
pub fn block_split(f: &DualFunctional, cuts: &[usize]) -> Result<Vec<DualFunctional>, ModelError> {
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModelError::NonIncreasingCuts);
    }
    let mut blocks = Vec::new();
    let mut lo = 0usize;
    for &cut in cuts {
        if cut > lo {
            let block = f.restricted(lo, cut - 1);
            if !block.is_zero() {
                blocks.push(block);
            }
        }
        lo = cut;
    }
    if let Some(max) = f.max_support() {
        if max >= lo {
            let block = f.restricted(lo, max);
            if !block.is_zero() {
                blocks.push(block);
            }
        }
    }
    Ok(blocks)
}

/// An element of a finite direct sum `J_{p_1} ⊕_∞ ... ⊕_∞ J_{p_n}`; the norm
/// is the max over components (see [`crate::dual::direct_sum_norm`]).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectSumVector {
    components: Vec<(Exponent, SeqVector)>,
}

impl DirectSumVector {
    pub fn new(components: Vec<(Exponent, SeqVector)>) -> Result<Self, ModelError> {
        if components.is_empty() {
            return Err(ModelError::EmptyDirectSum);
        }
        Ok(DirectSumVector { components })
    }

    pub fn components(&self) -> &[(Exponent, SeqVector)] {
        &self.components
    }

    /// Componentwise difference; shapes (count and exponents) must match.
    pub fn sub(&self, other: &DirectSumVector) -> Result<DirectSumVector, ModelError> {
        if self.components.len() != other.components.len() {
            return Err(ModelError::ComponentMismatch);
        }
        let mut out = Vec::with_capacity(self.components.len());
        for ((ea, va), (eb, vb)) in self.components.iter().zip(other.components.iter()) {
            if ea.p() != eb.p() {
                return Err(ModelError::ComponentMismatch);
            }
            out.push((*ea, va - vb));
        }
        Ok(DirectSumVector { components: out })
    }
}

/// A vertex of the metric graph `G_k(M)`: a strictly increasing k-tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphVertex {
    indices: Vec<usize>,
}

impl GraphVertex {
    pub fn new(indices: Vec<usize>) -> Result<Self, ModelError> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::BadVertex);
        }
        Ok(GraphVertex { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: nonempty
    }
}

impl fmt::Display for GraphVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_rejects_bad_p() {
        assert!(Exponent::new(1.0).is_err());
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(f64::INFINITY).is_err());
        assert!(Exponent::new(1.0 + 1e-12).is_ok());
    }

    #[test]
    fn conjugate_identity() {
        for p in [1.1, 1.5, 2.0, 3.0, 7.5] {
            let e = Exponent::new(p).unwrap();
            assert!((1.0 / e.p() + 1.0 / e.q() - 1.0).abs() < 1e-15);
            assert!((e.conjugate().conjugate().p() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_form_purges_zeros() {
        let x = SeqVector::from_entries([(0, 1.0), (3, 0.0), (5, 2.0), (5, -2.0)]);
        assert_eq!(x.nnz(), 1);
        assert_eq!(x.coeff(0), 1.0);
        assert_eq!(x.min_support(), Some(0));
        assert_eq!(x.max_support(), Some(0));
    }

    #[test]
    fn precedes_examples() {
        let e1 = SeqVector::unit(1);
        let e2 = SeqVector::unit(2);
        assert!(precedes(&e1, &e2).unwrap());

        let a = &SeqVector::unit(1) + &SeqVector::unit(5);
        let b = SeqVector::unit(3);
        assert!(!precedes(&a, &b).unwrap());

        let e0 = SeqVector::unit(0);
        assert!(!precedes(&e0, &e0.clone()).unwrap());

        assert_eq!(
            precedes(&SeqVector::zero(), &e1),
            Err(ModelError::ZeroArgument("first argument of precedes"))
        );
    }

    #[test]
    fn block_split_examples() {
        let f = &DualFunctional::unit_star(0) + &DualFunctional::unit_star(3);
        let blocks = block_split(&f, &[2]).unwrap();
        assert_eq!(blocks, vec![DualFunctional::unit_star(0), DualFunctional::unit_star(3)]);

        let g = DualFunctional::unit_star(1);
        assert_eq!(block_split(&g, &[]).unwrap(), vec![g.clone()]);

        // partition identity on a denser functional, with an empty block dropped
        let f = DualFunctional::from_entries([(0, 1.0), (1, -2.0), (4, 0.5), (7, 3.0)]);
        let blocks = block_split(&f, &[1, 3, 6, 7]).unwrap();
        let mut sum = DualFunctional::zero();
        for b in &blocks {
            sum = &sum + b;
        }
        assert_eq!(sum, f);
        for w in blocks.windows(2) {
            assert!(precedes(&w[0], &w[1]).unwrap());
        }

        assert_eq!(block_split(&f, &[3, 3]), Err(ModelError::NonIncreasingCuts));
    }

    #[test]
    fn direct_sum_shape_checks() {
        let e2 = Exponent::new(2.0).unwrap();
        let e4 = Exponent::new(4.0).unwrap();
        assert_eq!(DirectSumVector::new(vec![]), Err(ModelError::EmptyDirectSum));
        let a = DirectSumVector::new(vec![(e2, SeqVector::unit(1)), (e4, SeqVector::zero())]).unwrap();
        let b = DirectSumVector::new(vec![(e2, SeqVector::unit(2))]).unwrap();
        assert_eq!(a.sub(&b), Err(ModelError::ComponentMismatch));
    }

    #[test]
    fn vertex_validation() {
        assert!(GraphVertex::new(vec![1, 3, 7]).is_ok());
        assert_eq!(GraphVertex::new(vec![]), Err(ModelError::BadVertex));
        assert_eq!(GraphVertex::new(vec![2, 2]), Err(ModelError::BadVertex));
        assert_eq!(GraphVertex::new(vec![3, 1]), Err(ModelError::BadVertex));
    }

    #[test]
    fn functional_pairing() {
        let f = DualFunctional::from_entries([(1, 2.0), (4, -1.0)]);
        let x = SeqVector::from_entries([(1, 0.5), (4, 3.0), (9, 10.0)]);
        assert_eq!(f.apply(&x), 2.0 * 0.5 - 3.0);
    }
}
