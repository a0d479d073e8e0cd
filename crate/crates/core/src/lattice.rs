//! Finite-dimensional Riesz space primitives.
//!
//! The ambient space is `Q^n` with the componentwise order. It is Dedekind
//! complete, has the weak order unit `e = (1, ..., 1)`, and is an f-algebra
//! under the componentwise product with algebraic unit `e`. Components of `e`
//! are 0/1 vectors, represented by [`ComponentMask`], and double as band
//! projections acting by multiplication.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Upper bound on the number of atoms [`PartitionAlgebra::members`] will
/// enumerate unless told otherwise.
pub const DEFAULT_ENUMERATION_BOUND: usize = 20;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A point of `Q^n`.
///
/// The arithmetic operators act componentwise and panic on a dimension
/// mismatch; the `checked_*` methods report it as an error instead.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RieszElement {
    coords: Vec<Rational>,
}

impl RieszElement {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self { coords }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| rational::int(v)).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![Rational::zero(); n])
    }

    /// The weak order unit `e`.
    pub fn unit(n: usize) -> Self {
        Self::new(vec![Rational::one(); n])
    }

    pub fn constant(n: usize, value: Rational) -> Self {
        Self::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.coords
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        Self::new(self.coords.iter().map(f).collect())
    }

    pub fn sup(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| if a >= b { a.clone() } else { b.clone() })
    }

    pub fn inf(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| if a <= b { a.clone() } else { b.clone() })
    }

    /// `(a ∨ b, a ∧ b)`.
    pub fn sup_inf(&self, other: &Self) -> Result<(Self, Self)> {
        check_dim(self.dim(), other.dim())?;
        Ok((self.sup(other), self.inf(other)))
    }

    /// Positive part `a⁺ = a ∨ 0`.
    pub fn pos(&self) -> Self {
        self.map(|a| {
            if a.is_positive() {
                a.clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Negative part `a⁻ = (-a) ∨ 0`.
    pub fn neg_part(&self) -> Self {
        self.map(|a| {
            if a.is_negative() {
                -a
            } else {
                Rational::zero()
            }
        })
    }

    pub fn abs(&self) -> Self {
        self.map(|a| a.abs())
    }

    /// `(a⁺, a⁻, |a|)`.
    pub fn pos_neg_abs(&self) -> (Self, Self, Self) {
        (self.pos(), self.neg_part(), self.abs())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(self * other)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|a| a * c)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.coords.iter().all(|a| !a.is_negative())
    }

    pub fn is_nonpos(&self) -> bool {
        self.coords.iter().all(|a| !a.is_positive())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    /// First coordinate where `self <= other` fails.
    pub fn le_witness(&self, other: &Self) -> Option<usize> {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords
            .iter()
            .zip(&other.coords)
            .position(|(a, b)| a > b)
    }

    pub fn max_abs(&self) -> Rational {
        rational::max_abs(&self.coords)
    }

    /// Band projection onto the band generated by `self`, as a component of `e`.
    pub fn band_mask(&self) -> ComponentMask {
        ComponentMask::from_fn(self.dim(), |i| !self.coords[i].is_zero())
    }

    /// Coordinates rendered as `num/den` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(rational::format).collect()
    }
}

impl fmt::Display for RieszElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &RieszElement {
    type Output = RieszElement;
    fn add(self, rhs: Self) -> RieszElement {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &RieszElement {
    type Output = RieszElement;
    fn sub(self, rhs: Self) -> RieszElement {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &RieszElement {
    type Output = RieszElement;
    fn mul(self, rhs: Self) -> RieszElement {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &RieszElement {
    type Output = RieszElement;
    fn neg(self) -> RieszElement {
        self.map(|a| -a)
    }
}

/// A component of `e`: a 0/1 vector stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentMask {
    len: usize,
    words: Vec<u64>,
}

impl ComponentMask {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        Self::from_fn(len, |_| true)
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut m = Self::empty(len);
        for i in 0..len {
            if f(i) {
                m.insert(i);
            }
        }
        m
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(len);
        for i in indices {
            m.insert(i);
        }
        m
    }

    /// Parses a bit string, index 0 leftmost.
    pub fn from_bits(bits: &str) -> Option<Self> {
        let chars: Vec<char> = bits.chars().collect();
        if chars.iter().any(|c| *c != '0' && *c != '1') {
            return None;
        }
        Some(Self::from_fn(chars.len(), |i| chars[i] == '1'))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(
            i < self.len,
            "index {i} out of range for mask of length {}",
            self.len
        );
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    fn zip_words(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "mask length mismatch");
        Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// `p ∧ q`, which is also the product `pq`.
    pub fn meet(&self, other: &Self) -> Self {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn join(&self, other: &Self) -> Self {
        self.zip_words(other, |a, b| a | b)
    }

    /// `p - q` for `q` arbitrary, i.e. `p(e - q)`.
    pub fn difference(&self, other: &Self) -> Self {
        self.zip_words(other, |a, b| a & !b)
    }

    /// `e - p`.
    pub fn complement(&self) -> Self {
        let mut m = Self::full(self.len);
        for (w, s) in m.words.iter_mut().zip(&self.words) {
            *w &= !s;
        }
        m
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "mask length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn op(&self, other: &Self, kind: MaskOp) -> Result<Self> {
        check_dim(self.len, other.len)?;
        Ok(match kind {
            MaskOp::Meet => self.meet(other),
            MaskOp::Join => self.join(other),
            MaskOp::Complement => self.complement(),
        })
    }

    pub fn to_element(&self) -> RieszElement {
        RieszElement::new(
            (0..self.len)
                .map(|i| {
                    if self.contains(i) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        )
    }

    /// Applies the band projection: `p·f`.
    pub fn project(&self, f: &RieszElement) -> RieszElement {
        assert_eq!(self.len, f.dim(), "dimension mismatch");
        RieszElement::new(
            f.coords()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if self.contains(i) {
                        c.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        )
    }
}

impl fmt::Display for ComponentMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskOp {
    Meet,
    Join,
    /// Complement of the first operand; the second only fixes the dimension.
    Complement,
}

/// A Boolean subalgebra of the components of `e`, given by its atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionAlgebra {
    dim: usize,
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
}

impl PartitionAlgebra {
    /// Validates that `atoms` are nonempty, pairwise disjoint and cover `0..dim`.
    pub fn new(dim: usize, atoms: Vec<Vec<usize>>) -> Result<Self> {
        let mut atom_of = vec![usize::MAX; dim];
        for (a, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(Error::InvalidPartition(format!("atom {a} is empty")));
            }
            for &i in atom {
                if i >= dim {
                    return Err(Error::InvalidPartition(format!(
                        "atom {a} contains index {i} outside 0..{dim}"
                    )));
                }
                if atom_of[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} appears in atoms {} and {a}",
                        atom_of[i]
                    )));
                }
                atom_of[i] = a;
            }
        }
        if let Some(i) = atom_of.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidPartition(format!("index {i} is not covered")));
        }
        let atoms = atoms
            .into_iter()
            .map(|mut a| {
                a.sort_unstable();
                a
            })
            .collect();
        Ok(Self {
            dim,
            atoms,
            atom_of,
        })
    }

    /// The full algebra of components: singleton atoms.
    pub fn discrete(dim: usize) -> Self {
        Self::new(dim, (0..dim).map(|i| vec![i]).collect()).expect("singletons partition")
    }

    /// The trivial algebra `{0, e}`.
    pub fn trivial(dim: usize) -> Self {
        Self::new(dim, vec![(0..dim).collect()]).expect("one block partitions")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Index of the atom containing coordinate `i`.
    pub fn atom_of(&self, i: usize) -> usize {
        self.atom_of[i]
    }

    pub fn atom_mask(&self, a: usize) -> ComponentMask {
        ComponentMask::from_indices(self.dim, self.atoms[a].iter().copied())
    }

    /// Membership: `p` is a union of atoms.
    pub fn contains(&self, p: &ComponentMask) -> bool {
        p.len() == self.dim
            && self.atoms.iter().all(|atom| {
                let first = p.contains(atom[0]);
                atom.iter().all(|&i| p.contains(i) == first)
            })
    }

    /// Indices of the atoms below `p`; `p` must be a member.
    pub fn atoms_in(&self, p: &ComponentMask) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&a| p.contains(self.atoms[a][0]))
            .collect()
    }

    /// Union of the atoms selected by `selected`.
    pub fn union_of(&self, selected: impl IntoIterator<Item = usize>) -> ComponentMask {
        let mut m = ComponentMask::empty(self.dim);
        for a in selected {
            for &i in &self.atoms[a] {
                m.insert(i);
            }
        }
        m
    }

    /// Member whose atom-inclusion vector, read with atom 0 as the most
    /// significant bit, is `code`.
    pub fn member_from_code(&self, code: u64) -> ComponentMask {
        let k = self.atoms.len();
        self.union_of((0..k).filter(|&a| code >> (k - 1 - a) & 1 == 1))
    }

    /// All `2^k` members in lexicographic order of their atom-inclusion vectors.
    pub fn members(&self, bound: usize) -> Result<Vec<ComponentMask>> {
        let k = self.atoms.len();
        if k > bound || k >= 64 {
            return Err(Error::OracleBoundExceeded { atoms: k, bound });
        }
        Ok((0..1u64 << k)
            .map(|code| self.member_from_code(code))
            .collect())
    }

    /// True iff every atom of `self` lies inside a single atom of `coarser`.
    pub fn refines(&self, coarser: &PartitionAlgebra) -> bool {
        self.dim == coarser.dim
            && self.atoms.iter().all(|atom| {
                let block = coarser.atom_of(atom[0]);
                atom.iter().all(|&i| coarser.atom_of(i) == block)
            })
    }

    /// Index of the `coarser` atom enclosing each atom of `self`.
    pub fn enclosing_blocks(&self, coarser: &PartitionAlgebra) -> Result<Vec<usize>> {
        check_dim(coarser.dim, self.dim)?;
        self.atoms
            .iter()
            .enumerate()
            .map(|(a, atom)| {
                let block = coarser.atom_of(atom[0]);
                if atom.iter().all(|&i| coarser.atom_of(i) == block) {
                    Ok(block)
                } else {
                    Err(Error::NotRefinement { atom: a })
                }
            })
            .collect()
    }
}
