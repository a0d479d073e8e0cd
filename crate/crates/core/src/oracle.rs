//! Exhaustive checks over every member of a partition algebra.
//!
//! Nothing here calls the decomposition algorithms; `ψ` is tabulated on all
//! `2^k` members by additivity over atoms and every quantifier is evaluated
//! by enumeration.

use crate::error::{Error, Result};
use crate::hahn_jordan::ComponentCharge;
use crate::lattice::{ComponentMask, RieszElement};
use crate::rational::Rational;

/// `ψ` tabulated on every member; member `m` is addressed by its atom bitset
/// (bit `a` set iff atom `a` lies below `m`).
pub struct ChargeTable<'a> {
    charge: &'a ComponentCharge,
    k: usize,
    values: Vec<Vec<Rational>>,
    nonneg: Vec<bool>,
    nonpos: Vec<bool>,
}

fn submasks(m: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let s = next?;
        next = if s == 0 { None } else { Some((s - 1) & m) };
        Some(s)
    })
}

impl<'a> ChargeTable<'a> {
    pub fn build(charge: &'a ComponentCharge, bound: usize) -> Result<Self> {
        let k = charge.algebra().num_atoms();
        if k > bound || k >= 32 {
            return Err(Error::OracleBoundExceeded { atoms: k, bound });
        }
        let size = 1usize << k;
        let blocks = charge.g_partition().num_atoms();
        let mut values: Vec<Vec<Rational>> = Vec::with_capacity(size);
        values.push(vec![Rational::default(); blocks]);
        for m in 1..size {
            let low = m.trailing_zeros() as usize;
            let mut v = values[m & (m - 1)].clone();
            v[charge.block_of_atom(low)] += &charge.atom_values()[low];
            values.push(v);
        }
        let zero = Rational::default();
        let nonneg = values
            .iter()
            .map(|v| v.iter().all(|c| c >= &zero))
            .collect();
        let nonpos = values
            .iter()
            .map(|v| v.iter().all(|c| c <= &zero))
            .collect();
        Ok(Self {
            charge,
            k,
            values,
            nonneg,
            nonpos,
        })
    }

    pub fn num_atoms(&self) -> usize {
        self.k
    }

    pub fn bits_of(&self, p: &ComponentMask) -> u64 {
        self.charge
            .algebra()
            .atoms_in(p)
            .into_iter()
            .fold(0, |acc, a| acc | 1 << a)
    }

    pub fn mask_of(&self, bits: u64) -> ComponentMask {
        self.charge
            .algebra()
            .union_of((0..self.k).filter(|a| bits >> a & 1 == 1))
    }

    fn expand(&self, per_block: &[Rational]) -> RieszElement {
        let g = self.charge.g_partition();
        RieszElement::new(
            (0..g.dim())
                .map(|i| per_block[g.atom_of(i)].clone())
                .collect(),
        )
    }

    /// Tabulated `ψ(p)`.
    pub fn value(&self, p: &ComponentMask) -> RieszElement {
        self.expand(&self.values[self.bits_of(p) as usize])
    }

    /// Supremum of `ψ(p)` over every member `p ≤ q`, by enumeration.
    pub fn exhaustive_alpha(&self, q: &ComponentMask) -> RieszElement {
        let mut best = self.values[0].clone();
        for s in submasks(self.bits_of(q)) {
            for (b, v) in best.iter_mut().zip(&self.values[s as usize]) {
                if v > b {
                    *b = v.clone();
                }
            }
        }
        self.expand(&best)
    }

    /// Per-block `ψ` of the member with atom bitset `bits`.
    pub fn block_values(&self, bits: u64) -> &[Rational] {
        &self.values[bits as usize]
    }

    /// Exhaustive `α` for every member at once, indexed by atom bitset:
    /// `best[q] = max(ψ(q), max_a best[q - a])`, which is the supremum over
    /// all submasks.
    pub fn exhaustive_alpha_all(&self) -> Vec<RieszElement> {
        self.exhaustive_alpha_blocks()
            .iter()
            .map(|v| self.expand(v))
            .collect()
    }

    /// As [`Self::exhaustive_alpha_all`], one value per `G`-block.
    pub fn exhaustive_alpha_blocks(&self) -> Vec<Vec<Rational>> {
        let mut best: Vec<Vec<Rational>> = self.values.clone();
        for q in 1..best.len() {
            for a in 0..self.k {
                if q >> a & 1 == 1 {
                    let (lo, hi) = best.split_at_mut(q);
                    for (b, v) in hi[0].iter_mut().zip(&lo[q & !(1 << a)]) {
                        if v > b {
                            *b = v.clone();
                        }
                    }
                }
            }
        }
        best
    }

    /// Every member `r ≤ v` has `ψ(r) ≤ 0`.
    pub fn is_strongly_negative(&self, v: &ComponentMask) -> bool {
        submasks(self.bits_of(v)).all(|s| self.nonpos[s as usize])
    }

    /// Every member `r ≤ q` has `ψ(r) ≥ 0`.
    pub fn is_strongly_positive(&self, q: &ComponentMask) -> bool {
        submasks(self.bits_of(q)).all(|s| self.nonneg[s as usize])
    }

    /// The first member `p` violating `ψ(pq) ≥ 0` or `ψ(p(e - q)) ≤ 0`.
    pub fn hahn_violation(&self, q: &ComponentMask) -> Option<ComponentMask> {
        self.hahn_violation_bits(self.bits_of(q))
            .map(|p| self.mask_of(p))
    }

    fn hahn_violation_bits(&self, q: u64) -> Option<u64> {
        let all = (1u64 << self.k) - 1;
        let rest = all & !q;
        (0..=all).find(|&p| !self.nonneg[(p & q) as usize] || !self.nonpos[(p & rest) as usize])
    }

    /// Every `q ∈ B` that is strongly positive with `e - q` strongly negative,
    /// found by checking all pairs `(q, p)` of members. Output follows the
    /// algebra's member order.
    pub fn brute_force_hahn(&self) -> Vec<ComponentMask> {
        let k = self.k;
        (0..1u64 << k)
            .map(|code| {
                (0..k)
                    .filter(|&a| code >> (k - 1 - a) & 1 == 1)
                    .fold(0u64, |acc, a| acc | 1 << a)
            })
            .filter(|&q| self.hahn_violation_bits(q).is_none())
            .map(|q| self.mask_of(q))
            .collect()
    }

    /// First member `r ≤ v` with `ψ(r) ≰ 0`.
    pub fn strong_negativity_violation(&self, v: &ComponentMask) -> Option<ComponentMask> {
        submasks(self.bits_of(v))
            .find(|&s| !self.nonpos[s as usize])
            .map(|s| self.mask_of(s))
    }

    /// Every member, in atom-bitset order, with its tabulated value.
    pub fn members(&self) -> impl Iterator<Item = (ComponentMask, RieszElement)> + '_ {
        (0..self.values.len()).map(|m| (self.mask_of(m as u64), self.expand(&self.values[m])))
    }
}
