//! Charges on a partition algebra and their Hahn-Jordan decomposition.
//!
//! A [`ComponentCharge`] assigns to each atom `a` of the algebra `B` a scalar
//! `c_a`; the charge of `a` is `c_a` times the indicator of the `G`-block that
//! encloses `a`. Extending additively gives `ψ(p)` for every member `p`. With
//! that encoding `ψ(pk) = kψ(p)` for block indicators `k` and additivity hold
//! by construction, and order continuity and order boundedness are automatic.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expectation::ExpectationOperator;
use crate::lattice::{ComponentMask, PartitionAlgebra, RieszElement};
use crate::rational::{self, Rational};

/// Factor used by [`ComponentCharge::positive_piece`].
pub fn default_theta() -> Rational {
    rational::int(2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentCharge {
    algebra: PartitionAlgebra,
    g_partition: PartitionAlgebra,
    atom_values: Vec<Rational>,
    atom_block: Vec<usize>,
    /// Negative atoms in descending value order, lowest index first on ties.
    offer_order: Vec<usize>,
}

impl ComponentCharge {
    pub fn new(
        algebra: PartitionAlgebra,
        g_partition: PartitionAlgebra,
        atom_values: Vec<Rational>,
    ) -> Result<Self> {
        if atom_values.len() != algebra.num_atoms() {
            return Err(Error::DimensionMismatch {
                expected: algebra.num_atoms(),
                found: atom_values.len(),
            });
        }
        let atom_block = algebra.enclosing_blocks(&g_partition)?;
        let mut offer_order: Vec<usize> = (0..atom_values.len())
            .filter(|&a| atom_values[a].is_negative())
            .collect();
        offer_order.sort_by(|&a, &b| atom_values[b].cmp(&atom_values[a]).then(a.cmp(&b)));
        Ok(Self {
            algebra,
            g_partition,
            atom_values,
            atom_block,
            offer_order,
        })
    }

    /// `ψ_f(p) = T(pf)` on the members of `algebra`.
    pub fn from_density(
        t: &ExpectationOperator,
        f: &RieszElement,
        algebra: PartitionAlgebra,
    ) -> Result<Self> {
        if f.dim() != t.dim() {
            return Err(Error::DimensionMismatch {
                expected: t.dim(),
                found: f.dim(),
            });
        }
        let atom_block = algebra.enclosing_blocks(t.partition())?;
        let atom_values = algebra
            .atoms()
            .iter()
            .zip(&atom_block)
            .map(|(atom, &b)| {
                let s: Rational = atom.iter().map(|&i| &t.weights()[i] * f.get(i)).sum();
                s / t.block_weight(b)
            })
            .collect();
        Self::new(algebra, t.partition().clone(), atom_values)
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &PartitionAlgebra {
        &self.algebra
    }

    pub fn g_partition(&self) -> &PartitionAlgebra {
        &self.g_partition
    }

    pub fn atom_values(&self) -> &[Rational] {
        &self.atom_values
    }

    /// `G`-block enclosing atom `a`.
    pub fn block_of_atom(&self, a: usize) -> usize {
        self.atom_block[a]
    }

    pub fn negated(&self) -> Self {
        let values = self.atom_values.iter().map(|v| -v).collect();
        Self::new(self.algebra.clone(), self.g_partition.clone(), values).expect("same shape")
    }

    fn require_member(&self, p: &ComponentMask) -> Result<Vec<usize>> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        if !self.algebra.contains(p) {
            return Err(Error::NotInAlgebra(p.to_string()));
        }
        Ok(self.algebra.atoms_in(p))
    }

    fn expand(&self, per_block: &[Rational]) -> RieszElement {
        RieszElement::new(
            (0..self.dim())
                .map(|i| per_block[self.g_partition.atom_of(i)].clone())
                .collect(),
        )
    }

    /// Per-block value of `ψ` on the union of `atoms`.
    pub fn block_sums(&self, atoms: impl IntoIterator<Item = usize>) -> Vec<Rational> {
        let mut sums = vec![Rational::zero(); self.g_partition.num_atoms()];
        for a in atoms {
            sums[self.atom_block[a]] += &self.atom_values[a];
        }
        sums
    }

    /// `ψ(p)`.
    pub fn evaluate(&self, p: &ComponentMask) -> Result<RieszElement> {
        let atoms = self.require_member(p)?;
        Ok(self.expand(&self.block_sums(atoms)))
    }

    /// A bound `g` with `|ψ(p)| ≤ g` for all members `p`: per block, the sum
    /// of `|c_a|` over the atoms it contains.
    pub fn order_bound(&self) -> RieszElement {
        let mut sums = vec![Rational::zero(); self.g_partition.num_atoms()];
        for (a, v) in self.atom_values.iter().enumerate() {
            sums[self.atom_block[a]] += v.abs();
        }
        self.expand(&sums)
    }

    fn alpha_blocks(&self, atoms: &[usize]) -> Vec<Rational> {
        self.block_sums(
            atoms
                .iter()
                .copied()
                .filter(|&a| self.atom_values[a].is_positive()),
        )
    }

    /// `α(q) = sup { ψ(p) : p ∈ B, p ≤ q }`.
    ///
    /// Per block the supremum is attained by taking exactly the positive atoms.
    pub fn alpha(&self, q: &ComponentMask) -> Result<RieszElement> {
        let atoms = self.require_member(q)?;
        Ok(self.expand(&self.alpha_blocks(&atoms)))
    }

    /// Whether `p ≤ q` and `θψ(p) ≥ pα(q)`.
    pub fn in_m(&self, q: &ComponentMask, p: &ComponentMask, theta: &Rational) -> Result<bool> {
        let alpha = self.alpha(q)?;
        let psi = self.evaluate(p)?;
        Ok(p.is_subset(q) && p.project(&alpha).le(&psi.scale(theta)))
    }

    /// A maximal element `q̂` of `{ p ∈ B : p ≤ q, θψ(p) ≥ pα(q) }`.
    ///
    /// Greedy: start from every nonnegative atom under `q`, then offer the
    /// negative atoms in descending value order (lowest index first on ties),
    /// keeping each one whose block still satisfies the θ-condition. The
    /// condition splits over `G`-blocks, and once an atom is refused it stays
    /// refused, so the result admits no single-atom extension and hence no
    /// extension at all.
    pub fn maximal_m(&self, q: &ComponentMask, theta: &Rational) -> Result<ComponentMask> {
        if theta <= &Rational::one() {
            return Err(Error::InvalidTheta(rational::format(theta)));
        }
        let atoms = self.require_member(q)?;
        let alpha = self.alpha_blocks(&atoms);
        let mut under = vec![false; self.atom_values.len()];
        for &a in &atoms {
            under[a] = true;
        }
        let mut chosen: Vec<usize> = atoms
            .into_iter()
            .filter(|&a| !self.atom_values[a].is_negative())
            .collect();
        let mut sums = self.block_sums(chosen.iter().copied());
        for &a in self.offer_order.iter().filter(|&&a| under[a]) {
            let b = self.atom_block[a];
            let candidate = &sums[b] + &self.atom_values[a];
            if &candidate * theta >= alpha[b] {
                sums[b] = candidate;
                chosen.push(a);
            }
        }
        Ok(self.algebra.union_of(chosen))
    }

    /// `u ∈ B` with `u ≤ P_{ψ(u)} q`, `ψ(u) ≥ 0` and `ψ(u) ≤ α(q) ≤ 2ψ(u)`:
    /// the part of `q̂` lying in the band of `ψ(q̂)`.
    pub fn positive_piece(&self, q: &ComponentMask) -> Result<ComponentMask> {
        let q_hat = self.maximal_m(q, &default_theta())?;
        let band = self.evaluate(&q_hat)?.band_mask();
        Ok(band.meet(&q_hat))
    }

    /// A strongly negative `v ≤ p` with `ψ(v) ≤ ψ(p)`, for `ψ(p) ≤ 0`, `ψ(p) ≠ 0`.
    ///
    /// Positive pieces of the remainder are removed until `α` of the remainder
    /// vanishes; each round removes at least one atom.
    pub fn strongly_negative_witness(&self, p: &ComponentMask) -> Result<ComponentMask> {
        let psi = self.evaluate(p)?;
        if !psi.is_nonpos() || psi.is_zero() {
            return Err(Error::Precondition(format!(
                "ψ({p}) = {psi} is not ≤ 0 and nonzero"
            )));
        }
        let mut remainder = p.clone();
        loop {
            if self.alpha(&remainder)?.is_zero() {
                return Ok(remainder);
            }
            let piece = self.positive_piece(&remainder)?;
            assert!(
                !piece.is_empty() && piece.is_subset(&remainder),
                "positive piece must remove at least one atom"
            );
            remainder = remainder.difference(&piece);
        }
    }

    /// A strongly negative `v ≤ q` with `ψ(v) ≤ -ψ(q)⁻`, for `ψ(q)⁻ ≠ 0`.
    pub fn negative_part_witness(&self, q: &ComponentMask) -> Result<ComponentMask> {
        let negative = self.evaluate(q)?.neg_part();
        if negative.is_zero() {
            return Err(Error::Precondition(format!("ψ({q}) has no negative part")));
        }
        let g = negative.band_mask();
        self.strongly_negative_witness(&g.meet(q))
    }

    /// `q ∈ B` strongly positive with `e - q` strongly negative.
    ///
    /// `e` when no atom is negative; otherwise the join of the atoms with
    /// positive value, so atoms with value zero land on the negative side.
    pub fn hahn_jordan(&self) -> ComponentMask {
        if self.atom_values.iter().all(|v| !v.is_negative()) {
            return ComponentMask::full(self.dim());
        }
        self.positive_atoms()
    }

    /// Join of the atoms with strictly positive value.
    pub fn positive_atoms(&self) -> ComponentMask {
        self.algebra
            .union_of((0..self.atom_values.len()).filter(|&a| self.atom_values[a].is_positive()))
    }

    /// `ψ(p) ≥ 0` for every member `p ≤ q`, decided through `α(-ψ, q) = 0`.
    pub fn is_strongly_positive(&self, q: &ComponentMask) -> Result<bool> {
        Ok(self.negated().alpha(q)?.is_zero())
    }

    /// `ψ(p) ≤ 0` for every member `p ≤ q`, decided through `α(ψ, q) = 0`.
    pub fn is_strongly_negative(&self, q: &ComponentMask) -> Result<bool> {
        Ok(self.alpha(q)?.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ChargeTable;
    use crate::rational::{int, ratio};

    fn mask(s: &str) -> ComponentMask {
        ComponentMask::from_bits(s).unwrap()
    }

    fn el(v: &[i64]) -> RieszElement {
        RieszElement::from_ints(v)
    }

    fn pairs4() -> PartitionAlgebra {
        PartitionAlgebra::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    /// n = 4, G-blocks {0,1},{2,3}, singleton atoms, values (3, -1, 2, -2).
    fn i1() -> ComponentCharge {
        ComponentCharge::new(
            PartitionAlgebra::discrete(4),
            pairs4(),
            [3, -1, 2, -2].iter().map(|&v| int(v)).collect(),
        )
        .unwrap()
    }

    fn singletons(values: &[i64]) -> ComponentCharge {
        let n = values.len();
        ComponentCharge::new(
            PartitionAlgebra::discrete(n),
            PartitionAlgebra::trivial(n),
            values.iter().map(|&v| int(v)).collect(),
        )
        .unwrap()
    }

    /// Per-coordinate evaluation straight from the definition: coordinate `i`
    /// collects the value of every atom under `p` whose block contains `i`.
    fn coordinate_oracle(psi: &ComponentCharge, p: &ComponentMask) -> RieszElement {
        let n = psi.dim();
        RieszElement::new(
            (0..n)
                .map(|i| {
                    let mut s = Rational::zero();
                    for (a, atom) in psi.algebra().atoms().iter().enumerate() {
                        let block = psi.g_partition().atom_of(atom[0]);
                        if p.contains(atom[0]) && psi.g_partition().atom_of(i) == block {
                            s += &psi.atom_values()[a];
                        }
                    }
                    s
                })
                .collect(),
        )
    }

    #[test]
    fn evaluate_examples() {
        let psi = i1();
        assert_eq!(psi.evaluate(&mask("0000")).unwrap(), RieszElement::zero(4));
        assert_eq!(coordinate_oracle(&psi, &mask("1100")), el(&[2, 2, 0, 0]));
        assert_eq!(psi.evaluate(&mask("1100")).unwrap(), el(&[2, 2, 0, 0]));
        assert_eq!(coordinate_oracle(&psi, &mask("1111")), el(&[2, 2, 0, 0]));
        assert_eq!(psi.evaluate(&mask("1111")).unwrap(), el(&[2, 2, 0, 0]));

        let coarse = ComponentCharge::new(pairs4(), pairs4(), vec![int(1), int(1)]).unwrap();
        assert!(matches!(
            coarse.evaluate(&mask("1000")),
            Err(Error::NotInAlgebra(_))
        ));
    }

    #[test]
    fn refinement_is_required() {
        assert_eq!(
            ComponentCharge::new(
                pairs4(),
                PartitionAlgebra::discrete(4),
                vec![int(1), int(1)]
            ),
            Err(Error::NotRefinement { atom: 0 })
        );
    }

    #[test]
    fn density_examples() {
        let t = ExpectationOperator::uniform(pairs4());
        let b = PartitionAlgebra::discrete(4);
        let psi = ComponentCharge::from_density(&t, &RieszElement::zero(4), b.clone()).unwrap();
        assert!(psi.atom_values().iter().all(Zero::is_zero));

        let f = el(&[3, -1, 2, -2]);
        let psi = ComponentCharge::from_density(&t, &f, b.clone()).unwrap();
        assert_eq!(
            psi.atom_values(),
            &[ratio(3, 2), ratio(-1, 2), int(1), int(-1)]
        );
        for i in 0..4 {
            let chi = ComponentMask::from_indices(4, [i]);
            assert_eq!(psi.evaluate(&chi).unwrap(), t.apply(&chi.project(&f)));
        }

        let weighted =
            ExpectationOperator::new(pairs4(), vec![int(1), int(3), ratio(1, 2), int(2)]).unwrap();
        let psi = ComponentCharge::from_density(&weighted, &RieszElement::unit(4), b).unwrap();
        assert_eq!(
            psi.atom_values(),
            &[ratio(1, 4), ratio(3, 4), ratio(1, 5), ratio(4, 5)]
        );
        for i in 0..4 {
            let chi = ComponentMask::from_indices(4, [i]);
            assert_eq!(
                psi.evaluate(&chi).unwrap(),
                weighted.apply(&chi.to_element())
            );
        }

        assert!(ComponentCharge::from_density(&t, &f, PartitionAlgebra::trivial(4)).is_err());
    }

    #[test]
    fn alpha_examples() {
        let psi = i1();
        let table = ChargeTable::build(&psi, 20).unwrap();
        for (q, expect) in [("1111", [3, 3, 2, 2]), ("0101", [0, 0, 0, 0])] {
            let q = mask(q);
            assert_eq!(table.exhaustive_alpha(&q), el(&expect));
            assert_eq!(psi.alpha(&q).unwrap(), el(&expect));
        }
        assert_eq!(psi.alpha(&mask("0000")).unwrap(), RieszElement::zero(4));
    }

    #[test]
    fn maximal_m_examples() {
        let psi = i1();
        let two = int(2);
        let q_hat = psi.maximal_m(&mask("1111"), &two).unwrap();
        assert_eq!(q_hat, mask("1110"));
        let value = psi.evaluate(&q_hat).unwrap();
        let alpha = psi.alpha(&mask("1111")).unwrap();
        assert_eq!(value, el(&[2, 2, 2, 2]));
        assert!(alpha.le(&value.scale(&two)) && value.scale(&two).le(&alpha.scale(&two)));

        // exhaustive: 1110 is in M(e) and no strictly larger member is
        let members = PartitionAlgebra::discrete(4).members(20).unwrap();
        for p in &members {
            if q_hat.is_subset(p) && *p != q_hat {
                assert!(
                    !psi.in_m(&mask("1111"), p, &two).unwrap(),
                    "{p} extends 1110"
                );
            }
        }

        let nonneg = singletons(&[1, 0, 4]);
        for q in PartitionAlgebra::discrete(3).members(20).unwrap() {
            assert_eq!(nonneg.maximal_m(&q, &two).unwrap(), q);
        }
        assert_eq!(psi.maximal_m(&mask("0000"), &two).unwrap(), mask("0000"));
        assert!(matches!(
            psi.maximal_m(&mask("1111"), &int(1)),
            Err(Error::InvalidTheta(_))
        ));
    }

    #[test]
    fn positive_piece_examples() {
        let psi = i1();
        let u = psi.positive_piece(&mask("1111")).unwrap();
        assert_eq!(u, mask("1110"));
        let value = psi.evaluate(&u).unwrap();
        let alpha = psi.alpha(&mask("1111")).unwrap();
        assert!(value.le(&alpha) && alpha.le(&value.scale(&int(2))));

        let negative = singletons(&[-1, 0, -3]);
        assert_eq!(negative.positive_piece(&mask("111")).unwrap(), mask("000"));
        assert!(negative.alpha(&mask("111")).unwrap().is_zero());
        assert_eq!(psi.positive_piece(&mask("0000")).unwrap(), mask("0000"));
    }

    #[test]
    fn strongly_negative_examples() {
        let psi = i1();
        let table = ChargeTable::build(&psi, 20).unwrap();

        let v = psi.strongly_negative_witness(&mask("0101")).unwrap();
        assert_eq!(v, mask("0101"));
        assert!(table.is_strongly_negative(&v));

        assert_eq!(
            singletons(&[-1, -2])
                .strongly_negative_witness(&mask("11"))
                .unwrap(),
            mask("11")
        );

        let p = mask("0111");
        assert_eq!(psi.evaluate(&p).unwrap(), el(&[-1, -1, 0, 0]));
        let v = psi.strongly_negative_witness(&p).unwrap();
        assert_eq!(v, mask("0101"));
        assert!(table.is_strongly_negative(&v));
        assert!(psi.evaluate(&v).unwrap().le(&psi.evaluate(&p).unwrap()));

        assert!(matches!(
            psi.strongly_negative_witness(&mask("1000")),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            psi.strongly_negative_witness(&mask("0000")),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn negative_part_examples() {
        let psi = i1();
        let q = mask("1101");
        assert_eq!(psi.evaluate(&q).unwrap(), el(&[2, 2, -2, -2]));
        let v = psi.negative_part_witness(&q).unwrap();
        assert_eq!(v, mask("0001"));
        assert_eq!(psi.evaluate(&v).unwrap(), el(&[0, 0, -2, -2]));
        assert_eq!(
            psi.evaluate(&v).unwrap(),
            -&psi.evaluate(&q).unwrap().neg_part()
        );

        assert!(matches!(
            psi.negative_part_witness(&mask("1000")),
            Err(Error::Precondition(_))
        ));
        assert_eq!(
            singletons(&[-1, -1, -5])
                .negative_part_witness(&mask("111"))
                .unwrap(),
            mask("111")
        );
    }

    #[test]
    fn hahn_jordan_examples() {
        let psi = i1();
        let q = psi.hahn_jordan();
        assert_eq!(q, mask("1010"));
        let members = PartitionAlgebra::discrete(4).members(20).unwrap();
        for p in &members {
            assert!(psi.evaluate(&p.meet(&q)).unwrap().is_nonneg());
            assert!(psi.evaluate(&p.meet(&q.complement())).unwrap().is_nonpos());
        }
        assert_eq!(singletons(&[2, 0, 1]).hahn_jordan(), mask("111"));
        assert_eq!(singletons(&[2, 0, 1]).positive_atoms(), mask("101"));
        assert_eq!(singletons(&[2, 0, -1]).hahn_jordan(), mask("100"));
        assert_eq!(singletons(&[2, 1, 1]).hahn_jordan(), mask("111"));
        assert_eq!(singletons(&[-2, 0, -1]).hahn_jordan(), mask("000"));
        assert!(psi.is_strongly_positive(&q).unwrap());
        assert!(psi.is_strongly_negative(&q.complement()).unwrap());
    }

    #[test]
    fn brute_force_examples() {
        let psi = i1();
        let table = ChargeTable::build(&psi, 20).unwrap();
        assert_eq!(table.brute_force_hahn(), vec![mask("1010")]);

        let psi = singletons(&[1, 0]);
        let table = ChargeTable::build(&psi, 20).unwrap();
        let got: Vec<String> = table
            .brute_force_hahn()
            .iter()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(got, ["10", "11"]);

        let zero = singletons(&[0, 0, 0]);
        let table = ChargeTable::build(&zero, 20).unwrap();
        assert_eq!(table.brute_force_hahn().len(), 8);
    }

    #[test]
    fn order_bound_dominates() {
        let psi = ComponentCharge::new(
            PartitionAlgebra::discrete(4),
            pairs4(),
            [3, 2, -1, 5].iter().map(|&v| int(v)).collect(),
        )
        .unwrap();
        let g = psi.order_bound();
        assert_eq!(g, el(&[5, 5, 6, 6]));
        for p in PartitionAlgebra::discrete(4).members(20).unwrap() {
            assert!(psi.evaluate(&p).unwrap().abs().le(&g));
        }
    }
}
