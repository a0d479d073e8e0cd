//! Strictly positive conditional expectations as weighted block averages.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{ComponentMask, PartitionAlgebra, RieszElement};
use crate::rational::{self, Rational};

/// `T f` is constant on each block `b`, equal to `Σ_{i∈b} w_i f_i / Σ_{i∈b} w_i`.
///
/// Its range `R(T)` is the space of block-constant vectors. Strict positivity
/// follows from every weight being positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectationOperator {
    partition: PartitionAlgebra,
    weights: Vec<Rational>,
    block_weights: Vec<Rational>,
}

impl ExpectationOperator {
    pub fn new(partition: PartitionAlgebra, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != partition.dim() {
            return Err(Error::DimensionMismatch {
                expected: partition.dim(),
                found: weights.len(),
            });
        }
        if let Some(index) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::NonPositiveWeight { index });
        }
        let block_weights = partition
            .atoms()
            .iter()
            .map(|b| b.iter().map(|&i| &weights[i]).sum())
            .collect();
        Ok(Self {
            partition,
            weights,
            block_weights,
        })
    }

    pub fn uniform(partition: PartitionAlgebra) -> Self {
        let n = partition.dim();
        Self::new(partition, vec![rational::int(1); n]).expect("unit weights are positive")
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn partition(&self) -> &PartitionAlgebra {
        &self.partition
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_atoms()
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.partition.atom_of(i)
    }

    /// Total weight of block `b`.
    pub fn block_weight(&self, b: usize) -> &Rational {
        &self.block_weights[b]
    }

    pub fn block_indicator(&self, b: usize) -> ComponentMask {
        self.partition.atom_mask(b)
    }

    /// `W_{block(i)} / w_i`.
    pub fn weight_ratio(&self, i: usize) -> Rational {
        &self.block_weights[self.block_of(i)] / &self.weights[i]
    }

    /// `max_i W_{block(i)} / w_i`, the constant in the dyadic representation bound.
    pub fn max_weight_ratio(&self) -> Rational {
        (0..self.dim())
            .map(|i| self.weight_ratio(i))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Per-block averages of `f`.
    pub fn block_means(&self, f: &RieszElement) -> Vec<Rational> {
        assert_eq!(f.dim(), self.dim(), "dimension mismatch");
        self.partition
            .atoms()
            .iter()
            .zip(&self.block_weights)
            .map(|(b, total)| {
                let s: Rational = b.iter().map(|&i| &self.weights[i] * f.get(i)).sum();
                s / total
            })
            .collect()
    }

    /// Spreads one value per block back over the coordinates.
    pub fn expand_blocks(&self, values: &[Rational]) -> RieszElement {
        RieszElement::new(
            (0..self.dim())
                .map(|i| values[self.block_of(i)].clone())
                .collect(),
        )
    }

    /// Value of a range element on block `b`.
    pub fn block_value<'a>(&self, r: &'a RieszElement, b: usize) -> &'a Rational {
        r.get(self.partition.atoms()[b][0])
    }

    /// `T f`. Panics on a dimension mismatch; see [`Self::checked_apply`].
    pub fn apply(&self, f: &RieszElement) -> RieszElement {
        self.expand_blocks(&self.block_means(f))
    }

    pub fn checked_apply(&self, f: &RieszElement) -> Result<RieszElement> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.dim(),
            });
        }
        Ok(self.apply(f))
    }

    /// Membership in `R(T)`: constant on every block.
    pub fn is_in_range(&self, f: &RieszElement) -> bool {
        f.dim() == self.dim()
            && self
                .partition
                .atoms()
                .iter()
                .all(|b| b.iter().all(|&i| f.get(i) == f.get(b[0])))
    }

    /// First block on which `f` is not constant.
    pub fn range_violation(&self, f: &RieszElement) -> Option<usize> {
        self.partition
            .atoms()
            .iter()
            .position(|b| b.iter().any(|&i| f.get(i) != f.get(b[0])))
    }

    /// `‖f‖_{T,1} = T|f|`.
    pub fn t_norm1(&self, f: &RieszElement) -> RieszElement {
        self.apply(&f.abs())
    }

    /// `‖f‖²_{T,2} = T(f²)`, kept squared so it stays rational.
    pub fn t_norm2_squared(&self, f: &RieszElement) -> RieszElement {
        self.apply(&(f * f))
    }

    /// `‖f‖_{T,2}` in floating point, for display only.
    pub fn t_norm2_display(&self, f: &RieszElement) -> Vec<f64> {
        self.t_norm2_squared(f)
            .coords()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN).sqrt())
            .collect()
    }

    /// Hölder's inequality `T|fg| ≤ ‖f‖_{T,2}‖g‖_{T,2}` in the squared form
    /// `(T|fg|)² ≤ T(f²)·T(g²)`.
    pub fn holder(&self, f: &RieszElement, g: &RieszElement) -> HolderReport {
        let t = self.t_norm1(&(f * g));
        let lhs = &t * &t;
        let rhs = &self.t_norm2_squared(f) * &self.t_norm2_squared(g);
        let violation = lhs.le_witness(&rhs);
        HolderReport {
            lhs,
            rhs,
            violation,
        }
    }

    /// Dense matrix of `T`: entry `(i, j)` is `w_j / W_{block(i)}` when `i` and
    /// `j` share a block.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if self.block_of(i) == self.block_of(j) {
                            &self.weights[j] / &self.block_weights[self.block_of(i)]
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Both sides of the squared Hölder inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolderReport {
    pub lhs: RieszElement,
    pub rhs: RieszElement,
    /// First coordinate where `lhs ≤ rhs` fails.
    pub violation: Option<usize>,
}

impl HolderReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn pairs4() -> ExpectationOperator {
        ExpectationOperator::uniform(
            PartitionAlgebra::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap(),
        )
    }

    fn el(v: &[i64]) -> RieszElement {
        RieszElement::from_ints(v)
    }

    fn elr(v: &[(i64, i64)]) -> RieszElement {
        RieszElement::new(v.iter().map(|&(a, b)| ratio(a, b)).collect())
    }

    /// Independent evaluation of `T f` as an explicit double sum over the
    /// coordinates, without the block bookkeeping.
    fn summation_oracle(t: &ExpectationOperator, f: &RieszElement) -> RieszElement {
        let n = t.dim();
        RieszElement::new(
            (0..n)
                .map(|i| {
                    let mut num = Rational::zero();
                    let mut den = Rational::zero();
                    for j in 0..n {
                        if t.partition()
                            .atoms()
                            .iter()
                            .any(|b| b.contains(&i) && b.contains(&j))
                        {
                            num += &t.weights()[j] * f.get(j);
                            den += &t.weights()[j];
                        }
                    }
                    num / den
                })
                .collect(),
        )
    }

    #[test]
    fn apply_examples() {
        let t = pairs4();
        let e = RieszElement::unit(4);
        assert_eq!(t.apply(&e), e);
        let f = el(&[1, 2, 3, 4]);
        let expected = elr(&[(3, 2), (3, 2), (7, 2), (7, 2)]);
        assert_eq!(summation_oracle(&t, &f), expected);
        assert_eq!(t.apply(&f), expected);
        let r = el(&[5, 5, -1, -1]);
        assert_eq!(t.apply(&r), r);
        assert!(t.checked_apply(&el(&[1, 2])).is_err());
    }

    #[test]
    fn range_examples() {
        let t = pairs4();
        assert!(t.is_in_range(&el(&[5, 5, -1, -1])));
        assert!(!t.is_in_range(&el(&[1, 2, 1, 1])));
        assert_eq!(t.range_violation(&el(&[1, 2, 1, 1])), Some(0));
        assert!(t.is_in_range(&RieszElement::unit(4)));
    }

    #[test]
    fn norm_examples() {
        let t = pairs4();
        let f = el(&[1, -1, 0, 0]);
        assert_eq!(summation_oracle(&t, &f.abs()), el(&[1, 1, 0, 0]));
        assert_eq!(t.t_norm1(&f), el(&[1, 1, 0, 0]));
        assert_eq!(t.t_norm1(&RieszElement::zero(4)), RieszElement::zero(4));
        assert_eq!(t.t_norm1(&RieszElement::unit(4)), RieszElement::unit(4));

        let f = el(&[1, -2, 3, 4]);
        let expected = elr(&[(5, 2), (5, 2), (25, 2), (25, 2)]);
        assert_eq!(summation_oracle(&t, &(&f * &f)), expected);
        assert_eq!(t.t_norm2_squared(&f), expected);
        assert_eq!(
            t.t_norm2_squared(&RieszElement::unit(4)),
            RieszElement::unit(4)
        );
        assert_eq!(
            t.t_norm2_squared(&RieszElement::zero(4)),
            RieszElement::zero(4)
        );
        let shown = t.t_norm2_display(&f);
        assert!((shown[0] - 2.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn holder_examples() {
        let t = pairs4();
        let f = el(&[1, -2, 3, 4]);
        let same = t.holder(&f, &f);
        assert!(same.holds());
        assert_eq!(same.lhs, same.rhs);

        let g = el(&[2, 1, 0, -1]);
        let r = t.holder(&RieszElement::unit(4), &g);
        assert!(r.holds());
        let tg = t.t_norm1(&g);
        assert_eq!(r.lhs, &tg * &tg);
        assert_eq!(r.rhs, t.t_norm2_squared(&g));

        // |fg| = (2,2,0,4): T|fg| = (2,2,2,2); T f² = (5/2,5/2,25/2,25/2); T g² = (5/2,5/2,1/2,1/2).
        let r = t.holder(&f, &g);
        assert!(r.holds());
        assert_eq!(r.lhs, el(&[4, 4, 4, 4]));
        assert_eq!(r.rhs, elr(&[(25, 4), (25, 4), (25, 4), (25, 4)]));
        assert!(r.lhs.get(0) < r.rhs.get(0));
    }

    #[test]
    fn rejects_bad_weights() {
        let p = PartitionAlgebra::trivial(2);
        assert_eq!(
            ExpectationOperator::new(p.clone(), vec![int(1), int(0)]),
            Err(Error::NonPositiveWeight { index: 1 })
        );
        assert!(ExpectationOperator::new(p, vec![int(1)]).is_err());
    }

    #[test]
    fn projection_and_unit_on_basis() {
        let p = PartitionAlgebra::new(5, vec![vec![0, 3], vec![1], vec![2, 4]]).unwrap();
        let t =
            ExpectationOperator::new(p, vec![int(1), int(2), ratio(1, 3), int(5), int(4)]).unwrap();
        assert_eq!(t.apply(&RieszElement::unit(5)), RieszElement::unit(5));
        for i in 0..5 {
            let chi = ComponentMask::from_indices(5, [i]).to_element();
            let tc = t.apply(&chi);
            assert!(tc.is_nonneg() && !tc.is_zero());
            assert_eq!(t.apply(&tc), tc);
            assert_eq!(tc, summation_oracle(&t, &chi));
        }
        // W = (6, 2, 13/3); ratios 6, 1, 13, 6/5, 13/12.
        assert_eq!(t.max_weight_ratio(), int(13));
    }

    fn operator_and_vectors(
        k: usize,
    ) -> impl Strategy<Value = (ExpectationOperator, Vec<RieszElement>)> {
        (1usize..9).prop_flat_map(move |n| {
            (
                prop::collection::vec(0usize..n, n),
                prop::collection::vec((1i64..9, 1i64..4), n),
                prop::collection::vec(prop::collection::vec((-9i64..10, 1i64..5), n), k),
            )
                .prop_map(move |(labels, ws, vs)| {
                    let mut atoms: Vec<Vec<usize>> = Vec::new();
                    let mut seen = Vec::new();
                    for (i, l) in labels.into_iter().enumerate() {
                        match seen.iter().position(|&s| s == l) {
                            Some(a) => atoms[a].push(i),
                            None => {
                                seen.push(l);
                                atoms.push(vec![i]);
                            }
                        }
                    }
                    let t = ExpectationOperator::new(
                        PartitionAlgebra::new(n, atoms).unwrap(),
                        ws.into_iter().map(|(a, b)| ratio(a, b)).collect(),
                    )
                    .unwrap();
                    let vs = vs
                        .into_iter()
                        .map(|v| {
                            RieszElement::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect())
                        })
                        .collect();
                    (t, vs)
                })
        })
    }

    proptest! {
        #[test]
        fn averaging_and_projection((t, vs) in operator_and_vectors(2)) {
            let r = t.apply(&vs[0]);
            prop_assert!(t.is_in_range(&r));
            prop_assert_eq!(t.apply(&r), r.clone());
            prop_assert_eq!(t.apply(&(&r * &vs[1])), &r * &t.apply(&vs[1]));
            prop_assert_eq!(t.apply(&vs[1]), summation_oracle(&t, &vs[1]));
        }

        #[test]
        fn strict_positivity((t, vs) in operator_and_vectors(1)) {
            let f = vs[0].abs();
            let n1 = t.t_norm1(&f);
            prop_assert!(n1.is_nonneg());
            prop_assert_eq!(n1.is_zero(), f.is_zero());
        }

        #[test]
        fn norms_are_range_homogeneous((t, vs) in operator_and_vectors(2)) {
            let r = t.apply(&vs[0]);
            let rf = &r * &vs[1];
            prop_assert_eq!(t.t_norm1(&rf), &r.abs() * &t.t_norm1(&vs[1]));
            prop_assert_eq!(t.t_norm2_squared(&rf), &(&r * &r) * &t.t_norm2_squared(&vs[1]));
        }

        #[test]
        fn holder_always_holds((t, vs) in operator_and_vectors(2)) {
            prop_assert!(t.holder(&vs[0], &vs[1]).holds());
        }
    }
}
