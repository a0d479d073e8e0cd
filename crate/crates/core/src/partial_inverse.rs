//! Canonical partial inverses, exactly and through dyadic spectral ladders.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{ComponentMask, RieszElement};
use crate::rational::{self, Rational};

/// The unique `h` supported on the band of `g` with `gh = P_{|g|}e`.
pub fn canonical_inverse(g: &RieszElement) -> RieszElement {
    RieszElement::new(
        g.coords()
            .iter()
            .map(|c| {
                if c.is_zero() {
                    Rational::zero()
                } else {
                    c.recip()
                }
            })
            .collect(),
    )
}

fn check_nonneg(f: &RieszElement) -> Result<()> {
    match f.coords().iter().position(|c| c.is_negative()) {
        Some(index) => Err(Error::NegativeCoordinate { index }),
        None => Ok(()),
    }
}

fn check_depth(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDepth)
    } else {
        Ok(())
    }
}

/// Level masks `q_{n,j}` of a positive element at depth `n`.
///
/// `q_{n,0}` flags `0 < f_i ≤ 2^{-n}` and, for `j ≥ 1`, `q_{n,j}` flags
/// `j/2^n < f_i ≤ (j+1)/2^n`. Only nonzero levels are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralLadder {
    dim: usize,
    depth: u32,
    levels: BTreeMap<BigInt, ComponentMask>,
}

impl SpectralLadder {
    pub fn new(f: &RieszElement, depth: u32) -> Result<Self> {
        check_depth(depth)?;
        check_nonneg(f)?;
        let scale = Rational::from_integer(BigInt::one() << depth);
        let mut levels: BTreeMap<BigInt, ComponentMask> = BTreeMap::new();
        for (i, c) in f.coords().iter().enumerate() {
            if c.is_positive() {
                let j = (c * &scale).ceil().to_integer() - 1;
                levels
                    .entry(j)
                    .or_insert_with(|| ComponentMask::empty(f.dim()))
                    .insert(i);
            }
        }
        Ok(Self {
            dim: f.dim(),
            depth,
            levels,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `q_{n,j}`.
    pub fn mask(&self, j: &BigInt) -> ComponentMask {
        self.levels
            .get(j)
            .cloned()
            .unwrap_or_else(|| ComponentMask::empty(self.dim))
    }

    /// Nonzero levels in increasing `j`.
    pub fn levels(&self) -> impl Iterator<Item = (&BigInt, &ComponentMask)> {
        self.levels.iter()
    }

    /// Smallest `J` with `q_{n,j} = 0` for all `j ≥ J`.
    pub fn truncation_index(&self) -> BigInt {
        self.levels
            .keys()
            .next_back()
            .map(|j| j + 1)
            .unwrap_or_else(BigInt::zero)
    }

    /// `Σ_j c(j) q_{n,j}`.
    fn weighted_sum(&self, weight: impl Fn(&BigInt) -> Rational) -> RieszElement {
        let mut coords = vec![Rational::zero(); self.dim];
        for (j, m) in &self.levels {
            let w = weight(j);
            for i in m.ones() {
                coords[i] = w.clone();
            }
        }
        RieszElement::new(coords)
    }
}

pub fn spectral_masks(f: &RieszElement, depth: u32) -> Result<SpectralLadder> {
    SpectralLadder::new(f, depth)
}

/// `(f̲_n, f̄_n) = (Σ j/2^n q_{n,j}, Σ (j+1)/2^n q_{n,j})`.
pub fn dyadic_bounds(f: &RieszElement, depth: u32) -> Result<(RieszElement, RieszElement)> {
    let ladder = SpectralLadder::new(f, depth)?;
    let step = rational::dyadic_step(depth);
    let lower = ladder.weighted_sum(|j| Rational::from_integer(j.clone()) * &step);
    let upper = ladder.weighted_sum(|j| Rational::from_integer(j + 1) * &step);
    Ok((lower, upper))
}

/// The lower approximant `h̲_n = Σ 2^n/(j+1) q_{n,j}` of the canonical inverse.
pub fn spectral_inverse(f: &RieszElement, depth: u32) -> Result<RieszElement> {
    let ladder = SpectralLadder::new(f, depth)?;
    let scale = BigInt::one() << depth;
    Ok(ladder.weighted_sum(|j| Rational::new(scale.clone(), j + 1)))
}

/// `γ_n = Σ_{j≥n} 2^j (q_{j,0} - q_{j+1,0})`, summed until `q_{j,0}` vanishes.
pub fn gamma(f: &RieszElement, depth: u32) -> Result<RieszElement> {
    check_depth(depth)?;
    check_nonneg(f)?;
    let mut total = RieszElement::zero(f.dim());
    let mut j = depth;
    let mut current = SpectralLadder::new(f, j)?.mask(&BigInt::zero());
    while !current.is_empty() {
        let next = SpectralLadder::new(f, j + 1)?.mask(&BigInt::zero());
        let weight = Rational::from_integer(BigInt::one() << j);
        total = &total + &current.difference(&next).to_element().scale(&weight);
        current = next;
        j += 1;
    }
    Ok(total)
}

/// `h̄_n = γ_n + Σ_{j≥1} 2^n/j q_{n,j}`.
///
/// Above `q_{n,0}` this bounds `1/f` from above. On `q_{n,0}` the `γ_n` term
/// is `2^j` with `2^{-(j+1)} < f ≤ 2^{-j}`, which is at most `1/f`.
pub fn spectral_upper_inverse(f: &RieszElement, depth: u32) -> Result<RieszElement> {
    let ladder = SpectralLadder::new(f, depth)?;
    let scale = BigInt::one() << depth;
    let body = ladder.weighted_sum(|j| {
        if j.is_zero() {
            Rational::zero()
        } else {
            Rational::new(scale.clone(), j.clone())
        }
    });
    Ok(&gamma(f, depth)? + &body)
}

/// Sign-changing input: `h̲_n(g⁺) - h̲_n(g⁻)`.
pub fn signed_spectral_inverse(g: &RieszElement, depth: u32) -> Result<RieszElement> {
    Ok(&spectral_inverse(&g.pos(), depth)? - &spectral_inverse(&g.neg_part(), depth)?)
}

/// `h̲_n f ≤ h̲_n f̄_n = p_f` and `p_f - 2^{-n} h̲_n ≤ h̲_n f`.
pub fn inverse_chain_holds(f: &RieszElement, depth: u32) -> Result<bool> {
    let h = spectral_inverse(f, depth)?;
    let (_, upper) = dyadic_bounds(f, depth)?;
    let band = f.band_mask().to_element();
    let hf = &h * f;
    let top = &h * &upper;
    let bottom = &band - &h.scale(&rational::dyadic_step(depth));
    Ok(hf.le(&top) && top == band && bottom.le(&hf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn el(v: &[i64]) -> RieszElement {
        RieszElement::from_ints(v)
    }

    fn elr(v: &[(i64, i64)]) -> RieszElement {
        RieszElement::new(v.iter().map(|&(a, b)| ratio(a, b)).collect())
    }

    /// `q_{n,j}` through band projections, with `L_k = I - P_{(f - k2^{-n}e)⁺}`
    /// flagging `f ≤ k/2^n`: `q_{n,0} = P_f L_1` and `q_{n,j} = L_{j+1}(I - L_j)`.
    fn composition_oracle(f: &RieszElement, n: u32, j: i64) -> ComponentMask {
        let step = rational::dyadic_step(n);
        let level = |k: i64| {
            let c = RieszElement::constant(f.dim(), int(k) * &step);
            (f - &c).pos().band_mask().complement()
        };
        if j == 0 {
            f.band_mask().meet(&level(1))
        } else {
            level(j + 1).meet(&level(j).complement())
        }
    }

    #[test]
    fn canonical_inverse_examples() {
        assert_eq!(
            canonical_inverse(&el(&[2, 0, -4])),
            elr(&[(1, 2), (0, 1), (-1, 4)])
        );
        assert_eq!(
            canonical_inverse(&RieszElement::unit(3)),
            RieszElement::unit(3)
        );
        assert_eq!(
            canonical_inverse(&RieszElement::zero(3)),
            RieszElement::zero(3)
        );
    }

    #[test]
    fn ladder_examples() {
        let f = el(&[3]);
        let ladder = spectral_masks(&f, 1).unwrap();
        for j in 0..8 {
            assert_eq!(
                composition_oracle(&f, 1, j),
                ladder.mask(&BigInt::from(j)),
                "level {j}"
            );
        }
        assert_eq!(ladder.mask(&BigInt::from(5)).to_string(), "1");
        assert_eq!(ladder.truncation_index(), BigInt::from(6));

        let ladder = spectral_masks(&RieszElement::zero(2), 3).unwrap();
        assert_eq!(ladder.levels().count(), 0);
        assert_eq!(ladder.truncation_index(), BigInt::zero());

        let f = elr(&[(1, 2), (2, 1)]);
        let ladder = spectral_masks(&f, 1).unwrap();
        for j in 0..6 {
            assert_eq!(
                composition_oracle(&f, 1, j),
                ladder.mask(&BigInt::from(j)),
                "level {j}"
            );
        }
        assert_eq!(ladder.mask(&BigInt::from(0)).to_string(), "10");
        assert_eq!(ladder.mask(&BigInt::from(3)).to_string(), "01");

        assert_eq!(
            spectral_masks(&el(&[1, -1]), 2),
            Err(Error::NegativeCoordinate { index: 1 })
        );
        assert_eq!(spectral_masks(&el(&[1]), 0), Err(Error::InvalidDepth));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(
            dyadic_bounds(&el(&[3]), 1).unwrap(),
            (elr(&[(5, 2)]), el(&[3]))
        );
        let zero = RieszElement::zero(2);
        assert_eq!(dyadic_bounds(&zero, 4).unwrap(), (zero.clone(), zero));
        // 1 sits at the top of the cell (1 - 2^{-n}, 1] at every depth.
        for n in 1..6 {
            let (lo, hi) = dyadic_bounds(&RieszElement::unit(2), n).unwrap();
            assert_eq!(hi, RieszElement::unit(2));
            assert_eq!(
                lo,
                RieszElement::constant(2, int(1) - rational::dyadic_step(n))
            );
        }
    }

    #[test]
    fn spectral_inverse_examples() {
        for n in [1, 5, 12] {
            assert_eq!(
                spectral_inverse(&RieszElement::unit(3), n).unwrap(),
                RieszElement::unit(3)
            );
        }
        assert_eq!(
            spectral_inverse(&RieszElement::zero(2), 4).unwrap(),
            RieszElement::zero(2)
        );
        let ladder = spectral_masks(&el(&[2]), 3).unwrap();
        assert_eq!(ladder.mask(&BigInt::from(15)).to_string(), "1");
        assert_eq!(spectral_inverse(&el(&[2]), 3).unwrap(), elr(&[(1, 2)]));
        // 3 ∈ (5/2, 3] at depth 1: h̲ = 2/6.
        assert_eq!(spectral_inverse(&el(&[3]), 1).unwrap(), elr(&[(1, 3)]));
        // 2/3 ∈ (5/8, 6/8] at depth 3: h̲ = 8/6.
        assert_eq!(
            spectral_inverse(&elr(&[(2, 3)]), 3).unwrap(),
            elr(&[(4, 3)])
        );
    }

    #[test]
    fn gamma_and_upper() {
        // 1/10 ∈ (1/16, 1/8]: q_{1,0} .. q_{3,0} contain it, q_{4,0} does not, so γ_1 = 2^3.
        let f = elr(&[(1, 10), (3, 1)]);
        assert_eq!(gamma(&f, 1).unwrap(), el(&[8, 0]));
        assert_eq!(gamma(&f, 4).unwrap(), el(&[0, 0]));
        let upper = spectral_upper_inverse(&f, 1).unwrap();
        assert_eq!(upper, elr(&[(8, 1), (2, 5)]));
        let lower = spectral_inverse(&f, 1).unwrap();
        assert!(lower.le(&upper));
        // 8 < 10 at the small coordinate; 2/5 > 1/3 at the other.
        assert!(upper.get(0) < canonical_inverse(&f).get(0));
        assert!(upper.get(1) > canonical_inverse(&f).get(1));
    }

    #[test]
    fn signed_inverse_routes_through_parts() {
        let g = elr(&[(-2, 1), (1, 4), (0, 1)]);
        let h = signed_spectral_inverse(&g, 6).unwrap();
        assert_eq!(h, elr(&[(-1, 2), (4, 1), (0, 1)]));
    }

    fn nonneg_vec() -> impl Strategy<Value = RieszElement> {
        prop::collection::vec((0i64..40, 1i64..12), 1..8)
            .prop_map(|v| RieszElement::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect()))
    }

    fn signed_vec() -> impl Strategy<Value = RieszElement> {
        prop::collection::vec((-40i64..40, 1i64..12), 1..8)
            .prop_map(|v| RieszElement::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn inverse_laws(g in signed_vec()) {
            let h = canonical_inverse(&g);
            prop_assert_eq!(&g * &h, g.band_mask().to_element());
            prop_assert_eq!(canonical_inverse(&h), g.clone());
            prop_assert_eq!(h.band_mask(), g.band_mask());
            if g.is_nonneg() {
                prop_assert!(h.is_nonneg());
            }
        }

        #[test]
        fn ladder_partitions_band(f in nonneg_vec(), n in 1u32..8) {
            let ladder = spectral_masks(&f, n).unwrap();
            let mut union = ComponentMask::empty(f.dim());
            for (j, m) in ladder.levels() {
                prop_assert!(union.meet(m).is_empty());
                union = union.join(m);
                let j: i64 = j.try_into().unwrap();
                prop_assert_eq!(composition_oracle(&f, n, j), m.clone());
            }
            prop_assert_eq!(union, f.band_mask());
            let bound = (f.max_abs() * Rational::from_integer(BigInt::one() << n)).ceil().to_integer() + 1;
            prop_assert!(ladder.truncation_index() <= bound);
        }

        #[test]
        fn dyadic_sandwich(f in nonneg_vec(), n in 1u32..20) {
            let (lo, hi) = dyadic_bounds(&f, n).unwrap();
            prop_assert!(lo.le(&f) && f.le(&hi));
            let gap = f.band_mask().to_element().scale(&rational::dyadic_step(n));
            prop_assert!((&hi - &lo).le(&gap));
            let (lo2, hi2) = dyadic_bounds(&f, n + 1).unwrap();
            prop_assert!(lo.le(&lo2) && hi2.le(&hi));
            prop_assert!(inverse_chain_holds(&f, n).unwrap());
        }

        #[test]
        fn spectral_inverse_converges(f in nonneg_vec()) {
            let exact = canonical_inverse(&f);
            let mut previous: Option<Rational> = None;
            for n in 1..=20u32 {
                let h = spectral_inverse(&f, n).unwrap();
                prop_assert!(h.le(&exact));
                let err = (&exact - &h).max_abs();
                if let Some(prev) = &previous {
                    prop_assert!(&err <= prev);
                }
                let hmax = exact.max_abs();
                prop_assert!(err <= rational::dyadic_step(n) * &hmax * &hmax);
                previous = Some(err);
            }
        }
    }
}
