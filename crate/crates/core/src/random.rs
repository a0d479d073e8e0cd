//! Seeded random instances for property campaigns.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expectation::ExpectationOperator;
use crate::hahn_jordan::ComponentCharge;
use crate::lattice::{ComponentMask, PartitionAlgebra, RieszElement};
use crate::rational::{ratio, Rational};

/// `a/b` with `|a| ≤ range`, `1 ≤ b ≤ den`.
pub fn rational<R: Rng>(rng: &mut R, range: i64, den: i64) -> Rational {
    ratio(rng.random_range(-range..=range), rng.random_range(1..=den))
}

pub fn positive_rational<R: Rng>(rng: &mut R, range: i64, den: i64) -> Rational {
    ratio(rng.random_range(1..=range), rng.random_range(1..=den))
}

pub fn vector<R: Rng>(rng: &mut R, n: usize) -> RieszElement {
    RieszElement::new((0..n).map(|_| rational(rng, 9, 6)).collect())
}

/// Coordinates in `[0, 9]`, about a quarter of them zero.
pub fn nonneg_vector<R: Rng>(rng: &mut R, n: usize) -> RieszElement {
    RieszElement::new(
        (0..n)
            .map(|_| {
                if rng.random_bool(0.25) {
                    Rational::default()
                } else {
                    positive_rational(rng, 9, 8)
                }
            })
            .collect(),
    )
}

pub fn mask<R: Rng>(rng: &mut R, n: usize) -> ComponentMask {
    let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    ComponentMask::from_fn(n, |i| bits[i])
}

/// Random labelling of the coordinates into at most `max_blocks` nonempty blocks.
pub fn partition<R: Rng>(rng: &mut R, n: usize, max_blocks: usize) -> PartitionAlgebra {
    let blocks = rng.random_range(1..=max_blocks.min(n).max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut atoms: Vec<Vec<usize>> = order[..blocks].iter().map(|&i| vec![i]).collect();
    for &i in &order[blocks..] {
        let b = rng.random_range(0..blocks);
        atoms[b].push(i);
    }
    for a in &mut atoms {
        a.sort_unstable();
    }
    atoms.sort();
    PartitionAlgebra::new(n, atoms).expect("labelling is a partition")
}

/// Splits every block of `coarse` at random.
pub fn refinement<R: Rng>(rng: &mut R, coarse: &PartitionAlgebra) -> PartitionAlgebra {
    let mut atoms = Vec::new();
    for block in coarse.atoms() {
        let sub = partition(rng, block.len(), block.len());
        for piece in sub.atoms() {
            atoms.push(piece.iter().map(|&k| block[k]).collect::<Vec<_>>());
        }
    }
    atoms.sort();
    PartitionAlgebra::new(coarse.dim(), atoms).expect("refinement of a partition")
}

pub fn operator<R: Rng>(rng: &mut R, n: usize) -> ExpectationOperator {
    let blocks = partition(rng, n, n);
    let weights = (0..n).map(|_| positive_rational(rng, 9, 5)).collect();
    ExpectationOperator::new(blocks, weights).expect("positive weights")
}

/// An operator, a refining algebra with at most `max_atoms` atoms, and a
/// charge on it. Values include zeros so ties get exercised.
pub fn charge<R: Rng>(rng: &mut R, max_atoms: usize) -> (ExpectationOperator, ComponentCharge) {
    let n = rng.random_range(1..=max_atoms);
    let t = operator(rng, n);
    let algebra = refinement(rng, t.partition());
    let values = (0..algebra.num_atoms())
        .map(|_| {
            if rng.random_bool(0.15) {
                Rational::default()
            } else {
                rational(rng, 7, 4)
            }
        })
        .collect();
    let psi = ComponentCharge::new(algebra, t.partition().clone(), values).expect("refinement");
    (t, psi)
}
