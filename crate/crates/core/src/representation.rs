//! T-linear functionals, their strong norm, and the Riesz-Frechet
//! representation `𝔣 = T_y`, both exactly and by dyadic level sets.
//!
//! A functional is determined by its images on the coordinate indicators
//! `χ_i`; a valid one sends `χ_i` to a multiple of the indicator of the block
//! containing `i`. Writing `v_i` for that multiple, the representer is
//! `y_i = v_i W_{block(i)} / w_i`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::certificate::Check;
use crate::error::{Error, Result};
use crate::expectation::ExpectationOperator;
use crate::hahn_jordan::ComponentCharge;
use crate::lattice::{ComponentMask, PartitionAlgebra, RieszElement};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionalForm {
    /// `g ↦ T(yg)`.
    Density(RieszElement),
    /// `g ↦ Mg`, validated for range and `R(T)`-homogeneity.
    Matrix(Vec<Vec<Rational>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongFunctional {
    t: ExpectationOperator,
    form: FunctionalForm,
}

impl StrongFunctional {
    /// `T_y`.
    pub fn density(t: &ExpectationOperator, y: RieszElement) -> Result<Self> {
        if y.dim() != t.dim() {
            return Err(Error::DimensionMismatch {
                expected: t.dim(),
                found: y.dim(),
            });
        }
        Ok(Self {
            t: t.clone(),
            form: FunctionalForm::Density(y),
        })
    }

    pub fn zero(t: &ExpectationOperator) -> Self {
        Self {
            t: t.clone(),
            form: FunctionalForm::Density(RieszElement::zero(t.dim())),
        }
    }

    /// Accepts `M` only if every `Mχ_i` lies in `R(T)` and `M(rχ_i) = rMχ_i`
    /// for every block indicator `r`.
    pub fn from_matrix(t: &ExpectationOperator, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = t.dim();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let column = |i: usize| RieszElement::new(rows.iter().map(|r| r[i].clone()).collect());
        for i in 0..n {
            if let Some(block) = t.range_violation(&column(i)) {
                return Err(Error::RangeViolation {
                    coordinate: i,
                    block,
                });
            }
        }
        for b in 0..t.num_blocks() {
            let r = t.block_indicator(b);
            for i in 0..n {
                let image = column(i);
                let lhs = if r.contains(i) {
                    image.clone()
                } else {
                    RieszElement::zero(n)
                };
                if lhs != r.project(&image) {
                    return Err(Error::HomogeneityViolation {
                        coordinate: i,
                        block: b,
                    });
                }
            }
        }
        Ok(Self {
            t: t.clone(),
            form: FunctionalForm::Matrix(rows),
        })
    }

    /// Dense matrix of `T_y`.
    pub fn density_matrix(t: &ExpectationOperator, y: &RieszElement) -> Vec<Vec<Rational>> {
        let mut m = t.matrix();
        for row in &mut m {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry *= y.get(j);
            }
        }
        m
    }

    pub fn operator(&self) -> &ExpectationOperator {
        &self.t
    }

    pub fn form(&self) -> &FunctionalForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    pub fn evaluate(&self, g: &RieszElement) -> RieszElement {
        match &self.form {
            FunctionalForm::Density(y) => self.t.apply(&(y * g)),
            FunctionalForm::Matrix(rows) => {
                assert_eq!(g.dim(), self.dim(), "dimension mismatch");
                RieszElement::new(
                    rows.iter()
                        .map(|r| r.iter().zip(g.coords()).map(|(a, b)| a * b).sum())
                        .collect(),
                )
            }
        }
    }

    pub fn negated(&self) -> Self {
        let form = match &self.form {
            FunctionalForm::Density(y) => FunctionalForm::Density(-y),
            FunctionalForm::Matrix(rows) => FunctionalForm::Matrix(
                rows.iter()
                    .map(|r| r.iter().map(|a| -a).collect())
                    .collect(),
            ),
        };
        Self {
            t: self.t.clone(),
            form,
        }
    }

    /// `𝔣(χ_i)` for every coordinate.
    pub fn indicator_images(&self) -> Vec<RieszElement> {
        (0..self.dim())
            .map(|i| self.evaluate(&ComponentMask::from_indices(self.dim(), [i]).to_element()))
            .collect()
    }

    /// Block value `v_i` of `𝔣(χ_i)` on the block containing `i`.
    pub fn indicator_values(&self) -> Vec<Rational> {
        self.indicator_images()
            .iter()
            .enumerate()
            .map(|(i, image)| image.get(i).clone())
            .collect()
    }

    /// Same images on every coordinate indicator.
    pub fn extensionally_equal(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.indicator_images() == other.indicator_images()
    }

    /// The unique `y` with `𝔣 = T_y`.
    pub fn exact_represent(&self) -> Result<RieszElement> {
        let y = RieszElement::new(
            self.indicator_values()
                .into_iter()
                .enumerate()
                .map(|(i, v)| v * self.t.weight_ratio(i))
                .collect(),
        );
        let images = self.indicator_images();
        for (i, image) in images.iter().enumerate() {
            let chi = ComponentMask::from_indices(self.dim(), [i]);
            if self.t.apply(&chi.project(&y)) != *image {
                return Err(Error::VerificationFailure(i));
            }
        }
        Ok(y)
    }

    /// `‖𝔣‖² = T(y²)` for the representer `y`.
    pub fn norm_squared(&self) -> Result<RieszElement> {
        Ok(self.t.t_norm2_squared(&self.exact_represent()?))
    }

    /// `𝔣(g)² ≤ ‖𝔣‖² ‖g‖²_{T,2}`.
    pub fn strong_bound_holds(&self, norm_squared: &RieszElement, g: &RieszElement) -> bool {
        let v = self.evaluate(g);
        (&v * &v).le(&(norm_squared * &self.t.t_norm2_squared(g)))
    }

    fn shifted_charge(&self, values: &[Rational], shift: &Rational) -> ComponentCharge {
        let atom_values = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v - shift * self.t.weights()[i].clone() / self.t.block_weight(self.t.block_of(i))
            })
            .collect();
        ComponentCharge::new(
            PartitionAlgebra::discrete(self.dim()),
            self.t.partition().clone(),
            atom_values,
        )
        .expect("singletons refine every partition")
    }

    /// `q⁺` with `𝔣(pq⁺) ≥ 0` and `𝔣(p(e - q⁺)) ≤ 0` for every component `p`:
    /// the coordinates where `𝔣(χ_i)` is positive, so null coordinates go to
    /// the negative side (the zero functional has `q⁺ = 0`).
    pub fn positive_component(&self) -> ComponentMask {
        self.shifted_charge(&self.indicator_values(), &Rational::zero())
            .positive_atoms()
    }

    /// Positive component of `𝔣 - cT` with null coordinates on the positive
    /// side: the complement of the canonical component of `cT - 𝔣`.
    pub fn level_component(&self, c: &Rational) -> ComponentMask {
        let values = self.indicator_values();
        level_component_from(self, &values, c)
    }

    /// Dyadic approximation of the representer at depth `n`.
    ///
    /// `h_k = q⁺(k/2^n)(e - q⁺((k+1)/2^n))` with `q⁺(c)` the level component of
    /// `𝔣 - cT`, `s_n = Σ k/2^n h_k`, and likewise `σ_n` for `-𝔣`; the result is
    /// `s_n - σ_n`. The components are nested in `k`, so only the values of
    /// `k` where they change are visited.
    pub fn dyadic_represent(&self, depth: u32) -> Result<DyadicRepresentation> {
        if depth == 0 {
            return Err(Error::InvalidDepth);
        }
        let cap = self.level_cap(depth)?;
        let positive = LevelSets::build(self, depth, &cap)?;
        let negative = LevelSets::build(&self.negated(), depth, &cap)?;

        let images = self.indicator_images();
        let overlap = positive.component.meet(&negative.component);
        for i in overlap.ones() {
            assert!(
                images[i].is_zero(),
                "q⁺ and q⁻ overlap off the null coordinates at {i}"
            );
        }
        let approximation = &positive.sum - &negative.sum;
        Ok(DyadicRepresentation {
            depth,
            approximation,
            positive,
            negative,
        })
    }

    /// `ceil(2^n (1 + B))` with `B` an integer bound on `max_i |y_i|`,
    /// from `y_i² ≤ (W_{block(i)}/w_i) ‖𝔣‖²`.
    fn level_cap(&self, depth: u32) -> Result<BigInt> {
        let norm = self.norm_squared()?;
        let worst = norm.max_abs() * self.t.max_weight_ratio();
        let ceil = worst.ceil().to_integer();
        let mut root = ceil.sqrt();
        if &root * &root < ceil {
            root += 1;
        }
        Ok((BigInt::one() + root) << depth)
    }

    /// `(k/2^n) T(χ_i) ≤ 𝔣(χ_i) ≤ ((k+1)/2^n) T(χ_i)` for every `i ∈ h_k`,
    /// which by additivity gives the bracket for every component `p h_k`.
    pub fn bracket_holds(&self, levels: &LevelSets) -> bool {
        let step = rational::dyadic_step(levels.depth);
        let values = self.indicator_values();
        levels.levels.iter().all(|(k, h)| {
            let lo = Rational::from_integer(k.clone()) * &step;
            let hi = &lo + &step;
            h.ones().all(|i| {
                let t_i = &self.t.weights()[i] / self.t.block_weight(self.t.block_of(i));
                &lo * &t_i <= values[i] && values[i] <= &hi * &t_i
            })
        })
    }
}

fn level_component_from(f: &StrongFunctional, values: &[Rational], c: &Rational) -> ComponentMask {
    f.shifted_charge(values, c)
        .negated()
        .positive_atoms()
        .complement()
}

/// Nonzero level sets of one sign branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSets {
    pub depth: u32,
    /// `(k, h_k)` for every nonzero `h_k`, increasing in `k`.
    pub levels: Vec<(BigInt, ComponentMask)>,
    /// `q⁺(0)`, the union of the level sets.
    pub component: ComponentMask,
    /// `Σ k/2^n h_k`.
    pub sum: RieszElement,
}

impl LevelSets {
    fn build(f: &StrongFunctional, depth: u32, cap: &BigInt) -> Result<Self> {
        let values = f.indicator_values();
        let step = rational::dyadic_step(depth);
        let at = |k: &BigInt| {
            level_component_from(f, &values, &(Rational::from_integer(k.clone()) * &step))
        };

        let component = at(&BigInt::zero());
        let mut levels = Vec::new();
        let mut k = BigInt::zero();
        let mut current = component.clone();
        while !current.is_empty() {
            // Exponential then binary search for the next k where the component shrinks.
            let mut lo = k.clone();
            let mut stride = BigInt::one();
            let (mut hi, mut next) = loop {
                let probe = (&k + &stride).min(cap.clone());
                let c = at(&probe);
                if c != current {
                    break (probe, c);
                }
                if &probe == cap {
                    return Err(Error::Precondition(format!(
                        "level sets did not terminate below k = {cap}"
                    )));
                }
                lo = probe;
                stride <<= 1;
            };
            while &hi - &lo > BigInt::one() {
                let mid: BigInt = (&lo + &hi) >> 1;
                let c = at(&mid);
                if c == current {
                    lo = mid;
                } else {
                    hi = mid;
                    next = c;
                }
            }
            assert!(next.is_subset(&current), "level components must be nested");
            levels.push((lo, current.difference(&next)));
            k = hi;
            current = next;
        }

        let mut coords = vec![Rational::zero(); f.dim()];
        for (k, h) in &levels {
            let value = Rational::from_integer(k.clone()) * &step;
            for i in h.ones() {
                coords[i] = value.clone();
            }
        }
        Ok(Self {
            depth,
            levels,
            component,
            sum: RieszElement::new(coords),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicRepresentation {
    pub depth: u32,
    /// `ŷ_n = s_n - σ_n`.
    pub approximation: RieszElement,
    /// Level sets of `𝔣`.
    pub positive: LevelSets,
    /// Level sets of `-𝔣`.
    pub negative: LevelSets,
}

impl DyadicRepresentation {
    /// `C 2^{-n}` with `C = max_i W_{block(i)}/w_i`.
    pub fn error_bound(&self, t: &ExpectationOperator) -> Rational {
        t.max_weight_ratio() * rational::dyadic_step(self.depth)
    }

    /// Support of `ŷ⁺` lies in `q⁺` and that of `ŷ⁻` in `q⁻`.
    pub fn supports_nested(&self) -> bool {
        self.approximation
            .pos()
            .band_mask()
            .is_subset(&self.positive.component)
            && self
                .approximation
                .neg_part()
                .band_mask()
                .is_subset(&self.negative.component)
    }
}

/// Checks that `y ↦ T_y` is a norm-preserving, additive, `R(T)`-homogeneous
/// injection at `y`.
pub fn bijection_certificate(t: &ExpectationOperator, y: &RieszElement) -> Result<Vec<Check>> {
    let n = t.dim();
    let ty = StrongFunctional::density(t, y.clone())?;
    let mut checks = Vec::new();

    let rep = ty.exact_represent()?;
    checks.push(Check::new(
        "round-trip",
        "exact representer of T_y equals y",
        (rep != *y).then(|| format!("got {rep}")),
    ));

    let norm = ty.norm_squared()?;
    let expected = t.t_norm2_squared(y);
    checks.push(Check::new(
        "norm-equality",
        "‖T_y‖² = T(y²)",
        (norm != expected).then(|| format!("{norm} vs {expected}")),
    ));

    let images = ty.indicator_images();
    let injective = y.is_zero() || images.iter().any(|m| !m.is_zero());
    checks.push(Check::new(
        "injectivity",
        "y ≠ 0 implies T_y ≠ 0",
        (!injective).then(|| format!("T_y vanishes on every indicator for y = {y}")),
    ));

    let mut shifts: Vec<RieszElement> = (0..n)
        .map(|i| ComponentMask::from_indices(n, [i]).to_element())
        .collect();
    shifts.push(RieszElement::unit(n));
    let additive_witness = shifts.iter().find_map(|z| {
        let sum = StrongFunctional::density(t, y + z).ok()?;
        let tz = StrongFunctional::density(t, z.clone()).ok()?;
        let lhs = sum.indicator_images();
        let rhs: Vec<RieszElement> = images
            .iter()
            .zip(tz.indicator_images())
            .map(|(a, b)| a + &b)
            .collect();
        (lhs != rhs).then(|| format!("z = {z}"))
    });
    checks.push(Check::new(
        "additivity",
        "T_{y+z} = T_y + T_z for z ∈ {χ_i} ∪ {e}",
        additive_witness,
    ));

    let mut scalars: Vec<RieszElement> = (0..t.num_blocks())
        .map(|b| t.block_indicator(b).to_element())
        .collect();
    scalars.push(t.apply(y));
    let homogeneous_witness = scalars.iter().find_map(|r| {
        let scaled = StrongFunctional::density(t, r * y).ok()?;
        let lhs = scaled.indicator_images();
        let rhs: Vec<RieszElement> = images.iter().map(|m| r * m).collect();
        (lhs != rhs).then(|| format!("r = {r}"))
    });
    checks.push(Check::new(
        "homogeneity",
        "T_{ry} = r T_y for block indicators r and r = T(y)",
        homogeneous_witness,
    ));
    Ok(checks)
}
