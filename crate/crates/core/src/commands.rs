//! The CLI commands as library functions returning certificates.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::certificate::{Certificate, Check};
use crate::error::Error;
use crate::expectation::ExpectationOperator;
use crate::hahn_jordan::ComponentCharge;
use crate::instance::{InputError, Instance};
use crate::lattice::{ComponentMask, PartitionAlgebra, RieszElement};
use crate::oracle::ChargeTable;
use crate::partial_inverse as pinv;
use crate::rational::{self, Rational};
use crate::representation::{self, StrongFunctional};

pub const DEFAULT_ORACLE_BOUND: usize = 12;

#[derive(Debug)]
pub enum CommandError {
    Input(InputError),
    Usage(String),
    Computation(Error),
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(e) => e.fmt(f),
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Computation(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<InputError> for CommandError {
    fn from(e: InputError) -> Self {
        Self::Input(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        Self::Computation(e)
    }
}

/// Command-line overrides of the instance options.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub theta: Option<Rational>,
    pub oracle: bool,
    pub oracle_bound: Option<usize>,
    pub depth: Option<u32>,
}

impl RunOptions {
    fn depth(&self, inst: &Instance) -> u32 {
        self.depth.unwrap_or(inst.options.depth)
    }

    fn theta(&self, inst: &Instance) -> Rational {
        self.theta
            .clone()
            .unwrap_or_else(|| inst.options.theta.clone())
    }
}

pub fn mask_json(m: &ComponentMask) -> Value {
    Value::String(m.to_string())
}

pub fn vector_json(v: &RieszElement) -> Value {
    Value::from(v.to_strings())
}

fn at(q: &ComponentMask, i: usize) -> String {
    format!("q = {q}, coordinate {i}")
}

/// `α(q) ≤ θψ(q̂) ≤ θα(q)` and `(α(q) - θψ(q̂))⁺ q̂ = 0` for `q̂ = maximal_m(q, θ)`.
pub fn sandwich_witness(
    psi: &ComponentCharge,
    q: &ComponentMask,
    theta: &Rational,
) -> Result<Option<String>, Error> {
    let hat = psi.maximal_m(q, theta)?;
    let alpha = psi.alpha(q)?;
    let scaled = psi.evaluate(&hat)?.scale(theta);
    if !hat.is_subset(q) {
        return Ok(Some(format!("q = {q}: q̂ = {hat} is not below q")));
    }
    if let Some(i) = alpha.le_witness(&scaled) {
        return Ok(Some(format!("{}: α > θψ(q̂)", at(q, i))));
    }
    if let Some(i) = scaled.le_witness(&alpha.scale(theta)) {
        return Ok(Some(format!("{}: θψ(q̂) > θα", at(q, i))));
    }
    let slack = hat.project(&(&alpha - &scaled).pos());
    if let Some(i) = slack.coords().iter().position(|c| !c.is_zero()) {
        return Ok(Some(format!("{}: (α - θψ(q̂))⁺q̂ ≠ 0", at(q, i))));
    }
    Ok(None)
}

/// `u ≤ q`, `0 ≤ ψ(u) ≤ α(q) ≤ 2ψ(u)` for `u = positive_piece(q)`.
pub fn positive_piece_witness(
    psi: &ComponentCharge,
    q: &ComponentMask,
) -> Result<Option<String>, Error> {
    let u = psi.positive_piece(q)?;
    let alpha = psi.alpha(q)?;
    let value = psi.evaluate(&u)?;
    if !u.is_subset(q) {
        return Ok(Some(format!("q = {q}: u = {u} is not below q")));
    }
    if let Some(i) = RieszElement::zero(value.dim()).le_witness(&value) {
        return Ok(Some(format!("{}: ψ(u) < 0", at(q, i))));
    }
    if let Some(i) = value.le_witness(&alpha) {
        return Ok(Some(format!("{}: ψ(u) > α", at(q, i))));
    }
    if let Some(i) = alpha.le_witness(&value.scale(&rational::int(2))) {
        return Ok(Some(format!("{}: α > 2ψ(u)", at(q, i))));
    }
    Ok(None)
}

/// For `ψ(q)⁻ ≠ 0`: `v ≤ q`, `ψ(v) ≤ -ψ(q)⁻`, and `v` strongly negative,
/// exhaustively when a table is given.
pub fn negative_part_check(
    psi: &ComponentCharge,
    q: &ComponentMask,
    table: Option<&ChargeTable>,
) -> Result<Option<String>, Error> {
    let value = psi.evaluate(q)?;
    let neg = value.neg_part();
    if neg.is_zero() {
        return Ok(None);
    }
    let v = psi.negative_part_witness(q)?;
    if !v.is_subset(q) {
        return Ok(Some(format!("q = {q}: v = {v} is not below q")));
    }
    if let Some(i) = psi.evaluate(&v)?.le_witness(&-&neg) {
        return Ok(Some(format!("{}: ψ(v) > -ψ(q)⁻ for v = {v}", at(q, i))));
    }
    let violation = match table {
        Some(t) => t
            .strong_negativity_violation(&v)
            .map(|r| format!("r = {r}")),
        None => (!psi.is_strongly_negative(&v)?).then(|| "α(v) ≠ 0".to_string()),
    };
    Ok(violation.map(|r| format!("q = {q}: v = {v} is not strongly negative ({r})")))
}

/// Two-sided sign condition for the decomposition `q`.
pub fn hahn_witness(
    psi: &ComponentCharge,
    q: &ComponentMask,
    table: Option<&ChargeTable>,
) -> Result<Option<String>, Error> {
    if let Some(t) = table {
        return Ok(t.hahn_violation(q).map(|p| format!("p = {p}")));
    }
    if !psi.is_strongly_positive(q)? {
        return Ok(Some(format!("q = {q} is not strongly positive")));
    }
    let rest = q.complement();
    if !psi.is_strongly_negative(&rest)? {
        return Ok(Some(format!("e - q = {rest} is not strongly negative")));
    }
    Ok(None)
}

fn first_witness<I, F>(items: I, mut f: F) -> Result<Option<String>, Error>
where
    I: IntoIterator,
    F: FnMut(I::Item) -> Result<Option<String>, Error>,
{
    for item in items {
        if let Some(w) = f(item)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

pub fn run_decompose(inst: &Instance, opts: &RunOptions) -> Result<Certificate, CommandError> {
    let psi = inst
        .charge_or_density()
        .ok_or_else(|| InputError::new("", "decompose requires a charge or a density"))?;
    let theta = opts.theta(inst);
    if theta <= Rational::one() {
        return Err(Error::InvalidTheta(rational::format(&theta)).into());
    }
    let oracle = opts.oracle || inst.options.oracle;
    let bound = opts.oracle_bound.unwrap_or(DEFAULT_ORACLE_BOUND);
    let table = if oracle {
        Some(
            ChargeTable::build(&psi, bound)
                .map_err(|e| InputError::new("/algebraAtoms", e.to_string()))?,
        )
    } else {
        None
    };

    let mut cert = Certificate::new("decompose", Some(inst.digest.clone()));
    let q = psi.hahn_jordan();
    let e = ComponentMask::full(psi.dim());
    cert.output("q", mask_json(&q));
    cert.output("psiQ", vector_json(&psi.evaluate(&q)?));
    cert.output(
        "psiComplement",
        vector_json(&psi.evaluate(&q.complement())?),
    );
    cert.output("theta", rational::format(&theta));
    cert.output("atoms", psi.algebra().num_atoms());

    cert.push(Check::new(
        "hahn-two-sided",
        "ψ(pq) ≥ 0 and ψ(p(e - q)) ≤ 0 for all p ∈ B",
        hahn_witness(&psi, &q, table.as_ref())?,
    ));

    match &table {
        None => {
            cert.push(Check::new(
                "sandwich",
                "q = e",
                sandwich_witness(&psi, &e, &theta)?,
            ));
            cert.push(Check::new(
                "positive-piece",
                "q = e",
                positive_piece_witness(&psi, &e)?,
            ));
            cert.push(Check::new(
                "negative-part-witness",
                "q = e",
                negative_part_check(&psi, &e, None)?,
            ));
        }
        Some(t) => {
            let solutions = t.brute_force_hahn();
            cert.output("oracleSolutions", solutions.len());
            cert.push(Check::new(
                "oracle-membership",
                "q among the exhaustive decompositions",
                (!solutions.contains(&q))
                    .then(|| format!("q = {q} not among {} solutions", solutions.len())),
            ));
            let members: Vec<_> = t.members().map(|(m, _)| m).collect();
            let alphas = t.exhaustive_alpha_all();
            cert.push(Check::new(
                "alpha-exhaustive",
                "α(q) equals the supremum over members below q, all q ∈ B",
                first_witness(members.iter().zip(&alphas), |(m, a)| {
                    Ok((psi.alpha(m)? != *a).then(|| format!("q = {m}")))
                })?,
            ));
            cert.push(Check::new(
                "sandwich",
                "all q ∈ B",
                first_witness(&members, |m| sandwich_witness(&psi, m, &theta))?,
            ));
            cert.push(Check::new(
                "positive-piece",
                "all q ∈ B",
                first_witness(&members, |m| positive_piece_witness(&psi, m))?,
            ));
            cert.push(Check::new(
                "negative-part-witness",
                "all q ∈ B with ψ(q)⁻ ≠ 0, strong negativity by enumeration",
                first_witness(&members, |m| negative_part_check(&psi, m, Some(t)))?,
            ));
        }
    }
    Ok(cert)
}

/// `|ŷ_i| ≤ |y_i|` with matching sign.
fn truncation_witness(approx: &RieszElement, y: &RieszElement) -> Option<String> {
    (0..y.dim())
        .find(|&i| {
            let (a, b) = (approx.get(i), y.get(i));
            let zero = Rational::zero();
            if b >= &zero {
                !(&zero <= a && a <= b)
            } else {
                !(b <= a && a <= &zero)
            }
        })
        .map(|i| {
            format!(
                "coordinate {i}: ŷ = {}, y = {}",
                rational::format(approx.get(i)),
                rational::format(y.get(i))
            )
        })
}

fn level_witness(levels: &representation::LevelSets) -> Option<String> {
    let mut union = ComponentMask::empty(levels.component.len());
    for (k, h) in &levels.levels {
        if !union.meet(h).is_empty() {
            return Some(format!("h_{k} meets an earlier level set"));
        }
        union = union.join(h);
    }
    (union != levels.component).then(|| format!("Σ h_k = {union} but q⁺ = {}", levels.component))
}

/// Exhaustive sign check of `q⁺` for `𝔣` over all `2^n` components.
fn positive_component_witness(
    f: &StrongFunctional,
    q: &ComponentMask,
    bound: usize,
) -> Result<Option<String>, Error> {
    let t = f.operator();
    let psi = ComponentCharge::new(
        PartitionAlgebra::discrete(f.dim()),
        t.partition().clone(),
        f.indicator_values(),
    )?;
    let table = ChargeTable::build(&psi, bound)?;
    Ok(table.hahn_violation(q).map(|p| format!("p = {p}")))
}

pub fn run_represent(inst: &Instance, opts: &RunOptions) -> Result<Certificate, CommandError> {
    let f = inst
        .functional
        .as_ref()
        .ok_or_else(|| InputError::new("/functional", "represent requires a functional"))?;
    let depth = opts.depth(inst);
    let t = f.operator();
    let mut cert = Certificate::new("represent", Some(inst.digest.clone()));

    let y = f.exact_represent()?;
    let dyadic = f.dyadic_represent(depth)?;
    let error = (&dyadic.approximation - &y).max_abs();
    let bound = dyadic.error_bound(t);
    let norm = f.norm_squared()?;

    cert.output("representer", vector_json(&y));
    cert.output("depth", depth);
    cert.output("approximation", vector_json(&dyadic.approximation));
    cert.output("errorMaxAbs", rational::format(&error));
    cert.output("errorBound", rational::format(&bound));
    cert.output("normSquared", vector_json(&norm));
    cert.output("positiveComponent", mask_json(&f.positive_component()));
    cert.output(
        "levelSets",
        json!({
            "positive": dyadic.positive.levels.len(),
            "negative": dyadic.negative.levels.len(),
        }),
    );

    if let representation::FunctionalForm::Density(given) = f.form() {
        cert.push(Check::new(
            "representer-matches-density",
            "exact representer equals the given y",
            (y != *given).then(|| format!("got {y}")),
        ));
    }
    cert.push(Check::new(
        "exact-representation",
        "T(χ_i y) = 𝔣(χ_i) for every coordinate",
        None,
    ));
    cert.push(Check::new(
        "dyadic-error",
        "‖ŷ_n - y‖_∞ ≤ C 2^{-n}",
        (error > bound).then(|| {
            format!(
                "error {} > {}",
                rational::format(&error),
                rational::format(&bound)
            )
        }),
    ));
    cert.push(Check::new(
        "dyadic-truncation",
        "ŷ_n lies between 0 and y coordinatewise",
        truncation_witness(&dyadic.approximation, &y),
    ));
    cert.push(Check::new(
        "norm-equality",
        "‖𝔣‖² = T(y²)",
        (norm != t.t_norm2_squared(&y)).then(|| format!("{norm}")),
    ));
    let probes: Vec<RieszElement> = (0..f.dim())
        .map(|i| ComponentMask::from_indices(f.dim(), [i]).to_element())
        .chain([RieszElement::unit(f.dim()), y.clone(), y.abs()])
        .collect();
    cert.push(Check::new(
        "strong-bound",
        "𝔣(g)² ≤ ‖𝔣‖² T(g²) for g ∈ {χ_i} ∪ {e, y, |y|}",
        probes
            .iter()
            .position(|g| !f.strong_bound_holds(&norm, g))
            .map(|k| format!("g = {}", probes[k])),
    ));
    let bound_atoms = opts.oracle_bound.unwrap_or(DEFAULT_ORACLE_BOUND);
    if f.dim() <= bound_atoms {
        let q = f.positive_component();
        cert.push(Check::new(
            "positive-component",
            "𝔣(pq⁺) ≥ 0 and 𝔣(p(e - q⁺)) ≤ 0 for all components p",
            positive_component_witness(f, &q, bound_atoms)?,
        ));
    }
    cert.push(Check::new(
        "level-sets-positive",
        "h_k disjoint with Σ h_k = q⁺",
        level_witness(&dyadic.positive),
    ));
    cert.push(Check::new(
        "level-sets-negative",
        "h_k disjoint with Σ h_k = q⁻",
        level_witness(&dyadic.negative),
    ));
    cert.push(Check::new(
        "bracket",
        "(k/2^n) T(p h_k) ≤ 𝔣(p h_k) ≤ ((k+1)/2^n) T(p h_k)",
        (!f.bracket_holds(&dyadic.positive) || !f.negated().bracket_holds(&dyadic.negative))
            .then(|| "some h_k".to_string()),
    ));
    cert.push(Check::new(
        "support",
        "supp ŷ⁺ ⊆ q⁺ and supp ŷ⁻ ⊆ q⁻",
        (!dyadic.supports_nested()).then(|| format!("ŷ = {}", dyadic.approximation)),
    ));
    Ok(cert)
}

fn ladder_witness(f: &RieszElement, depth: u32) -> Result<Option<String>, Error> {
    let ladder = pinv::spectral_masks(f, depth)?;
    let mut union = ComponentMask::empty(f.dim());
    for (j, m) in ladder.levels() {
        if !union.meet(m).is_empty() {
            return Ok(Some(format!("q_{{{depth},{j}}} overlaps an earlier level")));
        }
        union = union.join(m);
    }
    Ok((union != f.band_mask()).then(|| format!("Σ q = {union}, band = {}", f.band_mask())))
}

fn sandwich_bounds_witness(f: &RieszElement, depth: u32) -> Result<Option<String>, Error> {
    let (lo, hi) = pinv::dyadic_bounds(f, depth)?;
    if let Some(i) = lo.le_witness(f) {
        return Ok(Some(format!("coordinate {i}: f̲ > f")));
    }
    if let Some(i) = f.le_witness(&hi) {
        return Ok(Some(format!("coordinate {i}: f > f̄")));
    }
    let gap = f
        .band_mask()
        .to_element()
        .scale(&rational::dyadic_step(depth));
    Ok((&hi - &lo)
        .le_witness(&gap)
        .map(|i| format!("coordinate {i}: f̄ - f̲ > 2^-n")))
}

/// Error of `h̲_n` against the exact inverse and the bound `2^{-n+1} (max h*)²`.
pub fn spectral_error(f: &RieszElement, depth: u32) -> Result<(Rational, Rational), Error> {
    let exact = pinv::canonical_inverse(f);
    let approx = pinv::spectral_inverse(f, depth)?;
    let error = (&approx - &exact).max_abs();
    let top = exact.max_abs();
    Ok((
        error,
        rational::dyadic_step(depth) * rational::int(2) * &top * &top,
    ))
}

pub fn run_invert(inst: &Instance, opts: &RunOptions) -> Result<Certificate, CommandError> {
    let g = inst
        .density
        .as_ref()
        .ok_or_else(|| InputError::new("/density", "invert requires a density"))?;
    let depth = opts.depth(inst);
    let mut cert = Certificate::new("invert", Some(inst.digest.clone()));
    let h = pinv::canonical_inverse(g);
    let approx = pinv::signed_spectral_inverse(g, depth)?;
    let f = g.abs();
    let (error, bound) = spectral_error(&f, depth)?;

    cert.output("inverse", vector_json(&h));
    cert.output("depth", depth);
    cert.output("approximation", vector_json(&approx));
    cert.output("errorMaxAbs", rational::format(&error));
    cert.output("errorBound", rational::format(&bound));

    let band = g.band_mask();
    cert.push(Check::new(
        "product",
        "g h = P_{|g|} e",
        (g * &h != band.to_element()).then(|| format!("g h = {}", g * &h)),
    ));
    cert.push(Check::new(
        "canonical",
        "(I - P_{|g|}) h = 0",
        band.complement()
            .ones()
            .find(|&i| !h.get(i).is_zero())
            .map(|i| format!("coordinate {i}")),
    ));
    cert.push(Check::new(
        "involution",
        "inverse of h is g",
        (pinv::canonical_inverse(&h) != *g).then(|| format!("{}", pinv::canonical_inverse(&h))),
    ));
    cert.push(Check::new(
        "positivity",
        "h⁺ and h⁻ are the inverses of g⁺ and g⁻",
        (h.pos() != pinv::canonical_inverse(&g.pos())
            || h.neg_part() != pinv::canonical_inverse(&g.neg_part()))
        .then(|| format!("h = {h}")),
    ));
    cert.push(Check::new(
        "ladder-partition",
        "levels of |g| partition its band",
        ladder_witness(&f, depth)?,
    ));
    cert.push(Check::new(
        "dyadic-sandwich",
        "f̲_n ≤ |g| ≤ f̄_n, f̄_n - f̲_n ≤ 2^-n",
        sandwich_bounds_witness(&f, depth)?,
    ));
    let lower = pinv::spectral_inverse(&f, depth)?;
    cert.push(Check::new(
        "lower-approximant",
        "h̲_n ≤ |g|⁻¹",
        lower
            .le_witness(&pinv::canonical_inverse(&f))
            .map(|i| format!("coordinate {i}")),
    ));
    cert.push(Check::new(
        "inverse-chain",
        "h̲_n f ≤ h̲_n f̄_n = P_f e and P_f e - 2^-n h̲_n ≤ h̲_n f",
        (!pinv::inverse_chain_holds(&f, depth)?).then(|| format!("depth {depth}")),
    ));
    cert.push(Check::new(
        "spectral-error",
        "‖h̲_n - h*‖_∞ ≤ 2^{-n+1} (max h*)²",
        (error > bound).then(|| {
            format!(
                "error {} > {}",
                rational::format(&error),
                rational::format(&bound)
            )
        }),
    ));
    Ok(cert)
}

/// Every command that applies to the instance, plus Hölder and bijection
/// checks on the density.
pub fn run_verify(inst: &Instance, opts: &RunOptions) -> Result<Certificate, CommandError> {
    let mut cert = Certificate::new("verify", Some(inst.digest.clone()));
    let mut ran = Vec::new();
    if inst.charge.is_some() || inst.density.is_some() {
        cert.absorb("decompose", run_decompose(inst, opts)?);
        ran.push("decompose");
    }
    if inst.functional.is_some() {
        cert.absorb("represent", run_represent(inst, opts)?);
        ran.push("represent");
    }
    if let Some(g) = &inst.density {
        cert.absorb("invert", run_invert(inst, opts)?);
        ran.push("invert");
        let t: &ExpectationOperator = &inst.operator;
        let e = RieszElement::unit(g.dim());
        for (label, other) in [("e", &e), ("density", g)] {
            let report = t.holder(g, other);
            cert.push(Check::new(
                format!("holder.{label}"),
                "(T|fg|)² ≤ T(f²) T(g²)",
                report.violation.map(|i| format!("coordinate {i}")),
            ));
        }
        cert.extend(
            representation::bijection_certificate(t, g)?
                .into_iter()
                .map(|mut c| {
                    c.name = format!("bijection.{}", c.name);
                    c
                }),
        );
        ran.push("holder");
        ran.push("bijection");
    }
    if ran.is_empty() {
        return Err(
            InputError::new("", "nothing to verify: no charge, density or functional").into(),
        );
    }
    cert.output("suites", Value::from(ran));
    Ok(cert)
}

pub fn run_selftest(seed: u64, trials: usize) -> Result<Certificate, CommandError> {
    if trials == 0 {
        return Err(CommandError::Usage("trials must be at least 1".into()));
    }
    Ok(crate::selftest::campaign(seed, trials))
}
