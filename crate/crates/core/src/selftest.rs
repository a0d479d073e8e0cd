//! Seeded property campaign over every module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::{Certificate, Check};
use crate::commands::{
    negative_part_check, positive_piece_witness, sandwich_witness, spectral_error,
};
use crate::hahn_jordan::{default_theta, ComponentCharge};
use crate::lattice::{ComponentMask, MaskOp, PartitionAlgebra, RieszElement};
use crate::oracle::ChargeTable;
use crate::partial_inverse as pinv;
use crate::random;
use crate::rational::{self, Rational};
use crate::representation::{self, StrongFunctional};

/// First failure per named property, in registration order.
struct Tally {
    entries: Vec<(&'static str, &'static str, Option<String>)>,
    evaluations: u64,
}

impl Tally {
    fn record(
        &mut self,
        name: &'static str,
        scope: &'static str,
        trial: usize,
        witness: Option<String>,
    ) {
        self.evaluations += 1;
        let slot = match self.entries.iter().position(|(n, _, _)| *n == name) {
            Some(k) => k,
            None => {
                self.entries.push((name, scope, None));
                self.entries.len() - 1
            }
        };
        if self.entries[slot].2.is_none() {
            self.entries[slot].2 = witness.map(|w| format!("trial {trial}: {w}"));
        }
    }

    fn fail(&mut self, name: &'static str, scope: &'static str, trial: usize, err: crate::Error) {
        self.record(name, scope, trial, Some(format!("error: {err}")));
    }
}

fn first<T>(
    items: impl IntoIterator<Item = T>,
    mut f: impl FnMut(&T) -> Option<String>,
) -> Option<String> {
    items.into_iter().find_map(|x| f(&x))
}

fn lattice_suite(rng: &mut ChaCha8Rng, tally: &mut Tally, trial: usize) {
    let n = rng.random_range(1..=12);
    let a = random::vector(rng, n);
    let b = random::vector(rng, n);
    let (sup, inf) = a.sup_inf(&b).expect("same length");
    tally.record(
        "lattice.sup-plus-inf",
        "a ∨ b + a ∧ b = a + b",
        trial,
        (&sup + &inf != &a + &b).then(|| format!("a = {a}, b = {b}")),
    );
    let (pos, neg, abs) = a.pos_neg_abs();
    tally.record(
        "lattice.pos-neg",
        "a = a⁺ - a⁻, |a| = a⁺ + a⁻, a⁺ ∧ a⁻ = 0",
        trial,
        (&pos - &neg != a || &pos + &neg != abs || !pos.inf(&neg).is_zero())
            .then(|| format!("a = {a}")),
    );
    tally.record(
        "lattice.band-projection",
        "P_a a = a and P_a(e) ∧ (e - P_a e) = 0",
        trial,
        (a.band_mask().project(&a) != a).then(|| format!("a = {a}")),
    );
    let p = random::mask(rng, n);
    let q = random::mask(rng, n);
    let e = RieszElement::unit(n);
    let pe = p.to_element();
    tally.record(
        "lattice.component-meet",
        "p ∧ q = pq and p ∧ (e - p) = 0",
        trial,
        (p.meet(&q).to_element() != &pe * &q.to_element() || !pe.inf(&(&e - &pe)).is_zero())
            .then(|| format!("p = {p}, q = {q}")),
    );
    let algebra = random::partition(rng, n, 6);
    let members = algebra.members(6).expect("at most 6 atoms");
    let witness = first(&members, |x| {
        first(&members, |y| {
            [MaskOp::Meet, MaskOp::Join, MaskOp::Complement]
                .into_iter()
                .find(|&op| !algebra.contains(&x.op(y, op).expect("same length")))
                .map(|op| format!("{op:?}({x}, {y})"))
        })
    });
    tally.record(
        "lattice.algebra-closure",
        "members closed under meet, join, complement",
        trial,
        witness,
    );
    let strangers = ComponentMask::from_fn(n, |i| {
        i == 0 && algebra.atoms()[algebra.atom_of(0)].len() > 1
    });
    tally.record(
        "lattice.membership",
        "partial atoms are not members",
        trial,
        (!strangers.is_empty() && algebra.contains(&strangers)).then(|| format!("{strangers}")),
    );
}

fn expectation_suite(rng: &mut ChaCha8Rng, tally: &mut Tally, trial: usize) {
    let n = rng.random_range(1..=12);
    let t = random::operator(rng, n);
    let f = random::vector(rng, n);
    let g = random::vector(rng, n);
    let tf = t.apply(&f);
    tally.record(
        "expectation.projection",
        "T(Tf) = Tf",
        trial,
        (t.apply(&tf) != tf).then(|| format!("f = {f}")),
    );
    tally.record(
        "expectation.averaging",
        "T((Tg) f) = (Tg)(Tf)",
        trial,
        (t.apply(&(&t.apply(&g) * &f)) != &t.apply(&g) * &tf).then(|| format!("f = {f}, g = {g}")),
    );
    tally.record(
        "expectation.range",
        "Tf ∈ R(T)",
        trial,
        t.range_violation(&tf).map(|b| format!("block {b}")),
    );
    let e = RieszElement::unit(n);
    tally.record(
        "expectation.unit",
        "Te = e",
        trial,
        (t.apply(&e) != e).then(|| "Te ≠ e".into()),
    );
    let abs = f.abs();
    tally.record(
        "expectation.strict-positivity",
        "f ≠ 0 implies T|f| ≠ 0 on the blocks meeting supp f",
        trial,
        (!f.is_zero() && t.apply(&abs).is_zero()).then(|| format!("f = {f}")),
    );
    let report = t.holder(&f, &g);
    tally.record(
        "expectation.holder",
        "(T|fg|)² ≤ T(f²) T(g²)",
        trial,
        report.violation.map(|i| format!("coordinate {i}")),
    );
}

fn hahn_suite(rng: &mut ChaCha8Rng, tally: &mut Tally, trial: usize) {
    let (t, psi) = random::charge(rng, 12);
    let table = ChargeTable::build(&psi, 12).expect("at most 12 atoms");
    let q = psi.hahn_jordan();
    let solutions = table.brute_force_hahn();
    tally.record(
        "hahn.oracle-membership",
        "decomposition lies in the exhaustive solution set",
        trial,
        (!solutions.contains(&q)).then(|| format!("q = {q}")),
    );
    tally.record(
        "hahn.two-sided",
        "ψ(pq) ≥ 0, ψ(p(e - q)) ≤ 0 for all p ∈ B",
        trial,
        table
            .hahn_violation(&q)
            .map(|p| format!("q = {q}, p = {p}")),
    );
    let theta = default_theta();
    let alphas = table.exhaustive_alpha_all();
    let members: Vec<ComponentMask> = table.members().map(|(m, _)| m).collect();
    let mut alpha_w = None;
    let mut sandwich_w = None;
    let mut piece_w = None;
    let mut negative_w = None;
    for (m, alpha) in members.iter().zip(&alphas) {
        if alpha_w.is_none() && psi.alpha(m).ok().as_ref() != Some(alpha) {
            alpha_w = Some(format!("q = {m}"));
        }
        if sandwich_w.is_none() {
            sandwich_w = sandwich_witness(&psi, m, &theta).unwrap_or_else(|e| Some(e.to_string()));
        }
        if piece_w.is_none() {
            piece_w = positive_piece_witness(&psi, m).unwrap_or_else(|e| Some(e.to_string()));
        }
        if negative_w.is_none() {
            negative_w =
                negative_part_check(&psi, m, Some(&table)).unwrap_or_else(|e| Some(e.to_string()));
        }
    }
    tally.record(
        "hahn.alpha",
        "α(q) = sup of ψ below q, all q ∈ B",
        trial,
        alpha_w,
    );
    tally.record(
        "hahn.sandwich",
        "α ≤ 2ψ(q̂) ≤ 2α and (α - 2ψ(q̂))⁺q̂ = 0, all q ∈ B",
        trial,
        sandwich_w,
    );
    tally.record(
        "hahn.positive-piece",
        "ψ(u) ≤ α ≤ 2ψ(u), all q ∈ B",
        trial,
        piece_w,
    );
    tally.record(
        "hahn.negative-witness",
        "v ≤ q, ψ(v) ≤ -ψ(q)⁻, v strongly negative, all q ∈ B",
        trial,
        negative_w,
    );

    let pair = rng.random_range(0..members.len());
    let (p, r) = (&members[pair], &members[rng.random_range(0..members.len())]);
    let disjoint = r.difference(p);
    let additive = psi.evaluate(&p.join(&disjoint)).ok()
        == Some(&psi.evaluate(p).unwrap() + &psi.evaluate(&disjoint).unwrap());
    let block = t.block_indicator(rng.random_range(0..t.num_blocks()));
    let local = block.project(&psi.evaluate(p).unwrap()) == psi.evaluate(&p.meet(&block)).unwrap();
    tally.record(
        "hahn.charge-axioms",
        "ψ additive on disjoint members and ψ(pr) = rψ(p) for block indicators r",
        trial,
        (!additive || !local).then(|| format!("p = {p}, r = {r}")),
    );

    let f = random::vector(rng, t.dim());
    let from_density =
        ComponentCharge::from_density(&t, &f, psi.algebra().clone()).expect("refinement");
    let witness = first(&members, |m| {
        (from_density.evaluate(m).unwrap() != t.apply(&m.project(&f))).then(|| format!("p = {m}"))
    });
    tally.record(
        "hahn.density-charge",
        "ψ_f(p) = T(pf), all p ∈ B",
        trial,
        witness,
    );
}

fn inverse_suite(rng: &mut ChaCha8Rng, tally: &mut Tally, trial: usize) {
    let n = rng.random_range(1..=12);
    let g = random::vector(rng, n);
    let h = pinv::canonical_inverse(&g);
    tally.record(
        "inverse.laws",
        "gh = P_{|g|}e, inverse of h is g, g ≥ 0 ⇒ h ≥ 0",
        trial,
        (&g * &h != g.band_mask().to_element()
            || pinv::canonical_inverse(&h) != g
            || pinv::canonical_inverse(&g.abs()) != h.abs())
        .then(|| format!("g = {g}")),
    );
    let f = random::nonneg_vector(rng, n);
    let mut ladder_w = None;
    let mut sandwich_w = None;
    let mut convergence_w = None;
    let mut chain_w = None;
    let mut previous: Option<Rational> = None;
    for depth in 1..=20 {
        let ladder = pinv::spectral_masks(&f, depth).expect("nonnegative");
        let mut union = ComponentMask::empty(n);
        for (_, m) in ladder.levels() {
            if !union.meet(m).is_empty() && ladder_w.is_none() {
                ladder_w = Some(format!("f = {f}, n = {depth}: overlapping levels"));
            }
            union = union.join(m);
        }
        if union != f.band_mask() && ladder_w.is_none() {
            ladder_w = Some(format!("f = {f}, n = {depth}: levels miss the band"));
        }
        let (lo, hi) = pinv::dyadic_bounds(&f, depth).expect("nonnegative");
        let gap = f
            .band_mask()
            .to_element()
            .scale(&rational::dyadic_step(depth));
        if (!lo.le(&f) || !f.le(&hi) || !(&hi - &lo).le(&gap)) && sandwich_w.is_none() {
            sandwich_w = Some(format!("f = {f}, n = {depth}"));
        }
        let (error, bound) = spectral_error(&f, depth).expect("nonnegative");
        let grew = previous.as_ref().is_some_and(|p| &error > p);
        if (error > bound || grew) && convergence_w.is_none() {
            convergence_w = Some(format!(
                "f = {f}, n = {depth}: error {}",
                rational::format(&error)
            ));
        }
        previous = Some(error);
        if !pinv::inverse_chain_holds(&f, depth).expect("nonnegative") && chain_w.is_none() {
            chain_w = Some(format!("f = {f}, n = {depth}"));
        }
    }
    tally.record(
        "inverse.ladder-partition",
        "levels disjoint with union P_f e, n ≤ 20",
        trial,
        ladder_w,
    );
    tally.record(
        "inverse.dyadic-sandwich",
        "f̲_n ≤ f ≤ f̄_n, f̄_n - f̲_n ≤ 2^-n, n ≤ 20",
        trial,
        sandwich_w,
    );
    tally.record(
        "inverse.convergence",
        "‖h̲_n - h*‖ ≤ 2^{-n+1}(max h*)² and nonincreasing, n ≤ 20",
        trial,
        convergence_w,
    );
    tally.record(
        "inverse.chain",
        "h̲_n f ≤ P_f e ≤ h̲_n f + 2^-n h̲_n, n ≤ 20",
        trial,
        chain_w,
    );
}

fn representation_suite(rng: &mut ChaCha8Rng, tally: &mut Tally, trial: usize) {
    let n = rng.random_range(1..=12);
    let t = random::operator(rng, n);
    let y = random::vector(rng, n);
    match representation::bijection_certificate(&t, &y) {
        Ok(checks) => {
            for c in checks {
                let name = match c.name.as_str() {
                    "round-trip" => "represent.round-trip",
                    "norm-equality" => "represent.norm-equality",
                    "injectivity" => "represent.injectivity",
                    "additivity" => "represent.additivity",
                    _ => "represent.homogeneity",
                };
                tally.record(
                    name,
                    "Ψ: y ↦ T_y is a norm-preserving R(T)-linear bijection",
                    trial,
                    c.witness,
                );
            }
        }
        Err(e) => tally.fail(
            "represent.round-trip",
            "Ψ: y ↦ T_y is a norm-preserving R(T)-linear bijection",
            trial,
            e,
        ),
    }
    let f = StrongFunctional::density(&t, y.clone()).expect("same length");
    let norm = f.norm_squared().expect("representable");
    let probes: Vec<RieszElement> = (0..4).map(|_| random::vector(rng, n)).collect();
    tally.record(
        "represent.strong-bound",
        "𝔣(g)² ≤ ‖𝔣‖² T(g²)",
        trial,
        first(&probes, |g| {
            (!f.strong_bound_holds(&norm, g)).then(|| format!("g = {g}"))
        }),
    );
    let matrix = StrongFunctional::from_matrix(&t, StrongFunctional::density_matrix(&t, &y));
    tally.record(
        "represent.matrix-form",
        "the matrix of T_y validates and represents y",
        trial,
        match matrix {
            Ok(m) => (!m.extensionally_equal(&f) || m.exact_represent().ok().as_ref() != Some(&y))
                .then(|| format!("y = {y}")),
            Err(e) => Some(e.to_string()),
        },
    );
    let q = f.positive_component();
    let psi = ComponentCharge::new(
        PartitionAlgebra::discrete(n),
        t.partition().clone(),
        f.indicator_values(),
    )
    .expect("singletons");
    let table = ChargeTable::build(&psi, 12).expect("n ≤ 12");
    tally.record(
        "represent.positive-component",
        "𝔣(pq⁺) ≥ 0, 𝔣(p(e - q⁺)) ≤ 0 for all components p",
        trial,
        table
            .hahn_violation(&q)
            .map(|p| format!("y = {y}, p = {p}")),
    );
    let mut error_w = None;
    let mut levels_w = None;
    for depth in [4u32, 8, 12] {
        match f.dyadic_represent(depth) {
            Ok(d) => {
                let error = (&d.approximation - &y).max_abs();
                if error > d.error_bound(&t) && error_w.is_none() {
                    error_w = Some(format!("y = {y}, n = {depth}"));
                }
                let ok = [&d.positive, &d.negative].iter().all(|l| {
                    let mut union = ComponentMask::empty(n);
                    l.levels.iter().all(|(_, h)| {
                        let fresh = union.meet(h).is_empty();
                        union = union.join(h);
                        fresh
                    }) && union == l.component
                });
                if (!ok || !f.bracket_holds(&d.positive) || !d.supports_nested())
                    && levels_w.is_none()
                {
                    levels_w = Some(format!("y = {y}, n = {depth}"));
                }
            }
            Err(e) => error_w = error_w.or(Some(e.to_string())),
        }
    }
    tally.record(
        "represent.dyadic-error",
        "‖ŷ_n - y‖ ≤ C 2^-n, n ∈ {4, 8, 12}",
        trial,
        error_w,
    );
    tally.record(
        "represent.level-sets",
        "disjoint level sets summing to q⁺, bracket, supports",
        trial,
        levels_w,
    );
}

pub fn campaign(seed: u64, trials: usize) -> Certificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally {
        entries: Vec::new(),
        evaluations: 0,
    };
    for trial in 0..trials {
        lattice_suite(&mut rng, &mut tally, trial);
        expectation_suite(&mut rng, &mut tally, trial);
        hahn_suite(&mut rng, &mut tally, trial);
        inverse_suite(&mut rng, &mut tally, trial);
        representation_suite(&mut rng, &mut tally, trial);
    }
    let mut cert = Certificate::new("selftest", None);
    cert.output("seed", seed);
    cert.output("trials", trials);
    cert.output("propertyEvaluations", tally.evaluations);
    for (name, scope, witness) in tally.entries {
        cert.push(Check::new(
            name,
            format!("{scope} ({trials} trials)"),
            witness,
        ));
    }
    cert
}
