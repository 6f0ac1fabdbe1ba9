//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use coprod::advisor::{
    all_profiles, builtin_profile, coproduct_exists, family_exists, free_free, free_monad_profile, free_monad_rules,
    with_all_finitary, with_all_monads, CardinalClass, FixpointProfile, ProfileKind, Verdict,
};
use coprod::chain::{even_stage_comparison, StageSize};
use coprod::coproduct::{
    build, canonical_compare, exception_oracle, injective_morphism_transfer, special_case, CoproductMonad,
    LabelMorphism, Mode, SpecialCase,
};
use coprod::free::{free_sum_bijection, terms_of_size, verify_barr, Signature};
use coprod::layered::mode_agreement;
use coprod::monad::{check_laws, default_probes, parse_monad, ConstantFunctor, Exception};
use coprod::trnkova::{classify, closure_at_empty, compare_on_probes, monad_closure, zero_submonad, Classification};
use coprod::{Error, FinMap, FinSet, Functor, Label, MonadRef};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err(e: Error) -> String {
    e.to_string()
}

fn m(spec: &str) -> MonadRef {
    parse_monad(spec).expect("builtin")
}

fn cop(s: &str, t: &str) -> CoproductMonad {
    CoproductMonad::binary(m(s), m(t), Mode::Materialized { budget: 8 }).expect("consistent summands")
}

const CONSISTENT: [&str; 7] = [
    "maybe",
    "exception:1",
    "exception:2",
    "exception0:1",
    "powerset",
    "reader:2",
    "state:2",
];
const ALL_BUILTINS: [&str; 9] = [
    "maybe",
    "exception:1",
    "exception:2",
    "exception0:1",
    "powerset",
    "reader:2",
    "state:2",
    "terminal",
    "terminal0",
];

/// Every unordered pair of consistent builtins with the base sizes in
/// `0..=max` at which its chain converges within budget 8.
fn converged_pairs(max: usize) -> Vec<(CoproductMonad, Vec<FinSet>)> {
    let mut out = Vec::new();
    for (i, s) in CONSISTENT.iter().enumerate() {
        for t in &CONSISTENT[i..] {
            let c = cop(s, t);
            let sizes: Vec<FinSet> = (0..=max).map(FinSet::atoms).filter(|a| c.solve(a).is_ok()).collect();
            if !sizes.is_empty() {
                out.push((c, sizes));
            }
        }
    }
    out
}

fn oracle_isomorphism() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for t in ["maybe", "powerset", "reader:2"] {
        for ne in 1..=2 {
            let e = Exception::constants(ne);
            let c = CoproductMonad::binary(
                m(t),
                Arc::new(Exception::new(e.clone())),
                Mode::Materialized { budget: 8 },
            )
            .map_err(err)?;
            let oracle = exception_oracle(m(t), &e);
            for na in 0..=2 {
                let cmp = canonical_compare(&c, &oracle, &FinSet::atoms(na)).map_err(err)?;
                ensure!(cmp.passed(), "{t} |E|={ne} |A|={na}: {cmp:?}");
                ensure!(
                    cmp.mult_exhaustive,
                    "{t} |E|={ne} |A|={na}: multiplication only sampled"
                );
                checked += 1;
            }
        }
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(30), "took {took:?}");
    Ok(format!("{checked} comparisons bijective and exact in {took:.2?}"))
}

fn maybe_sizes() -> Outcome {
    let c = cop("maybe", "maybe");
    let mut sizes = Vec::new();
    for n in 0..=3 {
        let got = c.carrier(&FinSet::atoms(n)).map_err(err)?.len();
        ensure!(got == n + 2, "|A|={n}: {got}");
        sizes.push(got);
    }
    Ok(format!("sizes {sizes:?}"))
}

fn terminal_absorption() -> Outcome {
    let one = m("terminal");
    let zero = m("terminal0");
    let mut recorded = Vec::new();
    for t in ALL_BUILTINS {
        let (case, res) = special_case(&one, &m(t)).map_err(err)?.ok_or("no rule for 1 ⊕ T")?;
        ensure!(case == SpecialCase::TerminalAbsorbs, "1 ⊕ {t}: {case:?}");
        for a in default_probes() {
            let n = res.carrier(&a).map_err(err)?.len();
            ensure!(n == 1, "1 ⊕ {t} at |A|={}: {n} elements", a.len());
        }
        // the ∅-preserving variant: empty at ∅ iff ∅ carries a T-algebra,
        // i.e. iff T∅ = ∅
        let (case, res) = special_case(&zero, &m(t)).map_err(err)?.ok_or("no rule for 1₀ ⊕ T")?;
        let want_empty = m(t).carrier(&FinSet::empty()).map_err(err)?.is_empty();
        let at_empty = res.carrier(&FinSet::empty()).map_err(err)?.len();
        ensure!(
            at_empty == usize::from(!want_empty) || case == SpecialCase::TerminalAbsorbs,
            "1₀ ⊕ {t}: {case:?} has {at_empty} elements at ∅"
        );
        for a in default_probes().into_iter().skip(1) {
            ensure!(res.carrier(&a).map_err(err)?.len() == 1, "1₀ ⊕ {t} at |A|={}", a.len());
        }
        recorded.push(format!("{t}:{case:?}"));
    }
    Ok(format!("1₀ cases {}", recorded.join(" ")))
}

fn enough(report: &coprod::monad::LawReport) -> Result<(), String> {
    if let Some(f) = report.failures().next() {
        return Err(format!(
            "{}: {} fails at |A|={} on {:?}",
            report.monad, f.law, f.probe, f.witness
        ));
    }
    if let Some(o) = report.outcomes.iter().find(|o| !o.exhaustive && o.checked < 100) {
        return Err(format!("{}: only {} instances of {}", report.monad, o.checked, o.law));
    }
    Ok(())
}

fn law_suite() -> Outcome {
    let mut monads = 0;
    for name in ALL_BUILTINS {
        enough(&check_laws(m(name).as_ref(), &default_probes(), 100))?;
        monads += 1;
    }
    let pairs = converged_pairs(3);
    for (c, sizes) in &pairs {
        enough(&check_laws(c, sizes, 100))?;
    }
    Ok(format!(
        "{monads} builtins and {} converged coproducts lawful",
        pairs.len()
    ))
}

fn universal_property() -> Outcome {
    let mut targets = 0;
    for (s, t) in [("maybe", "maybe"), ("powerset", "maybe")] {
        let c = cop(s, t);
        let a = FinSet::atoms(1);
        let (free, unit) = c.free_multialgebra(&a).map_err(err)?;
        let report =
            coprod::bialgebra::verify_free_multialgebra(&free, &unit, 3, &|b, h| c.extend(&a, b, h)).map_err(err)?;
        ensure!(report.passed(), "{s} ⊕ {t}: {:?}", report.failures);
        ensure!(report.targets > 0, "{s} ⊕ {t}: no targets");
        targets += report.targets;
    }
    Ok(format!("unique extensions into {targets} bialgebras"))
}

fn embeddings() -> Outcome {
    let pairs = converged_pairs(3);
    let mut maps = 0;
    for (c, sizes) in &pairs {
        for a in sizes {
            for p in 0..2 {
                let e = c.embedding(p, a).map_err(err)?;
                ensure!(e.is_injective(), "{} summand {p} at |A|={}", c.name(), a.len());
                maps += 1;
            }
        }
    }
    let exc2 = m("exception:2");
    let rename = FinMap::new(
        FinSet::from_labels([Label::atom("err")]),
        Exception::constants(2),
        vec![Label::atom("e0")],
    )
    .map_err(err)?;
    let i = LabelMorphism::between_exceptions(m("maybe"), exc2.clone(), rename).map_err(err)?;
    let from = cop("maybe", "maybe");
    let to = CoproductMonad::binary(exc2.clone(), exc2, Mode::Materialized { budget: 8 }).map_err(err)?;
    for n in 0..=2 {
        let t = injective_morphism_transfer(&[i.clone(), i.clone()], &from, &to, &FinSet::atoms(n)).map_err(err)?;
        ensure!(t.is_injective(), "transfer not injective at |A|={n}");
        ensure!(
            t.dom().len() == n + 2 && t.cod().len() == n + 4,
            "transfer sizes at |A|={n}"
        );
    }
    Ok(format!("{maps} embeddings injective; transfer injective at |A| ≤ 2"))
}

fn divergence() -> Outcome {
    let p = m("powerset");
    let trace = match build(p.clone(), p, &FinSet::atoms(1), 8) {
        Err(Error::NoConvergence(t)) => t,
        Ok(_) => return Err("converged".into()),
        Err(e) => return Err(err(e)),
    };
    ensure!(trace.strictly_increasing(), "sizes not increasing: {trace}");
    // |P̄X| = 2^|X| - |X| with X = (other sort) + A
    let mut verified = 0;
    for w in trace.sizes.windows(2) {
        for sort in 0..2 {
            let (Some(prev), StageSize::Materialized(_) | StageSize::Counted(_)) = (w[0][1 - sort].value(), w[1][sort])
            else {
                continue;
            };
            let x = prev + 1;
            if x >= 127 {
                continue;
            }
            let want = (1u128 << x) - x;
            ensure!(
                w[1][sort].value() == Some(want),
                "stage size {:?}, expected {want}",
                w[1][sort]
            );
            verified += 1;
        }
    }
    ensure!(verified >= 4, "only {verified} growth steps known");
    let prof = builtin_profile("powerset").ok_or("no powerset profile")?;
    let d = coproduct_exists(&prof, &prof);
    ensure!(d.verdict == Verdict::NotExists, "advisor says {d}");
    Ok(format!(
        "diverged after {} stages; {verified} growth steps match; advisor {d}",
        trace.sizes.len()
    ))
}

fn mode_agreement_all() -> Outcome {
    let pairs = converged_pairs(2);
    let mut checks = 0;
    for (c, sizes) in &pairs {
        for a in sizes {
            let r = mode_agreement(c, a, 100, 7).map_err(|e| format!("{} at |A|={}: {e}", c.name(), a.len()))?;
            ensure!(r.passed(), "{} at |A|={}: {r:?}", c.name(), a.len());
            checks += 1;
        }
    }
    Ok(format!("{checks} pair/base combinations agree"))
}

/// Binary trees with `n` internal nodes over one leaf, by brute force.
fn binary_trees(n: usize) -> Vec<String> {
    if n == 0 {
        return vec!["x".into()];
    }
    let mut out = Vec::new();
    for k in 0..n {
        for l in binary_trees(k) {
            for r in binary_trees(n - 1 - k) {
                out.push(format!("({l} {r})"));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn free_monads() -> Outcome {
    let one = FinSet::atoms(1);
    for (spec, depth) in [("f/2", 3), ("f/1,c/0", 4), ("g/2,c/0", 3), ("f/1", 4)] {
        let sig = Signature::parse(spec).map_err(err)?;
        let r = verify_barr(&sig, &one, depth).map_err(err)?;
        ensure!(r.passed(), "{spec}: {:?}", r.rows);
    }
    let bin = Signature::parse("f/2").map_err(err)?;
    let counts: Vec<usize> = (0..5).map(|n| terms_of_size(&bin, &one, n).len()).collect();
    let oracle: Vec<usize> = (0..5).map(|n| binary_trees(n).len()).collect();
    ensure!(counts == oracle, "counts {counts:?}, brute force {oracle:?}");
    let mut rows = 0;
    for (l, r) in [("f/1", "g/1"), ("f/1", "c/0"), ("f/2", "g/1")] {
        let (l, r) = (Signature::parse(l).map_err(err)?, Signature::parse(r).map_err(err)?);
        let depth = if l.ops()[0].1 == 2 { 2 } else { 3 };
        for row in free_sum_bijection(&l, &r, &one, depth).map_err(err)? {
            ensure!(row.bijective, "{l} + {r}: {row:?}");
            rows += 1;
        }
    }
    Ok(format!("term counts {counts:?}; {rows} sum-signature rows bijective"))
}

fn trnkova() -> Outcome {
    for n in [1, 3] {
        let consts = FinSet::from_labels((0..n).map(|i| Label::atom(format!("m{i}"))));
        let c = closure_at_empty(&ConstantFunctor::preserving_empty(consts.clone())).map_err(err)?;
        ensure!(c.value_at_empty == consts, "|M|={n}: closure is {:?}", c.value_at_empty);
    }
    let probes = default_probes();
    let mut kinds = Vec::new();
    for name in ALL_BUILTINS {
        let s = m(name);
        let class = classify(s.as_ref()).map_err(err)?;
        let closed = monad_closure(s.clone()).map_err(err)?;
        match class {
            Classification::AlreadyClosed => {
                let d = compare_on_probes(&closed, s.as_ref(), &probes).map_err(err)?;
                ensure!(d.is_none(), "{name} is closed but its closure differs: {d:?}");
            }
            Classification::ZeroOfClosure => {
                ensure!(
                    s.carrier(&FinSet::empty()).map_err(err)?.is_empty(),
                    "{name} nonempty at ∅"
                );
                let z = zero_submonad(Arc::new(closed));
                let d = compare_on_probes(&z, s.as_ref(), &probes).map_err(err)?;
                ensure!(d.is_none(), "{name} is not the zero submonad of its closure: {d:?}");
            }
            other => return Err(format!("{name}: {other:?}")),
        }
        kinds.push(format!("{name}:{class:?}"));
    }
    let e = Exception::constants(2);
    let closed = monad_closure(Arc::new(Exception::preserving_empty(e.clone()))).map_err(err)?;
    enough(&check_laws(&closed, &probes, 100))?;
    let d = compare_on_probes(&closed, &Exception::new(e), &probes).map_err(err)?;
    ensure!(d.is_none(), "closure of exception0 differs from exception: {d:?}");
    Ok(kinds.join(" "))
}

fn even_stages() -> Outcome {
    let mut rows = 0;
    for (s, t) in [("powerset", "exception:1"), ("maybe", "maybe")] {
        for a in [None, Some(FinSet::atoms(1)), Some(FinSet::atoms(2))] {
            let out = even_stage_comparison(m(s), m(t), a.as_ref(), 6).map_err(err)?;
            ensure!(out.len() >= 2, "{s}, {t}: only {} stages", out.len());
            for r in &out {
                ensure!(
                    r.bijective == Some(true) && r.two_sorted == r.composite,
                    "{s}, {t}: {r:?}"
                );
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} even stages match"))
}

/// The decision table restated independently.
fn expected_cell(p: &FixpointProfile, q: &FixpointProfile) -> Verdict {
    use ProfileKind::*;
    let any = |f: &dyn Fn(&ProfileKind) -> bool| f(&p.kind) || f(&q.kind);
    if any(&|k| matches!(k, Inconsistent | SubstantiallyExceptional)) {
        return Verdict::Exists;
    }
    if any(&|k| matches!(k, NoFixpoints)) {
        return Verdict::NotExists;
    }
    if any(&|k| matches!(k, EventuallyAllCardinals)) {
        return Verdict::Exists;
    }
    match (&p.kind, &q.kind) {
        (CardinalClass(a), CardinalClass(b)) => match (a, b) {
            (self::CardinalClass::PowersBeyond, self::CardinalClass::PowersBeyond) => Verdict::Exists,
            (
                self::CardinalClass::Interval {
                    family: f,
                    complement: c,
                },
                self::CardinalClass::Interval {
                    family: g,
                    complement: d,
                },
            ) if f == g => {
                if c == d {
                    Verdict::Exists
                } else {
                    Verdict::NotExists
                }
            }
            _ => Verdict::Unknown,
        },
        _ => unreachable!(),
    }
}

fn advisor_table() -> Outcome {
    let all = all_profiles();
    let mut cells = 0;
    for p in &all {
        for q in &all {
            let got = coproduct_exists(p, q).verdict;
            ensure!(got == expected_cell(p, q), "({p}, {q}): {got:?}");
            cells += 1;
        }
    }
    let prof = |s: &str| builtin_profile(s).expect("profile");
    // the powerset row
    for other in [
        "powerset",
        "continuation",
        "reader",
        "state",
        "list",
        "maybe",
        "exception",
        "terminal",
    ] {
        let d = coproduct_exists(&prof("powerset"), &prof(other));
        let want = if matches!(
            prof(other).kind,
            ProfileKind::SubstantiallyExceptional | ProfileKind::Inconsistent
        ) {
            Verdict::Exists
        } else {
            Verdict::NotExists
        };
        ensure!(d.verdict == want, "powerset ⊕ {other}: {d}");
    }
    // finitary rows: coproducts with all finitary monads iff a free monad exists
    ensure!(
        with_all_finitary(&prof("reader")).verdict == Verdict::Exists,
        "reader row"
    );
    ensure!(
        with_all_finitary(&prof("powerset")).verdict == Verdict::NotExists,
        "powerset finitary row"
    );
    ensure!(
        with_all_monads(&prof("exception")).verdict == Verdict::Exists,
        "exception row"
    );
    ensure!(
        with_all_monads(&prof("reader")).verdict == Verdict::NotExists,
        "reader with all monads"
    );
    // finitary with any free monad
    for h in all.iter().chain([&FixpointProfile::constant()]) {
        if free_monad_profile(h).is_some() {
            let d = free_monad_rules(h, &FixpointProfile::finitary());
            ensure!(d.verdict == Verdict::Exists, "finitary ⊕ F_({h}): {d}");
        }
    }
    // interval classes and their complements
    let a = FixpointProfile::class(CardinalClass::Interval {
        family: "A".into(),
        complement: false,
    });
    let co_a = FixpointProfile::class(CardinalClass::Interval {
        family: "A".into(),
        complement: true,
    });
    ensure!(free_free(&a, &co_a).verdict == Verdict::NotExists, "F_A ⊕ F_co-A");
    // families
    let fam = |v: &[FixpointProfile]| family_exists(v).map(|d| d.verdict).map_err(err);
    let (e, n, f) = (
        FixpointProfile::exceptional(),
        FixpointProfile::no_fixpoints(),
        FixpointProfile::finitary(),
    );
    ensure!(
        fam(&[e.clone(), e.clone(), n.clone()])? == Verdict::Exists,
        "[exc, exc, none]"
    );
    ensure!(
        fam(&[n.clone(), n.clone(), e])? == Verdict::NotExists,
        "[none, none, exc]"
    );
    ensure!(fam(&[f.clone(), f.clone(), f])? == Verdict::Exists, "[fin, fin, fin]");
    ensure!(family_exists(&[n]).is_err(), "singleton family accepted");
    Ok(format!("{cells} binary cells plus corollary and family rows"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("oracle isomorphism with exception coproducts", oracle_isomorphism),
        ("maybe ⊕ maybe carrier sizes", maybe_sizes),
        ("terminal absorption", terminal_absorption),
        ("monad-law suite", law_suite),
        ("universal property of the free bialgebra", universal_property),
        ("embedding injectivity and morphism transfer", embeddings),
        ("divergence of powerset ⊕ powerset", divergence),
        ("layered terms agree with materialized carriers", mode_agreement_all),
        ("free monads", free_monads),
        ("closure at the empty set", trnkova),
        ("even stages of the two-sorted chain", even_stages),
        ("advisor decision table", advisor_table),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{took:.1?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
