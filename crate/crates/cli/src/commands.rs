use std::collections::BTreeMap;

use clap::Args;
use coprod::advisor::{
    builtin_profile, family_exists, free_free, free_monad_rules, parse_declaration, Decision, Verdict,
};
use coprod::chain::{even_stage_comparison, run_chain, ChainOutcome};
use coprod::complement::{complement_cardinality, complement_carrier, minimal_support};
use coprod::coproduct::{build_family, canonical_compare, ExceptionOracle};
use coprod::free::{coproduct_with_free, free_sum_bijection, terms_of_size, verify_barr};
use coprod::layered::mode_agreement;
use coprod::monad::{check_laws_seeded, classify_consistency, default_probes, parse_functor, parse_monad, LawReport};
use coprod::trnkova::{classify, closure_at_empty, substantially_constant, substantially_exceptional};
use coprod::{CoproductMonad, Error, FinSet, FixpointProfile, Label, Layered, Mode, MonadRef, Result, Signature};

use crate::report::Report;

/// Options shared by every command.
#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub probes: usize,
}

#[derive(Args, Debug)]
pub struct BaseArgs {
    /// Size of the variable set; variables are named a, b, c, ...
    #[arg(long, default_value_t = 1, conflicts_with = "labels")]
    pub base: usize,
    /// Explicit variable names, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
}

impl BaseArgs {
    fn set(&self) -> Result<FinSet> {
        match &self.labels {
            None => Ok(FinSet::atoms(self.base)),
            Some(names) => {
                let set = FinSet::from_labels(names.iter().map(|n| Label::atom(n.trim())));
                if set.len() != names.len() {
                    return Err(Error::BadSpecifier("duplicate variable names".into()));
                }
                Ok(set)
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct SumArgs {
    /// First summand, e.g. `powerset` or `exception:2`.
    #[arg(long)]
    pub left: String,
    /// Second summand.
    #[arg(long)]
    pub right: String,
    /// Further summands.
    #[arg(long = "also")]
    pub also: Vec<String>,
    #[command(flatten)]
    pub base: BaseArgs,
    /// Maximum number of chain steps.
    #[arg(long, default_value_t = 16)]
    pub budget: usize,
}

impl SumArgs {
    fn specs(&self) -> Vec<String> {
        let mut v = vec![self.left.clone(), self.right.clone()];
        v.extend(self.also.iter().cloned());
        v
    }

    fn summands(&self) -> Result<Vec<MonadRef>> {
        self.specs().iter().map(|s| parse_monad(s)).collect()
    }
}

fn labels(set: &FinSet) -> Vec<String> {
    set.iter().map(|l| l.to_string()).collect()
}

fn probes_up_to(n: usize) -> Vec<FinSet> {
    (0..=n).map(FinSet::atoms).collect()
}

/// Carriers above this size are reported by size only.
const LIST_LIMIT: usize = 256;

fn put_carrier(r: &mut Report, key: &str, set: &FinSet) {
    r.put(&format!("{key}_size"), set.len());
    if set.len() <= LIST_LIMIT {
        r.put(key, labels(set));
    }
}

/// One check per law, over all probes.
fn law_checks(r: &mut Report, prefix: &str, report: &LawReport) {
    let mut order: Vec<String> = Vec::new();
    let mut by_law: BTreeMap<String, (usize, bool, Option<String>)> = BTreeMap::new();
    for o in &report.outcomes {
        let key = o.law.to_string();
        let entry = by_law.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0, true, None)
        });
        entry.0 += o.checked;
        entry.1 &= o.exhaustive;
        if entry.2.is_none() {
            entry.2 = o.witness.as_ref().map(|w| format!("{w} at |X| = {}", o.probe));
        }
    }
    for law in order {
        let (checked, exhaustive, witness) = by_law.remove(&law).unwrap_or_default();
        let how = if exhaustive { "exhaustive" } else { "sampled" };
        r.check_with(
            &format!("{prefix}{law}"),
            witness.is_none(),
            format!("{checked} instances, {how}"),
            witness,
        );
    }
}

/// Declared profile, builtin profile (ignoring `:params` and a `-profile`
/// suffix), or a profile expression.
fn resolve_profile(name: &str, declared: &BTreeMap<String, FixpointProfile>) -> Result<FixpointProfile> {
    let name = name.trim();
    if let Some(p) = declared.get(name) {
        return Ok(p.clone());
    }
    let bare = name.split(':').next().unwrap_or(name);
    let bare = bare.strip_suffix("-profile").unwrap_or(bare);
    if let Some(p) = builtin_profile(bare) {
        return Ok(p);
    }
    name.parse()
        .map_err(|_| Error::UnknownMonad(format!("{name} (no declared or builtin profile)")))
}

fn put_decision(r: &mut Report, d: &Decision) {
    r.put("verdict", format!("{:?}", d.verdict));
    r.put("rule", d.rule.description());
}

fn advisor_for(specs: &[String]) -> Result<Decision> {
    let profiles = specs
        .iter()
        .map(|s| resolve_profile(s, &BTreeMap::new()))
        .collect::<Result<Vec<_>>>()?;
    family_exists(&profiles)
}

pub fn coprod(args: &SumArgs, cfg: Settings) -> Result<Report> {
    let specs = args.specs();
    let summands = args.summands()?;
    let a = args.base.set()?;
    let mut r = Report::new("coprod");
    r.put("summands", summands.iter().map(|m| m.name()).collect::<Vec<_>>());
    r.put("base", labels(&a));
    let advice = advisor_for(&specs).ok();
    if let Some(d) = &advice {
        r.put("advisor", d.to_string());
    }
    let built = match build_family(summands.clone(), &a, args.budget) {
        Ok(b) => b,
        Err(Error::NoConvergence(trace)) => {
            r.undecided();
            r.put("divergence", trace.to_string());
            if let Some(d) = &advice {
                put_decision(&mut r, d);
            }
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    put_carrier(&mut r, "carrier", &built.carrier);
    if let Some(case) = &built.special {
        r.put("special_case", case);
        let probes = probes_up_to(cfg.probes.min(a.len()));
        let laws = check_laws_seeded(built.monad.as_ref(), &probes, cfg.samples, cfg.seed);
        law_checks(&mut r, "law/", &laws);
        return Ok(r);
    }
    r.put("converged_at", built.converged_at);

    let cop = CoproductMonad::new(summands.clone(), Mode::Materialized { budget: args.budget })?;
    let probes: Vec<FinSet> = probes_up_to(cfg.probes.min(a.len()))
        .into_iter()
        .filter(|x| cop.solve(x).is_ok())
        .collect();
    let laws = check_laws_seeded(&cop, &probes, cfg.samples, cfg.seed);
    law_checks(&mut r, "law/", &laws);

    for (p, s) in summands.iter().enumerate() {
        let emb = cop.embedding(p, &a)?;
        let witness = emb.collision();
        r.check_with(
            &format!("embedding/{p}"),
            witness.is_none(),
            format!("{} into the coproduct, {} elements", s.name(), emb.dom().len()),
            witness,
        );
    }

    if let [s, t] = summands.as_slice() {
        let (base, shape, index) = match (s.exception_shape(), t.exception_shape()) {
            (_, Some(shape)) => (Some(s), Some(shape), 1),
            (Some(shape), None) => (Some(t), Some(shape), 0),
            _ => (None, None, 0),
        };
        if let (Some(base), Some(shape)) = (base, shape) {
            let oracle = ExceptionOracle::new(base.clone(), shape.constants, index, shape.preserves_empty);
            let cmp = canonical_compare(&cop, &oracle, &a)?;
            let how = if cmp.mult_exhaustive { "exhaustive" } else { "sampled" };
            r.check_with(
                "oracle",
                cmp.passed(),
                format!(
                    "{} against {} elements, multiplication {how} on {}",
                    cmp.constructed_size, cmp.oracle_size, cmp.mult_checked
                ),
                cmp.mismatch
                    .clone()
                    .or(cmp.mult_witness.as_ref().map(|w| w.to_string())),
            );
        }
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct MonadArgs {
    /// Monad specifier, e.g. `state:2`.
    #[arg(long)]
    pub monad: String,
}

pub fn laws(args: &MonadArgs, cfg: Settings) -> Result<Report> {
    let m = parse_monad(&args.monad)?;
    let mut r = Report::new("laws");
    r.put("monad", m.name());
    let report = check_laws_seeded(m.as_ref(), &probes_up_to(cfg.probes), cfg.samples, cfg.seed);
    law_checks(&mut r, "", &report);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct ComplementArgs {
    #[arg(long)]
    pub monad: String,
    #[command(flatten)]
    pub base: BaseArgs,
}

pub fn complement(args: &ComplementArgs, _cfg: Settings) -> Result<Report> {
    let m = parse_monad(&args.monad)?;
    let x = args.base.set()?;
    let bar = complement_carrier(m.as_ref(), &x)?;
    let mut r = Report::new("complement");
    r.put("monad", m.name());
    put_carrier(&mut r, "complement", &bar);
    if let Some(n) = complement_cardinality(m.as_ref(), x.len() as u128) {
        r.check(
            "cardinality",
            n == bar.len() as u128,
            format!("formula {n}, enumerated {}", bar.len()),
        );
    }
    let unit = bar.iter().find(|s| m.unit_preimage(s).is_some());
    r.check_with("no-units", unit.is_none(), "no element is a unit", unit);
    if bar.len() <= LIST_LIMIT {
        let mut supports = BTreeMap::new();
        for s in bar.iter() {
            supports.insert(s.to_string(), labels(&minimal_support(m.as_ref(), &x, s)?));
        }
        r.put("supports", supports);
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    #[command(flatten)]
    pub sum: SumArgs,
    /// Also compare even stages with the one-sorted composite chain.
    #[arg(long)]
    pub even: bool,
}

pub fn chain(args: &ChainArgs, _cfg: Settings) -> Result<Report> {
    let summands = args.sum.summands()?;
    let a = args.sum.base.set()?;
    let cop = CoproductMonad::new(
        summands.clone(),
        Mode::Materialized {
            budget: args.sum.budget,
        },
    )?;
    let sys = cop.system(&a)?;
    let mut r = Report::new("chain");
    r.put("sorts", sys.names());
    match run_chain(&sys, args.sum.budget)? {
        ChainOutcome::Converged(sol) => {
            let rows: Vec<String> = sol
                .chain
                .stages
                .iter()
                .enumerate()
                .map(|(i, st)| {
                    let sizes: Vec<String> = sys
                        .names()
                        .iter()
                        .zip(st)
                        .map(|(n, s)| format!("{n}={}", s.len()))
                        .collect();
                    format!("stage {i}: {}", sizes.join(" "))
                })
                .collect();
            r.put("stages", rows.join("\n"));
            r.put("converged_at", sol.converged_at);
        }
        ChainOutcome::Diverged(trace) => {
            r.put("divergence", trace.to_string());
            r.undecided();
        }
    }
    if args.even {
        let [s, t] = summands.as_slice() else {
            return Err(Error::BadSpecifier("--even needs exactly two summands".into()));
        };
        let rows = even_stage_comparison(s.clone(), t.clone(), Some(&a), args.sum.budget)?;
        for row in &rows {
            let same_size = row.two_sorted.value() == row.composite.value();
            r.check(
                &format!("even-stage/{}", row.stage),
                same_size && row.bijective != Some(false),
                format!("two-sorted {} vs composite {}", row.two_sorted, row.composite),
            );
        }
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct ClosureArgs {
    /// Functor specifier: any monad, `const:n`, `const0:n` or `pA:k,..`.
    #[arg(long)]
    pub functor: String,
}

pub fn closure(args: &ClosureArgs, _cfg: Settings) -> Result<Report> {
    let h = parse_functor(&args.functor)?;
    let mut r = Report::new("closure");
    r.put("functor", h.name());
    let c = closure_at_empty(h.as_ref())?;
    r.put("closure_at_empty", labels(&c.value_at_empty));
    r.put("value_at_empty", labels(c.reflection_at_empty.dom()));
    r.put("classification", c.classification);
    r.put(
        "substantially_constant",
        substantially_constant(h.as_ref(), &default_probes())?,
    );
    Ok(r)
}

pub fn classify_cmd(args: &MonadArgs, _cfg: Settings) -> Result<Report> {
    let m = parse_monad(&args.monad)?;
    let mut r = Report::new("classify");
    r.put("monad", m.name());
    r.put(
        "consistency",
        classify_consistency(m.as_ref(), &default_probes()).to_string(),
    );
    match classify(m.as_ref()) {
        Ok(c) => {
            r.put("closure", c);
            r.check("closure-invariant", true, "closed or zero part of its closure");
        }
        Err(e @ Error::ClosureInvariant(_)) => r.check("closure-invariant", false, e.to_string()),
        Err(e) => return Err(e),
    }
    let exceptional = substantially_exceptional(m.clone(), &default_probes())?;
    r.put("substantially_exceptional", exceptional.is_some());
    if let Some(e) = exceptional {
        r.put("constants", labels(&e));
    }
    let bare = args.monad.split(':').next().unwrap_or_default();
    if let Some(p) = builtin_profile(bare) {
        r.put("profile", p.to_string());
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct AdviseArgs {
    /// Monad or profile name.
    #[arg(long)]
    pub left: Option<String>,
    #[arg(long)]
    pub right: Option<String>,
    /// Further family members.
    #[arg(long = "also")]
    pub also: Vec<String>,
    /// Functor whose free monad is a summand; give it twice for the
    /// coproduct of two free monads.
    #[arg(long)]
    pub free: Vec<String>,
    /// Declaration `profile <name> = <kind>`.
    #[arg(long = "profile")]
    pub profiles: Vec<String>,
}

pub fn advise(args: &AdviseArgs, _cfg: Settings) -> Result<Report> {
    let mut declared = BTreeMap::new();
    for line in &args.profiles {
        let (name, p) = parse_declaration(line)?;
        declared.insert(name, p);
    }
    let mut members: Vec<String> = args.left.iter().chain(&args.right).chain(&args.also).cloned().collect();
    let mut r = Report::new("advise");
    let decision = match (args.free.as_slice(), members.len()) {
        ([h, k], 0) => {
            r.put("free", [h, k]);
            free_free(&resolve_profile(h, &declared)?, &resolve_profile(k, &declared)?)
        }
        ([h], 1) => {
            let s = members.remove(0);
            r.put("free", [h]);
            r.put("members", [&s]);
            free_monad_rules(&resolve_profile(h, &declared)?, &resolve_profile(&s, &declared)?)
        }
        ([], n) if n >= 2 => {
            let profiles = members
                .iter()
                .map(|m| resolve_profile(m, &declared))
                .collect::<Result<Vec<_>>>()?;
            r.put("members", &members);
            r.put("profiles", profiles.iter().map(|p| p.to_string()).collect::<Vec<_>>());
            family_exists(&profiles)?
        }
        _ => {
            return Err(Error::BadSpecifier(
                "give two or more members, one member and one --free, or two --free".into(),
            ))
        }
    };
    put_decision(&mut r, &decision);
    if decision.verdict == Verdict::Unknown {
        r.undecided();
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct TermsArgs {
    #[command(flatten)]
    pub sum: SumArgs,
    /// Maximum layer height.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Print each term as an indented tree.
    #[arg(long)]
    pub pretty: bool,
    /// Compare with the materialized coproduct.
    #[arg(long)]
    pub verify: bool,
}

pub fn terms(args: &TermsArgs, cfg: Settings) -> Result<Report> {
    let summands = args.sum.summands()?;
    let a = args.sum.base.set()?;
    let layered = Layered::new(summands.clone())?;
    let all = layered.enumerate(&a, args.depth)?;
    let mut r = Report::new("terms");
    r.put("count", all.len());
    if all.len() <= LIST_LIMIT {
        let shown: Vec<String> = if args.pretty {
            all.iter().map(|t| layered.pretty(t)).collect()
        } else {
            all.iter().map(|t| t.to_string()).collect()
        };
        r.put("terms", shown.join("\n"));
    }
    if args.verify {
        let cop = CoproductMonad::new(
            summands,
            Mode::Materialized {
                budget: args.sum.budget,
            },
        )?;
        let rep = mode_agreement(&cop, &a, cfg.samples, cfg.seed)?;
        for st in &rep.stages {
            r.check(
                &format!("stage/{}", st.stage),
                st.matches,
                format!("{} materialized, {} terms", st.materialized, st.terms),
            );
        }
        r.check("bijective", rep.bijective, "terms biject with the carrier");
        r.check("round-trip", rep.round_trip, "element to term and back");
        r.check("unit", rep.unit_commutes, "translation commutes with units");
        r.check(
            "embeddings",
            rep.embeddings_commute,
            "translation commutes with embeddings",
        );
        r.check_with(
            "mult",
            rep.mult_witness.is_none(),
            format!("{} sampled elements", rep.mult_checked),
            rep.mult_witness,
        );
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct FreeArgs {
    /// Signature `op/arity,...`, e.g. `f/2,c/0`.
    #[arg(long)]
    pub signature: String,
    #[command(flatten)]
    pub base: BaseArgs,
    /// Height up to which the fixpoint isomorphism is checked.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Count terms with up to this many operations.
    #[arg(long)]
    pub sizes: Option<usize>,
    /// Enumerate the coproduct with this monad.
    #[arg(long)]
    pub with: Option<String>,
    /// Compare the coproduct with the free monad on this signature
    /// against the free monad on the sum of signatures.
    #[arg(long)]
    pub sum: Option<String>,
    /// Height for `--sum`.
    #[arg(long, default_value_t = 2)]
    pub sum_depth: usize,
}

pub fn free(args: &FreeArgs, _cfg: Settings) -> Result<Report> {
    let sig = Signature::parse(&args.signature)?;
    let a = args.base.set()?;
    let mut r = Report::new("free");
    r.put("signature", sig.to_string());
    let barr = verify_barr(&sig, &a, args.depth)?;
    for row in &barr.rows {
        r.check(
            &format!("fixpoint/{}", row.depth),
            row.bijective && row.terms as u128 == row.predicted,
            format!(
                "{} terms = {} operations + {} variables, predicted {}",
                row.terms, row.operation_side, row.variables, row.predicted
            ),
        );
    }
    if let Some(n) = args.sizes {
        let counts: Vec<usize> = (0..=n).map(|k| terms_of_size(&sig, &a, k).len()).collect();
        r.put("counts_by_size", counts);
    }
    if let Some(spec) = &args.with {
        let t = parse_monad(spec)?;
        let terms = coproduct_with_free(t.clone(), &sig, &a, args.depth)?;
        r.put("with", t.name());
        r.put("with_count", terms.len());
    }
    if let Some(other) = &args.sum {
        let right = Signature::parse(other)?;
        for row in free_sum_bijection(&sig, &right, &a, args.sum_depth)? {
            r.check(
                &format!("sum/{}", row.depth),
                row.bijective && row.sum_terms == row.layered_terms,
                format!("{} flat terms, {} layered terms", row.sum_terms, row.layered_terms),
            );
        }
    }
    Ok(r)
}
