//! Named, repeatable checks of stabilizer identities and class structure.
//!
//! "Fixed" verdicts always come from exact seed equality. "Not fixed"
//! verdicts come from exact arithmetic while cluster variables stay within
//! a work limit, and otherwise from a [`Specialization`]: a ring map to
//! `F_p`, under which different images prove different seeds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explore::{count_specialized, explore_quivers, explore_seeds, ExploreError, ExploreOptions};
use crate::group::{Generator, GroupElement};
use crate::io;
use crate::laurent::LaurentError;
use crate::perm::Perm;
use crate::quiver::{Quiver, QuiverError};
use crate::quotient::{self, Relation};
use crate::seed::{LabelledSeed, Limits, SeedError, SpecializedSeed};
use crate::specialize::Specialization;

pub const DEFAULT_POWER_BOUND: usize = 50;
pub const DEFAULT_MARKOV_DEPTH: usize = 6;
pub const MAX_MARKOV_DEPTH: usize = 12;
pub const DEFAULT_CASES: usize = 1000;

/// Work limit for exact arithmetic before switching to specialization.
const EXACT_WORK: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("depth {0} exceeds the limit of {MAX_MARKOV_DEPTH}")]
    DepthLimit(usize),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Quotient(#[from] quotient::QuotientError),
    #[error("specialized images agree but exact arithmetic is out of reach")]
    Undecided,
}

pub type Result<T> = std::result::Result<T, VerifyError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn new(name: impl Into<String>, expected: impl fmt::Display, observed: impl fmt::Display, pass: bool) -> Self {
        CheckResult {
            name: name.into(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn failed(name: impl Into<String>, expected: impl fmt::Display, err: impl fmt::Display) -> Self {
        CheckResult::new(name, expected, format!("error: {err}"), false)
    }
}

pub fn all_pass(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}

/// One line per check, then a count.
pub fn summary(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        let mark = if r.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{mark}  {}  (expected {}, observed {})\n", r.name, r.expected, r.observed));
    }
    let passed = results.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    out
}

/// Exact: `s · g == s`.
pub fn check_fixed(s: &LabelledSeed, g: &GroupElement) -> std::result::Result<bool, SeedError> {
    Ok(&s.apply(g)? == s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Fixed,
    NotFixed(Certificate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    Exact,
    Specialized,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Fixed => "fixed",
            Verdict::NotFixed(_) => "not fixed",
        })
    }
}

fn is_term_limit(e: &SeedError) -> bool {
    matches!(e, SeedError::Laurent(LaurentError::TermLimit { .. }))
}

/// Decides whether `g` fixes `s`, exactly when feasible.
pub fn decide_fixed(s: &LabelledSeed, g: &GroupElement) -> Result<Verdict> {
    match s.apply_limited(g, Limits { max_work: EXACT_WORK }) {
        Ok(t) if &t == s => Ok(Verdict::Fixed),
        Ok(_) => Ok(Verdict::NotFixed(Certificate::Exact)),
        Err(e) if is_term_limit(&e) => {
            let spec = Specialization::standard(s.ambient(), 1);
            let start = SpecializedSeed::new(s, &spec);
            match start.apply(g).map_err(SeedError::from)? {
                Some(t) if t != start => Ok(Verdict::NotFixed(Certificate::Specialized)),
                _ => Err(VerifyError::Undecided),
            }
        }
        Err(e) => Err(e.into()),
    }
}

/// The least `k ≤ bound` with `s · g^k == s`, following `g` exactly while
/// the work limit allows and by specialization afterwards.
pub fn first_fixing_power(s: &LabelledSeed, g: &GroupElement, bound: usize) -> Result<(Option<usize>, Certificate)> {
    let spec = Specialization::standard(s.ambient(), 2);
    let start = SpecializedSeed::new(s, &spec);
    let mut exact = Some(s.clone());
    let mut shadow: Option<SpecializedSeed> = None;
    let mut cert = Certificate::Exact;
    for k in 1..=bound {
        if let Some(cur) = &exact {
            match cur.apply_limited(g, Limits { max_work: EXACT_WORK }) {
                Ok(next) => {
                    if &next == s {
                        return Ok((Some(k), cert));
                    }
                    exact = Some(next);
                    continue;
                }
                Err(e) if is_term_limit(&e) => {
                    shadow = Some(SpecializedSeed::new(cur, &spec));
                    exact = None;
                    cert = Certificate::Specialized;
                }
                Err(e) => return Err(e.into()),
            }
        }
        let cur = shadow.take().expect("shadow set when exact stops");
        let next = cur.apply(g).map_err(SeedError::from)?.ok_or(VerifyError::Undecided)?;
        if next == start {
            return Err(VerifyError::Undecided);
        }
        shadow = Some(next);
    }
    Ok((None, cert))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Fixed,
    NotFixed,
    /// No power `g^k` with `1 ≤ k ≤ N` fixes the seed.
    NotFixedUpTo(usize),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Fixed => f.write_str("fixed"),
            Expectation::NotFixed => f.write_str("not fixed"),
            Expectation::NotFixedUpTo(n) => write!(f, "not fixed by any power up to {n}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LemmaCheck {
    pub name: String,
    /// How the seed was built, in words.
    pub recipe: String,
    pub seed: LabelledSeed,
    pub word: GroupElement,
    pub expectation: Expectation,
}

impl LemmaCheck {
    pub fn run(&self) -> CheckResult {
        let name = format!("{} [{}; word {}]", self.name, self.recipe, self.word);
        match &self.expectation {
            Expectation::Fixed | Expectation::NotFixed => match decide_fixed(&self.seed, &self.word) {
                Ok(v) => {
                    let pass = (v == Verdict::Fixed) == (self.expectation == Expectation::Fixed);
                    let r = CheckResult::new(name, &self.expectation, v, pass);
                    match v {
                        Verdict::NotFixed(Certificate::Specialized) => r.with_note("inequality certified by specialization"),
                        _ => r,
                    }
                }
                Err(e) => CheckResult::failed(name, &self.expectation, e),
            },
            Expectation::NotFixedUpTo(n) => match first_fixing_power(&self.seed, &self.word, *n) {
                Ok((None, cert)) => {
                    let r = CheckResult::new(name, &self.expectation, format!("no power up to {n} fixes"), true)
                        .with_note(
                            "a universal statement tested to a finite bound: a fixing power N would make \
                             the class finite with at most 2N seeds, which it is not",
                        );
                    if cert == Certificate::Specialized {
                        let note = r.note.clone().unwrap_or_default();
                        r.with_note(format!("{note}; large powers certified by specialization"))
                    } else {
                        r
                    }
                }
                Ok((Some(k), _)) => CheckResult::new(name, &self.expectation, format!("fixed by power {k}"), false),
                Err(e) => CheckResult::failed(name, &self.expectation, e),
            },
        }
    }
}

fn quiver(n: usize, arrows: &[(usize, usize)]) -> Quiver {
    let a: Vec<_> = arrows.iter().map(|&(t, h)| (t - 1, h - 1, 1)).collect();
    Quiver::from_arrows(n, &a).expect("valid quiver")
}

fn arrows_text(arrows: &[(usize, usize)]) -> String {
    if arrows.is_empty() {
        return "no arrows".into();
    }
    arrows.iter().map(|(t, h)| format!("{t}->{h}")).collect::<Vec<_>>().join(", ")
}

fn principal(n: usize, arrows: &[(usize, usize)]) -> (LabelledSeed, String) {
    let q = quiver(n, arrows).principal_coefficients();
    (LabelledSeed::initial(q), format!("{} with principal coefficients", arrows_text(arrows)))
}

fn trivial(n: usize, arrows: &[(usize, usize)]) -> (LabelledSeed, String) {
    (LabelledSeed::initial(quiver(n, arrows)), format!("{} with trivial coefficients", arrows_text(arrows)))
}

fn power(rank: usize, letters: &[usize], k: usize) -> GroupElement {
    let zero: Vec<usize> = letters.iter().map(|i| i - 1).collect();
    GroupElement::from_word(rank, &zero).pow(k)
}

fn check(name: &str, (seed, recipe): (LabelledSeed, String), letters: &[usize], k: usize, e: Expectation) -> LemmaCheck {
    let word = power(seed.rank(), letters, k);
    LemmaCheck { name: name.to_string(), recipe, seed, word, expectation: e }
}

/// The stabilizer checklist for arrow multiplicity between two vertices and
/// relative orientation of two adjacent arrows. Vertices `i, j, k` are 1, 2, 3.
pub fn lemma_checks(power_bound: usize) -> Vec<LemmaCheck> {
    use Expectation::*;
    let mut out = vec![
        check("multiplicity 0: square word fixes", principal(2, &[]), &[1, 2], 2, Fixed),
        check("multiplicity 1: fifth power fixes", principal(2, &[(1, 2)]), &[1, 2], 5, Fixed),
        check("multiplicity 1, reversed: fifth power fixes", principal(2, &[(2, 1)]), &[1, 2], 5, Fixed),
        check("multiplicity 1: square word moves", trivial(2, &[(1, 2)]), &[1, 2], 2, NotFixed),
    ];
    out.push(LemmaCheck {
        name: "multiplicity 2: no power fixes".into(),
        recipe: "1=>2 (double arrow) with trivial coefficients".into(),
        seed: LabelledSeed::initial(Quiver::from_arrows(2, &[(0, 1, 2)]).unwrap()),
        word: power(2, &[1, 2], 1),
        expectation: NotFixedUpTo(power_bound),
    });

    let path_word = [1, 2, 3];
    for arrows in [[(1, 2), (2, 3)], [(3, 2), (2, 1)]] {
        out.push(check("open path through j: sixth power fixes", principal(3, &arrows), &path_word, 6, Fixed));
    }
    for arrows in [[(1, 2), (3, 2)], [(2, 1), (2, 3)]] {
        out.push(check("open, no path through j: sixth power moves", trivial(3, &arrows), &path_word, 6, NotFixed));
    }
    let tri_word = [1, 3, 1, 3, 1, 2];
    for arrows in [
        [(1, 2), (2, 3), (3, 1)],
        [(1, 2), (2, 3), (1, 3)],
        [(3, 2), (2, 1), (1, 3)],
        [(3, 2), (2, 1), (3, 1)],
    ] {
        out.push(check("triangle, path through j: word moves", trivial(3, &arrows), &tri_word, 2, NotFixed));
    }
    for arrows in [
        [(1, 2), (3, 2), (3, 1)],
        [(1, 2), (3, 2), (1, 3)],
        [(2, 3), (2, 1), (1, 3)],
        [(2, 3), (2, 1), (3, 1)],
    ] {
        out.push(check("triangle, no path through j: word fixes", principal(3, &arrows), &tri_word, 2, Fixed));
    }
    out
}

/// Replaces the word of a `Fixed` check by the word with its last letter dropped.
pub fn corrupt(check: &LemmaCheck) -> LemmaCheck {
    let mut letters = check.word.word().to_vec();
    letters.pop();
    LemmaCheck {
        name: format!("{} (corrupted)", check.name),
        word: GroupElement::from_word(check.word.rank(), &letters),
        ..check.clone()
    }
}

pub fn run_checks(checks: &[LemmaCheck]) -> Vec<CheckResult> {
    checks.par_iter().map(LemmaCheck::run).collect()
}

/// The full checklist plus a negative control: a corrupted word must be
/// reported as a failure.
pub fn run_lemma_suite(power_bound: usize) -> Vec<CheckResult> {
    let checks = lemma_checks(power_bound);
    let mut out = run_checks(&checks);
    let target = checks.iter().find(|c| c.expectation == Expectation::Fixed).expect("suite has fixed checks");
    let corrupted = corrupt(target).run();
    out.push(CheckResult::new(
        "negative control: corrupted word is rejected",
        "named failure",
        if corrupted.pass { "passed".to_string() } else { format!("failure in {:?}", corrupted.name) },
        !corrupted.pass,
    ));
    out
}

/// `(|b12|, |b13|, |b23|)`.
fn triple(s: &SpecializedSeed) -> [BigInt; 3] {
    [s.entry(0, 1).abs(), s.entry(0, 2).abs(), s.entry(1, 2).abs()]
}

fn markov_equation(t: &[BigInt; 3]) -> bool {
    let [a, b, c] = t;
    a * a + b * b + c * c == a * b * c
}

/// Identity of a specialized seed: matrix plus images.
type ShadowKey = (Vec<BigInt>, Vec<[u64; 2]>);

fn shadow_key(s: &SpecializedSeed) -> ShadowKey {
    let n = s.n();
    let b = (0..n * n).map(|x| s.entry(x / n, x % n).clone()).collect();
    (b, s.values().to_vec())
}

/// Checks along all reduced mutation words up to `depth` from the Markov seed.
pub fn check_markov(depth: usize) -> Result<Vec<CheckResult>> {
    if depth > MAX_MARKOV_DEPTH {
        return Err(VerifyError::DepthLimit(depth));
    }
    let seed = LabelledSeed::initial(io::preset("markov3").expect("preset"));
    let spec = Specialization::standard(3, 3);
    let root = SpecializedSeed::new(&seed, &spec);

    let mut equation = true;
    let mut increasing = true;
    let mut seen: HashSet<ShadowKey> = HashSet::new();
    let mut repeats = 0usize;
    let mut nodes: Vec<SpecializedSeed> = Vec::new();
    let mut layer: Vec<(Option<usize>, SpecializedSeed)> = vec![(None, root.clone())];
    let mut first_step = None;
    equation &= markov_equation(&triple(&root));
    for d in 0..=depth {
        let mut next = Vec::new();
        for (last, s) in layer {
            if !seen.insert(shadow_key(&s)) {
                repeats += 1;
            }
            if d < depth {
                for i in (0..3).filter(|&i| Some(i) != last) {
                    let t = s.mutate(i).map_err(SeedError::from)?.ok_or(VerifyError::Undecided)?;
                    let (tp, tc) = (triple(&s), triple(&t));
                    equation &= markov_equation(&tc);
                    increasing &= tc.iter().max() > tp.iter().max();
                    if d == 0 && i == 0 {
                        first_step = Some(tc.clone());
                    }
                    next.push((Some(i), t));
                }
            }
            nodes.push(s);
        }
        layer = next;
    }

    let mut crossings = 0usize;
    let perms: Vec<Perm> = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
        .iter()
        .map(|p| Perm::from_images(p.to_vec()).unwrap())
        .collect();
    for s in &nodes {
        for p in &perms {
            if seen.contains(&shadow_key(&s.permute(p))) {
                crossings += 1;
            }
        }
    }

    let words = nodes.len();
    let mut out = vec![
        CheckResult::new(
            format!("markov: multiplicity triples solve a^2+b^2+c^2=abc (depth {depth})"),
            "all",
            if equation { "all" } else { "violation" },
            equation,
        ),
        CheckResult::new(
            format!("markov: each mutation raises the maximal multiplicity (depth {depth})"),
            "strictly increasing",
            if increasing { "strictly increasing" } else { "not increasing" },
            increasing,
        ),
        CheckResult::new(
            format!("markov: no labelled seed repeats among {words} reduced words"),
            "0 repeats",
            format!("{repeats} repeats"),
            repeats == 0,
        )
        .with_note("seeds distinguished by exact arrow counts and specialized cluster images"),
        CheckResult::new(
            format!("markov: permuted seeds avoid the mutation-only component (depth {depth})"),
            "0 coincidences",
            format!("{crossings} coincidences"),
            crossings == 0,
        ),
    ];
    if let Some(t) = first_step {
        let got = format!("({}, {}, {})", t[0], t[1], t[2]);
        out.push(CheckResult::new("markov: first mutation from (3, 3, 3)", "(3, 3, 6)", &got, got == "(3, 3, 6)"));
    }
    Ok(out)
}

/// Seed-level presets used for the pairwise stabilizer check.
pub const MAIN_THEOREM_PRESETS: &[&str] = &["A2", "A3", "A1xA2", "A2tilde-noncyclic", "kronecker2"];

/// For every preset whose seed class closes within `budget`: same stabilizer
/// exactly when the quivers are similar, for all ordered pairs. Classes that
/// do not close are reported as not applicable.
pub fn check_main_theorem(budget: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for name in MAIN_THEOREM_PRESETS {
        let seed = LabelledSeed::initial(io::preset(name).expect("preset"));
        let spec = Specialization::standard(seed.ambient(), 1);
        let bound = count_specialized(&seed, &spec, budget.saturating_add(1))?;
        if !bound.exhausted {
            out.push(
                CheckResult::new(
                    format!("{name}: seed class closes"),
                    "closed or infinite",
                    format!("at least {} seeds", bound.at_least),
                    true,
                )
                .with_note("more seeds than the budget, certified by specialization; pairwise check not applicable"),
            );
            continue;
        }
        let ex = explore_seeds(&seed, ExploreOptions::with_budget(budget))?;
        if !ex.is_closed() {
            out.push(
                CheckResult::new(
                    format!("{name}: seed class closes"),
                    "closed or infinite",
                    format!("not closed within {budget} seeds"),
                    true,
                )
                .with_note("infinite seed class; pairwise check not applicable"),
            );
            continue;
        }
        let bad = quotient::stabilizer_similarity_mismatches(&ex)?;
        let pairs = ex.len() * ex.len();
        out.push(CheckResult::new(
            format!("{name}: same stabilizer iff similar quivers ({pairs} pairs)"),
            "0 mismatches",
            format!("{} mismatches", bad.len()),
            bad.is_empty(),
        ));
    }
    Ok(out)
}

fn path_through(q: &Quiver, i: usize, j: usize, k: usize) -> bool {
    (q.arrows(i, j) > 0 && q.arrows(j, k) > 0) || (q.arrows(k, j) > 0 && q.arrows(j, i) > 0)
}

/// Recovers arrow multiplicities and relative orientations from stabilizer
/// membership on every quiver of the quiver-level class of `preset`.
pub fn check_claims(preset: &str, power_bound: usize) -> Result<Vec<CheckResult>> {
    let q0 = io::preset(preset).expect("preset");
    let ex = explore_quivers(&q0, ExploreOptions::with_budget(10_000))?;
    let n = q0.n();
    let mut weights = (0usize, 0usize);
    let mut orient = (0usize, 0usize);
    let mut skipped = 0usize;
    let mut failures = Vec::new();
    for q in &ex.members {
        let s = LabelledSeed::initial(q.clone());
        for i in 0..n {
            for j in i + 1..n {
                let w = GroupElement::from_word(n, &[i, j]);
                let (k, _) = first_fixing_power(&s, &w, power_bound)?;
                let inferred = match k {
                    Some(2) => Some(0),
                    Some(5) => Some(1),
                    None => Some(2),
                    Some(_) => None,
                };
                let actual = q.arrows(i, j).abs().min(2);
                weights.1 += 1;
                if inferred == Some(actual) {
                    weights.0 += 1;
                } else {
                    failures.push(format!("{q}: pair ({}, {})", i + 1, j + 1));
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                for k in i + 1..n {
                    if i == j || k == j || q.entry(i, j) == 0 || q.entry(j, k) == 0 {
                        continue;
                    }
                    let path = path_through(q, i, j, k);
                    let mults = [q.entry(i, j), q.entry(j, k), q.entry(i, k)];
                    if mults.iter().any(|m| m.abs() >= 2) {
                        // the membership patterns describe single arrows only
                        skipped += 1;
                        continue;
                    }
                    let observed = if q.entry(i, k) == 0 {
                        let g = GroupElement::from_word(n, &[i, j, k]).pow(6);
                        decide_fixed(&s, &g)? == Verdict::Fixed
                    } else {
                        let g = GroupElement::from_word(n, &[i, k, i, k, i, j]).pow(2);
                        decide_fixed(&s, &g)? != Verdict::Fixed
                    };
                    orient.1 += 1;
                    if observed == path {
                        orient.0 += 1;
                    } else {
                        failures.push(format!("{q}: arrows {}-{}-{}", i + 1, j + 1, k + 1));
                    }
                }
            }
        }
    }
    let mut a = CheckResult::new(
        format!("{preset}: stabilizer determines arrow multiplicities"),
        format!("{} of {}", weights.1, weights.1),
        format!("{} of {}", weights.0, weights.1),
        weights.0 == weights.1,
    );
    let mut b = CheckResult::new(
        format!("{preset}: stabilizer determines relative orientation"),
        format!("{} of {}", orient.1, orient.1),
        format!("{} of {}", orient.0, orient.1),
        orient.0 == orient.1,
    );
    if skipped > 0 {
        b = b.with_note(format!("{skipped} arrow pairs inside triangles with a double arrow not covered"));
    }
    if !failures.is_empty() {
        a = a.with_note(failures.join("; "));
        b = b.with_note(failures.join("; "));
    }
    Ok(vec![a, b])
}

/// Presets with at least three vertices and a small class.
pub const CLAIM_PRESETS: &[&str] = &["A3", "A1xA2", "A2tilde-noncyclic"];

fn random_quiver(rng: &mut ChaCha8Rng, max_n: usize, max_mult: i64) -> Quiver {
    let n = rng.gen_range(2..=max_n);
    let mut arrows = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = rng.gen_range(-max_mult..=max_mult);
            match m.signum() {
                1 => arrows.push((i, j, m)),
                -1 => arrows.push((j, i, -m)),
                _ => {}
            }
        }
    }
    Quiver::from_arrows(n, &arrows).expect("valid")
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Perm {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Perm::from_images(v).expect("shuffle is a bijection")
}

/// A seed reached from `(Q, x)` by a short random walk, or `None` when the
/// walk outgrew the work limit.
fn random_seed(rng: &mut ChaCha8Rng) -> Option<LabelledSeed> {
    let q = random_quiver(rng, 4, 2);
    let mut s = LabelledSeed::initial(q);
    let steps = rng.gen_range(0..5);
    for _ in 0..steps {
        let i = rng.gen_range(0..s.rank());
        s = s.mutate_limited(i, Limits { max_work: 200_000 }).ok()?;
    }
    Some(s)
}

fn run_cases<F>(name: &str, cases: usize, seed: u64, f: F) -> CheckResult
where
    F: Fn(&mut ChaCha8Rng) -> std::result::Result<bool, String> + Sync,
{
    let outcomes: Vec<std::result::Result<bool, String>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ c as u64);
            // retry inconclusive draws with the same stream
            for _ in 0..20 {
                match f(&mut rng) {
                    Ok(true) => return Ok(true),
                    Ok(false) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok(false)
        })
        .collect();
    let failures: Vec<&String> = outcomes.iter().filter_map(|o| o.as_ref().err()).collect();
    let conclusive = outcomes.iter().filter(|o| matches!(o, Ok(true))).count();
    let mut r = CheckResult::new(
        format!("property: {name} ({cases} cases)"),
        format!("{cases} cases, 0 failures"),
        format!("{conclusive} cases, {} failures", failures.len()),
        failures.is_empty() && conclusive == cases,
    );
    if let Some(first) = failures.first() {
        r = r.with_note((*first).clone());
    }
    r
}

/// Randomized invariants, `cases` draws each, reproducible from `seed`.
pub fn run_property_suite(cases: usize, seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(run_cases("mutation is an involution", cases, seed, |rng| {
        let Some(s) = random_seed(rng) else { return Ok(false) };
        let i = rng.gen_range(0..s.rank());
        let lim = Limits { max_work: 200_000 };
        match s.mutate_limited(i, lim).and_then(|t| t.mutate_limited(i, lim)) {
            Ok(back) if back == s => Ok(true),
            Ok(_) => Err(format!("mu_{} twice moved {}", i + 1, s.render())),
            Err(e) if is_term_limit(&e) => Ok(false),
            Err(e) => Err(e.to_string()),
        }
    }));

    out.push(run_cases("permutation and mutation commute", cases, seed ^ 1, |rng| {
        let Some(s) = random_seed(rng) else { return Ok(false) };
        let n = s.rank();
        let sigma = random_perm(rng, n);
        let j = rng.gen_range(0..n);
        let lim = Limits { max_work: 200_000 };
        // s · σ · μ_j == s · μ_σ(j) · σ
        let left = s.permute(&sigma).and_then(|t| t.mutate_limited(j, lim));
        let right = s.mutate_limited(sigma.apply(j), lim).and_then(|t| t.permute(&sigma));
        match (left, right) {
            (Ok(a), Ok(b)) if a == b => Ok(true),
            (Ok(_), Ok(_)) => Err(format!("sigma {sigma}, mu_{} disagree on {}", j + 1, s.render())),
            (Err(e), _) | (_, Err(e)) if is_term_limit(&e) => Ok(false),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        }
    }));

    out.push(run_cases("exchange relations divide exactly", cases, seed ^ 2, |rng| {
        let q = random_quiver(rng, 4, 2);
        let mut s = LabelledSeed::initial(q);
        let steps = rng.gen_range(1..7);
        for _ in 0..steps {
            let i = rng.gen_range(0..s.rank());
            match s.mutate_limited(i, Limits { max_work: 200_000 }) {
                Ok(t) => s = t,
                Err(SeedError::Laurent(LaurentError::InexactDivision)) => {
                    return Err(format!("inexact division at mu_{} of {}", i + 1, s.render()))
                }
                Err(e) if is_term_limit(&e) => return Ok(false),
                Err(e) => return Err(e.to_string()),
            }
        }
        Ok(true)
    }));

    out.push(run_cases("group normal form is unique", cases, seed ^ 3, |rng| {
        let n = rng.gen_range(2..=4);
        let raw: Vec<Generator> = (0..rng.gen_range(0..10)).map(|_| random_generator(rng, n)).collect();
        // insert trivial relations at random places
        let mut padded = raw.clone();
        for _ in 0..rng.gen_range(1..4) {
            let at = rng.gen_range(0..=padded.len());
            let rel = trivial_relation(rng, n);
            padded.splice(at..at, rel);
        }
        let a = GroupElement::normal_form(n, &raw).map_err(|e| e.to_string())?;
        let b = GroupElement::normal_form(n, &padded).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{a} vs {b}"));
        }
        if a.word().windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("{a} is not reduced"));
        }
        if GroupElement::parse(&a.to_string(), n).map_err(|e| e.to_string())? != a {
            return Err(format!("{a} does not round-trip"));
        }
        // the action agrees on a finite-type seed
        let q = Quiver::from_arrows(n, &(0..n - 1).map(|i| (i, i + 1, 1)).collect::<Vec<_>>()).unwrap();
        let s = LabelledSeed::initial(q);
        let mut t = s.clone();
        for g in &padded {
            t = t.apply_generator(g, Limits::NONE).map_err(|e| e.to_string())?;
        }
        if t != s.apply(&a).map_err(|e| e.to_string())? {
            return Err(format!("action of {a} differs from its raw word"));
        }
        Ok(true)
    }));

    let cache: std::sync::Mutex<HashMap<Quiver, Option<Vec<Shape>>>> = Default::default();
    out.push(run_cases("quotient graphs are regular", cases, seed ^ 4, |rng| {
        let q = random_quiver(rng, 3, 1);
        let rel = [Relation::SameQuiver, Relation::Similar, Relation::SameStabilizer][rng.gen_range(0..3)];
        let key = (q.clone(), rel);
        let cached = cache.lock().unwrap().get(&key.0).cloned();
        let shapes = match cached {
            Some(s) => s,
            None => {
                let s = quotient_shapes(&q).map_err(|e| e.to_string())?;
                cache.lock().unwrap().insert(key.0, s.clone());
                s
            }
        };
        let Some(shapes) = shapes else { return Ok(false) };
        let idx = match rel {
            Relation::SameQuiver => 0,
            Relation::Similar => 1,
            Relation::SameStabilizer => 2,
        };
        let (vertices, bad) = &shapes[idx];
        if bad.is_empty() {
            Ok(true)
        } else {
            Err(format!("{rel} quotient of {q} ({vertices} vertices) fails regularity at {bad:?}"))
        }
    }));
    out
}

/// `(vertex count, irregular vertices)` of one quotient graph.
type Shape = (usize, Vec<usize>);

/// Regularity of the three quotients of the seed class of `(q, x)`, or
/// `None` if the class does not close.
fn quotient_shapes(q: &Quiver) -> Result<Option<Vec<Shape>>> {
    let ex = explore_seeds(&LabelledSeed::initial(q.clone()), ExploreOptions::with_budget(300))?;
    if !ex.is_closed() {
        return Ok(None);
    }
    let labels = ex.mutation_labels();
    let mut out = Vec::new();
    for rel in [Relation::SameQuiver, Relation::Similar, Relation::SameStabilizer] {
        let (g, _) = quotient::quotient_graph(&ex, rel)?;
        let bad: Vec<usize> = match g.check_regular(&labels) {
            Ok(()) => Vec::new(),
            Err(crate::graph::GraphError::NotRegular { vertex, .. }) => vec![vertex],
            Err(_) => vec![usize::MAX],
        };
        out.push((g.num_vertices(), bad));
    }
    Ok(Some(out))
}

fn random_generator(rng: &mut ChaCha8Rng, n: usize) -> Generator {
    if rng.gen_bool(0.7) {
        Generator::Mutation(rng.gen_range(0..n))
    } else {
        Generator::Permutation(random_perm(rng, n))
    }
}

/// A generator sequence equal to the identity in `M_n`.
fn trivial_relation(rng: &mut ChaCha8Rng, n: usize) -> Vec<Generator> {
    let sigma = random_perm(rng, n);
    let i = rng.gen_range(0..n);
    match rng.gen_range(0..3) {
        0 => vec![Generator::Mutation(i), Generator::Mutation(i)],
        1 => vec![Generator::Permutation(sigma.clone()), Generator::Permutation(sigma.inverse())],
        // σ μ_i σ^{-1} μ_{σ(i)}
        _ => vec![
            Generator::Permutation(sigma.clone()),
            Generator::Mutation(i),
            Generator::Permutation(sigma.inverse()),
            Generator::Mutation(sigma.apply(i)),
        ],
    }
}

/// Group statistics for a closed seed class, keyed by relation name.
pub fn class_groups(seed: &LabelledSeed, budget: usize) -> Result<Option<BTreeMap<String, quotient::GroupReport>>> {
    let ex = explore_seeds(seed, ExploreOptions::with_budget(budget))?;
    if !ex.is_closed() {
        return Ok(None);
    }
    let mut out = BTreeMap::new();
    for rel in [Relation::SameQuiver, Relation::Similar] {
        out.insert(rel.to_string(), quotient::compute_group(&ex, rel, 0)?.report());
    }
    Ok(Some(out))
}

impl From<QuiverError> for VerifyError {
    fn from(e: QuiverError) -> Self {
        VerifyError::Seed(SeedError::Quiver(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_fixed_examples() {
        let (s, _) = principal(2, &[]);
        assert!(check_fixed(&s, &power(4, &[1, 2], 2)).unwrap());
        let (t, _) = trivial(2, &[(1, 2)]);
        assert!(!check_fixed(&t, &power(2, &[1, 2], 2)).unwrap());
        assert!(check_fixed(&t, &GroupElement::identity(2)).unwrap());
    }

    #[test]
    fn suite_has_seventeen_items() {
        let checks = lemma_checks(5);
        assert_eq!(checks.len(), 17);
        for c in &checks {
            assert!(c.run().pass, "{}", c.name);
        }
    }

    #[test]
    fn corrupted_word_fails() {
        let checks = lemma_checks(5);
        let fixed = checks.iter().find(|c| c.expectation == Expectation::Fixed).unwrap();
        assert!(!corrupt(fixed).run().pass);
    }

    #[test]
    fn markov_small_depths() {
        assert!(all_pass(&check_markov(0).unwrap()));
        let r = check_markov(3).unwrap();
        assert!(all_pass(&r), "{}", summary(&r));
        assert_eq!(r.last().unwrap().observed, "(3, 3, 6)");
        assert_eq!(check_markov(13), Err(VerifyError::DepthLimit(13)));
    }

    #[test]
    fn specialized_markov_matches_exact() {
        let seed = LabelledSeed::initial(io::preset("markov3").unwrap());
        let spec = Specialization::standard(3, 3);
        let g = GroupElement::from_word(3, &[0, 1, 2, 0]);
        let exact = seed.apply(&g).unwrap();
        let shadow = SpecializedSeed::new(&seed, &spec).apply(&g).unwrap().unwrap();
        assert_eq!(shadow, SpecializedSeed::new(&exact, &spec));
    }

    #[test]
    fn small_property_run() {
        let r = run_property_suite(30, 7);
        assert!(all_pass(&r), "{}", summary(&r));
    }
}
